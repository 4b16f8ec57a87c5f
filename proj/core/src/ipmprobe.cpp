#include "conereg/ipmprobe.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace conereg {

namespace {

// Single barrier class of a spec, ignoring zero-width placeholder blocks.
ScalingKind scaling_kind_for(const ConeSpec& spec) {
  if (spec.pure(ConeClass::Orthant)) return ScalingKind::OrthantDiagonalSquared;
  if (spec.pure(ConeClass::Psd)) return ScalingKind::PsdKronLike;
  throw std::invalid_argument(
      "normal_matrix: cone must be a single barrier class (all orthant or all "
      "semidefinite); mixed classes have no shared scaling formula here");
}

}  // namespace

NormalMatrix normal_matrix(const ConicSystem& sys, const Point& x,
                           const TolerancePolicy& tol) {
  tol.validate();
  const ScalingKind kind = scaling_kind_for(sys.cone);
  if (!contains(sys.cone, x, tol))
    throw std::invalid_argument("normal_matrix: point is outside the cone");

  const int m = sys.m();
  Matrix M = Matrix::Zero(m, m);
  for (size_t bi = 0; bi < sys.cone.blocks.size(); ++bi) {
    const ConeBlock& blk = sys.cone.blocks[bi];
    if (blk.n == 0) continue;
    const int off = sys.cone.block_offset(static_cast<int>(bi));
    if (blk.kind == ConeClass::Orthant) {
      const Vector& xb = x.vec(static_cast<int>(bi));
      const Matrix Ab = sys.A.middleCols(off, blk.n);
      M += Ab * xb.array().square().matrix().asDiagonal() * Ab.transpose();
    } else {
      const Matrix& X = x.mat(static_cast<int>(bi));
      // Columns of the block slice of A are svec images; XA_jX stays in the
      // block, so the Gram entries are plain svec inner products again.
      std::vector<Vector> xax(m);
      for (int j = 0; j < m; ++j) {
        const Matrix Aj = smat(sys.A.row(j).segment(off, blk.ambient_dim()).transpose());
        xax[j] = svec(Matrix(X * Aj * X));
      }
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          M(i, j) += sys.A.row(i).segment(off, blk.ambient_dim()).dot(xax[j]);
    }
  }
  NormalMatrix out;
  out.M = 0.5 * (M + M.transpose());
  out.source.kind = kind;
  out.source.at = x;
  return out;
}

LimitSingularity verify_limit_singularity(const ConicSystem& sys, const Point& x_star,
                                          const ExposingCertificate& cert,
                                          const TolerancePolicy& tol) {
  tol.validate();
  const ExposingCertificate checked = verify_certificate(sys, cert.y, tol);
  const NormalMatrix nm = normal_matrix(sys, x_star, tol);

  LimitSingularity out;
  // Complementarity premise: the slack-point product (not just the pairing)
  // must vanish blockwise for M y = 0 to follow.
  const Vector w = sys.A.transpose() * checked.y;
  double prod = 0.0, scale = 0.0;
  for (size_t bi = 0; bi < sys.cone.blocks.size(); ++bi) {
    const ConeBlock& blk = sys.cone.blocks[bi];
    if (blk.n == 0) continue;
    const int off = sys.cone.block_offset(static_cast<int>(bi));
    if (blk.kind == ConeClass::Orthant) {
      const Vector& xb = x_star.vec(static_cast<int>(bi));
      const Vector wb = w.segment(off, blk.n);
      prod = std::max(prod, (xb.array() * wb.array()).abs().maxCoeff());
      scale = std::max(scale, xb.norm() * wb.norm());
    } else {
      const Matrix& X = x_star.mat(static_cast<int>(bi));
      const Matrix W = smat(w.segment(off, blk.ambient_dim()));
      prod = std::max(prod, (X * W).norm());
      scale = std::max(scale, X.norm() * W.norm());
    }
  }
  out.premise_residual = prod / (scale + tol.zero_tol);
  out.premise_ok = out.premise_residual <= 1e-6;

  out.residual = (nm.M * checked.y).norm() /
                 (nm.M.norm() * checked.y.norm() + tol.zero_tol);
  out.singular = out.residual <= 1e-8;
  return out;
}

std::vector<double> condition_trajectory(const ConicSystem& sys,
                                         const std::vector<Point>& path,
                                         const TolerancePolicy& tol) {
  std::vector<double> conds;
  conds.reserve(path.size());
  for (const Point& p : path) conds.push_back(condition_number_2(normal_matrix(sys, p, tol).M, tol));
  return conds;
}

double embedding_column_singularity(const ConicSystem& sys, const Point& X_star,
                                    const Point& S_star, const ExposingCertificate& cert,
                                    const TolerancePolicy& tol) {
  tol.validate();
  if (!sys.cone.pure(ConeClass::Psd))
    throw std::invalid_argument(
        "embedding_column_singularity: semidefinite systems only");
  const ExposingCertificate checked = verify_certificate(sys, cert.y, tol);
  const int m = sys.m();

  Matrix G = Matrix::Zero(m, m);
  for (size_t bi = 0; bi < sys.cone.blocks.size(); ++bi) {
    const ConeBlock& blk = sys.cone.blocks[bi];
    if (blk.n == 0) continue;
    const int off = sys.cone.block_offset(static_cast<int>(bi));
    const Matrix& X = X_star.mat(static_cast<int>(bi));
    const Matrix& S = S_star.mat(static_cast<int>(bi));
    const SymEig eig = sym_eigendecomposition(S);
    if (eig.eigenvalues(0) <= tol.psd_tol * std::max(1.0, eig.eigenvalues(blk.n - 1)))
      throw std::invalid_argument(
          "embedding_column_singularity: S* must be positive definite");
    const Matrix Sinv = eig.eigenvectors *
                        eig.eigenvalues.cwiseInverse().asDiagonal() *
                        eig.eigenvectors.transpose();
    for (int i = 0; i < m; ++i) {
      const Matrix Ai = smat(sys.A.row(i).segment(off, blk.ambient_dim()).transpose());
      const Matrix Mi = X * Ai * Sinv;
      const Vector img = svec(Matrix(0.5 * (Mi + Mi.transpose())));
      for (int k = 0; k < m; ++k)
        G(k, i) += sys.A.row(k).segment(off, blk.ambient_dim()).dot(img);
    }
  }
  return (G * checked.y).norm() / (G.norm() * checked.y.norm() + tol.zero_tol);
}

}  // namespace conereg
