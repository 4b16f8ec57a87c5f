#include "conereg/numkernel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace conereg {

void TolerancePolicy::validate() const {
  auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!ok(rank_rel_tol) || !ok(psd_tol) || !ok(zero_tol))
    throw std::invalid_argument("TolerancePolicy: tolerances must be finite and positive");
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite())
    throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

int numerical_rank(const Matrix& m, const TolerancePolicy& tol) {
  tol.validate();
  require_finite(m, "numerical_rank");
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0.0) return 0;
  const double cutoff = tol.rank_rel_tol * sv(0);
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++r;
  return r;
}

Matrix orthonormal_nullspace(const Matrix& m, const TolerancePolicy& tol) {
  tol.validate();
  require_finite(m, "orthonormal_nullspace");
  const int n = static_cast<int>(m.cols());
  if (n == 0) return Matrix(0, 0);
  if (m.rows() == 0) return Matrix::Identity(n, n);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const double cutoff = tol.rank_rel_tol * smax;
  int r = 0;
  if (smax > 0.0)
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > cutoff) ++r;
  return svd.matrixV().rightCols(n - r);
}

double spectral_norm(const Matrix& m) {
  require_finite(m, "spectral_norm");
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& sv = svd.singularValues();
  return sv.size() > 0 ? sv(0) : 0.0;
}

int numerical_rank_ref(const Matrix& m, double sigma_ref, double rel_tol) {
  require_finite(m, "numerical_rank_ref");
  if (!(std::isfinite(sigma_ref) && sigma_ref >= 0.0) || !(std::isfinite(rel_tol) && rel_tol > 0.0))
    throw std::invalid_argument("numerical_rank_ref: reference scale and tolerance must be finite, tolerance positive");
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& sv = svd.singularValues();
  const double tiny = std::numeric_limits<double>::min();
  const double cutoff = rel_tol * std::max(sigma_ref, tiny);
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++r;
  return r;
}

Matrix orthonormal_nullspace_ref(const Matrix& m, double sigma_ref, double rel_tol) {
  require_finite(m, "orthonormal_nullspace_ref");
  if (!(std::isfinite(sigma_ref) && sigma_ref >= 0.0) || !(std::isfinite(rel_tol) && rel_tol > 0.0))
    throw std::invalid_argument("orthonormal_nullspace_ref: reference scale and tolerance must be finite, tolerance positive");
  const int n = static_cast<int>(m.cols());
  if (n == 0) return Matrix(0, 0);
  if (m.rows() == 0) return Matrix::Identity(n, n);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  const double tiny = std::numeric_limits<double>::min();
  const double cutoff = rel_tol * std::max(sigma_ref, tiny);
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++r;
  return svd.matrixV().rightCols(n - r);
}

SymEig sym_eigendecomposition(const Matrix& s) {
  require_finite(s, "sym_eigendecomposition");
  if (s.rows() != s.cols())
    throw std::invalid_argument("sym_eigendecomposition: matrix must be square");
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("sym_eigendecomposition: eigensolver failed to converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

double condition_number_2(const Matrix& m, const TolerancePolicy& tol) {
  tol.validate();
  require_finite(m, "condition_number_2");
  const int k = static_cast<int>(std::min(m.rows(), m.cols()));
  if (k == 0) return 1.0;
  if (numerical_rank(m, tol) < k) return std::numeric_limits<double>::infinity();
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& sv = svd.singularValues();
  return sv(0) / sv(k - 1);
}

}  // namespace conereg
