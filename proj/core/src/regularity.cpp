#include "conereg/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace conereg {

namespace {

double sup_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

void require_feasible(const ConicSystem& sys, const Point& x, const TolerancePolicy& tol,
                      const char* who) {
  const Vector xa = point_to_ambient(sys.cone, x);
  const double resid = sup_norm(sys.A * xa - sys.b);
  if (resid > 1e-6 * std::max(1.0, sup_norm(sys.b))) {
    std::ostringstream msg;
    msg << who << ": point violates the equalities (residual " << resid << ")";
    throw std::invalid_argument(msg.str());
  }
  if (!contains(sys.cone, x, tol)) {
    std::ostringstream msg;
    msg << who << ": point is outside the cone";
    throw std::invalid_argument(msg.str());
  }
}

DegeneracyMethod method_for(const ConeSpec& spec) {
  if (spec.pure(ConeClass::Orthant)) return DegeneracyMethod::OrthantSupport;
  if (spec.pure(ConeClass::Psd)) return DegeneracyMethod::PsdRotation;
  return DegeneracyMethod::GeneralDefinition;
}

}  // namespace

const char* to_string(DegeneracyMethod m) {
  switch (m) {
    case DegeneracyMethod::OrthantSupport: return "orthant_support";
    case DegeneracyMethod::PsdRotation: return "psd_rotation";
    case DegeneracyMethod::GeneralDefinition: return "general_definition";
  }
  return "general_definition";
}

DegeneracyVerdict check_degenerate(const ConicSystem& sys, const Point& x,
                                   const TolerancePolicy& tol) {
  tol.validate();
  require_feasible(sys, x, tol, "check_degenerate");

  DegeneracyVerdict v;
  v.point = x;
  v.method = method_for(sys.cone);
  v.conservative = sys.cone.has(ConeClass::Exponential);

  const FaceRep f = minimal_face(sys.cone, x, tol);
  // Rows of C span the orthogonal complement of the conjugate-face span, so
  // a multiplier z lands in that span exactly when C A^T z = 0. Both ranks
  // are judged against the operator's own spectral scale: the cut product can
  // be annihilated only to the accuracy of the face data, far above machine
  // roundoff.
  const Matrix C = conjugate_span_complement(sys.cone, f);
  const Matrix CAt = C * sys.A.transpose();
  const double sigma = spectral_norm(sys.A);
  const int r_full = numerical_rank_ref(sys.A, sigma, kFaceRankRelTol);
  const int r_cut = numerical_rank_ref(CAt, sigma, kFaceRankRelTol);
  v.degenerate = r_cut < r_full;
  if (!v.degenerate) return v;

  // Witness: a multiplier in null(C A^T) maximizing ||A^T z||, so the
  // ambient witness phi = A^T z is as far from zero as the nullspace allows.
  const Matrix N = CAt.rows() > 0 ? orthonormal_nullspace_ref(CAt, sigma, kFaceRankRelTol)
                                  : Matrix(Matrix::Identity(sys.m(), sys.m()));
  if (N.cols() > 0) {
    const Matrix AtN = sys.A.transpose() * N;
    Eigen::JacobiSVD<Matrix> svd(AtN, Eigen::ComputeFullV);
    const Vector z = N * svd.matrixV().col(0);
    const Vector phi = sys.A.transpose() * z;
    if (phi.norm() > tol.zero_tol) {
      v.witness_multiplier = z;
      v.witness = point_from_ambient(sys.cone, phi);
      v.pairing = phi.dot(point_to_ambient(sys.cone, x));
    }
  }
  return v;
}

DegeneracyVerdict degeneracy_from_certificate(const ConicSystem& sys,
                                              const ExposingCertificate& cert,
                                              const Point& x,
                                              const TolerancePolicy& tol) {
  tol.validate();
  require_feasible(sys, x, tol, "degeneracy_from_certificate");
  const ExposingCertificate checked = verify_certificate(sys, cert.y, tol);

  const Vector phi = sys.A.transpose() * checked.y;
  const Vector xa = point_to_ambient(sys.cone, x);
  const double pairing = phi.dot(xa);
  const double scale = std::max(1.0, phi.norm() * xa.norm());
  if (std::abs(pairing) > 1e-7 * scale) {
    std::ostringstream msg;
    msg << "degeneracy_from_certificate: <A*y, x> = " << pairing
        << "; the certificate and the point are inconsistent";
    throw std::invalid_argument(msg.str());
  }

  DegeneracyVerdict v;
  v.point = x;
  v.degenerate = true;
  v.method = method_for(sys.cone);
  v.conservative = false;  // the constructive route is exact for every cone class
  v.witness_multiplier = checked.y;
  v.witness = point_from_ambient(sys.cone, phi);
  v.pairing = pairing;
  return v;
}

NonExtremePointError::NonExtremePointError(int dim)
    : std::invalid_argument("check_dimension_bound: point is not extreme; its face of "
                            "the feasible set has dimension " +
                            std::to_string(dim)),
      face_in_feasible_set_dim(dim) {}

BoundCheck check_dimension_bound(const ConicSystem& sys, const Point& x,
                                 const SingularityDiagnostics& diag,
                                 const TolerancePolicy& tol) {
  tol.validate();
  require_feasible(sys, x, tol, "check_dimension_bound");

  const FaceRep f = minimal_face(sys.cone, x, tol);
  const Matrix B = face_span_basis(sys.cone, f);
  // Extremeness: the face of the feasible set spanned by x has dimension
  // dim(null(A) intersect span f) = cols(B) - rank(A B), with the rank
  // anchored at the parent operator's scale (see check_degenerate).
  const int fdim_in_F =
      static_cast<int>(B.cols()) -
      (B.cols() > 0 ? numerical_rank_ref(Matrix(sys.A * B), spectral_norm(sys.A),
                                         kFaceRankRelTol)
                    : 0);
  if (fdim_in_F > 0) throw NonExtremePointError(fdim_in_F);

  BoundCheck chk;
  chk.point = x;
  chk.face_dim = face_dimension(f);
  chk.m = sys.m();
  chk.ips = diag.ips;
  chk.slack = chk.m - chk.ips - chk.face_dim;
  chk.holds = chk.slack >= 0;
  return chk;
}

PerturbationCertificate perturbation_infeasibility(const ConicSystem& sys,
                                                   const ExposingCertificate& cert,
                                                   double epsilon,
                                                   const TolerancePolicy& tol) {
  tol.validate();
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw std::invalid_argument("perturbation_infeasibility: epsilon must be positive");

  // The Farkas argument needs A*y in the dual of the full cone, not just of
  // the current face: re-verify against the unreduced system.
  ConicSystem full = sys;
  full.current_face = full_face(sys.cone);
  const ExposingCertificate checked = verify_certificate(full, cert.y, tol);

  PerturbationCertificate pc;
  pc.y = checked.y;
  pc.epsilon = epsilon;
  const Vector b_shift = sys.b - epsilon * checked.y;
  pc.pairing = b_shift.dot(checked.y);

  ConicSystem perturbed = sys;
  perturbed.b = b_shift;
  perturbed.current_face = full_face(sys.cone);
  const FeasibilityResult res = check_feasibility(perturbed, 60, tol);
  pc.oracle = res.verdict;
  pc.consistent = res.verdict == Feasibility::Infeasible;
  if (!pc.consistent) {
    std::ostringstream msg;
    msg << "oracle verdict '" << to_string(res.verdict)
        << "' disagrees with the perturbation argument (" << res.detail << ")";
    pc.detail = msg.str();
  }
  return pc;
}

}  // namespace conereg
