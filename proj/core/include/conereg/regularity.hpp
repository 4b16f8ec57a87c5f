#pragma once

// Degeneracy verdicts for feasible points, the extreme-point dimension
// bound tied to the equality-redundancy count, and the perturbation
// certificate that turns an exposing multiplier into a proof that a small
// shift of the right-hand side makes the system infeasible.
//
// A feasible point x is degenerate when the span of the conjugate face of
// its minimal face meets the row space of A nontrivially; operationally:
// rank(C A^T) < rank(A), where the rows of C span the orthogonal complement
// of that conjugate-face span.

#include <optional>
#include <stdexcept>
#include <string>

#include "conereg/auxcert.hpp"
#include "conereg/cones.hpp"
#include "conereg/facered.hpp"
#include "conereg/feasibility.hpp"
#include "conereg/numkernel.hpp"

namespace conereg {

// Which characterization produced the verdict: the orthant support-column
// rank test, the PSD rotated-block rank test, or the face-span definition
// applied directly (mixtures and exponential blocks).
enum class DegeneracyMethod { OrthantSupport, PsdRotation, GeneralDefinition };
const char* to_string(DegeneracyMethod m);

struct DegeneracyVerdict {
  Point point;
  bool degenerate = false;
  DegeneracyMethod method = DegeneracyMethod::GeneralDefinition;
  std::optional<Vector> witness_multiplier;  // z with A*z the ambient witness
  std::optional<Point> witness;              // phi = A*z: nonzero, orthogonal to the face
  double pairing = 0.0;                      // <phi, x>; tiny by construction
  bool conservative = false;  // exponential blocks present: Degenerate verdicts are
                              // certain, Nondegenerate is best-effort
};

// Feasibility of x is a precondition; infeasible points are rejected with
// the measured residual.
DegeneracyVerdict check_degenerate(const ConicSystem& sys, const Point& x,
                                   const TolerancePolicy& tol = {});

// Constructive route: a verified exposing multiplier makes every feasible
// point degenerate, with witness A*y directly and no rank computation.
// Rejects point/certificate pairs whose pairing <A*y, x> is not zero.
DegeneracyVerdict degeneracy_from_certificate(const ConicSystem& sys,
                                              const ExposingCertificate& cert,
                                              const Point& x,
                                              const TolerancePolicy& tol = {});

// Thrown by check_dimension_bound when x is not an extreme point; carries
// the (positive) dimension of the face of the feasible set spanned by x.
struct NonExtremePointError : std::invalid_argument {
  explicit NonExtremePointError(int dim);
  int face_in_feasible_set_dim = 0;
};

// dim face(x, K) <= m - ips, checked for extreme points of the feasible set.
struct BoundCheck {
  Point point;
  int face_dim = 0;
  int m = 0;
  int ips = 0;
  bool holds = false;
  int slack = 0;  // m - ips - face_dim
};
BoundCheck check_dimension_bound(const ConicSystem& sys, const Point& x,
                                 const SingularityDiagnostics& diag,
                                 const TolerancePolicy& tol = {});

// Farkas-style consequence of an exposing multiplier: the system with b
// replaced by b - epsilon*y is infeasible, because any feasible point would
// give <b - epsilon*y, y> >= 0 while the pairing equals -epsilon*||y||^2 < 0.
// The verdict of the independent feasibility oracle on the perturbed system
// is recorded; disagreement is flagged rather than hidden.
struct PerturbationCertificate {
  Vector y;
  double epsilon = 0.0;
  double pairing = 0.0;  // <b - epsilon*y, y>, strictly negative
  Feasibility oracle = Feasibility::Unknown;
  bool consistent = false;  // oracle confirmed infeasibility
  std::string detail;
};
PerturbationCertificate perturbation_infeasibility(const ConicSystem& sys,
                                                   const ExposingCertificate& cert,
                                                   double epsilon,
                                                   const TolerancePolicy& tol = {});

}  // namespace conereg
