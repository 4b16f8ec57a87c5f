#pragma once

// Auxiliary-system machinery behind facial reduction: find and verify
// multipliers y with A*y in (face cone)^* \ (face span)^perp and <b,y> = 0.
// Exactly one of {a strictly feasible point exists on the face} /
// {such a multiplier exists} holds; numerically a third Undetermined
// verdict absorbs the ambiguous band.

#include <optional>
#include <string>
#include <vector>

#include "conereg/cones.hpp"
#include "conereg/numkernel.hpp"

namespace conereg {

// Equality-constrained conic feasible set {x in K : Ax = b}. A acts on the
// flattened cone coordinates (svec for PSD blocks). current_face tracks
// facial-reduction progress; solvers operate on the face-restricted data.
struct ConicSystem {
  Matrix A;
  Vector b;
  ConeSpec cone;
  FaceRep current_face;
  bool surjective = true;  // recorded at construction: numerical_rank(A) == m
  std::string name;

  int m() const { return static_cast<int>(A.rows()); }
  int dim() const { return static_cast<int>(A.cols()); }
};

// Validates shapes, records surjectivity, starts at the full face.
ConicSystem make_system(ConeSpec cone, Matrix A, Vector b, std::string name = "",
                        const TolerancePolicy& tol = {});

// Face-restricted view of a system: rows of A re-expressed on an orthonormal
// basis of the current face span, plus the restricted cone classes.
struct RestrictedView {
  Matrix A;       // m x face_dim
  ConeSpec cone;  // cone classes of the face-restricted problem
  Matrix basis;   // ambient_dim x face_dim, orthonormal columns
};
RestrictedView face_restrict(const ConicSystem& sys);

// A verified multiplier. y is sup-norm normalized (positive rescaling only:
// a sign flip would destroy one-sided dual membership).
struct ExposingCertificate {
  Vector y;
  Point w;                       // A*y in ambient cone coordinates
  double min_dual_eig_or_slack;  // worst dual-membership margin on the face
  double b_pairing;              // <b, y>
  bool nontrivial;               // w has a nonzero component on the face span
  double span_component;         // sup-norm of w restricted to the face span
};

// Checks dual membership on the current face, <b,y> = 0, and nontriviality.
// Throws std::invalid_argument naming the failed condition and its measured
// residual; returns the normalized certificate on success.
ExposingCertificate verify_certificate(const ConicSystem& sys, const Vector& y,
                                       const TolerancePolicy& tol = {});

enum class SlaterStatus { StrictlyFeasible, Fails, Undetermined };
const char* to_string(SlaterStatus s);

struct SlaterVerdict {
  SlaterStatus status = SlaterStatus::Undetermined;
  std::optional<ExposingCertificate> certificate;  // present iff Fails
  std::optional<Point> witness;  // present iff StrictlyFeasible: rel-interior point
  std::string diagnostic;
};

struct AuxOptions {
  TolerancePolicy tol;
  unsigned seed = 1;
  int supergrad_iters = 5000;       // ascent iterations per start, step 1/sqrt(k)
  int supergrad_starts = 8;         // seeded multi-starts
  int cutting_rounds = 80;          // cutting-plane refinement rounds
  double lattice_resolution = 0.25; // general-search grid spacing on b-perp
  std::vector<Vector> candidates;   // user-supplied multipliers, tried first
};

// LP route for systems whose face-restricted cone is a pure orthant.
SlaterVerdict solve_orthant(const ConicSystem& sys, const AuxOptions& opt = {});

// Eigenvalue route for PSD / second-order / orthant mixtures. Second-order
// blocks enter through the arrow-matrix embedding; the concave objective
// lambda_min(sum_i y_i Abar_i) is maximized by projected supergradient ascent
// and the verdict is settled by a cutting-plane pass.
SlaterVerdict solve_psd(const ConicSystem& sys, const AuxOptions& opt = {});

// Candidate list plus a deterministic lattice of directions in b-perp.
// First verified certificate wins; never claims StrictlyFeasible.
SlaterVerdict search_certificate_general(const ConicSystem& sys,
                                         const AuxOptions& opt = {});

// Dispatch on the face-restricted cone composition.
SlaterVerdict solve_auto(const ConicSystem& sys, const AuxOptions& opt = {});

// Several distinct verified certificates for the same system (used by the
// minimal-drop reduction strategy). May be empty when none are found.
std::vector<ExposingCertificate> certificate_pool(const ConicSystem& sys,
                                                  const AuxOptions& opt = {});

}  // namespace conereg
