#pragma once

// Interior-point limiting-singularity probes. Builds the normal-equation
// matrix A [grad^2 F(x)]^{-1} A^T of barrier methods (log barrier on the
// orthant, log-det on the semidefinite cone) and verifies that an exposing
// multiplier annihilates it at boundary optimal points — the mechanism that
// makes the Newton systems of interior-point methods singular in the limit
// when strict feasibility fails. No interior-point iterations are run.

#include <vector>

#include "conereg/auxcert.hpp"
#include "conereg/cones.hpp"
#include "conereg/numkernel.hpp"

namespace conereg {

// [grad^2 F(x)]^{-1} evaluated at a point: Diag(x)^2 for the coordinate log
// barrier, the map S -> X S X for the log-det barrier. Boundary points are
// allowed: the probes study exactly that limit.
enum class ScalingKind { OrthantDiagonalSquared, PsdKronLike };

struct ScalingMatrix {
  ScalingKind kind = ScalingKind::OrthantDiagonalSquared;
  Point at;
};

struct NormalMatrix {
  Matrix M;  // m x m, symmetric positive semidefinite
  ScalingMatrix source;
};

// Orthant blocks: M = A Diag(x)^2 A^T. Semidefinite blocks:
// M_ij = <A_i, X A_j X> in the trace inner product. Mixed cone classes are
// rejected — the two barrier scalings do not share a formula here.
NormalMatrix normal_matrix(const ConicSystem& sys, const Point& x,
                           const TolerancePolicy& tol = {});

// ||M(x*) y|| relative to ||M||_F ||y||: near zero exactly when the
// certificate direction is a null vector of the limiting normal matrix.
// The identity needs complementarity (A*y) . x* = 0 as a product, not just
// in trace pairing; its residual is reported and checked, never assumed.
struct LimitSingularity {
  double residual = 0.0;
  bool singular = false;           // residual <= 1e-8
  double premise_residual = 0.0;   // || (A*y) * x* || product, relative
  bool premise_ok = false;
};
LimitSingularity verify_limit_singularity(const ConicSystem& sys, const Point& x_star,
                                          const ExposingCertificate& cert,
                                          const TolerancePolicy& tol = {});

// Two-norm condition number of the normal matrix along a caller-supplied
// path of points; growth toward the boundary is reported, not asserted.
std::vector<double> condition_trajectory(const ConicSystem& sys,
                                         const std::vector<Point>& path,
                                         const TolerancePolicy& tol = {});

// Self-dual-embedding variant for semidefinite systems: the m x m matrix
// whose i-th column is A(sym(X* A_i S*^{-1})) annihilates the multiplier for
// any positive definite S*, because X* (A* y) = 0 already. Returns the
// relative residual ||G y|| / (||G||_F ||y||).
double embedding_column_singularity(const ConicSystem& sys, const Point& X_star,
                                    const Point& S_star, const ExposingCertificate& cert,
                                    const TolerancePolicy& tol = {});

}  // namespace conereg
