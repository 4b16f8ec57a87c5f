#pragma once

// Independent feasibility oracle and point samplers. The oracle decides
// {x in K : Ax = b} by a phase-1 LP over an adaptively refined polyhedral
// outer approximation of K: an infeasible relaxation soundly proves the
// conic system infeasible, and a relaxation point that lands inside K (with
// a small equality residual) proves it feasible. Everything else is Unknown.

#include <optional>
#include <string>
#include <vector>

#include "conereg/auxcert.hpp"
#include "conereg/cones.hpp"
#include "conereg/numkernel.hpp"

namespace conereg {

enum class Feasibility { Feasible, Infeasible, Unknown };
const char* to_string(Feasibility f);

struct FeasibilityResult {
  Feasibility verdict = Feasibility::Unknown;
  std::optional<Point> point;  // validated feasible point when verdict = Feasible
  double residual = 0.0;       // phase-1 equality infeasibility at the last round
  std::string detail;
};

FeasibilityResult check_feasibility(const ConicSystem& sys, int max_rounds = 60,
                                    const TolerancePolicy& tol = {});

// Seeded cone samples (interior and boundary mixed), independent of any
// equality data; used for adjoint-identity and dual-pairing spot checks.
std::vector<Point> sample_cone_points(const ConeSpec& spec, int count, unsigned seed);

// Seeded samples of {x in K : Ax = b}: reduce to a strictly feasible face,
// then random-walk inside the restricted cone along the nullspace of the
// restricted equalities. Returns an empty list when no feasible point is
// found. All returned points satisfy the equalities to 1e-8 scale.
std::vector<Point> sample_feasible(const ConicSystem& sys, int count, unsigned seed,
                                   const TolerancePolicy& tol = {});

// All vertices (basic feasible solutions) of {x >= 0 : Ax = b} by support
// enumeration; intended for small n only.
std::vector<Vector> orthant_vertices(const Matrix& A, const Vector& b,
                                     const TolerancePolicy& tol = {});

}  // namespace conereg
