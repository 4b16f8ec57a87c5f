#pragma once
// Small dense LP solver for the auxiliary problems in this library
// (certificate search, witness search, outer-approximation feasibility).
// Two-phase primal simplex with Dantzig pricing and a Bland fallback.
// Desk scale only; deliberately not a general-purpose solver.

#include <vector>

#include "conereg/numkernel.hpp"

namespace conereg::lp {

enum class Sense { Le, Ge, Eq };

struct Row {
  Vector a;
  Sense sense = Sense::Eq;
  double rhs = 0.0;
};

struct Problem {
  int n = 0;        // structural variables
  Vector c;         // minimize c^T x
  std::vector<Row> rows;
  Vector lower;     // -inf allowed
  Vector upper;     // +inf allowed
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Solution {
  Status status = Status::IterationLimit;
  Vector x;
  double objective = 0.0;
};

Solution solve(const Problem& p, int max_iters = 50000);

// Convenience constructors.
Problem make_problem(int n);
void add_row(Problem& p, const Vector& a, Sense sense, double rhs);

}  // namespace conereg::lp
