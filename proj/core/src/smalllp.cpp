#include "conereg/smalllp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace conereg::lp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotEps = 1e-9;
constexpr double kCostEps = 1e-9;

struct StdForm {
  // min c^T z, A z = b, z >= 0; user variable j maps to
  //   x_j = shift_j + z[pos_j] - (split_j ? z[neg_j] : 0), possibly negated.
  Matrix a;
  Vector b;
  Vector c;
  int n = 0;  // columns excluding artificials
  std::vector<double> shift;
  std::vector<int> pos, neg;     // neg = -1 when not split
  std::vector<bool> negated;     // x_j = shift_j - z[pos_j]
};

StdForm build_standard_form(const Problem& p) {
  const int n = p.n;
  if (static_cast<int>(p.c.size()) != n || static_cast<int>(p.lower.size()) != n ||
      static_cast<int>(p.upper.size()) != n)
    throw std::invalid_argument("lp::solve: inconsistent problem dimensions");

  StdForm sf;
  sf.shift.assign(n, 0.0);
  sf.pos.assign(n, -1);
  sf.neg.assign(n, -1);
  sf.negated.assign(n, false);

  int cols = 0;
  std::vector<Row> extra;  // upper-bound rows introduced by shifting
  for (int j = 0; j < n; ++j) {
    const double l = p.lower(j), u = p.upper(j);
    if (l > u) throw std::invalid_argument("lp::solve: empty variable bound interval");
    if (std::isfinite(l)) {
      sf.shift[j] = l;
      sf.pos[j] = cols++;
      if (std::isfinite(u)) {
        Row r;
        r.a = Vector::Zero(n);
        r.a(j) = 1.0;
        r.sense = Sense::Le;
        r.rhs = u;
        extra.push_back(std::move(r));
      }
    } else if (std::isfinite(u)) {
      sf.shift[j] = u;
      sf.negated[j] = true;
      sf.pos[j] = cols++;
    } else {
      sf.pos[j] = cols++;
      sf.neg[j] = cols++;
    }
  }

  std::vector<Row> rows = p.rows;
  rows.insert(rows.end(), extra.begin(), extra.end());
  const int m = static_cast<int>(rows.size());
  int slacks = 0;
  for (const Row& r : rows)
    if (r.sense != Sense::Eq) ++slacks;

  sf.n = cols + slacks;
  sf.a = Matrix::Zero(m, sf.n);
  sf.b = Vector::Zero(m);
  sf.c = Vector::Zero(sf.n);

  for (int j = 0; j < n; ++j) {
    const double sign = sf.negated[j] ? -1.0 : 1.0;
    sf.c(sf.pos[j]) += sign * p.c(j);
    if (sf.neg[j] >= 0) sf.c(sf.neg[j]) -= p.c(j);
  }

  int slack = cols;
  for (int i = 0; i < m; ++i) {
    const Row& r = rows[i];
    if (static_cast<int>(r.a.size()) != n)
      throw std::invalid_argument("lp::solve: row dimension mismatch");
    double rhs = r.rhs;
    for (int j = 0; j < n; ++j) {
      const double v = r.a(j);
      if (v == 0.0) continue;
      rhs -= v * sf.shift[j];
      const double sign = sf.negated[j] ? -1.0 : 1.0;
      sf.a(i, sf.pos[j]) += sign * v;
      if (sf.neg[j] >= 0) sf.a(i, sf.neg[j]) -= v;
    }
    if (r.sense == Sense::Le)
      sf.a(i, slack++) = 1.0;
    else if (r.sense == Sense::Ge)
      sf.a(i, slack++) = -1.0;
    sf.b(i) = rhs;
  }
  return sf;
}

// Minimize over bounds only (no constraint rows).
Solution solve_unconstrained(const Problem& p) {
  Solution s;
  s.x = Vector::Zero(p.n);
  for (int j = 0; j < p.n; ++j) {
    const double cj = p.c(j), l = p.lower(j), u = p.upper(j);
    if (cj > 0.0) {
      if (!std::isfinite(l)) return {Status::Unbounded, {}, 0.0};
      s.x(j) = l;
    } else if (cj < 0.0) {
      if (!std::isfinite(u)) return {Status::Unbounded, {}, 0.0};
      s.x(j) = u;
    } else {
      s.x(j) = std::isfinite(l) ? l : (std::isfinite(u) ? u : 0.0);
    }
  }
  s.status = Status::Optimal;
  s.objective = p.c.dot(s.x);
  return s;
}

class Tableau {
 public:
  Tableau(const Matrix& a, const Vector& b, int structural)
      : m_(static_cast<int>(a.rows())), n_(structural), t_(m_, structural + m_ + 1) {
    // columns: structural | artificial | rhs, with rhs made nonnegative first.
    // The signed original data is kept so optimality can be certified (and the
    // tableau rebuilt) against first principles rather than drifted rows.
    orig_ = Matrix::Zero(m_, n_ + m_);
    borig_ = Vector::Zero(m_);
    t_.setZero();
    for (int i = 0; i < m_; ++i) {
      const double s = b(i) < 0.0 ? -1.0 : 1.0;
      orig_.block(i, 0, 1, n_) = s * a.row(i);
      orig_(i, n_ + i) = 1.0;
      borig_(i) = s * b(i);
    }
    t_.leftCols(n_ + m_) = orig_;
    t_.col(n_ + m_) = borig_;
    basis_.resize(m_);
    for (int i = 0; i < m_; ++i) basis_[i] = n_ + i;
  }

  int cols_total() const { return n_ + m_; }
  int artificial_begin() const { return n_; }
  const std::vector<int>& basis() const { return basis_; }
  double rhs(int i) const { return t_(i, n_ + m_); }
  double entry(int i, int j) const { return t_(i, j); }

  // Reduced costs certified against the original data: solve B^T y = c_B and
  // form c - A^T y. Pivot arithmetic never enters, so a stale or corrupted
  // tableau cannot fake optimality here.
  bool exact_reduced_costs(const Vector& cost, Vector& red) const {
    Matrix bc(m_, m_);
    Vector cb(m_);
    for (int i = 0; i < m_; ++i) {
      bc.col(i) = orig_.col(basis_[i]);
      cb(i) = cost(basis_[i]);
    }
    Eigen::FullPivLU<Matrix> lu(Matrix(bc.transpose()));
    if (!lu.isInvertible()) return false;
    const Vector y = lu.solve(cb);
    red = cost - orig_.transpose() * y;
    return true;
  }

  // Rebuilds every tableau row from the original data through the current
  // basis, discarding accumulated pivot error. Returns false on a singular
  // basis (left untouched).
  bool refactorize() {
    Matrix bc(m_, m_);
    for (int i = 0; i < m_; ++i) bc.col(i) = orig_.col(basis_[i]);
    Eigen::FullPivLU<Matrix> lu(bc);
    if (!lu.isInvertible()) return false;
    Matrix sys(m_, n_ + m_ + 1);
    sys.leftCols(n_ + m_) = orig_;
    sys.col(n_ + m_) = borig_;
    t_ = lu.solve(sys);
    // Basic values may come out a hair negative; clamp roundoff so the ratio
    // test keeps its invariant. Larger violations indicate a genuinely
    // infeasible basis and are left for the caller's feasibility checks.
    for (int i = 0; i < m_; ++i) {
      double& r = t_(i, n_ + m_);
      if (r < 0.0 && r > -1e-7) r = 0.0;
    }
    return true;
  }

  // Reduced costs derived from the current tableau rows. The incremental
  // per-pivot updates drift at machine scale; re-deriving caps that drift.
  Vector reduced_costs(const Vector& cost) const {
    Vector red = cost;
    for (int i = 0; i < m_; ++i)
      if (cost(basis_[i]) != 0.0)
        red -= cost(basis_[i]) * t_.row(i).head(cols_total()).transpose();
    return red;
  }

  // Runs simplex with cost vector `cost` (size cols_total). Columns at or
  // beyond `bar_from` may not enter the basis. Returns status.
  Status run(const Vector& cost, int bar_from, int max_iters, int& iters_used) {
    auto pick_entering = [&](const Vector& r, bool bland_rule) {
      if (!bland_rule) {
        double most = -kCostEps;
        int enter = -1;
        for (int j = 0; j < bar_from; ++j)
          if (r(j) < most) {
            most = r(j);
            enter = j;
          }
        return enter;
      }
      for (int j = 0; j < bar_from; ++j)
        if (r(j) < -kCostEps) return j;
      return -1;
    };

    Vector red = reduced_costs(cost);
    int stall = 0;
    int refreshes = 0;
    double best = kInf;
    bool bland = false;
    for (int it = 0; it < max_iters; ++it, ++iters_used) {
      int enter = pick_entering(red, bland);
      if (enter < 0) {
        // Claimed optimality: certify against the original data. If a
        // profitable column survives the exact check, the tableau itself has
        // drifted — rebuild it from the basis and keep pivoting.
        Vector exact;
        if (!exact_reduced_costs(cost, exact) || ++refreshes > 30)
          return Status::Optimal;
        enter = pick_entering(exact, bland);
        if (enter < 0) return Status::Optimal;
        if (!refactorize()) return Status::Optimal;
        red = reduced_costs(cost);
        enter = pick_entering(red, bland);
        if (enter < 0) return Status::Optimal;
      }

      // Ratio test in two passes: find the tightest ratio, then among rows
      // within a relative band of it take the largest pivot. Near-degenerate
      // ties are common here, and picking a noise-scale pivot over a healthy
      // one is what corrupts tableaus.
      double ratio = kInf;
      for (int i = 0; i < m_; ++i) {
        const double piv = t_(i, enter);
        if (piv > kPivotEps) ratio = std::min(ratio, std::max(0.0, rhs(i)) / piv);
      }
      if (ratio == kInf) {
        // No admissible pivot. A numerically null column still certifies an
        // unbounded ray when its exact reduced cost is profitable (moving
        // along it preserves every row); only drifted noise costs are
        // zeroed and skipped.
        double colmax = 0.0;
        for (int i = 0; i < m_; ++i) colmax = std::max(colmax, std::abs(t_(i, enter)));
        if (colmax <= 1e-7) {
          Vector exact;
          if (exact_reduced_costs(cost, exact) && exact(enter) < -kCostEps)
            return Status::Unbounded;
          red(enter) = 0.0;
          continue;
        }
        return Status::Unbounded;
      }
      const double band = ratio + 1e-9 * (1.0 + ratio);
      int leave = -1;
      double best_piv = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double piv = t_(i, enter);
        if (piv <= kPivotEps || std::max(0.0, rhs(i)) / piv > band) continue;
        if (bland) {
          if (leave < 0 || basis_[i] < basis_[leave]) leave = i;
        } else if (piv > best_piv) {
          best_piv = piv;
          leave = i;
        }
      }
      if (leave < 0) return Status::Unbounded;

      pivot(leave, enter, &red);

      double obj = 0.0;
      for (int i = 0; i < m_; ++i) obj += cost(basis_[i]) * rhs(i);
      if (obj < best - 1e-12) {
        best = obj;
        stall = 0;
      } else if (++stall > 60) {
        bland = true;  // degenerate stretch: switch to Bland's rule for good
      }
    }
    return Status::IterationLimit;
  }

  // After phase 1, pivot zero-valued artificial basics onto structural
  // columns so they cannot resurface during phase 2. Rows whose structural
  // part is entirely zero are redundant and stay inert. The largest entry is
  // the sound pivot choice; tiny entries are roundoff, not support.
  void purge_artificial_basics() {
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      int jbest = -1;
      double vbest = 1e-7;
      for (int j = 0; j < n_; ++j) {
        if (std::abs(t_(i, j)) > vbest) {
          vbest = std::abs(t_(i, j));
          jbest = j;
        }
      }
      if (jbest >= 0) pivot(i, jbest, nullptr);
    }
  }

 private:
  void pivot(int leave, int enter, Vector* red) {
    const double piv = t_(leave, enter);
    t_.row(leave) /= piv;
    for (int i = 0; i < m_; ++i) {
      if (i == leave) continue;
      const double f = t_(i, enter);
      if (f != 0.0) t_.row(i) -= f * t_.row(leave);
    }
    if (red != nullptr) {
      const double fr = (*red)(enter);
      if (fr != 0.0) *red -= fr * t_.row(leave).head(cols_total()).transpose();
    }
    basis_[leave] = enter;
  }

  int m_, n_;
  Matrix t_;
  Matrix orig_;
  Vector borig_;
  std::vector<int> basis_;
};

}  // namespace

Problem make_problem(int n) {
  Problem p;
  p.n = n;
  p.c = Vector::Zero(n);
  p.lower = Vector::Constant(n, -kInf);
  p.upper = Vector::Constant(n, kInf);
  return p;
}

void add_row(Problem& p, const Vector& a, Sense sense, double rhs) {
  p.rows.push_back(Row{a, sense, rhs});
}

Solution solve(const Problem& p, int max_iters) {
  if (p.rows.empty()) return solve_unconstrained(p);
  for (const Row& r : p.rows)
    if (!r.a.allFinite() || !std::isfinite(r.rhs))
      throw std::invalid_argument("lp::solve: non-finite row data");
  if (!p.c.allFinite()) throw std::invalid_argument("lp::solve: non-finite objective");

  StdForm sf = build_standard_form(p);
  // Row equilibration: variable-box shifts can push row data to the box
  // scale, where the absolute simplex tolerances lose meaning. Scaling each
  // row to unit max-abs keeps pivoting at a common scale; the solution set is
  // unchanged.
  for (int i = 0; i < sf.a.rows(); ++i) {
    const double s = sf.a.row(i).cwiseAbs().maxCoeff();
    if (s > 1e-300 && std::isfinite(s)) {
      sf.a.row(i) /= s;
      sf.b(i) /= s;
    }
  }
  const int m = static_cast<int>(sf.a.rows());
  Tableau tab(sf.a, sf.b, sf.n);

  // phase 1: drive artificials to zero
  Vector c1 = Vector::Zero(sf.n + m);
  c1.tail(m).setOnes();
  int iters = 0;
  Status st = tab.run(c1, sf.n + m, max_iters, iters);
  if (st == Status::IterationLimit) return {st, {}, 0.0};
  double infeas = 0.0;
  for (int i = 0; i < m; ++i)
    if (tab.basis()[i] >= tab.artificial_begin()) infeas += std::abs(tab.rhs(i));
  const double bscale = 1.0 + sf.b.cwiseAbs().maxCoeff();
  if (infeas > 1e-7 * bscale) return {Status::Infeasible, {}, 0.0};
  tab.purge_artificial_basics();

  // phase 2: original costs, artificial columns barred from entering
  Vector c2 = Vector::Zero(sf.n + m);
  c2.head(sf.n) = sf.c;
  st = tab.run(c2, sf.n, max_iters - iters, iters);
  if (st != Status::Optimal) return {st, {}, 0.0};

  // extract and polish: re-solve the final basis system for the rhs
  Vector z = Vector::Zero(sf.n + m);
  {
    Matrix bcols(m, m);
    Matrix full(m, sf.n + m);
    full.leftCols(sf.n) = sf.a;
    full.rightCols(m).setIdentity();  // artificial columns in original (unsigned) form
    for (int i = 0; i < m; ++i) {
      // original artificial column i carried the sign flip of row i; rebuild it
      if (sf.b(i) < 0.0) full.col(sf.n + i) *= -1.0;
      bcols.col(i) = full.col(tab.basis()[i]);
    }
    Eigen::FullPivLU<Matrix> lu(bcols);
    Vector xb;
    bool polished = false;
    if (lu.isInvertible()) {
      xb = lu.solve(sf.b);
      if ((bcols * xb - sf.b).cwiseAbs().maxCoeff() <= 1e-9 * bscale && xb.minCoeff() >= -1e-7) {
        polished = true;
      }
    }
    for (int i = 0; i < m; ++i) z(tab.basis()[i]) = polished ? xb(i) : tab.rhs(i);
  }
  for (int i = 0; i < m; ++i)
    if (tab.basis()[i] >= sf.n && std::abs(z(tab.basis()[i])) > 1e-7 * bscale)
      return {Status::Infeasible, {}, 0.0};

  Solution s;
  s.status = Status::Optimal;
  s.x = Vector::Zero(p.n);
  for (int j = 0; j < p.n; ++j) {
    double v = z(sf.pos[j]);
    if (sf.neg[j] >= 0) v -= z(sf.neg[j]);
    if (sf.negated[j]) v = -v;
    s.x(j) = sf.shift[j] + v;
  }
  s.objective = p.c.dot(s.x);
  return s;
}

}  // namespace conereg::lp
