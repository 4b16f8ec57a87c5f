// Dense simplex solver used by the auxiliary-system and feasibility routines.
// Optima are checked against an independent enumeration of the vertices of
// the box-constrained feasible set (every bounded LP attains its optimum at
// one of them), plus hand-solved classics.
#include <conereg/smalllp.hpp>

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "support.hpp"

using conereg::Matrix;
using conereg::Vector;
namespace lp = conereg::lp;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Minimum of c over the vertices of {l <= x <= u : Ax = b}: enumerate every
// choice of m basic columns with the remaining variables pinned at a bound.
// Independent of the solver under test (uses the support elimination).
std::optional<double> vertex_optimum(const Matrix& A0, const Vector& b0, const Vector& c,
                                     const Vector& l, const Vector& u) {
    const int n = int(A0.cols());
    // Drop rows that are linear combinations of earlier ones; the right-hand
    // sides used in these tests are consistent by construction, so the
    // solution set is unchanged and the basis enumeration below stays valid.
    Matrix keep(A0.rows(), n);
    Vector bkeep(A0.rows());
    int r = 0;
    for (int i = 0; i < int(A0.rows()); ++i) {
        keep.row(r) = A0.row(i);
        bkeep(r) = b0(i);
        if (testsupport::ge_rank(keep.topRows(r + 1)) == r + 1) ++r;
    }
    const Matrix A = keep.topRows(r);
    const Vector b = bkeep.head(r);
    const int m = r;
    std::optional<double> best;
    std::vector<int> pick(m);
    // Iterate subsets of size m via a simple odometer.
    std::vector<int> idx(m);
    for (int i = 0; i < m; ++i) idx[i] = i;
    const auto advance = [&]() -> bool {
        int i = m - 1;
        while (i >= 0 && idx[i] == n - m + i) --i;
        if (i < 0) return false;
        ++idx[i];
        for (int j = i + 1; j < m; ++j) idx[j] = idx[j - 1] + 1;
        return true;
    };
    if (m > n) return best;
    do {
        Matrix basis(m, m);
        for (int j = 0; j < m; ++j) basis.col(j) = A.col(idx[j]);
        // Each nonbasic variable sits at its lower or upper bound.
        std::vector<int> nonbasic;
        for (int j = 0; j < n; ++j)
            if (std::find(idx.begin(), idx.end(), j) == idx.end()) nonbasic.push_back(j);
        const int k = int(nonbasic.size());
        for (unsigned mask = 0; mask < (1u << k); ++mask) {
            Vector x = Vector::Zero(n);
            bool finite = true;
            for (int j = 0; j < k; ++j) {
                const double v = (mask >> j) & 1 ? u(nonbasic[j]) : l(nonbasic[j]);
                if (!std::isfinite(v)) { finite = false; break; }
                x(nonbasic[j]) = v;
            }
            if (!finite) continue;
            Vector rhs = b;
            for (int j = 0; j < k; ++j) rhs -= A.col(nonbasic[j]) * x(nonbasic[j]);
            const std::optional<Vector> xb = testsupport::ge_solve(basis, rhs);
            if (!xb) continue;
            bool ok = true;
            for (int j = 0; j < m; ++j) {
                x(idx[j]) = (*xb)(j);
                if ((*xb)(j) < l(idx[j]) - 1e-9 || (*xb)(j) > u(idx[j]) + 1e-9) ok = false;
            }
            if (!ok) continue;
            const double val = c.dot(x);
            if (!best || val < *best) best = val;
        }
    } while (advance());
    return best;
}

}  // namespace

TEST_CASE("textbook optimum with inequality rows") {
    // min -x1 - x2  s.t.  x1 + x2 <= 1, x >= 0  ->  -1 on the whole edge.
    lp::Problem p = lp::make_problem(2);
    p.c = Vector{{-1.0, -1.0}};
    p.lower = Vector::Zero(2);
    p.upper = Vector::Constant(2, kInf);
    lp::add_row(p, Vector{{1.0, 1.0}}, lp::Sense::Le, 1.0);
    const lp::Solution s = lp::solve(p);
    REQUIRE(s.status == lp::Status::Optimal);
    CHECK(s.objective == doctest::Approx(-1.0));
    CHECK(s.x.sum() == doctest::Approx(1.0));
    CHECK(s.x.minCoeff() >= -1e-9);
}

TEST_CASE("infeasible and unbounded detection") {
    lp::Problem p = lp::make_problem(2);
    p.lower = Vector::Zero(2);
    p.upper = Vector::Constant(2, kInf);
    lp::add_row(p, Vector{{1.0, 1.0}}, lp::Sense::Eq, -1.0);
    CHECK(lp::solve(p).status == lp::Status::Infeasible);

    lp::Problem q = lp::make_problem(2);
    q.c = Vector{{-1.0, 0.0}};
    q.lower = Vector::Zero(2);
    q.upper = Vector::Constant(2, kInf);
    lp::add_row(q, Vector{{0.0, 1.0}}, lp::Sense::Eq, 1.0);
    CHECK(lp::solve(q).status == lp::Status::Unbounded);
}

TEST_CASE("free variables and Ge rows") {
    // min x  s.t.  x >= -3, x free otherwise.
    lp::Problem p = lp::make_problem(1);
    p.c = Vector{{1.0}};
    lp::add_row(p, Vector{{1.0}}, lp::Sense::Ge, -3.0);
    const lp::Solution s = lp::solve(p);
    REQUIRE(s.status == lp::Status::Optimal);
    CHECK(s.objective == doctest::Approx(-3.0));
}

TEST_CASE("degenerate pivoting terminates (cycling example)") {
    // The classic cycling instance for Dantzig pricing; the Bland fallback
    // must still reach the optimum -0.05 at x = (0.04, 0, 1, 0).
    lp::Problem p = lp::make_problem(4);
    p.c = Vector{{-0.75, 150.0, -0.02, 6.0}};
    p.lower = Vector::Zero(4);
    p.upper = Vector::Constant(4, kInf);
    lp::add_row(p, Vector{{0.25, -60.0, -0.04, 9.0}}, lp::Sense::Le, 0.0);
    lp::add_row(p, Vector{{0.5, -90.0, -0.02, 3.0}}, lp::Sense::Le, 0.0);
    lp::add_row(p, Vector{{0.0, 0.0, 1.0, 0.0}}, lp::Sense::Le, 1.0);
    const lp::Solution s = lp::solve(p);
    REQUIRE(s.status == lp::Status::Optimal);
    CHECK(s.objective == doctest::Approx(-0.05));
}

TEST_CASE("random equality LPs match vertex enumeration") {
    std::mt19937_64 gen(21);
    int solved = 0;
    for (int trial = 0; trial < 60; ++trial) {
        std::uniform_int_distribution<int> nd(2, 6), md(1, 3);
        const int n = nd(gen), m = md(gen);
        const Matrix A = testsupport::gaussian_matrix(m, n, gen);
        // Right-hand side from a random box point so roughly half the
        // instances are feasible by construction.
        Vector x0(n);
        for (int i = 0; i < n; ++i) x0(i) = testsupport::urand(gen, 0.0, 1.0);
        const Vector b = A * x0;
        Vector c(n);
        for (int i = 0; i < n; ++i) c(i) = testsupport::urand(gen, -1.0, 1.0);

        lp::Problem p = lp::make_problem(n);
        p.c = c;
        p.lower = Vector::Zero(n);
        p.upper = Vector::Ones(n);
        for (int i = 0; i < m; ++i) lp::add_row(p, Vector(A.row(i)), lp::Sense::Eq, b(i));
        const lp::Solution s = lp::solve(p);

        const std::optional<double> ref = vertex_optimum(A, b, c, p.lower, p.upper);
        REQUIRE(ref.has_value());  // x0 itself is feasible
        REQUIRE(s.status == lp::Status::Optimal);
        CHECK(s.objective == doctest::Approx(*ref).epsilon(1e-6));
        // The reported point must satisfy the data it was solved against.
        CHECK((A * s.x - b).lpNorm<Eigen::Infinity>() <= 1e-7 * std::max(1.0, b.norm()));
        CHECK(s.x.minCoeff() >= -1e-8);
        CHECK(s.x.maxCoeff() <= 1.0 + 1e-8);
        CHECK(c.dot(s.x) == doctest::Approx(s.objective).epsilon(1e-9));
        ++solved;
    }
    CHECK(solved == 60);
}

TEST_CASE("wide bounds and mixed row scales stay consistent") {
    // Regression guard for the failure mode where a tiny pivot on a large-
    // scale tableau silently corrupts the reduced costs: boxes at 1e6 and row
    // norms spread over six orders of magnitude, optimum checked against the
    // independent enumeration.
    std::mt19937_64 gen(22);
    for (int trial = 0; trial < 40; ++trial) {
        std::uniform_int_distribution<int> nd(2, 5), md(1, 3);
        const int n = nd(gen), m = md(gen);
        Matrix A = testsupport::gaussian_matrix(m, n, gen);
        for (int i = 0; i < m; ++i) {
            const double scale = std::pow(10.0, testsupport::urand(gen, -3.0, 3.0));
            A.row(i) *= scale;
        }
        Vector x0(n);
        for (int i = 0; i < n; ++i) x0(i) = testsupport::urand(gen, 0.0, 100.0);
        const Vector b = A * x0;
        Vector c(n);
        for (int i = 0; i < n; ++i) c(i) = testsupport::urand(gen, -1.0, 1.0);

        lp::Problem p = lp::make_problem(n);
        p.c = c;
        p.lower = Vector::Zero(n);
        p.upper = Vector::Constant(n, 1e6);
        for (int i = 0; i < m; ++i) lp::add_row(p, Vector(A.row(i)), lp::Sense::Eq, b(i));
        const lp::Solution s = lp::solve(p);
        const std::optional<double> ref = vertex_optimum(A, b, c, p.lower, p.upper);
        REQUIRE(ref.has_value());
        REQUIRE(s.status == lp::Status::Optimal);
        // Optimal values can be ~1e6 in magnitude; compare relatively.
        CHECK(std::abs(s.objective - *ref) <= 1e-6 * std::max(1.0, std::abs(*ref)));
    }
}

TEST_CASE("equality right-hand sides of either sign") {
    lp::Problem p = lp::make_problem(2);
    p.c = Vector{{1.0, 0.0}};
    p.lower = Vector::Constant(2, -kInf);
    p.upper = Vector::Constant(2, kInf);
    lp::add_row(p, Vector{{1.0, 1.0}}, lp::Sense::Eq, -5.0);
    lp::add_row(p, Vector{{1.0, -1.0}}, lp::Sense::Eq, 1.0);
    const lp::Solution s = lp::solve(p);
    REQUIRE(s.status == lp::Status::Optimal);
    CHECK(s.x(0) == doctest::Approx(-2.0));
    CHECK(s.x(1) == doctest::Approx(-3.0));
}
