#include "conereg/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "conereg/facered.hpp"
#include "conereg/smalllp.hpp"

namespace conereg {

namespace {

constexpr double kBox = 1e6;
constexpr double kResidTol = 1e-7;

double sup_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Valid supporting inequalities <c, x> >= 0 of a single cone block, embedded
// at the block offset of the full ambient space.
void append_embedded(std::vector<Vector>& cuts, int ambient, int off, const Vector& local) {
  Vector c = Vector::Zero(ambient);
  c.segment(off, local.size()) = local;
  cuts.push_back(std::move(c));
}

// Tangent plane of the exponential cone at ratio t0 = x/y:
// z >= e^{t0} (x + (1 - t0) y), valid on the whole cone including y = 0.
Vector exp_tangent(double t0) {
  Vector c(3);
  const double e = std::exp(std::min(t0, 30.0));
  c << -e, -e * (1.0 - t0), 1.0;
  return c;
}

std::vector<Vector> initial_cuts(const ConeSpec& spec) {
  std::vector<Vector> cuts;
  const int ad = spec.ambient_dim();
  for (size_t bi = 0; bi < spec.blocks.size(); ++bi) {
    const ConeBlock& blk = spec.blocks[bi];
    if (blk.n == 0) continue;
    const int off = spec.block_offset(static_cast<int>(bi));
    switch (blk.kind) {
      case ConeClass::Orthant:
        for (int j = 0; j < blk.n; ++j) {
          Vector e = Vector::Zero(blk.n);
          e(j) = 1.0;
          append_embedded(cuts, ad, off, e);
        }
        break;
      case ConeClass::Psd:
        for (int j = 0; j < blk.n; ++j) {
          Matrix e = Matrix::Zero(blk.n, blk.n);
          e(j, j) = 1.0;
          append_embedded(cuts, ad, off, svec(e));
        }
        for (int i = 0; i < blk.n; ++i)
          for (int j = i + 1; j < blk.n; ++j)
            for (int sgn : {-1, 1}) {
              Vector u = Vector::Zero(blk.n);
              u(i) = 1.0;
              u(j) = static_cast<double>(sgn);
              append_embedded(cuts, ad, off, svec(Matrix(u * u.transpose())));
            }
        break;
      case ConeClass::SecondOrder:
        for (int j = 1; j < blk.n; ++j)
          for (int sgn : {-1, 1}) {
            Vector c = Vector::Zero(blk.n);
            c(0) = 1.0;
            c(j) = static_cast<double>(sgn);
            append_embedded(cuts, ad, off, c);
          }
        break;
      case ConeClass::Exponential: {
        Vector ey(3), ez(3);
        ey << 0, 1, 0;
        ez << 0, 0, 1;
        append_embedded(cuts, ad, off, ey);
        append_embedded(cuts, ad, off, ez);
        for (double t0 : {-2.0, -1.0, 0.0, 1.0, 2.0})
          append_embedded(cuts, ad, off, exp_tangent(t0));
        break;
      }
    }
  }
  return cuts;
}

// Separating cuts at a relaxation point that violates the cone. Returns the
// number of cuts added; also tracks the largest exponential tangent ratio so
// repeated rounds push the y = 0 branch constraint toward x <= 0.
int separate(const ConeSpec& spec, const Vector& x, const TolerancePolicy& tol,
             std::vector<Vector>& cuts, double* exp_tmax) {
  int added = 0;
  const int ad = spec.ambient_dim();
  const double scale = std::max(1.0, sup_norm(x));
  for (size_t bi = 0; bi < spec.blocks.size(); ++bi) {
    const ConeBlock& blk = spec.blocks[bi];
    if (blk.n == 0) continue;
    const int off = spec.block_offset(static_cast<int>(bi));
    switch (blk.kind) {
      case ConeClass::Orthant:
        break;  // exact in the LP already
      case ConeClass::Psd: {
        const SymEig eig =
            sym_eigendecomposition(smat(x.segment(off, blk.ambient_dim())));
        for (int j = 0; j < blk.n; ++j)
          if (eig.eigenvalues(j) < -tol.psd_tol * scale) {
            const Vector u = eig.eigenvectors.col(j);
            append_embedded(cuts, ad, off, svec(Matrix(u * u.transpose())));
            ++added;
          }
        break;
      }
      case ConeClass::SecondOrder: {
        const Vector seg = x.segment(off, blk.n);
        const double tail = seg.tail(blk.n - 1).norm();
        if (seg(0) - tail < -tol.psd_tol * scale && tail > 1e-14) {
          Vector c = Vector::Zero(blk.n);
          c(0) = 1.0;
          c.tail(blk.n - 1) = -seg.tail(blk.n - 1) / tail;
          append_embedded(cuts, ad, off, c);
          ++added;
        }
        break;
      }
      case ConeClass::Exponential: {
        const Vector seg = x.segment(off, 3);
        const Point p = point_from_ambient(ConeSpec{{{ConeClass::Exponential, 3}}}, seg);
        if (contains(ConeSpec{{{ConeClass::Exponential, 3}}}, p, tol)) break;
        const double xx = seg(0), yy = seg(1);
        double t0;
        if (yy > 1e-10 * scale) {
          t0 = std::clamp(xx / yy, -30.0, 30.0);
        } else {
          t0 = std::min(30.0, *exp_tmax + 2.0);  // tighten toward x <= 0 at y = 0
        }
        *exp_tmax = std::max(*exp_tmax, t0);
        append_embedded(cuts, ad, off, exp_tangent(t0));
        ++added;
        break;
      }
    }
  }
  return added;
}

}  // namespace

const char* to_string(Feasibility f) {
  switch (f) {
    case Feasibility::Feasible: return "feasible";
    case Feasibility::Infeasible: return "infeasible";
    case Feasibility::Unknown: return "unknown";
  }
  return "unknown";
}

FeasibilityResult check_feasibility(const ConicSystem& sys, int max_rounds,
                                    const TolerancePolicy& tol) {
  tol.validate();
  const int m = sys.m();
  const int n = sys.dim();
  const double bscale = std::max(1.0, sup_norm(sys.b));
  std::vector<Vector> cuts = initial_cuts(sys.cone);
  double exp_tmax = 2.0;

  FeasibilityResult out;
  for (int round = 0; round < max_rounds; ++round) {
    // Phase-1: minimize the l1 equality violation over the cut polyhedron.
    lp::Problem p = lp::make_problem(n + 2 * m);
    for (int j = 0; j < n; ++j) {
      p.lower(j) = -kBox;
      p.upper(j) = kBox;
    }
    for (int j = 0; j < 2 * m; ++j) {
      p.lower(n + j) = 0.0;
      p.upper(n + j) = kBox;
    }
    p.c = Vector::Zero(n + 2 * m);
    p.c.tail(2 * m).setOnes();
    for (int i = 0; i < m; ++i) {
      Vector a = Vector::Zero(n + 2 * m);
      a.head(n) = sys.A.row(i);
      a(n + i) = 1.0;
      a(n + m + i) = -1.0;
      lp::add_row(p, a, lp::Sense::Eq, sys.b(i));
    }
    for (const Vector& c : cuts) {
      Vector a = Vector::Zero(n + 2 * m);
      a.head(n) = c;
      lp::add_row(p, a, lp::Sense::Ge, 0.0);
    }
    const lp::Solution sol = lp::solve(p);
    if (sol.status == lp::Status::Infeasible) {
      out.verdict = Feasibility::Infeasible;
      out.detail = "outer-approximation linear program is infeasible";
      return out;
    }
    if (sol.status != lp::Status::Optimal) {
      out.detail = "phase-1 linear program did not reach an optimum";
      return out;
    }
    out.residual = sol.objective;
    if (sol.objective > kResidTol * bscale * m) {
      out.verdict = Feasibility::Infeasible;
      std::ostringstream msg;
      msg << "minimum equality violation over the outer approximation is "
          << sol.objective;
      out.detail = msg.str();
      return out;
    }
    const Vector x = sol.x.head(n);
    const Point cand = point_from_ambient(sys.cone, x);
    if (contains(sys.cone, cand, tol) &&
        sup_norm(sys.A * x - sys.b) <= kResidTol * bscale) {
      out.verdict = Feasibility::Feasible;
      out.point = cand;
      return out;
    }
    if (separate(sys.cone, x, tol, cuts, &exp_tmax) == 0) {
      // No separating cut found yet the point is not accepted: the violation
      // sits inside the tolerance band. Report it unresolved.
      out.detail = "relaxation point sits on the cone boundary within tolerance";
      return out;
    }
  }
  out.detail = "cut refinement exhausted its round budget";
  return out;
}

std::vector<Point> sample_cone_points(const ConeSpec& spec, int count, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Point> pts;
  pts.reserve(count);
  for (int s = 0; s < count; ++s) {
    Point p;
    for (const ConeBlock& blk : spec.blocks) {
      switch (blk.kind) {
        case ConeClass::Orthant: {
          Vector v(blk.n);
          for (int j = 0; j < blk.n; ++j)
            v(j) = unif(rng) < 0.2 ? 0.0 : std::abs(gauss(rng));
          p.blocks.emplace_back(std::move(v));
          break;
        }
        case ConeClass::Psd: {
          Matrix g(blk.n, blk.n);
          for (int i = 0; i < blk.n; ++i)
            for (int j = 0; j < blk.n; ++j) g(i, j) = gauss(rng);
          const Eigen::HouseholderQR<Matrix> qr(g);
          const Matrix q = qr.householderQ();
          Vector lam(blk.n);
          for (int j = 0; j < blk.n; ++j)
            lam(j) = unif(rng) < 0.3 ? 0.0 : std::abs(gauss(rng));
          p.blocks.emplace_back(Matrix(q * lam.asDiagonal() * q.transpose()));
          break;
        }
        case ConeClass::SecondOrder: {
          Vector v(blk.n);
          for (int j = 1; j < blk.n; ++j) v(j) = gauss(rng);
          const double tail = v.tail(blk.n - 1).norm();
          v(0) = unif(rng) < 0.3 ? tail : tail + std::abs(gauss(rng));
          p.blocks.emplace_back(std::move(v));
          break;
        }
        case ConeClass::Exponential: {
          Vector v(3);
          if (unif(rng) < 0.25) {
            v << -std::abs(gauss(rng)), 0.0, std::abs(gauss(rng));  // y = 0 branch
          } else {
            const double y = std::abs(gauss(rng)) + 0.1;
            const double t = std::clamp(gauss(rng), -6.0, 6.0);
            const double slack = unif(rng) < 0.3 ? 0.0 : std::abs(gauss(rng));
            v << t * y, y, y * std::exp(t) + slack;
          }
          p.blocks.emplace_back(std::move(v));
          break;
        }
      }
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

std::vector<Point> sample_feasible(const ConicSystem& sys, int count, unsigned seed,
                                   const TolerancePolicy& tol) {
  tol.validate();
  FrOptions opt;
  opt.seed = seed;
  opt.aux.tol = tol;
  const ReductionTrace trace = run_fr(sys, opt);

  FaceRep face = trace.terminal_face;
  std::optional<Point> start = trace.witness;
  if (!start) {
    // The greedy pass could not finish; differently seeded minimal-drop
    // passes often reach a decided face where it stalled.
    for (unsigned s = 0; s < 4 && !start; ++s) {
      FrOptions mopt = opt;
      mopt.strategy = Strategy::MinimalDrop;
      mopt.seed = seed + 1 + s;
      ReductionTrace mt = run_fr(sys, mopt);
      if (mt.witness) {
        start = std::move(mt.witness);
        face = mt.terminal_face;
      }
    }
  }
  if (!start) {
    // Fall back to the oracle's point, on the minimal face it spans.
    const FeasibilityResult fr = check_feasibility(sys, 60, tol);
    if (fr.verdict != Feasibility::Feasible) return {};
    start = fr.point;
    face = minimal_face(sys.cone, *fr.point, tol);
  }

  const Matrix basis = face_span_basis(sys.cone, face);
  const ConeSpec rspec = restricted_cone_spec(sys.cone, face);
  const Matrix Ar = sys.A * basis;
  const Vector x0 = basis.transpose() * point_to_ambient(sys.cone, *start);
  // The restricted operator's near-null directions are null to face accuracy,
  // not machine accuracy, so the walk space is judged at the parent scale.
  const Matrix N = Ar.cols() > 0
                       ? orthonormal_nullspace_ref(Ar, spectral_norm(sys.A), kFaceRankRelTol)
                       : Matrix(0, 0);

  std::vector<Point> pts;
  pts.reserve(count);
  pts.push_back(*start);
  if (N.cols() == 0) {
    while (static_cast<int>(pts.size()) < count) pts.push_back(*start);
    return pts;
  }

  std::mt19937 rng(seed * 31u + 7u);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector x = x0;
  int stuck = 0;
  while (static_cast<int>(pts.size()) < count && stuck < 50 * count) {
    Vector g(N.cols());
    for (int j = 0; j < g.size(); ++j) g(j) = gauss(rng);
    Vector dir = N * g;
    const double dn = dir.norm();
    if (dn < 1e-14) {
      ++stuck;
      continue;
    }
    dir /= dn;
    double alpha = std::max(1.0, x.norm());
    bool ok = false;
    for (int h = 0; h < 60; ++h) {
      const Vector cand = x + alpha * dir;
      if (contains(rspec, point_from_ambient(rspec, cand), tol)) {
        ok = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!ok) {
      ++stuck;
      continue;
    }
    x += (0.9 * unif(rng)) * alpha * dir;
    pts.push_back(point_from_ambient(sys.cone, basis * x));
  }
  while (static_cast<int>(pts.size()) < count) pts.push_back(pts.back());
  return pts;
}

std::vector<Vector> orthant_vertices(const Matrix& A, const Vector& b,
                                     const TolerancePolicy& tol) {
  tol.validate();
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  const int r = numerical_rank(A, tol);
  const double bscale = std::max(1.0, sup_norm(b));
  std::vector<Vector> verts;

  std::vector<int> pick(r);
  auto emit = [&](const std::vector<int>& cols) {
    Matrix As(m, static_cast<int>(cols.size()));
    for (size_t j = 0; j < cols.size(); ++j) As.col(static_cast<int>(j)) = A.col(cols[j]);
    if (numerical_rank(As, tol) < static_cast<int>(cols.size())) return;
    const Vector xs = As.colPivHouseholderQr().solve(b);
    if (sup_norm(As * xs - b) > 1e-9 * bscale) return;
    if ((xs.array() < -1e-9).any()) return;
    Vector x = Vector::Zero(n);
    for (size_t j = 0; j < cols.size(); ++j) x(cols[j]) = std::max(0.0, xs(j));
    for (const Vector& v : verts)
      if (sup_norm(v - x) <= 1e-7 * std::max(1.0, sup_norm(x))) return;
    verts.push_back(std::move(x));
  };

  // All index subsets of size r = rank(A), plus the empty support for b = 0.
  if (sup_norm(b) <= tol.zero_tol) verts.push_back(Vector::Zero(n));
  std::vector<int> idx(r, 0);
  if (r >= 1 && r <= n) {
    for (int j = 0; j < r; ++j) idx[j] = j;
    while (true) {
      emit(idx);
      int pos = r - 1;
      while (pos >= 0 && idx[pos] == n - r + pos) --pos;
      if (pos < 0) break;
      ++idx[pos];
      for (int j = pos + 1; j < r; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  (void)pick;
  return verts;
}

}  // namespace conereg
