#include "conereg/auxcert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "conereg/smalllp.hpp"

namespace conereg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Decision bands for LP-backed verdicts. Optima above kCertPosTol certify
// failure, below kCertZeroTol certify that no multiplier exists; the gap in
// between maps to Undetermined.
constexpr double kCertPosTol = 1e-7;
constexpr double kCertZeroTol = 1e-9;
// Minimum inscribed margin accepted as proof of a relative-interior witness.
constexpr double kInteriorMargin = 1e-6;
// Trace ceiling below which the certificate cone is considered trivial.
constexpr double kTraceTol = 1e-7;
// Box bound for otherwise-free LP variables.
constexpr double kBox = 1e6;

double sup_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

bool effectively_zero_b(const Vector& b) { return b.norm() <= 1e-14; }

// Orthogonal projection onto {y : <b,y> = 0}.
Vector project_b_perp(const Vector& b, const Vector& y) {
  if (effectively_zero_b(b)) return y;
  return y - (b.dot(y) / b.squaredNorm()) * b;
}

// --- block margin evaluation on restricted coordinates ---------------------
//
// All restricted cone classes here (orthant, psd in svec coordinates,
// second-order) are self-dual, so the same margins serve both certificate
// values w = A^T y and witness points x.

struct MarginEval {
  double margin = kInf;  // worst block margin, absolute units
  double wnorm = 0.0;    // 2-norm of the evaluated vector
  Vector worst_cut;      // cut vector of the worst block (restricted ambient)
  std::vector<Vector> cuts;  // cuts of every block with margin < collect_below
};

MarginEval eval_margins(const ConeSpec& rspec, const Vector& w, double collect_below) {
  MarginEval ev;
  ev.wnorm = w.norm();
  const int ad = rspec.ambient_dim();
  auto embed = [&](int off, const Vector& local) {
    Vector c = Vector::Zero(ad);
    c.segment(off, local.size()) = local;
    return c;
  };
  auto consider = [&](double margin, const Vector& cut) {
    if (margin < ev.margin) {
      ev.margin = margin;
      ev.worst_cut = cut;
    }
    if (margin < collect_below) ev.cuts.push_back(cut);
  };
  for (size_t b = 0; b < rspec.blocks.size(); ++b) {
    const ConeBlock& blk = rspec.blocks[b];
    if (blk.n == 0) continue;
    const int off = rspec.block_offset(static_cast<int>(b));
    switch (blk.kind) {
      case ConeClass::Orthant: {
        for (int j = 0; j < blk.n; ++j) {
          Vector e = Vector::Zero(blk.n);
          e(j) = 1.0;
          consider(w(off + j), embed(off, e));
        }
        break;
      }
      case ConeClass::Psd: {
        const Matrix s = smat(w.segment(off, blk.ambient_dim()));
        const SymEig eig = sym_eigendecomposition(s);
        for (int j = 0; j < blk.n; ++j) {
          const double lam = eig.eigenvalues(j);
          if (j > 0 && lam >= collect_below && lam > eig.eigenvalues(0)) break;
          const Vector u = eig.eigenvectors.col(j);
          consider(lam, embed(off, svec(u * u.transpose())));
        }
        break;
      }
      case ConeClass::SecondOrder: {
        const Vector seg = w.segment(off, blk.n);
        const double tail = seg.tail(blk.n - 1).norm();
        Vector c = Vector::Zero(blk.n);
        c(0) = 1.0;
        if (tail > 1e-14) c.tail(blk.n - 1) = -seg.tail(blk.n - 1) / tail;
        consider(seg(0) - tail, embed(off, c));
        break;
      }
      case ConeClass::Exponential:
        throw std::logic_error("eval_margins: exponential blocks have no eigenvalue route");
    }
  }
  return ev;
}

// Linear functional giving the block-diagonal trace of the embedded matrix.
Vector trace_vector(const ConeSpec& rspec) {
  Vector t = Vector::Zero(rspec.ambient_dim());
  for (size_t b = 0; b < rspec.blocks.size(); ++b) {
    const ConeBlock& blk = rspec.blocks[b];
    if (blk.n == 0) continue;
    const int off = rspec.block_offset(static_cast<int>(b));
    switch (blk.kind) {
      case ConeClass::Orthant:
        t.segment(off, blk.n).setOnes();
        break;
      case ConeClass::Psd:
        t.segment(off, blk.ambient_dim()) = svec(Matrix::Identity(blk.n, blk.n));
        break;
      case ConeClass::SecondOrder:
        t(off) = static_cast<double>(blk.n);  // arrow-matrix trace is n * x0
        break;
      case ConeClass::Exponential:
        throw std::logic_error("trace_vector: exponential blocks have no eigenvalue route");
    }
  }
  return t;
}

// Conservative starter cuts so the first LP rounds are already bounded.
std::vector<Vector> seed_cuts(const ConeSpec& rspec) {
  std::vector<Vector> cuts;
  const int ad = rspec.ambient_dim();
  auto embed = [&](int off, const Vector& local) {
    Vector c = Vector::Zero(ad);
    c.segment(off, local.size()) = local;
    return c;
  };
  for (size_t b = 0; b < rspec.blocks.size(); ++b) {
    const ConeBlock& blk = rspec.blocks[b];
    if (blk.n == 0) continue;
    const int off = rspec.block_offset(static_cast<int>(b));
    switch (blk.kind) {
      case ConeClass::Orthant:
        for (int j = 0; j < blk.n; ++j) {
          Vector e = Vector::Zero(blk.n);
          e(j) = 1.0;
          cuts.push_back(embed(off, e));
        }
        break;
      case ConeClass::Psd:
        for (int j = 0; j < blk.n; ++j) {
          Matrix e = Matrix::Zero(blk.n, blk.n);
          e(j, j) = 1.0;
          cuts.push_back(embed(off, svec(e)));
        }
        break;
      case ConeClass::SecondOrder:
        for (int j = 1; j < blk.n; ++j)
          for (int sgn : {-1, 1}) {
            Vector c = Vector::Zero(blk.n);
            c(0) = 1.0;
            c(j) = static_cast<double>(sgn);
            cuts.push_back(embed(off, c));
          }
        break;
      case ConeClass::Exponential:
        break;
    }
  }
  return cuts;
}

// Validates a restricted-coordinate witness candidate and maps it back to an
// ambient point in the relative interior of the current face.
std::optional<Point> validate_witness(const ConicSystem& sys, const RestrictedView& view,
                                      const Vector& xres, const TolerancePolicy& tol) {
  const Vector resid = view.A * xres - sys.b;
  if (sup_norm(resid) > 1e-8 * std::max(1.0, sup_norm(sys.b))) return std::nullopt;
  if (view.cone.ambient_dim() > 0) {
    const Point rp = point_from_ambient(view.cone, xres);
    if (!in_relative_interior(view.cone, rp, tol)) return std::nullopt;
  }
  return point_from_ambient(sys.cone, view.basis * xres);
}

std::optional<ExposingCertificate> try_verify(const ConicSystem& sys, const Vector& y,
                                              const TolerancePolicy& tol) {
  try {
    return verify_certificate(sys, y, tol);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

SlaterVerdict undetermined(std::string why) {
  SlaterVerdict v;
  v.status = SlaterStatus::Undetermined;
  v.diagnostic = std::move(why);
  return v;
}

bool same_direction(const Vector& a, const Vector& b) {
  return (a - b).norm() <= 1e-7 * std::max(1.0, a.norm());
}

// --- orthant LP pieces ------------------------------------------------------

// max sum(s) (or a sub-objective) over {s <= A'^T y, 0 <= s <= 1,
// <b,y> = 0, |y|_inf <= 1}; variables are [y; s].
lp::Problem build_cert_lp(const Matrix& Ar, const Vector& b) {
  const int m = static_cast<int>(Ar.rows());
  const int n = static_cast<int>(Ar.cols());
  lp::Problem p = lp::make_problem(m + n);
  for (int i = 0; i < m; ++i) {
    p.lower(i) = -1.0;
    p.upper(i) = 1.0;
  }
  for (int j = 0; j < n; ++j) {
    p.lower(m + j) = 0.0;
    p.upper(m + j) = 1.0;
  }
  for (int j = 0; j < n; ++j) {
    Vector a = Vector::Zero(m + n);
    a.head(m) = Ar.col(j);
    a(m + j) = -1.0;
    lp::add_row(p, a, lp::Sense::Ge, 0.0);  // (A'^T y)_j - s_j >= 0
  }
  if (!effectively_zero_b(b)) {
    Vector a = Vector::Zero(m + n);
    a.head(m) = b;
    lp::add_row(p, a, lp::Sense::Eq, 0.0);
  }
  return p;
}

}  // namespace

// --- construction -----------------------------------------------------------

ConicSystem make_system(ConeSpec cone, Matrix A, Vector b, std::string name,
                        const TolerancePolicy& tol) {
  tol.validate();
  cone.validate(true);
  require_finite(A, "make_system: A");
  require_finite(b, "make_system: b");
  if (A.rows() < 1) throw std::invalid_argument("make_system: need at least one equality");
  if (A.rows() != b.size())
    throw std::invalid_argument("make_system: row count of A does not match length of b");
  if (A.cols() != cone.ambient_dim())
    throw std::invalid_argument("make_system: columns of A do not match the cone dimension");
  ConicSystem sys;
  sys.cone = std::move(cone);
  sys.current_face = full_face(sys.cone);
  sys.surjective = numerical_rank(A, tol) == static_cast<int>(A.rows());
  sys.A = std::move(A);
  sys.b = std::move(b);
  sys.name = std::move(name);
  return sys;
}

RestrictedView face_restrict(const ConicSystem& sys) {
  RestrictedView v;
  v.basis = face_span_basis(sys.cone, sys.current_face);
  v.A = sys.A * v.basis;
  v.cone = restricted_cone_spec(sys.cone, sys.current_face);
  return v;
}

const char* to_string(SlaterStatus s) {
  switch (s) {
    case SlaterStatus::StrictlyFeasible: return "strictly_feasible";
    case SlaterStatus::Fails: return "fails";
    case SlaterStatus::Undetermined: return "undetermined";
  }
  return "undetermined";
}

// --- certificate verification ----------------------------------------------

ExposingCertificate verify_certificate(const ConicSystem& sys, const Vector& y,
                                       const TolerancePolicy& tol) {
  tol.validate();
  require_finite(y, "verify_certificate: y");
  if (y.size() != sys.m())
    throw std::invalid_argument("verify_certificate: multiplier length does not match m");
  const double ysup = sup_norm(y);
  if (ysup <= 0.0) throw std::invalid_argument("verify_certificate: zero multiplier");
  // Positive rescaling only: flipping the sign would break one-sided dual
  // membership, so the normalization must not move y off its ray.
  const Vector yn = y / ysup;

  const Vector wamb = sys.A.transpose() * yn;
  const Matrix basis = face_span_basis(sys.cone, sys.current_face);
  const ConeSpec rspec = restricted_cone_spec(sys.cone, sys.current_face);
  const Vector wres = basis.transpose() * wamb;

  const double span_component = sup_norm(wres);
  if (span_component <= tol.zero_tol * std::max(1.0, sup_norm(wamb))) {
    std::ostringstream msg;
    msg << "verify_certificate: A*y is orthogonal to the face span (component "
        << span_component << "); it would not reduce the face";
    throw std::invalid_argument(msg.str());
  }

  double margin = kInf;
  if (rspec.ambient_dim() > 0) {
    const Point wp = point_from_ambient(rspec, wres);
    margin = dual_margin(rspec, wp);
  }
  if (!(margin >= -tol.psd_tol)) {
    std::ostringstream msg;
    msg << "verify_certificate: A*y is not in the dual cone on the face (margin "
        << margin << " < " << -tol.psd_tol << ")";
    throw std::invalid_argument(msg.str());
  }

  const double bp = sys.b.dot(yn);
  if (std::abs(bp) > tol.zero_tol * std::max(1.0, sys.b.norm())) {
    std::ostringstream msg;
    msg << "verify_certificate: <b,y> = " << bp << " exceeds "
        << tol.zero_tol * std::max(1.0, sys.b.norm());
    throw std::invalid_argument(msg.str());
  }

  ExposingCertificate cert;
  cert.y = yn;
  cert.w = point_from_ambient(sys.cone, wamb);
  cert.min_dual_eig_or_slack = margin;
  cert.b_pairing = bp;
  cert.nontrivial = true;
  cert.span_component = span_component;
  return cert;
}

// --- orthant route -----------------------------------------------------------

SlaterVerdict solve_orthant(const ConicSystem& sys, const AuxOptions& opt) {
  opt.tol.validate();
  const RestrictedView view = face_restrict(sys);
  if (!view.cone.pure(ConeClass::Orthant) && view.cone.ambient_dim() > 0)
    throw std::invalid_argument("solve_orthant: face-restricted cone is not a pure orthant");
  const int m = sys.m();
  const int n = static_cast<int>(view.A.cols());

  if (n > 0) {
    lp::Problem p = build_cert_lp(view.A, sys.b);
    p.c = Vector::Zero(m + n);
    p.c.tail(n).setConstant(-1.0);  // max sum(s)
    const lp::Solution main = lp::solve(p);
    if (main.status != lp::Status::Optimal)
      return undetermined("certificate LP did not reach an optimum");
    const double v = -main.objective;

    if (v > kCertPosTol) {
      // Per-coordinate exposability solves; the sum of the solutions is a
      // maximum-support multiplier, so one reduction removes every
      // identically-zero coordinate at once.
      Vector y_union = Vector::Zero(m);
      bool any = false;
      for (int j = 0; j < n; ++j) {
        p.c.setZero();
        p.c(m + j) = -1.0;
        const lp::Solution sj = lp::solve(p);
        if (sj.status == lp::Status::Optimal && -sj.objective > kCertPosTol) {
          y_union += sj.x.head(m);
          any = true;
        }
      }
      Vector y = any ? y_union : Vector(main.x.head(m));
      y = project_b_perp(sys.b, y);
      if (auto cert = try_verify(sys, y, opt.tol)) {
        SlaterVerdict out;
        out.status = SlaterStatus::Fails;
        out.certificate = std::move(*cert);
        return out;
      }
      return undetermined("LP found a positive optimum but the multiplier failed verification");
    }
    if (v > kCertZeroTol)
      return undetermined("certificate LP optimum sits in the ambiguous band");
  }

  // No multiplier exists; search for a maximum-margin interior witness.
  lp::Problem wp = lp::make_problem(n + 1);
  for (int j = 0; j < n; ++j) {
    wp.lower(j) = -kBox;
    wp.upper(j) = kBox;
  }
  wp.lower(n) = -kBox;
  wp.upper(n) = 1.0;
  wp.c = Vector::Zero(n + 1);
  wp.c(n) = -1.0;  // max t
  for (int i = 0; i < m; ++i) {
    Vector a = Vector::Zero(n + 1);
    a.head(n) = view.A.row(i);
    lp::add_row(wp, a, lp::Sense::Eq, sys.b(i));
  }
  for (int j = 0; j < n; ++j) {
    Vector a = Vector::Zero(n + 1);
    a(j) = 1.0;
    a(n) = -1.0;
    lp::add_row(wp, a, lp::Sense::Ge, 0.0);  // x_j >= t
  }
  const lp::Solution ws = lp::solve(wp);
  if (ws.status != lp::Status::Optimal)
    return undetermined("witness LP did not reach an optimum");
  const double t = -ws.objective;
  if (t < kInteriorMargin)
    return undetermined("no multiplier exists but the inscribed margin is only " +
                        std::to_string(t));
  // Shrink: re-minimize the coordinate sum at (almost) the achieved margin so
  // the reported witness sits at data scale instead of at the LP box.
  Vector xw = ws.x.head(n);
  {
    lp::Problem sp = lp::make_problem(n);
    const double floor_v = 0.999 * std::min(t, 1.0);
    for (int j = 0; j < n; ++j) {
      sp.lower(j) = floor_v;
      sp.upper(j) = kBox;
    }
    sp.c = Vector::Ones(n);
    for (int i = 0; i < m; ++i)
      lp::add_row(sp, Vector(view.A.row(i)), lp::Sense::Eq, sys.b(i));
    const lp::Solution ss = lp::solve(sp);
    if (ss.status == lp::Status::Optimal) xw = ss.x;
  }
  if (auto w = validate_witness(sys, view, xw, opt.tol)) {
    SlaterVerdict out;
    out.status = SlaterStatus::StrictlyFeasible;
    out.witness = std::move(*w);
    return out;
  }
  if (auto w = validate_witness(sys, view, ws.x.head(n), opt.tol)) {
    SlaterVerdict out;
    out.status = SlaterStatus::StrictlyFeasible;
    out.witness = std::move(*w);
    return out;
  }
  return undetermined("witness candidate failed relative-interior validation");
}

// --- eigenvalue route --------------------------------------------------------

namespace {

struct EigRouteState {
  const ConicSystem* sys = nullptr;
  RestrictedView view;
  Vector tvec;               // trace functional on restricted coordinates
  std::vector<Vector> cuts;  // accumulated valid inequalities <c, w> >= 0
};

// Projected supergradient ascent on y -> min-block-margin(A'^T y) over the
// unit ball intersected with b-perp. Step length 1/sqrt(k).
Vector supergradient_best(EigRouteState& st, const AuxOptions& opt, double* best_margin) {
  const int m = st.sys->m();
  Vector best = Vector::Zero(m);
  *best_margin = -kInf;
  for (int start = 0; start < opt.supergrad_starts; ++start) {
    std::mt19937 rng(opt.seed * 7919u + static_cast<unsigned>(start) * 104729u + 13u);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector y(m);
    for (int i = 0; i < m; ++i) y(i) = gauss(rng);
    y = project_b_perp(st.sys->b, y);
    if (y.norm() < 1e-12) continue;
    y.normalize();
    for (int k = 1; k <= opt.supergrad_iters; ++k) {
      const MarginEval ev = eval_margins(st.view.cone, st.view.A.transpose() * y, -kInf);
      if (ev.margin > *best_margin && ev.wnorm > 1e-12) {
        *best_margin = ev.margin;
        best = y;
      }
      if (ev.worst_cut.size() == 0) break;
      Vector g = project_b_perp(st.sys->b, st.view.A * ev.worst_cut);
      const double gn = g.norm();
      if (gn < 1e-14) break;
      y += (1.0 / std::sqrt(static_cast<double>(k))) * (g / gn);
      y = project_b_perp(st.sys->b, y);
      const double yn = y.norm();
      if (yn > 1.0) y /= yn;
    }
    const MarginEval fin = eval_margins(st.view.cone, st.view.A.transpose() * y, 0.0);
    for (const Vector& c : fin.cuts) st.cuts.push_back(c);
  }
  return best;
}

// max <trace, A'^T y> over the cut outer approximation of the certificate set.
// extra_eq rows pin <c, A'^T y> = 0 during polishing.
lp::Solution solve_trace_lp(const EigRouteState& st, const std::vector<Vector>& extra_eq) {
  const int m = st.sys->m();
  lp::Problem p = lp::make_problem(m);
  for (int i = 0; i < m; ++i) {
    p.lower(i) = -1.0;
    p.upper(i) = 1.0;
  }
  p.c = -(st.view.A * st.tvec);
  if (!effectively_zero_b(st.sys->b)) lp::add_row(p, st.sys->b, lp::Sense::Eq, 0.0);
  for (const Vector& c : st.cuts) lp::add_row(p, st.view.A * c, lp::Sense::Ge, 0.0);
  for (const Vector& c : extra_eq) lp::add_row(p, st.view.A * c, lp::Sense::Eq, 0.0);
  return lp::solve(p);
}

// Newton-like refinement: pin the near-null structure of W(y) with equality
// cuts, re-maximize the trace, repeat. Converges quadratically to a face of
// the certificate cone when one is nearby.
std::optional<Vector> polish_certificate(EigRouteState& st, Vector y,
                                         const TolerancePolicy& tol) {
  for (int round = 0; round < 6; ++round) {
    const Vector w = st.view.A.transpose() * y;
    const MarginEval ev = eval_margins(st.view.cone, w, -kInf);
    const double scale = std::max(1.0, ev.wnorm);
    if (ev.margin >= -0.5 * tol.psd_tol * scale && ev.wnorm > 1e-10) return y;

    const double split = 1e-2 * scale;
    std::vector<Vector> eq;
    const int ad = st.view.cone.ambient_dim();
    auto embed = [&](int off, const Vector& local) {
      Vector c = Vector::Zero(ad);
      c.segment(off, local.size()) = local;
      return c;
    };
    for (size_t b = 0; b < st.view.cone.blocks.size(); ++b) {
      const ConeBlock& blk = st.view.cone.blocks[b];
      if (blk.n == 0) continue;
      const int off = st.view.cone.block_offset(static_cast<int>(b));
      switch (blk.kind) {
        case ConeClass::Orthant:
          for (int j = 0; j < blk.n; ++j)
            if (w(off + j) < split) {
              Vector e = Vector::Zero(blk.n);
              e(j) = 1.0;
              eq.push_back(embed(off, e));
            }
          break;
        case ConeClass::Psd: {
          const SymEig eig = sym_eigendecomposition(smat(w.segment(off, blk.ambient_dim())));
          std::vector<int> low;
          for (int j = 0; j < blk.n; ++j)
            if (eig.eigenvalues(j) < split) low.push_back(j);
          static const double r2 = std::sqrt(2.0);
          for (size_t a = 0; a < low.size(); ++a)
            for (size_t c2 = a; c2 < low.size(); ++c2) {
              const Vector ua = eig.eigenvectors.col(low[a]);
              const Vector uc = eig.eigenvectors.col(low[c2]);
              Matrix e = a == c2 ? Matrix(ua * ua.transpose())
                                 : Matrix((ua * uc.transpose() + uc * ua.transpose()) / r2);
              eq.push_back(embed(off, svec(e)));
            }
          break;
        }
        case ConeClass::SecondOrder: {
          const Vector seg = w.segment(off, blk.n);
          const double tail = seg.tail(blk.n - 1).norm();
          if (seg.norm() < split) {
            for (int j = 0; j < blk.n; ++j) {
              Vector e = Vector::Zero(blk.n);
              e(j) = 1.0;
              eq.push_back(embed(off, e));
            }
          } else if (seg(0) - tail < split && tail > 1e-14) {
            Vector c = Vector::Zero(blk.n);
            c(0) = 1.0;
            c.tail(blk.n - 1) = -seg.tail(blk.n - 1) / tail;
            eq.push_back(embed(off, c));
          }
          break;
        }
        case ConeClass::Exponential:
          return std::nullopt;
      }
    }
    const lp::Solution sol = solve_trace_lp(st, eq);
    if (sol.status != lp::Status::Optimal || -sol.objective <= kTraceTol) return std::nullopt;
    y = project_b_perp(st.sys->b, sol.x);
  }
  const MarginEval fin = eval_margins(st.view.cone, st.view.A.transpose() * y, -kInf);
  if (fin.margin >= -tol.psd_tol * std::max(1.0, fin.wnorm) && fin.wnorm > 1e-10) return y;
  return std::nullopt;
}

// Shrinks an accepted witness by minimizing the trace while pinning the cut
// model at most of the achieved margin, then validates. A small witness keeps
// downstream pairings and reports near unit scale; if the shrink LP stalls or
// its point fails validation, the original witness is used unchanged.
std::optional<Point> finish_witness(EigRouteState& st, const std::vector<Vector>& wcuts,
                                    const Vector& x, double margin,
                                    const TolerancePolicy& tol, std::string* note) {
  const int m = st.sys->m();
  const int d = static_cast<int>(st.view.A.cols());
  lp::Problem p = lp::make_problem(d);
  const double box = std::max(1.0, 2.0 * sup_norm(x));
  for (int j = 0; j < d; ++j) {
    p.lower(j) = -box;
    p.upper(j) = box;
  }
  p.c = st.tvec;  // min trace
  for (int i = 0; i < m; ++i)
    lp::add_row(p, Vector(st.view.A.row(i)), lp::Sense::Eq, st.sys->b(i));
  const double pinned = 0.9 * margin;
  for (const Vector& c : wcuts) lp::add_row(p, c, lp::Sense::Ge, pinned * c.norm());
  const lp::Solution sol = lp::solve(p);
  if (sol.status == lp::Status::Optimal &&
      eval_margins(st.view.cone, sol.x, -kInf).margin >= kInteriorMargin) {
    if (auto w = validate_witness(*st.sys, st.view, sol.x, tol)) return w;
  }
  if (auto w = validate_witness(*st.sys, st.view, x, tol)) return w;
  *note = "witness candidate failed relative-interior validation";
  return std::nullopt;
}

// Maximum-margin witness via the same cut machinery on the primal side. The
// restricted cone classes are self-dual, so the certificate-side cuts in
// st.cuts are valid witness inequalities too and warm-start the model.
std::optional<Point> eig_route_witness(EigRouteState& st, const TolerancePolicy& tol,
                                       std::string* note) {
  const int m = st.sys->m();
  const int d = static_cast<int>(st.view.A.cols());
  std::vector<Vector> wcuts = seed_cuts(st.view.cone);
  for (const Vector& c : st.cuts) wcuts.push_back(c);

  // Data-driven variable box: a least-squares solution fixes the natural
  // scale of the affine slice, so the LP cannot park the witness at an
  // arbitrary artificial bound far from the data.
  Eigen::JacobiSVD<Matrix> lsq(st.view.A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector xls = lsq.solve(st.sys->b);
  const double box = std::max(10.0, 100.0 * sup_norm(xls));

  Vector x_best;
  double best_margin = -kInf;
  auto remember = [&](const Vector& x, double margin) {
    if (margin > best_margin) {
      best_margin = margin;
      x_best = x;
    }
  };

  for (int round = 0; round < 120; ++round) {
    lp::Problem p = lp::make_problem(d + 1);
    for (int j = 0; j < d; ++j) {
      p.lower(j) = -box;
      p.upper(j) = box;
    }
    p.lower(d) = -box;
    p.upper(d) = 1.0;
    p.c = Vector::Zero(d + 1);
    p.c(d) = -1.0;  // max t
    for (int i = 0; i < m; ++i) {
      Vector a = Vector::Zero(d + 1);
      a.head(d) = st.view.A.row(i);
      lp::add_row(p, a, lp::Sense::Eq, st.sys->b(i));
    }
    for (const Vector& c : wcuts) {
      Vector a = Vector::Zero(d + 1);
      a.head(d) = c;
      a(d) = -c.norm();  // margin in units of the cut scale
      lp::add_row(p, a, lp::Sense::Ge, 0.0);
    }
    const lp::Solution sol = lp::solve(p);
    if (sol.status != lp::Status::Optimal) {
      *note = "witness LP did not reach an optimum";
      return std::nullopt;
    }
    const double t = -sol.objective;
    if (t < kInteriorMargin) {
      *note = "maximum inscribed margin is only " + std::to_string(t);
      return std::nullopt;
    }
    const Vector x = sol.x.head(d);
    const MarginEval ev = eval_margins(st.view.cone, x, 0.5 * t);
    remember(x, ev.margin);
    // LP vertices chatter between cuts; the segment toward the incumbent
    // often reaches deeper into the cone than either endpoint.
    if (x_best.size() == d) {
      const Vector mid = 0.5 * (x + x_best);
      remember(mid, eval_margins(st.view.cone, mid, -kInf).margin);
    }
    if (ev.margin >= kInteriorMargin &&
        (ev.margin >= t - 1e-7 * std::max(1.0, t) || ev.margin >= 0.5 * t))
      return finish_witness(st, wcuts, x, ev.margin, tol, note);
    if (ev.cuts.empty() && ev.worst_cut.size() > 0) wcuts.push_back(ev.worst_cut);
    for (const Vector& c : ev.cuts) wcuts.push_back(c);
  }
  // Rounds exhausted. A relative-interior point only needs clearance, not
  // maximality, so the best iterate stands if it clears the floor.
  if (best_margin >= kInteriorMargin && x_best.size() == d)
    return finish_witness(st, wcuts, x_best, best_margin, tol, note);
  *note = "witness refinement did not converge";
  return std::nullopt;
}

SlaterVerdict eig_route(const ConicSystem& sys, const AuxOptions& opt,
                        std::vector<ExposingCertificate>* pool) {
  opt.tol.validate();
  EigRouteState st;
  st.sys = &sys;
  st.view = face_restrict(sys);
  if (st.view.cone.has(ConeClass::Exponential))
    throw std::invalid_argument("solve_psd: exponential blocks are out of scope here");
  if (st.view.cone.ambient_dim() == 0) {
    // Zero-dimensional face: the only candidate point is the origin.
    if (sup_norm(sys.b) <= opt.tol.zero_tol * std::max(1.0, sup_norm(sys.b))) {
      SlaterVerdict out;
      out.status = SlaterStatus::StrictlyFeasible;
      out.witness = zero_point(sys.cone);
      return out;
    }
    return undetermined("zero-dimensional face cannot satisfy a nonzero right-hand side");
  }
  st.tvec = trace_vector(st.view.cone);
  st.cuts = seed_cuts(st.view.cone);

  double sg_margin = -kInf;
  const Vector sg_best = supergradient_best(st, opt, &sg_margin);

  // Scale of the restricted operator. Solver iterates on a nearly strictly
  // feasible system can carry A^T y of roundoff size that still clears the
  // absolute nontriviality floor; gate solver-found multipliers by the
  // operator's own magnitude instead. (Caller-supplied candidates are
  // verified elsewhere, verbatim.)
  double op_scale = 0.0;
  for (int j = 0; j < st.view.A.cols(); ++j)
    op_scale = std::max(op_scale, st.view.A.col(j).norm());

  // Span floor below which a verified multiplier is treated as suspect: at
  // that size it usually encodes the face's own inaccuracy rather than a
  // genuine reduction, so a validated witness takes precedence if one exists.
  const double suspect_span = 1e-4 * std::max(1.0, op_scale);

  auto accept = [&](Vector y) -> std::optional<ExposingCertificate> {
    y = project_b_perp(sys.b, y);
    auto cert = try_verify(sys, y, opt.tol);
    if (cert && cert->span_component < kCertPosTol * std::max(1.0, op_scale))
      return std::nullopt;
    if (cert && pool && cert->span_component >= suspect_span) {
      bool dup = false;
      for (const ExposingCertificate& c : *pool) dup = dup || same_direction(c.y, cert->y);
      if (!dup) pool->push_back(*cert);
    }
    return cert;
  };

  auto decide_fails = [&](ExposingCertificate cert) -> SlaterVerdict {
    if (cert.span_component < suspect_span) {
      std::string note;
      if (auto w = eig_route_witness(st, opt.tol, &note)) {
        SlaterVerdict out;
        out.status = SlaterStatus::StrictlyFeasible;
        out.witness = std::move(*w);
        return out;
      }
    }
    SlaterVerdict out;
    out.status = SlaterStatus::Fails;
    out.certificate = std::move(cert);
    return out;
  };

  // Cutting-plane certificate search: the LP value is an upper bound on the
  // trace of any valid multiplier's matrix, so a tiny value proves the
  // certificate cone is trivial.
  bool no_cert_proved = false;
  double last_lp_value = kInf;
  for (int round = 0; round < opt.cutting_rounds; ++round) {
    const lp::Solution sol = solve_trace_lp(st, {});
    if (sol.status != lp::Status::Optimal) break;
    last_lp_value = -sol.objective;
    if (last_lp_value <= kTraceTol) {
      no_cert_proved = true;
      break;
    }
    const Vector y = project_b_perp(sys.b, sol.x);
    const Vector w = st.view.A.transpose() * y;
    const MarginEval ev = eval_margins(st.view.cone, w, 0.0);
    const double scale = std::max(1.0, ev.wnorm);
    if (ev.margin >= -opt.tol.psd_tol * scale && ev.wnorm > 1e-10) {
      if (auto cert = accept(y)) return decide_fails(std::move(*cert));
    }
    if (ev.margin < 0.0) {
      if (auto polished = polish_certificate(st, y, opt.tol)) {
        if (auto cert = accept(*polished)) return decide_fails(std::move(*cert));
      }
    }
    if (ev.cuts.empty() && ev.worst_cut.size() > 0) st.cuts.push_back(ev.worst_cut);
    for (const Vector& c : ev.cuts) st.cuts.push_back(c);
  }

  // Fall back to the ascent iterate if the cutting loop missed it.
  if (!no_cert_proved && sg_margin > -kInf && sg_best.norm() > 0) {
    const MarginEval ev = eval_margins(st.view.cone, st.view.A.transpose() * sg_best, -kInf);
    if (ev.margin >= -opt.tol.psd_tol * std::max(1.0, ev.wnorm)) {
      if (auto cert = accept(sg_best)) return decide_fails(std::move(*cert));
    }
    if (auto polished = polish_certificate(st, sg_best, opt.tol)) {
      if (auto cert = accept(*polished)) return decide_fails(std::move(*cert));
    }
  }

  // No certificate found; a validated relative-interior witness settles the
  // other side soundly regardless of how the search above ended.
  std::string note;
  if (auto w = eig_route_witness(st, opt.tol, &note)) {
    SlaterVerdict out;
    out.status = SlaterStatus::StrictlyFeasible;
    out.witness = std::move(*w);
    return out;
  }
  std::ostringstream msg;
  msg << "no verified multiplier (best ascent margin " << sg_margin << ", trace bound "
      << last_lp_value << ") and no validated witness (" << note << ")";
  return undetermined(msg.str());
}

}  // namespace

SlaterVerdict solve_psd(const ConicSystem& sys, const AuxOptions& opt) {
  return eig_route(sys, opt, nullptr);
}

// --- general search ----------------------------------------------------------

SlaterVerdict search_certificate_general(const ConicSystem& sys, const AuxOptions& opt) {
  opt.tol.validate();
  const int m = sys.m();
  for (const Vector& cand : opt.candidates) {
    if (cand.size() != m) continue;
    if (auto cert = try_verify(sys, cand, opt.tol)) {
      SlaterVerdict out;
      out.status = SlaterStatus::Fails;
      out.certificate = std::move(*cert);
      return out;
    }
  }

  // Deterministic lattice over an orthonormal basis of b-perp, lexicographic
  // in the grid coordinates.
  Matrix basis;
  if (effectively_zero_b(sys.b)) {
    basis = Matrix::Identity(m, m);
  } else {
    basis = orthonormal_nullspace(Matrix(sys.b.transpose()), opt.tol);
  }
  const int d = static_cast<int>(basis.cols());
  const int k = std::max(1, static_cast<int>(std::lround(1.0 / opt.lattice_resolution)));
  const int side = 2 * k + 1;
  double total = 1.0;
  for (int i = 0; i < d; ++i) total *= side;

  long tried = 0;
  auto consider = [&](const Vector& g) -> std::optional<ExposingCertificate> {
    if (g.cwiseAbs().maxCoeff() == 0.0) return std::nullopt;
    ++tried;
    return try_verify(sys, basis * g, opt.tol);
  };

  std::optional<ExposingCertificate> hit;
  if (d == 0) {
    // b spans every multiplier direction (m == rank(b)): the orthogonality
    // requirement leaves nothing to search.
  } else if (total <= 20000.0) {
    // Full grid {-k..k}^d in lexicographic order.
    Vector g = Vector::Constant(d, -static_cast<double>(k));
    while (!hit) {
      hit = consider(g);
      if (hit) break;
      int pos = d - 1;
      while (pos >= 0 && g(pos) >= k) {
        g(pos) = -static_cast<double>(k);
        --pos;
      }
      if (pos < 0) break;
      g(pos) += 1.0;
    }
  } else {
    // Sparse pattern: every grid vector supported on at most three axes.
    std::vector<std::vector<int>> supports;
    for (int i = 0; i < d && !hit; ++i)
      for (int j = i; j < d && !hit; ++j)
        for (int l = j; l < d && !hit; ++l) {
          Vector g = Vector::Zero(d);
          std::vector<int> idx{i, j, l};
          idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
          const int nn = static_cast<int>(idx.size());
          std::vector<int> v(nn, -k);
          while (!hit) {
            for (int q = 0; q < nn; ++q) g(idx[q]) = v[q];
            hit = consider(g);
            if (hit) break;
            int pos = nn - 1;
            while (pos >= 0 && v[pos] >= k) {
              v[pos] = -k;
              --pos;
            }
            if (pos < 0) break;
            ++v[pos];
          }
        }
  }

  if (hit) {
    SlaterVerdict out;
    out.status = SlaterStatus::Fails;
    out.certificate = std::move(*hit);
    return out;
  }
  std::ostringstream msg;
  msg << "no certificate among " << opt.candidates.size() << " candidates and " << tried
      << " lattice directions; a general search cannot certify strict feasibility";
  return undetermined(msg.str());
}

// --- dispatch ----------------------------------------------------------------

SlaterVerdict solve_auto(const ConicSystem& sys, const AuxOptions& opt) {
  const ConeSpec rspec = restricted_cone_spec(sys.cone, sys.current_face);
  if (rspec.has(ConeClass::Exponential)) return search_certificate_general(sys, opt);
  if (rspec.pure(ConeClass::Orthant) || rspec.ambient_dim() == 0) return solve_orthant(sys, opt);
  return solve_psd(sys, opt);
}

// --- certificate pools for the minimal-drop strategy -------------------------

std::vector<ExposingCertificate> certificate_pool(const ConicSystem& sys,
                                                  const AuxOptions& opt) {
  std::vector<ExposingCertificate> pool;
  auto add = [&](const Vector& y) {
    if (auto cert = try_verify(sys, project_b_perp(sys.b, y), opt.tol)) {
      for (const ExposingCertificate& c : pool)
        if (same_direction(c.y, cert->y)) return;
      pool.push_back(std::move(*cert));
    }
  };
  auto add_verbatim = [&](const Vector& y) {
    if (y.size() != sys.m()) return;
    if (auto cert = try_verify(sys, y, opt.tol)) {
      for (const ExposingCertificate& c : pool)
        if (same_direction(c.y, cert->y)) return;
      pool.push_back(std::move(*cert));
    }
  };
  for (const Vector& cand : opt.candidates) add_verbatim(cand);

  const ConeSpec rspec = restricted_cone_spec(sys.cone, sys.current_face);
  if (rspec.has(ConeClass::Exponential)) {
    const SlaterVerdict v = search_certificate_general(sys, opt);
    if (v.certificate) add_verbatim(v.certificate->y);
    return pool;
  }

  const RestrictedView view = face_restrict(sys);
  const int m = sys.m();
  const int n = static_cast<int>(view.A.cols());
  if (rspec.pure(ConeClass::Orthant) && n > 0) {
    lp::Problem p = build_cert_lp(view.A, sys.b);
    Vector y_union = Vector::Zero(m);
    bool any = false;
    for (int j = 0; j < n; ++j) {
      p.c = Vector::Zero(m + n);
      p.c(m + j) = -1.0;
      const lp::Solution sj = lp::solve(p);
      if (sj.status == lp::Status::Optimal && -sj.objective > kCertPosTol) {
        add(sj.x.head(m));
        y_union += sj.x.head(m);
        any = true;
      }
    }
    if (any) add(y_union);
    // Minimal-drop candidates: expose coordinate j while keeping the rest of
    // A'^T y as small as possible.
    for (int j = 0; j < n; ++j) {
      lp::Problem q = lp::make_problem(m);
      for (int i = 0; i < m; ++i) {
        q.lower(i) = -kBox;
        q.upper(i) = kBox;
      }
      q.c = Vector::Zero(m);
      for (int l = 0; l < n; ++l)
        if (l != j) q.c += Vector(view.A.col(l));
      for (int l = 0; l < n; ++l)
        lp::add_row(q, view.A.col(l), lp::Sense::Ge, 0.0);
      lp::add_row(q, view.A.col(j), lp::Sense::Eq, 1.0);
      if (!effectively_zero_b(sys.b)) lp::add_row(q, sys.b, lp::Sense::Eq, 0.0);
      const lp::Solution sj = lp::solve(q);
      if (sj.status == lp::Status::Optimal) add(sj.x);
    }
    return pool;
  }

  // Eigenvalue route: collect the solver's certificate plus per-start
  // polished ascent iterates.
  std::vector<ExposingCertificate> inner;
  const SlaterVerdict v = eig_route(sys, opt, &inner);
  for (const ExposingCertificate& c : inner) add_verbatim(c.y);
  if (v.certificate) add_verbatim(v.certificate->y);
  for (int s = 0; s < opt.supergrad_starts; ++s) {
    AuxOptions one = opt;
    one.seed = opt.seed + 1000u * static_cast<unsigned>(s + 1);
    one.supergrad_starts = 1;
    std::vector<ExposingCertificate> got;
    const SlaterVerdict vs = eig_route(sys, one, &got);
    if (vs.certificate) add_verbatim(vs.certificate->y);
    for (const ExposingCertificate& c : got) add_verbatim(c.y);
    if (pool.size() >= 6) break;
  }
  return pool;
}

}  // namespace conereg
