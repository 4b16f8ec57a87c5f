#include "conereg/cones.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace conereg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kExpArgCap = 500.0;  // exp() overflow guard

double sup_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// --- orthant ----------------------------------------------------------

bool orthant_contains(const Vector& x, const TolerancePolicy& tol) {
  if (x.size() == 0) return true;
  return x.minCoeff() >= -tol.zero_tol * std::max(1.0, sup_norm(x));
}

bool orthant_interior(const Vector& x, const TolerancePolicy& tol) {
  if (x.size() == 0) return true;
  return x.minCoeff() > tol.zero_tol * std::max(1.0, sup_norm(x));
}

// --- psd ----------------------------------------------------------------

double psd_min_eig(const Matrix& s) {
  if (s.rows() == 0) return kInf;
  return sym_eigendecomposition(s).eigenvalues(0);
}

bool psd_contains(const Matrix& s, const TolerancePolicy& tol) {
  if (s.rows() == 0) return true;
  return psd_min_eig(s) >= -tol.psd_tol * std::max(1.0, s.norm());
}

bool psd_interior(const Matrix& s, const TolerancePolicy& tol) {
  if (s.rows() == 0) return true;
  return psd_min_eig(s) > tol.psd_tol * std::max(1.0, s.norm());
}

// --- second order -------------------------------------------------------

double soc_margin(const Vector& x) {  // x0 - ||xbar||
  return x(0) - x.tail(x.size() - 1).norm();
}

bool soc_contains(const Vector& x, const TolerancePolicy& tol) {
  return soc_margin(x) >= -tol.psd_tol * std::max(1.0, x.norm());
}

bool soc_interior(const Vector& x, const TolerancePolicy& tol) {
  return soc_margin(x) > tol.psd_tol * std::max(1.0, x.norm());
}

// --- exponential ----------------------------------------------------------
// K = cl{(x,y,z): y > 0, z >= y*exp(x/y)}
//   = {y > 0, z >= y*exp(x/y)} union {x <= 0, y = 0, z >= 0}
// K* = {(u,v,w): u < 0, e*w >= -u*exp(v/u)} union {u = 0, v >= 0, w >= 0}

bool exp_contains(const Vector& p, const TolerancePolicy& tol) {
  const double x = p(0), y = p(1), z = p(2);
  const double s = std::max(1.0, sup_norm(p));
  if (y > tol.zero_tol * s) {
    const double t = x / y;
    if (t > kExpArgCap) return false;
    const double rhs = y * std::exp(t);
    if (!std::isfinite(rhs)) return false;
    return z >= rhs - tol.psd_tol * std::max({1.0, std::abs(z), rhs});
  }
  if (y >= -tol.zero_tol * s)
    return x <= tol.zero_tol * s && z >= -tol.zero_tol * s;
  return false;
}

bool exp_interior(const Vector& p, const TolerancePolicy& tol) {
  const double x = p(0), y = p(1), z = p(2);
  const double s = std::max(1.0, sup_norm(p));
  if (y <= tol.zero_tol * s) return false;
  const double t = x / y;
  if (t > kExpArgCap) return false;
  const double rhs = y * std::exp(t);
  return std::isfinite(rhs) && z - rhs > tol.psd_tol * std::max({1.0, std::abs(z), rhs});
}

bool exp_dual_contains(const Vector& p, const TolerancePolicy& tol) {
  const double u = p(0), v = p(1), w = p(2);
  const double s = std::max(1.0, sup_norm(p));
  if (u < -tol.zero_tol * s) {
    const double t = v / u;
    if (t > kExpArgCap) return false;
    const double rhs = -u * std::exp(t);
    if (!std::isfinite(rhs)) return false;
    const double lhs = std::exp(1.0) * w;
    return lhs >= rhs - tol.psd_tol * std::max({1.0, std::abs(lhs), rhs});
  }
  if (u <= tol.zero_tol * s)
    return v >= -tol.zero_tol * s && w >= -tol.zero_tol * s;
  return false;
}

Vector exp_smooth_ray_dir(double t) {
  // unit generator of the boundary ray through (t, 1, e^t)
  Vector d(3);
  if (t > 40.0) {  // e^t dominates; the direction degenerates toward (0,0,1)
    d << 0.0, 0.0, 1.0;
    return d;
  }
  d << t, 1.0, std::exp(t);
  return d / d.norm();
}

enum class ExpRayTag { AxisZ, AxisNegX, Smooth };

ExpRayTag classify_exp_ray(const Vector& dir) {
  if (dir(1) > 1e-12) return ExpRayTag::Smooth;
  if (dir(2) > 0.5) return ExpRayTag::AxisZ;
  return ExpRayTag::AxisNegX;
}

// --- misc ---------------------------------------------------------------

const OrthantFace& as_orthant(const BlockFace& f) { return std::get<OrthantFace>(f); }
const PsdFace& as_psd(const BlockFace& f) { return std::get<PsdFace>(f); }
const SocFace& as_soc(const BlockFace& f) { return std::get<SocFace>(f); }
const ExpFace& as_exp(const BlockFace& f) { return std::get<ExpFace>(f); }

void check_face_shape(const ConeSpec& spec, const FaceRep& f, const char* what) {
  if (f.blocks.size() != spec.blocks.size())
    throw std::invalid_argument(std::string(what) + ": face/spec block count mismatch");
}

void check_point_shape(const ConeSpec& spec, const Point& p, const char* what) {
  if (p.blocks.size() != spec.blocks.size())
    throw std::invalid_argument(std::string(what) + ": point/spec block count mismatch");
  for (size_t b = 0; b < spec.blocks.size(); ++b) {
    const ConeBlock& blk = spec.blocks[b];
    if (blk.kind == ConeClass::Psd) {
      const Matrix& m = std::get<Matrix>(p.blocks[b]);
      if (m.rows() != blk.n || m.cols() != blk.n)
        throw std::invalid_argument(std::string(what) + ": psd block shape mismatch");
      require_finite(m, what);
    } else {
      const Vector& v = std::get<Vector>(p.blocks[b]);
      if (static_cast<int>(v.size()) != blk.n)
        throw std::invalid_argument(std::string(what) + ": vector block shape mismatch");
      require_finite(v, what);
    }
  }
}

}  // namespace

// --- spec ---------------------------------------------------------------

int ConeBlock::ambient_dim() const {
  return kind == ConeClass::Psd ? svec_dim(n) : n;
}

int ConeSpec::ambient_dim() const {
  int d = 0;
  for (const ConeBlock& b : blocks) d += b.ambient_dim();
  return d;
}

int ConeSpec::block_offset(int b) const {
  int d = 0;
  for (int i = 0; i < b; ++i) d += blocks[i].ambient_dim();
  return d;
}

bool ConeSpec::pure(ConeClass k) const {
  bool any = false;
  for (const ConeBlock& b : blocks) {
    if (b.n == 0) continue;
    if (b.kind != k) return false;
    any = true;
  }
  return any;
}

bool ConeSpec::has(ConeClass k) const {
  for (const ConeBlock& b : blocks)
    if (b.kind == k && b.n > 0) return true;
  return false;
}

void ConeSpec::validate(bool allow_empty_blocks) const {
  if (blocks.empty()) throw std::invalid_argument("ConeSpec: no blocks");
  for (const ConeBlock& b : blocks) {
    const int min_n = allow_empty_blocks ? 0 : 1;
    if (b.n < min_n) throw std::invalid_argument("ConeSpec: block size below minimum");
    if (b.n == 0 && b.kind != ConeClass::Orthant)
      throw std::invalid_argument("ConeSpec: only orthant blocks may be empty");
    if (b.kind == ConeClass::Exponential && b.n != 3)
      throw std::invalid_argument("ConeSpec: exponential blocks are 3-dimensional");
    if (b.kind == ConeClass::SecondOrder && b.n > 0 && b.n < 2)
      throw std::invalid_argument("ConeSpec: second-order blocks need n >= 2");
  }
}

// --- flattening -----------------------------------------------------------

int svec_dim(int n) { return n * (n + 1) / 2; }

Vector svec(const Matrix& s) {
  const int n = static_cast<int>(s.rows());
  static const double r2 = std::sqrt(2.0);
  Vector v(svec_dim(n));
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i)
      v(k++) = (i == j) ? s(i, j) : r2 * 0.5 * (s(i, j) + s(j, i));
  return v;
}

Matrix smat(const Vector& v) {
  const int d = static_cast<int>(v.size());
  const int n = static_cast<int>(std::round((std::sqrt(8.0 * d + 1.0) - 1.0) / 2.0));
  if (svec_dim(n) != d) throw std::invalid_argument("smat: length is not a triangular number");
  static const double r2 = std::sqrt(2.0);
  Matrix s(n, n);
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) {
      const double val = v(k++);
      if (i == j)
        s(i, j) = val;
      else
        s(i, j) = s(j, i) = val / r2;
    }
  return s;
}

Vector point_to_ambient(const ConeSpec& spec, const Point& p) {
  check_point_shape(spec, p, "point_to_ambient");
  Vector x(spec.ambient_dim());
  int off = 0;
  for (size_t b = 0; b < spec.blocks.size(); ++b) {
    const int d = spec.blocks[b].ambient_dim();
    if (spec.blocks[b].kind == ConeClass::Psd)
      x.segment(off, d) = svec(p.mat(static_cast<int>(b)));
    else
      x.segment(off, d) = p.vec(static_cast<int>(b));
    off += d;
  }
  return x;
}

Point point_from_ambient(const ConeSpec& spec, const Vector& x) {
  if (static_cast<int>(x.size()) != spec.ambient_dim())
    throw std::invalid_argument("point_from_ambient: dimension mismatch");
  Point p;
  int off = 0;
  for (const ConeBlock& blk : spec.blocks) {
    const int d = blk.ambient_dim();
    if (blk.kind == ConeClass::Psd)
      p.blocks.emplace_back(smat(x.segment(off, d)));
    else
      p.blocks.emplace_back(Vector(x.segment(off, d)));
    off += d;
  }
  return p;
}

Point zero_point(const ConeSpec& spec) {
  Point p;
  for (const ConeBlock& blk : spec.blocks) {
    if (blk.kind == ConeClass::Psd)
      p.blocks.emplace_back(Matrix(Matrix::Zero(blk.n, blk.n)));
    else
      p.blocks.emplace_back(Vector(Vector::Zero(blk.n)));
  }
  return p;
}

Point interior_direction(const ConeSpec& spec) {
  Point p;
  for (const ConeBlock& blk : spec.blocks) {
    switch (blk.kind) {
      case ConeClass::Orthant:
        p.blocks.emplace_back(Vector(Vector::Ones(blk.n)));
        break;
      case ConeClass::Psd:
        p.blocks.emplace_back(Matrix(Matrix::Identity(blk.n, blk.n)));
        break;
      case ConeClass::SecondOrder: {
        Vector v = Vector::Zero(blk.n);
        if (blk.n > 0) v(0) = 1.0;
        p.blocks.emplace_back(std::move(v));
        break;
      }
      case ConeClass::Exponential: {
        Vector v(3);
        v << 0.0, 1.0, 3.0;  // z > y*e^{x/y} = 1
        p.blocks.emplace_back(std::move(v));
        break;
      }
    }
  }
  return p;
}

// --- membership -----------------------------------------------------------

bool contains(const ConeSpec& spec, const Point& p, const TolerancePolicy& tol) {
  tol.validate();
  check_point_shape(spec, p, "contains");
  for (size_t b = 0; b < spec.blocks.size(); ++b) {
    const ConeBlock& blk = spec.blocks[b];
    if (blk.n == 0) continue;
    switch (blk.kind) {
      case ConeClass::Orthant:
        if (!orthant_contains(p.vec(b), tol)) return false;
        break;
      case ConeClass::Psd:
        if (!psd_contains(p.mat(b), tol)) return false;
        break;
      case ConeClass::SecondOrder:
        if (!soc_contains(p.vec(b), tol)) return false;
        break;
      case ConeClass::Exponential:
        if (!exp_contains(p.vec(b), tol)) return false;
        break;
    }
  }
  return true;
}

bool dual_contains(const ConeSpec& spec, const Point& p, const TolerancePolicy& tol) {
  tol.validate();
  check_point_shape(spec, p, "dual_contains");
  for (size_t b = 0; b < spec.blocks.size(); ++b) {
    const ConeBlock& blk = spec.blocks[b];
    if (blk.n == 0) continue;
    switch (blk.kind) {
      case ConeClass::Orthant: {
        const Vector& v = p.vec(b);
        if (v.minCoeff() < -tol.psd_tol * std::max(1.0, sup_norm(v))) return false;
        break;
      }
      case ConeClass::Psd:
        if (!psd_contains(p.mat(b), tol)) return false;
        break;
      case ConeClass::SecondOrder:
        if (!soc_contains(p.vec(b), tol)) return false;
        break;
      case ConeClass::Exponential:
        if (!exp_dual_contains(p.vec(b), tol)) return false;
        break;
    }
  }
  return true;
}

bool in_relative_interior(const ConeSpec& spec, const Point& p, const TolerancePolicy& tol) {
  tol.validate();
  check_point_shape(spec, p, "in_relative_interior");
  for (size_t b = 0; b < spec.blocks.size(); ++b) {
    const ConeBlock& blk = spec.blocks[b];
    if (blk.n == 0) continue;
    switch (blk.kind) {
      case ConeClass::Orthant:
        if (!orthant_interior(p.vec(b), tol)) return false;
        break;
      case ConeClass::Psd:
        if (!psd_interior(p.mat(b), tol)) return false;
        break;
      case ConeClass::SecondOrder:
        if (!soc_interior(p.vec(b), tol)) return false;
        break;
      case ConeClass::Exponential:
        if (!exp_interior(p.vec(b), tol)) return false;
        break;
    }
  }
  return true;
}

double dual_margin(const ConeSpec& spec, const Point& p) {
  check_point_shape(spec, p, "dual_margin");
  double margin = kInf;
  for (size_t b = 0; b < spec.blocks.size(); ++b) {
    const ConeBlock& blk = spec.blocks[b];
    if (blk.n == 0) continue;
    double m = kInf;
    switch (blk.kind) {
      case ConeClass::Orthant: {
        const Vector& v = p.vec(b);
        m = v.minCoeff() / std::max(1.0, sup_norm(v));
        break;
      }
      case ConeClass::Psd: {
        const Matrix& s = p.mat(b);
        m = psd_min_eig(s) / std::max(1.0, s.norm());
        break;
      }
      case ConeClass::SecondOrder: {
        const Vector& v = p.vec(b);
        m = soc_margin(v) / std::max(1.0, v.norm());
        break;
      }
      case ConeClass::Exponential: {
        const Vector& v = p.vec(b);
        const double u = v(0), vv = v(1), w = v(2);
        const double s = std::max(1.0, sup_norm(v));
        double m1 = -kInf, m2 = -kInf;
        if (u < 0.0) {
          const double t = vv / u;
          if (t <= kExpArgCap) {
            const double rhs = -u * std::exp(t);
            if (std::isfinite(rhs))
              m1 = (std::exp(1.0) * w - rhs) / std::max({1.0, std::abs(w), rhs});
          }
        }
        m2 = std::min({-std::abs(u), vv, w}) / s;
        m = std::max(m1, m2);
        break;
      }
    }
    margin = std::min(margin, m);
  }
  return margin;
}

// --- faces ------------------------------------------------------------

FaceRep full_face(const ConeSpec& spec) {
  FaceRep f;
  for (const ConeBlock& blk : spec.blocks) {
    switch (blk.kind) {
      case ConeClass::Orthant: {
        OrthantFace of;
        of.n = blk.n;
        of.alive.resize(blk.n);
        for (int i = 0; i < blk.n; ++i) of.alive[i] = i;
        f.blocks.emplace_back(std::move(of));
        break;
      }
      case ConeClass::Psd:
        f.blocks.emplace_back(PsdFace{Matrix::Identity(blk.n, blk.n)});
        break;
      case ConeClass::SecondOrder:
        f.blocks.emplace_back(SocFace{SocFace::Kind::Full, blk.n, Vector()});
        break;
      case ConeClass::Exponential:
        f.blocks.emplace_back(ExpFace{ExpFace::Kind::Full, Vector()});
        break;
    }
  }
  return f;
}

FaceRep minimal_face(const ConeSpec& spec, const Point& p, const TolerancePolicy& tol) {
  tol.validate();
  if (!contains(spec, p, tol))
    throw std::invalid_argument("minimal_face: point is not in the cone");
  FaceRep f;
  for (size_t b = 0; b < spec.blocks.size(); ++b) {
    const ConeBlock& blk = spec.blocks[b];
    switch (blk.kind) {
      case ConeClass::Orthant: {
        const Vector& x = p.vec(b);
        OrthantFace of;
        of.n = blk.n;
        const double cut = tol.zero_tol * std::max(1.0, sup_norm(x));
        for (int i = 0; i < blk.n; ++i)
          if (x(i) > cut) of.alive.push_back(i);
        f.blocks.emplace_back(std::move(of));
        break;
      }
      case ConeClass::Psd: {
        const Matrix& x = p.mat(b);
        if (blk.n == 0) {
          f.blocks.emplace_back(PsdFace{Matrix(0, 0)});
          break;
        }
        const SymEig eig = sym_eigendecomposition(x);
        const double cut = tol.psd_tol * std::max(1.0, x.norm());
        int first = blk.n;
        for (int i = 0; i < blk.n; ++i)
          if (eig.eigenvalues(i) > cut) {
            first = i;
            break;
          }
        f.blocks.emplace_back(PsdFace{eig.eigenvectors.rightCols(blk.n - first)});
        break;
      }
      case ConeClass::SecondOrder: {
        const Vector& x = p.vec(b);
        const double nrm = x.norm();
        if (nrm <= tol.zero_tol * std::max(1.0, sup_norm(x)) || nrm == 0.0) {
          f.blocks.emplace_back(SocFace{SocFace::Kind::Zero, blk.n, Vector()});
        } else if (soc_margin(x) <= tol.psd_tol * std::max(1.0, nrm)) {
          f.blocks.emplace_back(SocFace{SocFace::Kind::Ray, blk.n, x / nrm});
        } else {
          f.blocks.emplace_back(SocFace{SocFace::Kind::Full, blk.n, Vector()});
        }
        break;
      }
      case ConeClass::Exponential: {
        const Vector& x = p.vec(b);
        const double s = std::max(1.0, sup_norm(x));
        if (x.norm() <= tol.zero_tol) {
          f.blocks.emplace_back(ExpFace{ExpFace::Kind::Zero, Vector()});
        } else if (x(1) > tol.zero_tol * s) {
          const double t = x(0) / x(1);
          const double rhs = t <= kExpArgCap ? x(1) * std::exp(t) : kInf;
          if (std::isfinite(rhs) &&
              x(2) - rhs > tol.psd_tol * std::max({1.0, std::abs(x(2)), rhs}))
            f.blocks.emplace_back(ExpFace{ExpFace::Kind::Full, Vector()});
          else
            f.blocks.emplace_back(ExpFace{ExpFace::Kind::Ray, x / x.norm()});
        } else {
          // y = 0 branch: the polyhedral face and its edges
          if (std::abs(x(0)) <= tol.zero_tol * s) {
            Vector d(3);
            d << 0.0, 0.0, 1.0;
            f.blocks.emplace_back(ExpFace{ExpFace::Kind::Ray, std::move(d)});
          } else if (x(2) <= tol.zero_tol * s) {
            Vector d(3);
            d << -1.0, 0.0, 0.0;
            f.blocks.emplace_back(ExpFace{ExpFace::Kind::Ray, std::move(d)});
          } else {
            f.blocks.emplace_back(ExpFace{ExpFace::Kind::Halfplane, Vector()});
          }
        }
        break;
      }
    }
  }
  return f;
}

int face_dimension(const FaceRep& f) {
  int d = 0;
  for (const BlockFace& bf : f.blocks) {
    if (std::holds_alternative<OrthantFace>(bf)) {
      d += static_cast<int>(as_orthant(bf).alive.size());
    } else if (std::holds_alternative<PsdFace>(bf)) {
      d += svec_dim(static_cast<int>(as_psd(bf).basis.cols()));
    } else if (std::holds_alternative<SocFace>(bf)) {
      const SocFace& sf = as_soc(bf);
      d += sf.kind == SocFace::Kind::Full ? sf.n : (sf.kind == SocFace::Kind::Ray ? 1 : 0);
    } else {
      const ExpFace& ef = as_exp(bf);
      switch (ef.kind) {
        case ExpFace::Kind::Full: d += 3; break;
        case ExpFace::Kind::Halfplane: d += 2; break;
        case ExpFace::Kind::Ray: d += 1; break;
        case ExpFace::Kind::Zero: break;
      }
    }
  }
  return d;
}

bool face_equal(const FaceRep& f, const FaceRep& g, double tol) {
  if (f.blocks.size() != g.blocks.size()) return false;
  for (size_t b = 0; b < f.blocks.size(); ++b) {
    if (f.blocks[b].index() != g.blocks[b].index()) return false;
    if (std::holds_alternative<OrthantFace>(f.blocks[b])) {
      if (as_orthant(f.blocks[b]).alive != as_orthant(g.blocks[b]).alive) return false;
    } else if (std::holds_alternative<PsdFace>(f.blocks[b])) {
      const Matrix& v = as_psd(f.blocks[b]).basis;
      const Matrix& w = as_psd(g.blocks[b]).basis;
      if (v.cols() != w.cols()) return false;
      if (v.cols() > 0 && (v * v.transpose() - w * w.transpose()).norm() > tol) return false;
    } else if (std::holds_alternative<SocFace>(f.blocks[b])) {
      const SocFace& a = as_soc(f.blocks[b]);
      const SocFace& c = as_soc(g.blocks[b]);
      if (a.kind != c.kind) return false;
      if (a.kind == SocFace::Kind::Ray && (a.dir - c.dir).norm() > tol) return false;
    } else {
      const ExpFace& a = as_exp(f.blocks[b]);
      const ExpFace& c = as_exp(g.blocks[b]);
      if (a.kind != c.kind) return false;
      if (a.kind == ExpFace::Kind::Ray && (a.dir - c.dir).norm() > tol) return false;
    }
  }
  return true;
}

Matrix face_span_basis(const ConeSpec& spec, const FaceRep& f) {
  check_face_shape(spec, f, "face_span_basis");
  const int ad = spec.ambient_dim();
  const int fd = face_dimension(f);
  Matrix basis = Matrix::Zero(ad, fd);
  static const double r2 = std::sqrt(2.0);
  int col = 0;
  for (size_t b = 0; b < spec.blocks.size(); ++b) {
    const int off = spec.block_offset(static_cast<int>(b));
    const BlockFace& bf = f.blocks[b];
    if (std::holds_alternative<OrthantFace>(bf)) {
      for (int i : as_orthant(bf).alive) basis(off + i, col++) = 1.0;
    } else if (std::holds_alternative<PsdFace>(bf)) {
      const Matrix& v = as_psd(bf).basis;
      const int r = static_cast<int>(v.cols());
      const int d = spec.blocks[b].ambient_dim();
      for (int q = 0; q < r; ++q)
        for (int p = 0; p <= q; ++p) {
          Matrix e;
          if (p == q)
            e = v.col(p) * v.col(p).transpose();
          else
            e = (v.col(p) * v.col(q).transpose() + v.col(q) * v.col(p).transpose()) / r2;
          basis.block(off, col++, d, 1) = svec(e);
        }
    } else if (std::holds_alternative<SocFace>(bf)) {
      const SocFace& sf = as_soc(bf);
      if (sf.kind == SocFace::Kind::Full) {
        for (int i = 0; i < sf.n; ++i) basis(off + i, col++) = 1.0;
      } else if (sf.kind == SocFace::Kind::Ray) {
        basis.block(off, col++, sf.n, 1) = sf.dir;
      }
    } else {
      const ExpFace& ef = as_exp(bf);
      if (ef.kind == ExpFace::Kind::Full) {
        for (int i = 0; i < 3; ++i) basis(off + i, col++) = 1.0;
      } else if (ef.kind == ExpFace::Kind::Halfplane) {
        basis(off + 0, col++) = -1.0;  // generator (-1, 0, 0)
        basis(off + 2, col++) = 1.0;   // generator (0, 0, 1)
      } else if (ef.kind == ExpFace::Kind::Ray) {
        basis.block(off, col++, 3, 1) = ef.dir;
      }
    }
  }
  return basis;
}

ConeSpec restricted_cone_spec(const ConeSpec& spec, const FaceRep& f) {
  check_face_shape(spec, f, "restricted_cone_spec");
  ConeSpec out;
  for (size_t b = 0; b < spec.blocks.size(); ++b) {
    const BlockFace& bf = f.blocks[b];
    if (std::holds_alternative<OrthantFace>(bf)) {
      out.blocks.push_back({ConeClass::Orthant, static_cast<int>(as_orthant(bf).alive.size())});
    } else if (std::holds_alternative<PsdFace>(bf)) {
      const int r = static_cast<int>(as_psd(bf).basis.cols());
      if (r == 0)
        out.blocks.push_back({ConeClass::Orthant, 0});
      else
        out.blocks.push_back({ConeClass::Psd, r});
    } else if (std::holds_alternative<SocFace>(bf)) {
      const SocFace& sf = as_soc(bf);
      if (sf.kind == SocFace::Kind::Full)
        out.blocks.push_back({ConeClass::SecondOrder, sf.n});
      else
        out.blocks.push_back({ConeClass::Orthant, sf.kind == SocFace::Kind::Ray ? 1 : 0});
    } else {
      const ExpFace& ef = as_exp(bf);
      switch (ef.kind) {
        case ExpFace::Kind::Full: out.blocks.push_back({ConeClass::Exponential, 3}); break;
        case ExpFace::Kind::Halfplane: out.blocks.push_back({ConeClass::Orthant, 2}); break;
        case ExpFace::Kind::Ray: out.blocks.push_back({ConeClass::Orthant, 1}); break;
        case ExpFace::Kind::Zero: out.blocks.push_back({ConeClass::Orthant, 0}); break;
      }
    }
  }
  return out;
}

FaceRep compose_face(const ConeSpec& spec, const FaceRep& f, const FaceRep& g) {
  check_face_shape(spec, f, "compose_face");
  const ConeSpec inner = restricted_cone_spec(spec, f);
  check_face_shape(inner, g, "compose_face(inner)");
  FaceRep out;
  for (size_t b = 0; b < spec.blocks.size(); ++b) {
    const BlockFace& of = f.blocks[b];
    const BlockFace& gf = g.blocks[b];
    if (std::holds_alternative<OrthantFace>(of)) {
      const OrthantFace& oo = as_orthant(of);
      const OrthantFace& gg = as_orthant(gf);
      OrthantFace res;
      res.n = oo.n;
      for (int j : gg.alive) res.alive.push_back(oo.alive.at(j));
      out.blocks.emplace_back(std::move(res));
    } else if (std::holds_alternative<PsdFace>(of)) {
      const Matrix& v = as_psd(of).basis;
      if (std::holds_alternative<PsdFace>(gf)) {
        out.blocks.emplace_back(PsdFace{v * as_psd(gf).basis});
      } else {
        // collapsed placeholder: face stays the zero face
        out.blocks.emplace_back(PsdFace{Matrix(v.rows(), 0)});
      }
    } else if (std::holds_alternative<SocFace>(of)) {
      const SocFace& so = as_soc(of);
      if (so.kind == SocFace::Kind::Full) {
        out.blocks.emplace_back(as_soc(gf));
      } else if (so.kind == SocFace::Kind::Ray) {
        const bool keep = !as_orthant(gf).alive.empty();
        out.blocks.emplace_back(
            SocFace{keep ? SocFace::Kind::Ray : SocFace::Kind::Zero, so.n,
                    keep ? so.dir : Vector()});
      } else {
        out.blocks.emplace_back(so);
      }
    } else {
      const ExpFace& eo = as_exp(of);
      if (eo.kind == ExpFace::Kind::Full) {
        out.blocks.emplace_back(as_exp(gf));
      } else if (eo.kind == ExpFace::Kind::Halfplane) {
        const std::vector<int>& alive = as_orthant(gf).alive;
        const bool g1 = std::find(alive.begin(), alive.end(), 0) != alive.end();
        const bool g2 = std::find(alive.begin(), alive.end(), 1) != alive.end();
        if (g1 && g2) {
          out.blocks.emplace_back(ExpFace{ExpFace::Kind::Halfplane, Vector()});
        } else if (g1 || g2) {
          Vector d(3);
          if (g1)
            d << -1.0, 0.0, 0.0;
          else
            d << 0.0, 0.0, 1.0;
          out.blocks.emplace_back(ExpFace{ExpFace::Kind::Ray, std::move(d)});
        } else {
          out.blocks.emplace_back(ExpFace{ExpFace::Kind::Zero, Vector()});
        }
      } else if (eo.kind == ExpFace::Kind::Ray) {
        const bool keep = !as_orthant(gf).alive.empty();
        out.blocks.emplace_back(
            ExpFace{keep ? ExpFace::Kind::Ray : ExpFace::Kind::Zero, keep ? eo.dir : Vector()});
      } else {
        out.blocks.emplace_back(eo);
      }
    }
  }
  return out;
}

FaceRep intersect_with_exposed(const ConeSpec& spec, const FaceRep& f, const Point& w,
                               const TolerancePolicy& tol) {
  tol.validate();
  check_face_shape(spec, f, "intersect_with_exposed");
  check_point_shape(spec, w, "intersect_with_exposed");

  // restricted components of w on the face span, blockwise
  const Matrix basis = face_span_basis(spec, f);
  const Vector wamb = point_to_ambient(spec, w);
  const Vector wres = basis.transpose() * wamb;
  const double wscale = std::max(1.0, sup_norm(wres));
  if (sup_norm(wres) <= tol.zero_tol * std::max(1.0, sup_norm(wamb)))
    throw std::invalid_argument(
        "intersect_with_exposed: exposing vector vanishes on the face span (no reduction)");
  const double drop_tol = tol.zero_tol * wscale;
  const double viol_tol = tol.psd_tol * wscale;

  FaceRep out;
  int rcol = 0;  // cursor into wres
  for (size_t b = 0; b < spec.blocks.size(); ++b) {
    const BlockFace& bf = f.blocks[b];
    if (std::holds_alternative<OrthantFace>(bf)) {
      const OrthantFace& of = as_orthant(bf);
      OrthantFace res;
      res.n = of.n;
      for (size_t j = 0; j < of.alive.size(); ++j) {
        const double wi = wres(rcol++);
        if (wi < -viol_tol)
          throw std::invalid_argument("intersect_with_exposed: w not in the dual of the face");
        if (wi <= drop_tol) res.alive.push_back(of.alive[j]);
      }
      out.blocks.emplace_back(std::move(res));
    } else if (std::holds_alternative<PsdFace>(bf)) {
      const Matrix& v = as_psd(bf).basis;
      const int r = static_cast<int>(v.cols());
      const Matrix m = r > 0 ? Matrix(v.transpose() * w.mat(static_cast<int>(b)) * v)
                             : Matrix(0, 0);
      rcol += svec_dim(r);
      if (r > 0 && psd_min_eig(0.5 * (m + m.transpose())) <
                      -tol.psd_tol * std::max(1.0, m.norm()))
        throw std::invalid_argument("intersect_with_exposed: w not in the dual of the face");
      // The exposing vector is accurate to certificate tolerance, so its
      // genuinely annihilated directions carry eigenvalues well above machine
      // roundoff. Judging them against the global scale of w keeps the cut
      // from shearing past the exposed face.
      out.blocks.emplace_back(
          PsdFace{r > 0 ? Matrix(v * orthonormal_nullspace_ref(m, wscale, kFaceRankRelTol))
                        : Matrix(v.rows(), 0)});
    } else if (std::holds_alternative<SocFace>(bf)) {
      const SocFace& sf = as_soc(bf);
      const Vector& wb = w.vec(static_cast<int>(b));
      if (sf.kind == SocFace::Kind::Full) {
        rcol += sf.n;
        const double margin = soc_margin(wb);
        const double nrm = wb.norm();
        if (margin < -tol.psd_tol * std::max(1.0, nrm))
          throw std::invalid_argument("intersect_with_exposed: w not in the dual of the face");
        if (nrm <= drop_tol) {
          out.blocks.emplace_back(sf);  // caller treats no-drop as an error
        } else if (margin > tol.psd_tol * std::max(1.0, nrm)) {
          out.blocks.emplace_back(SocFace{SocFace::Kind::Zero, sf.n, Vector()});
        } else {
          Vector d(sf.n);
          d(0) = wb(0);
          d.tail(sf.n - 1) = -wb.tail(sf.n - 1);
          out.blocks.emplace_back(SocFace{SocFace::Kind::Ray, sf.n, d / d.norm()});
        }
      } else if (sf.kind == SocFace::Kind::Ray) {
        const double pairing = wres(rcol++);
        if (pairing < -viol_tol)
          throw std::invalid_argument("intersect_with_exposed: w not in the dual of the face");
        out.blocks.emplace_back(pairing > drop_tol
                                    ? SocFace{SocFace::Kind::Zero, sf.n, Vector()}
                                    : sf);
      } else {
        out.blocks.emplace_back(sf);
      }
    } else {
      const ExpFace& ef = as_exp(bf);
      const Vector& wb = w.vec(static_cast<int>(b));
      if (ef.kind == ExpFace::Kind::Full) {
        rcol += 3;
        if (!exp_dual_contains(wb, tol))
          throw std::invalid_argument("intersect_with_exposed: w not in the dual of the face");
        const double s = std::max(1.0, sup_norm(wb));
        const double u = wb(0), vv = wb(1), wz = wb(2);
        if (u < -tol.zero_tol * s) {
          const double t = vv / u;
          const double rhs = t <= kExpArgCap ? -u * std::exp(t) : kInf;
          const double gap = std::exp(1.0) * wz - rhs;
          if (std::isfinite(rhs) && gap <= tol.psd_tol * std::max({1.0, std::abs(wz), rhs})) {
            out.blocks.emplace_back(ExpFace{ExpFace::Kind::Ray, exp_smooth_ray_dir(1.0 - t)});
          } else {
            out.blocks.emplace_back(ExpFace{ExpFace::Kind::Zero, Vector()});
          }
        } else {
          const bool vpos = vv > drop_tol;
          const bool wpos = wz > drop_tol;
          if (vpos && wpos) {
            Vector d(3);
            d << -1.0, 0.0, 0.0;
            out.blocks.emplace_back(ExpFace{ExpFace::Kind::Ray, std::move(d)});
          } else if (vpos) {
            out.blocks.emplace_back(ExpFace{ExpFace::Kind::Halfplane, Vector()});
          } else if (wpos) {
            Vector d(3);
            d << -1.0, 0.0, 0.0;
            out.blocks.emplace_back(ExpFace{ExpFace::Kind::Ray, std::move(d)});
          } else {
            out.blocks.emplace_back(ef);  // w ~ 0 on this block
          }
        }
      } else if (ef.kind == ExpFace::Kind::Halfplane) {
        const double p1 = wres(rcol++);
        const double p2 = wres(rcol++);
        if (p1 < -viol_tol || p2 < -viol_tol)
          throw std::invalid_argument("intersect_with_exposed: w not in the dual of the face");
        const bool keep1 = p1 <= drop_tol;
        const bool keep2 = p2 <= drop_tol;
        if (keep1 && keep2) {
          out.blocks.emplace_back(ef);
        } else if (keep1 || keep2) {
          Vector d(3);
          if (keep1)
            d << -1.0, 0.0, 0.0;
          else
            d << 0.0, 0.0, 1.0;
          out.blocks.emplace_back(ExpFace{ExpFace::Kind::Ray, std::move(d)});
        } else {
          out.blocks.emplace_back(ExpFace{ExpFace::Kind::Zero, Vector()});
        }
      } else if (ef.kind == ExpFace::Kind::Ray) {
        const double pairing = wres(rcol++);
        if (pairing < -viol_tol)
          throw std::invalid_argument("intersect_with_exposed: w not in the dual of the face");
        out.blocks.emplace_back(pairing > drop_tol ? ExpFace{ExpFace::Kind::Zero, Vector()}
                                                   : ef);
      } else {
        out.blocks.emplace_back(ef);
      }
    }
  }
  return out;
}

bool face_contains(const ConeSpec& spec, const FaceRep& f, const Point& p,
                   const TolerancePolicy& tol) {
  check_face_shape(spec, f, "face_contains");
  check_point_shape(spec, p, "face_contains");
  if (!contains(spec, p, tol)) return false;
  // p lies in span(face) iff the orthogonal projection onto the span keeps it
  const Matrix basis = face_span_basis(spec, f);
  const Vector x = point_to_ambient(spec, p);
  const Vector res = x - basis * (basis.transpose() * x);
  return sup_norm(res) <= 1e2 * tol.zero_tol * std::max(1.0, sup_norm(x));
}

bool face_relint_contains(const ConeSpec& spec, const FaceRep& f, const Point& p,
                          const TolerancePolicy& tol) {
  if (!face_contains(spec, f, p, tol)) return false;
  // relative interior within the face = interior of the restricted cone
  const ConeSpec rspec = restricted_cone_spec(spec, f);
  const Matrix basis = face_span_basis(spec, f);
  const Vector coords = basis.transpose() * point_to_ambient(spec, p);
  return in_relative_interior(rspec, point_from_ambient(rspec, coords), tol);
}

Matrix conjugate_span_complement(const ConeSpec& spec, const FaceRep& f) {
  check_face_shape(spec, f, "conjugate_span_complement");
  const int ad = spec.ambient_dim();
  static const double r2 = std::sqrt(2.0);
  std::vector<Vector> rows;
  for (size_t b = 0; b < spec.blocks.size(); ++b) {
    const int off = spec.block_offset(static_cast<int>(b));
    const ConeBlock& blk = spec.blocks[b];
    const BlockFace& bf = f.blocks[b];
    auto push_local = [&](const Vector& local) {
      Vector r = Vector::Zero(ad);
      r.segment(off, local.size()) = local;
      rows.push_back(std::move(r));
    };
    if (std::holds_alternative<OrthantFace>(bf)) {
      for (int i : as_orthant(bf).alive) {
        Vector e = Vector::Zero(blk.n);
        e(i) = 1.0;
        push_local(e);
      }
    } else if (std::holds_alternative<PsdFace>(bf)) {
      // span(fdelta) = {phi: phi * V1 = 0}; complement conditions are the
      // V1^T phi V1 and V2^T phi V1 components.
      const Matrix& v1 = as_psd(bf).basis;
      const int r = static_cast<int>(v1.cols());
      if (r == 0) continue;
      const Matrix v2 = orthonormal_nullspace(v1.transpose());
      for (int q = 0; q < r; ++q)
        for (int p = 0; p <= q; ++p) {
          Matrix e = p == q ? Matrix(v1.col(p) * v1.col(p).transpose())
                            : Matrix((v1.col(p) * v1.col(q).transpose() +
                                      v1.col(q) * v1.col(p).transpose()) /
                                     r2);
          push_local(svec(e));
        }
      for (int q = 0; q < v2.cols(); ++q)
        for (int p = 0; p < r; ++p) {
          Matrix e = (v1.col(p) * v2.col(q).transpose() +
                      v2.col(q) * v1.col(p).transpose()) /
                     r2;
          push_local(svec(e));
        }
    } else if (std::holds_alternative<SocFace>(bf)) {
      const SocFace& sf = as_soc(bf);
      if (sf.kind == SocFace::Kind::Full) {
        for (int i = 0; i < sf.n; ++i) {
          Vector e = Vector::Zero(sf.n);
          e(i) = 1.0;
          push_local(e);
        }
      } else if (sf.kind == SocFace::Kind::Ray) {
        // conjugate face is the reflected ray span{(d0, -dbar)}
        Vector d = sf.dir;
        d.tail(sf.n - 1) *= -1.0;
        const Matrix comp = orthonormal_nullspace(d.transpose());
        for (int j = 0; j < comp.cols(); ++j) push_local(comp.col(j));
      }
      // zero face: conjugate face spans everything, no conditions
    } else {
      const ExpFace& ef = as_exp(bf);
      auto unit = [](int i) {
        Vector e = Vector::Zero(3);
        e(i) = 1.0;
        return e;
      };
      if (ef.kind == ExpFace::Kind::Full) {
        for (int i = 0; i < 3; ++i) push_local(unit(i));
      } else if (ef.kind == ExpFace::Kind::Halfplane) {
        // conjugate face span is span{(0,1,0)}
        push_local(unit(0));
        push_local(unit(2));
      } else if (ef.kind == ExpFace::Kind::Ray) {
        switch (classify_exp_ray(ef.dir)) {
          case ExpRayTag::AxisZ:
            // conjugate span is span{(0,1,0)} (matches the halfplane: this ray
            // is not exposed on its own)
            push_local(unit(0));
            push_local(unit(2));
            break;
          case ExpRayTag::AxisNegX:
            // conjugate span is {(0,v,w)}
            push_local(unit(0));
            break;
          case ExpRayTag::Smooth: {
            const double t = ef.dir(0) / ef.dir(1);
            Vector wdir(3);
            wdir << -1.0, t - 1.0, std::exp(-std::min(t, kExpArgCap));
            const Matrix comp = orthonormal_nullspace(wdir.transpose());
            for (int j = 0; j < comp.cols(); ++j) push_local(comp.col(j));
            break;
          }
        }
      }
      // zero face: no conditions
    }
  }
  Matrix c(static_cast<int>(rows.size()), ad);
  for (size_t i = 0; i < rows.size(); ++i) c.row(static_cast<int>(i)) = rows[i];
  return c;
}

}  // namespace conereg
