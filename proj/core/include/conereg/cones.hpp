#pragma once
// Cone blocks, points, and face representations.
//
// Ambient coordinates are "flattened" per block: orthant / second-order /
// exponential blocks contribute their natural vector coordinates, semidefinite
// blocks contribute the isometric symmetric vectorization (off-diagonals
// scaled by sqrt(2)), so Euclidean inner products of flattened vectors agree
// with trace inner products of the matrices and adjoints stay transposes.

#include <string>
#include <variant>
#include <vector>

#include "conereg/numkernel.hpp"

namespace conereg {

enum class ConeClass { Orthant, Psd, SecondOrder, Exponential };

struct ConeBlock {
  ConeClass kind = ConeClass::Orthant;
  int n = 0;  // orthant/soc: vector length; psd: matrix order; exponential: always 3

  int ambient_dim() const;
};

struct ConeSpec {
  std::vector<ConeBlock> blocks;

  int ambient_dim() const;
  int block_offset(int b) const;
  bool pure(ConeClass k) const;  // every non-empty block has class k
  bool has(ConeClass k) const;
  void validate(bool allow_empty_blocks = false) const;
};

// Per-block value: vector blocks store coordinates, psd blocks the symmetric
// matrix itself.
using BlockValue = std::variant<Vector, Matrix>;

struct Point {
  std::vector<BlockValue> blocks;

  const Vector& vec(int b) const { return std::get<Vector>(blocks.at(b)); }
  const Matrix& mat(int b) const { return std::get<Matrix>(blocks.at(b)); }
};

// --- faces ------------------------------------------------------------

struct OrthantFace {
  std::vector<int> alive;  // surviving coordinate indices, ascending
  int n = 0;               // block length
};

struct PsdFace {
  Matrix basis;  // n x r, orthonormal columns; the face is basis * S_+^r * basis^T
};

struct SocFace {
  enum class Kind { Full, Ray, Zero } kind = Kind::Full;
  int n = 0;
  Vector dir;  // unit boundary direction when kind == Ray
};

struct ExpFace {
  // The exponential cone's proper faces: the 2-dimensional polyhedral face
  // {(x,0,z): x <= 0, z >= 0}, its two edges, the smooth boundary rays, and
  // the trivial faces. Ray carries an arbitrary unit direction so exposure by
  // any dual vector stays representable.
  enum class Kind { Full, Halfplane, Ray, Zero } kind = Kind::Full;
  Vector dir;  // unit direction when kind == Ray
};

using BlockFace = std::variant<OrthantFace, PsdFace, SocFace, ExpFace>;

struct FaceRep {
  std::vector<BlockFace> blocks;
};

// --- flattening -------------------------------------------------------

int svec_dim(int n);
Vector svec(const Matrix& s);          // isometric symmetric vectorization
Matrix smat(const Vector& v);          // inverse of svec

Vector point_to_ambient(const ConeSpec& spec, const Point& p);
Point point_from_ambient(const ConeSpec& spec, const Vector& x);
Point zero_point(const ConeSpec& spec);
Point interior_direction(const ConeSpec& spec);  // a fixed relint direction per block

// --- membership -------------------------------------------------------

bool contains(const ConeSpec& spec, const Point& p, const TolerancePolicy& tol = {});
bool dual_contains(const ConeSpec& spec, const Point& p, const TolerancePolicy& tol = {});
bool in_relative_interior(const ConeSpec& spec, const Point& p, const TolerancePolicy& tol = {});

// Minimum over blocks of the scaled dual-membership margin (negative =
// violated). Certificates are accepted when this stays above -psd_tol.
double dual_margin(const ConeSpec& spec, const Point& p);

// --- face operations --------------------------------------------------

FaceRep full_face(const ConeSpec& spec);
FaceRep minimal_face(const ConeSpec& spec, const Point& p, const TolerancePolicy& tol = {});

int face_dimension(const FaceRep& f);
bool face_equal(const FaceRep& f, const FaceRep& g, double tol = 1e-9);

// Orthonormal basis of span(face) in ambient flattened coordinates.
Matrix face_span_basis(const ConeSpec& spec, const FaceRep& f);

// The cone the face is linearly isomorphic to, in face_span_basis
// coordinates (orthant faces -> smaller orthants, psd faces -> smaller psd
// blocks, rays -> 1-dimensional orthants, the exponential halfplane -> a
// 2-dimensional orthant). Fully collapsed blocks become zero-length orthant
// placeholders so block indices stay aligned.
ConeSpec restricted_cone_spec(const ConeSpec& spec, const FaceRep& f);

// Given a face g of restricted_cone_spec(spec, f), the corresponding face of
// the original cone.
FaceRep compose_face(const ConeSpec& spec, const FaceRep& f, const FaceRep& g);

// K^new = (current face) intersect w-perp, for w in the dual of the current
// face. Throws when w is (numerically) zero on the face span or fails dual
// membership there.
FaceRep intersect_with_exposed(const ConeSpec& spec, const FaceRep& f, const Point& w,
                               const TolerancePolicy& tol = {});

bool face_contains(const ConeSpec& spec, const FaceRep& f, const Point& p,
                   const TolerancePolicy& tol = {});
bool face_relint_contains(const ConeSpec& spec, const FaceRep& f, const Point& p,
                          const TolerancePolicy& tol = {});

// Span of the conjugate face f^triangle = {w in K*: <w, s> = 0 for s in f},
// returned as rows C such that phi lies in that span iff C * flatten(phi) = 0.
Matrix conjugate_span_complement(const ConeSpec& spec, const FaceRep& f);

}  // namespace conereg
