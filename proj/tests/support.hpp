// Shared test support: independent brute-force oracles and planted instance
// generators. The oracles deliberately avoid the library's numerical routines
// (they use their own Gaussian elimination) so that library results are
// checked against genuinely independent computations.
#pragma once

#include <conereg/numkernel.hpp>

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace testsupport {

using conereg::Matrix;
using conereg::Vector;

// Absolute path of a file in the fixture corpus.
std::string fixture_path(const std::string& name);

// ---------------------------------------------------------------------------
// Independent dense elimination (used only by the oracles below).
// ---------------------------------------------------------------------------

// Solve the square system M x = r by Gaussian elimination with partial
// pivoting. Returns nullopt when a pivot falls below piv_tol relative to the
// largest entry of M (singular system).
std::optional<Vector> ge_solve(Matrix M, Vector r, double piv_tol = 1e-10);

// Row-echelon rank with pivots judged relative to the largest entry.
int ge_rank(Matrix M, double piv_tol = 1e-9);

// ---------------------------------------------------------------------------
// Brute-force polyhedral oracles over { x >= 0 : A x = b }.
// ---------------------------------------------------------------------------

// All extreme points, found by enumerating candidate support sets of size
// rank(A) and solving each square-ish subsystem independently.
std::vector<Vector> oracle_extreme_points(const Matrix& A, const Vector& b);

// Vertices of the truncated polytope { x >= 0, s >= 0 : A x = b,
// sum(x) + s = R }, reported as their x parts. The truncation makes the
// feasible set bounded so every linear functional attains its maximum at a
// vertex.
std::vector<Vector> oracle_truncated_vertices(const Matrix& A, const Vector& b,
                                              double R);

// Coordinates that are zero on every feasible point, decided by maximising
// each coordinate over the truncated vertex set. Empty result on an
// infeasible system as well; pair with a feasibility check when that matters.
std::vector<int> oracle_forced_zeros(const Matrix& A, const Vector& b,
                                     double R = 1e4, double tol = 1e-7);

// Strict feasibility of { x >= 0 : A x = b }: the system has a feasible point
// and no coordinate is forced to zero. (If every coordinate can be made
// positive somewhere, the average of those points is positive everywhere.)
bool oracle_orthant_slater(const Matrix& A, const Vector& b);

// ---------------------------------------------------------------------------
// Planted nonnegative-orthant instances.
// ---------------------------------------------------------------------------

struct OrthantInstance {
  Matrix A;
  Vector b;
  Vector x_feas;             // planted feasible point
  std::vector<int> forced;   // coordinates forced to zero (sorted, maybe empty)
  Vector y_star;             // planted exposing multiplier (zero when Slater)
};

// Instance that fails strict feasibility: a planted multiplier y* has
// A^T y* >= 0 with strict positivity exactly on `forced`, zero elsewhere, and
// <b, y*> = 0. The planted point is zero on `forced` and lies well inside
// the complementary face (entries in [0.2, 1]).
OrthantInstance make_failing_orthant(int n, int m, unsigned seed);

// Instance with a strictly feasible planted point (entries in [0.2, 1]).
OrthantInstance make_slater_orthant(int n, int m, unsigned seed);

// ---------------------------------------------------------------------------
// Planted semidefinite instances (A rows are svec'd symmetric matrices).
// ---------------------------------------------------------------------------

struct PsdInstance {
  int n = 0;        // matrix order
  Matrix A;         // m x n(n+1)/2
  Vector b;
  Matrix X_feas;    // planted feasible matrix
  Vector y_star;    // planted multiplier (zero when Slater)
  Matrix W_star;    // planted exposing matrix A* y_star (PSD, nonzero)
  int w_rank = 0;   // rank of W_star
};

// Instance failing strict feasibility: W* = A* y* is PSD with rank in
// [1, n-1] and eigenvalues >= 0.4, <b, y*> = 0, and the planted point is a
// relative-interior point of the face cut out by W*.
PsdInstance make_failing_psd(int n, int m, unsigned seed);

// Instance with a planted positive definite feasible point (eigenvalues
// >= 0.4).
PsdInstance make_slater_psd(int n, int m, unsigned seed);

// ---------------------------------------------------------------------------
// Randomness helpers.
// ---------------------------------------------------------------------------

double urand(std::mt19937_64& gen, double lo, double hi);
Matrix gaussian_matrix(int rows, int cols, std::mt19937_64& gen);
Matrix random_symmetric(int n, std::mt19937_64& gen);
Matrix random_orthogonal(int n, std::mt19937_64& gen);

}  // namespace testsupport
