#pragma once
// Dense numerical kernels. All rank / nullspace / spectral decisions in the
// library go through these helpers so that cutoff conventions stay uniform.

#include <Eigen/Dense>

namespace conereg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct TolerancePolicy {
  double rank_rel_tol = 1e-9;  // singular values below rank_rel_tol * sigma_max count as zero
  double psd_tol = 1e-8;       // eigenvalue nonnegativity slack, scaled by matrix norm
  double zero_tol = 1e-10;     // absolute scalar zero threshold

  void validate() const;  // throws std::invalid_argument on non-finite or negative entries
};

bool all_finite(const Matrix& m);
void require_finite(const Matrix& m, const char* what);

// Number of singular values above rank_rel_tol * sigma_max. Zero matrices
// (and matrices with an empty dimension) have rank 0.
int numerical_rank(const Matrix& m, const TolerancePolicy& tol = {});

// Orthonormal basis Z of the numerical nullspace: ||M Z||_F stays within a
// small multiple of rank_rel_tol * sigma_max. A map with zero rows has the
// whole space as nullspace.
Matrix orthonormal_nullspace(const Matrix& m, const TolerancePolicy& tol = {});

// Relative tolerance for rank decisions on face-restricted operator products
// (A restricted to a face span, or cut down by a conjugate-face complement).
// Faces carry the accuracy of the certificates that produced them, so such
// products have "should-be-zero" directions far above machine epsilon; they
// must be judged against the parent operator's scale, not their own largest
// singular value.
inline constexpr double kFaceRankRelTol = 1e-6;

// Largest singular value (0 for matrices with an empty dimension).
double spectral_norm(const Matrix& m);

// Rank judged against an explicit reference scale: the number of singular
// values above rel_tol * max(sigma_ref, tiny). Use the parent operator's
// spectral norm as sigma_ref when m is a restriction or product of it.
int numerical_rank_ref(const Matrix& m, double sigma_ref, double rel_tol);

// Nullspace counterpart of numerical_rank_ref: orthonormal basis of the span
// of right singular vectors whose singular value is at most
// rel_tol * max(sigma_ref, tiny).
Matrix orthonormal_nullspace_ref(const Matrix& m, double sigma_ref, double rel_tol);

struct SymEig {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // columns; S ~= V diag(eigenvalues) V^T
};

// Symmetric eigendecomposition of (S + S^T)/2. Rejects non-square input.
SymEig sym_eigendecomposition(const Matrix& s);

// sigma_max / sigma_min, +infinity when the numerical rank falls short of
// min(rows, cols). Matrices with an empty dimension report 1.
double condition_number_2(const Matrix& m, const TolerancePolicy& tol = {});

}  // namespace conereg
