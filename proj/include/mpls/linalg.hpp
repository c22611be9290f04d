#pragma once

#include <Eigen/Dense>

namespace mpls {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct SingularTriple {
  Vector left;   // unit, length rows(M)
  Vector right;  // unit, length cols(M)
  double value = 0.0;
  int iterations = 0;  // power steps taken; 0 for the dense path
};

// Returns sqrt(N) * Q for the thin QR factorisation raw = Q R, with the
// columns of Q signed so that diag(R) > 0. The result satisfies
// result^T result = N I.
Matrix whiten(const Matrix& raw);

// Leading singular triple. Power iteration on the smaller Gram matrix,
// stopping when the relative change of the Rayleigh quotient drops below
// `tol`; matrices with min(rows, cols) <= kDenseCutoff go through a dense SVD.
//
// Sign convention: the largest-magnitude entry of `left` is positive (ties
// go to the lowest index) and `right` follows so that left^T M right >= 0.
inline constexpr int kDenseCutoff = 32;
SingularTriple top_singular_pair(const Matrix& m, double tol = 1e-10, int max_iter = 50000);

// The two routes behind top_singular_pair, exposed so they can be checked
// against each other.
SingularTriple power_singular_pair(const Matrix& m, double tol, int max_iter);
SingularTriple dense_singular_pair(const Matrix& m);

// Scores of the column-centred data on its top `target_dims` principal
// directions, ordered by decreasing variance.
Matrix pca_reduce(const Matrix& m, int target_dims);

// Column-wise z-scores (population standard deviation). Zero-variance
// columns are rejected.
Matrix standardize_columns(const Matrix& m);

// a^T b / (|a| |b|).
double vector_correlation(const Vector& a, const Vector& b);

// Flips `left`/`right` jointly so the largest-|.| entry of `left` is positive.
void apply_sign_convention(Vector& left, Vector& right);

}  // namespace mpls
