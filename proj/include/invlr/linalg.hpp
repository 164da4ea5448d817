#pragma once

#include <Eigen/Dense>

namespace invlr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Full singular value decomposition M = U * diag(sigma) * V^T.
///
/// sigma is nonincreasing with length min(rows, cols). Each column of U is
/// flipped so that its largest-magnitude entry is positive (V follows the
/// same flip for the paired columns); trailing columns of V are normalized the
/// same way. Callers should assert on products of the factors, not on the
/// factors themselves.
struct SvdFactors {
  Matrix U;
  Vector sigma;
  Matrix V;
};

SvdFactors svd(const Matrix& m);

/// Zero threshold used for numerical rank: kRank * sigma_max * max(rows, cols).
double rank_threshold(const Vector& sigma, Eigen::Index rows, Eigen::Index cols);
Eigen::Index numerical_rank(const Matrix& m);
Eigen::Index numerical_rank(const SvdFactors& f, Eigen::Index rows, Eigen::Index cols);

/// Eckart-Young truncation: the sum of the first r rank-one SVD terms.
/// r = 0 yields the zero matrix.
Matrix best_rank_r(const Matrix& m, Eigen::Index r);
Matrix best_rank_r(const SvdFactors& f, Eigen::Index r);

/// Symmetric positive definite square root together with its inverse, both
/// taken from one eigendecomposition.
struct PdRoot {
  Matrix root;
  Matrix inv_root;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
};

PdRoot pd_root(const Matrix& m);
Matrix pd_sqrt(const Matrix& m);

/// Moore-Penrose pseudoinverse with the kRank singular value cutoff.
Matrix pinv(const Matrix& m);

/// I - G G^+: the orthogonal projector onto the left null space of G.
Matrix left_null_projector(const Matrix& g);

/// Orthonormal rows spanning the left null space of G (zero rows when G has
/// full row rank). The first nonzero entry of each row is positive.
Matrix left_null_basis(const Matrix& g);

/// Column-major vectorization and its inverse.
Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols);

/// Kronecker product a (x) b.
Matrix kron(const Matrix& a, const Matrix& b);

bool all_finite(const Matrix& m);

}  // namespace invlr
