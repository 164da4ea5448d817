#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "invlr/grouprep.hpp"
#include "invlr/linalg.hpp"

namespace invlr {

enum class Mode { Constrained, Regularized, Augmented };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& name);

enum class Warning {
  Filling,                 // r >= min(d0, dL)
  RankConstraintVacuous,   // r >= nullity of the constraint
  RankAssumptionViolated,  // rank of the transformed target <= r
  NonUniqueOptimum,        // sigma_r and sigma_{r+1} are numerically tied
  SpectralGapSmall,        // path sample where sigma_r - sigma_{r+1} < 1e-8 sigma_1
};

using Warnings = std::set<Warning>;

std::string to_string(Warning w);
std::string to_string(const Warnings& w);

/// Data X (d0 x n), targets Y (dL x n), invariance constraint, rank bound r
/// and penalty weight lambda. X X^T must be positive definite; its square
/// root P and P^{-1} are computed once at construction.
class RegressionProblem {
 public:
  RegressionProblem(Matrix x, Matrix y, ConstraintMatrix constraint, Eigen::Index r, double lambda = 0.0);
  /// The constraint is derived from the representation.
  RegressionProblem(Matrix x, Matrix y, GroupRep rep, Eigen::Index r, double lambda = 0.0);

  const Matrix& x() const { return x_; }
  const Matrix& y() const { return y_; }
  const ConstraintMatrix& constraint() const { return constraint_; }
  const std::optional<GroupRep>& rep() const { return rep_; }
  Eigen::Index r() const { return r_; }
  double lambda() const { return lambda_; }
  Eigen::Index n() const { return x_.cols(); }
  Eigen::Index d0() const { return x_.rows(); }
  Eigen::Index dl() const { return y_.rows(); }

  /// P = (X X^T)^{1/2} and its inverse.
  const PdRoot& data_root() const { return data_root_; }
  /// Z = Y X^T P^{-1}.
  const Matrix& target() const { return target_; }

  bool non_filling() const { return r_ < std::min(d0(), dl()); }
  /// Flags that follow from the problem dimensions alone.
  Warnings structural_warnings() const;

  RegressionProblem with_lambda(double lambda) const;
  RegressionProblem with_rank(Eigen::Index r) const;

 private:
  void validate();

  Matrix x_;
  Matrix y_;
  ConstraintMatrix constraint_;
  std::optional<GroupRep> rep_;
  Eigen::Index r_;
  double lambda_;
  PdRoot data_root_;
  Matrix target_;
};

struct RankBoundedSolution {
  Matrix W;
  double loss = 0.0;
  Eigen::Index rank = 0;
  double invariance_residual = 0.0;
  Warnings warnings;
  /// Singular values of the transformed target that was truncated.
  Vector spectrum;
};

/// Low-rank target and right factor of one mode: the optimum is
/// best_rank_r(target) * right_factor.
struct TransformedTarget {
  Matrix target;
  Matrix right_factor;
  SvdFactors factors;
};

TransformedTarget transformed_target(const RegressionProblem& problem, Mode mode);

RankBoundedSolution solve_constrained(const RegressionProblem& problem);
RankBoundedSolution solve_regularized(const RegressionProblem& problem);
RankBoundedSolution solve_augmented(const RegressionProblem& problem);
RankBoundedSolution solve(const RegressionProblem& problem, Mode mode);

/// (1/n)||WX - Y||_F^2, plus lambda ||WG||_F^2 when a constraint is given.
double empirical_risk(const Matrix& w, const Matrix& x, const Matrix& y,
                      const Matrix* g = nullptr, double lambda = 0.0);

/// (1/(n|G|)) sum_g ||W rho(g) X - Y||_F^2.
double augmented_risk(const Matrix& w, const Matrix& x, const Matrix& y, const GroupRep& rep);

/// The objective a given mode minimizes, evaluated at W.
double objective(const RegressionProblem& problem, Mode mode, const Matrix& w);

struct PathSample {
  double lambda = 0.0;
  Matrix W;
  double loss = 0.0;
  double invariance_residual = 0.0;
  double distance_to_inv = 0.0;
  Warnings warnings;
};

/// One regularized solve per lambda (strictly increasing, all > 0), each
/// compared against a single constrained solve.
std::vector<PathSample> regularization_path(const RegressionProblem& problem,
                                            const std::vector<double>& lambdas);

/// True when distance_to_inv never increases by more than slack after the
/// first sample.
bool distance_nonincreasing(const std::vector<PathSample>& path, double slack = 1e-9);

std::vector<double> geometric_grid(double lo, double hi, int count);

struct CriticalPoint {
  Matrix W;
  Matrix transformed;             // U Sigma_I V^T before the right factor
  std::vector<int> index_set;     // zero-based, sorted
  double loss = 0.0;              // sum of sigma_i^2 over i not in the set
  double objective = 0.0;         // the mode's objective at W
  bool is_global_min = false;
};

/// All critical points of the rank-r problem in function space, sorted by
/// loss. Subsets are taken over the nonzero singular values of the
/// transformed target.
std::vector<CriticalPoint> enumerate_critical_points(const RegressionProblem& problem, Mode mode);

/// Critical points of ||Z - W||_F^2 over rank-r matrices for a raw target;
/// right_factor maps each point back (identity when empty).
std::vector<CriticalPoint> enumerate_critical_points(const Matrix& target, Eigen::Index r,
                                                     const Matrix& right_factor = Matrix());

struct InvarianceSplit {
  Matrix invariant;
  Matrix perp;
  double ratio = 1.0;  // ||W_inv||^2 / ||W||^2, 1 for W = 0
};

InvarianceSplit invariance_decomposition(const Matrix& w, const ConstraintMatrix& g);

/// binom(n, k) as a double; 0 when k > n.
double binomial(Eigen::Index n, Eigen::Index k);

}  // namespace invlr
