#include <gtest/gtest.h>

#include <random>
#include <set>

#include "instances.hpp"
#include "invlr/solvers.hpp"
#include "error_check.hpp"
#include "oracles.hpp"

using namespace invlr;
using fixture::random_instance;

namespace {

double rel(const Matrix& a, const Matrix& b) { return (a - b).norm() / b.norm(); }

RegressionProblem problem(const fixture::Instance& inst, Eigen::Index r, double lambda = 0.0) {
  return RegressionProblem(inst.x, inst.y, inst.rep, r, lambda);
}

}  // namespace

TEST(SolveConstrained, TrivialConstraintIsReducedRankRegression) {
  std::mt19937_64 rng(1);
  const auto inst = random_instance(trivial_rep(6), 4, 20, rng);
  const auto s = solve_constrained(problem(inst, 2));
  EXPECT_LT(rel(s.W, fixture::unconstrained_rrr(inst.x, inst.y, 2)), 1e-10);
  EXPECT_EQ(s.rank, 2);
}

TEST(SolveConstrained, RecoversInvariantLowRankTarget) {
  std::mt19937_64 rng(2);
  const GroupRep rep = cyclic_permutation(6, 2);
  const Matrix proj = oracle::left_null_projector(invariance_constraint(rep).entries);
  const Matrix y = oracle::truncate(oracle::gaussian(4, 6, rng) * proj, 2);
  const auto s = solve_constrained(RegressionProblem(Matrix::Identity(6, 6), y, rep, 2));
  EXPECT_LT((s.W - y).norm(), 1e-10);
  EXPECT_LT(s.loss, 1e-20);
}

TEST(SolveConstrained, NotBeatenByProjectedGradient) {
  std::mt19937_64 rng(3);
  const GroupRep rep = cyclic_permutation(8, 4);
  const auto inst = random_instance(rep, 5, 20, rng);
  const auto s = solve_constrained(problem(inst, 2));
  const double best = oracle::projected_gradient(inst.x, inst.y, invariance_constraint(rep).entries, 2, 20, 2000, 4);
  EXPECT_GE(best - s.loss, -1e-9);
  EXPECT_LT(best - s.loss, 1e-3) << "oracle should get close to the optimum";
}

TEST(SolveConstrained, InvariantAndRankBounded) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10; ++t) {
    const GroupRep rep = c4_image_rotation(3);
    const auto inst = random_instance(rep, 4, 30, rng);
    const auto s = solve_constrained(problem(inst, 2));
    const Matrix& g = invariance_constraint(rep).entries;
    EXPECT_LT((s.W * g).norm(), 1e-9 * s.W.norm() * g.norm());
    EXPECT_LE(numerical_rank(s.W), 2);
    EXPECT_NEAR(empirical_risk(s.W, inst.x, inst.y), s.loss, 1e-12 * s.loss);
    EXPECT_NEAR(s.invariance_residual, (s.W * g).norm(), 1e-15);
  }
}

TEST(SolveConstrained, FlagsRankAssumption) {
  std::mt19937_64 rng(5);
  const GroupRep rep = cyclic_permutation(6, 3);  // nullity 2
  const auto inst = random_instance(rep, 4, 20, rng);
  const auto s = solve_constrained(problem(inst, 2));
  EXPECT_TRUE(s.warnings.count(Warning::RankAssumptionViolated));
  EXPECT_TRUE(s.warnings.count(Warning::RankConstraintVacuous));
  const auto ok = solve_constrained(problem(inst, 1));
  EXPECT_FALSE(ok.warnings.count(Warning::RankAssumptionViolated));
  EXPECT_FALSE(ok.warnings.count(Warning::Filling));
  EXPECT_TRUE(solve_constrained(problem(inst, 4)).warnings.count(Warning::Filling));
}

TEST(RegressionProblem, RejectsBadInput) {
  std::mt19937_64 rng(6);
  const GroupRep rep = cyclic_permutation(6, 2);
  const Matrix x = oracle::gaussian(6, 4, rng);  // X X^T singular
  EXPECT_EQ(code_of([&] { RegressionProblem(x, oracle::gaussian(3, 4, rng), rep, 1); }), ErrorCode::SingularData);
  const Matrix x2 = oracle::gaussian(6, 10, rng);
  EXPECT_EQ(code_of([&] { RegressionProblem(x2, oracle::gaussian(3, 9, rng), rep, 1); }), ErrorCode::ShapeMismatch);
  EXPECT_EQ(code_of([&] { RegressionProblem(x2, oracle::gaussian(3, 10, rng), rep, 1, -1.0); }),
            ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([&] { RegressionProblem(oracle::gaussian(5, 10, rng), oracle::gaussian(3, 10, rng), rep, 1); }),
            ErrorCode::ShapeMismatch);
}

TEST(SolveRegularized, ZeroLambdaIsReducedRankRegression) {
  std::mt19937_64 rng(7);
  const auto inst = random_instance(cyclic_permutation(6, 2), 4, 20, rng);
  const auto s = solve_regularized(problem(inst, 2, 0.0));
  EXPECT_LT(rel(s.W, fixture::unconstrained_rrr(inst.x, inst.y, 2)), 1e-10);
}

TEST(SolveRegularized, LargeLambdaApproachesConstrained) {
  std::mt19937_64 rng(8);
  const auto inst = random_instance(cyclic_permutation(8, 2), 5, 24, rng);
  const Matrix w_inv = solve_constrained(problem(inst, 2)).W;
  const double far = rel(solve_regularized(problem(inst, 2, 1e2)).W, w_inv);
  const double near = rel(solve_regularized(problem(inst, 2, 1e8)).W, w_inv);
  EXPECT_LT(near, 1e-3);
  EXPECT_LT(near, far);
}

TEST(SolveRegularized, NotBeatenByFactoredDescent) {
  std::mt19937_64 rng(9);
  const GroupRep rep = cyclic_permutation(6, 3);
  const auto inst = random_instance(rep, 4, 18, rng);
  const auto s = solve_regularized(problem(inst, 2, 0.1));
  const Matrix& g = invariance_constraint(rep).entries;
  EXPECT_NEAR(empirical_risk(s.W, inst.x, inst.y, &g, 0.1), s.loss, 1e-12 * s.loss);
  const double best = oracle::factored_descent(inst.x, inst.y, g, 0.1, 2, 20, 3000, 10);
  EXPECT_GE(best - s.loss, -1e-6);
  EXPECT_LT(best - s.loss, 1e-3);
}

TEST(SolveRegularized, FiniteLambdaIsNotInvariant) {
  std::mt19937_64 rng(10);
  const auto inst = random_instance(cyclic_permutation(6, 2), 4, 20, rng);
  EXPECT_GT(solve_regularized(problem(inst, 2, 0.01)).invariance_residual, 1e-6);
}

TEST(SolveAugmented, TrivialGroupIsReducedRankRegression) {
  std::mt19937_64 rng(11);
  const auto inst = random_instance(trivial_rep(5), 3, 15, rng);
  EXPECT_LT(rel(solve_augmented(problem(inst, 2)).W, fixture::unconstrained_rrr(inst.x, inst.y, 2)), 1e-10);
}

TEST(SolveAugmented, MatchesConstrainedForUnitaryReps) {
  std::mt19937_64 rng(12);
  for (const GroupRep& rep : {c4_image_rotation(3), cyclic_permutation(8, 4), rotation2d(5)}) {
    const Eigen::Index d = invariance_constraint(rep).nullity;
    const auto inst = random_instance(rep, 3, 3 * rep.dim(), rng);
    const Eigen::Index r = std::max<Eigen::Index>(1, std::min<Eigen::Index>(d, 3) - 1);
    if (d == 0) {
      EXPECT_EQ(solve_augmented(problem(inst, 1)).W.norm() < 1e-12, true);
      continue;
    }
    const auto da = solve_augmented(problem(inst, r));
    const auto inv = solve_constrained(problem(inst, r));
    EXPECT_LT(rel(da.W, inv.W), 1e-8);
    const Matrix& g = invariance_constraint(rep).entries;
    EXPECT_LT((da.W * g).norm(), 1e-9 * da.W.norm() * g.norm());
    const auto group = oracle::powers_until_identity(rep.generator());
    const auto [xa, ya] = oracle::orbit_data(group, inst.x, inst.y);
    EXPECT_NEAR(oracle::mse(da.W, xa, ya), da.loss, 1e-12 * da.loss);
    EXPECT_NEAR(augmented_risk(da.W, inst.x, inst.y, rep), da.loss, 1e-12 * da.loss);
  }
}

TEST(SolveAugmented, NotBeatenByProjectedGradientOnOrbit) {
  std::mt19937_64 rng(13);
  const GroupRep rep = cyclic_permutation(6, 3);
  const auto inst = random_instance(rep, 4, 18, rng);
  const auto s = solve_augmented(problem(inst, 1));
  const auto [xa, ya] = oracle::orbit_data(oracle::powers_until_identity(rep.generator()), inst.x, inst.y);
  const double best = oracle::projected_gradient(xa, ya, Matrix(), 1, 20, 2000, 14);
  EXPECT_GE(best - s.loss, -1e-9);
}

TEST(SolveAugmented, NonUnitaryRepStillGivesInvariantOptimum) {
  // The averaged objective is unchanged by W -> W rho(h), so its unique
  // optimum is fixed by every rho(h) whether or not rho is orthogonal. On
  // invariant maps the averaged and plain objectives agree, so the optimum
  // is the constrained one as well.
  std::mt19937_64 rng(15);
  const Vector scales = (Vector(6) << 1.0, 3.0, 0.5, 2.0, 1.0, 0.25).finished();
  const Matrix s = scales.asDiagonal();
  const Matrix gen = s * cyclic_permutation(6, 3).generator() * s.inverse();
  const GroupRep rep = rep_from_generator(gen, 3);
  ASSERT_FALSE(is_unitary(rep, 1e-10));
  const auto inst = random_instance(rep, 4, 18, rng);
  const auto da = solve_augmented(problem(inst, 1));
  const Matrix& g = invariance_constraint(rep).entries;
  EXPECT_LT(da.invariance_residual, 1e-9 * da.W.norm() * g.norm());
  EXPECT_LT(rel(da.W, solve_constrained(problem(inst, 1)).W), 1e-8);
}

TEST(EmpiricalRisk, BasicValues) {
  std::mt19937_64 rng(16);
  const Matrix x = oracle::gaussian(4, 10, rng);
  const Matrix w = oracle::gaussian(3, 4, rng);
  const Matrix y = w * x;
  EXPECT_NEAR(empirical_risk(Matrix::Zero(3, 4), x, y), y.squaredNorm() / 10.0, 1e-12);
  EXPECT_LT(empirical_risk(w, x, y), 1e-25);
  EXPECT_EQ(code_of([&] { empirical_risk(Matrix::Zero(2, 4), x, y); }), ErrorCode::ShapeMismatch);
}

TEST(RegularizationPath, RejectsBadGrids) {
  std::mt19937_64 rng(17);
  const auto p = problem(random_instance(cyclic_permutation(6, 2), 3, 18, rng), 1);
  EXPECT_EQ(code_of([&] { regularization_path(p, {0.0}); }), ErrorCode::InvalidGrid);
  EXPECT_EQ(code_of([&] { regularization_path(p, {}); }), ErrorCode::InvalidGrid);
  EXPECT_EQ(code_of([&] { regularization_path(p, {1.0, 0.5}); }), ErrorCode::InvalidGrid);
}

TEST(RegularizationPath, DistanceShrinksAlongGeometricGrid) {
  std::mt19937_64 rng(18);
  for (int t = 0; t < 5; ++t) {
    const auto p = problem(random_instance(cyclic_permutation(8, 2), 4, 24, rng), 2);
    const auto path = regularization_path(p, geometric_grid(1e-3, 1e6, 19));
    ASSERT_EQ(path.size(), 19u);
    EXPECT_TRUE(distance_nonincreasing(path, 1e-9));
    EXPECT_LT(path.back().distance_to_inv, path.front().distance_to_inv);
    const Matrix w_inv = solve_constrained(p).W;
    for (const auto& s : path) EXPECT_NEAR(s.distance_to_inv, (s.W - w_inv).norm(), 1e-12);
  }
}

TEST(RegularizationPath, GridRefinementShrinksJumps) {
  std::mt19937_64 rng(19);
  const auto p = problem(random_instance(cyclic_permutation(8, 2), 4, 24, rng), 2);
  const auto grid = geometric_grid(1e-3, 1e6, 19);
  const auto coarse = regularization_path(p, grid);
  for (std::size_t k = 1; k + 2 < grid.size(); ++k) {
    const double jump = (coarse[k + 1].W - coarse[k].W).norm();
    const auto fine = regularization_path(p, geometric_grid(grid[k], grid[k + 1], 11));
    double worst = 0.0;
    for (std::size_t i = 1; i < fine.size(); ++i) worst = std::max(worst, (fine[i].W - fine[i - 1].W).norm());
    EXPECT_LE(5.0 * worst, jump) << "interval " << k;
  }
}

TEST(CriticalPoints, SpectrumThreeTwoOne) {
  const Matrix target = Vector((Vector(3) << 3, 2, 1).finished()).asDiagonal();
  const auto points = enumerate_critical_points(target, 1);
  ASSERT_EQ(points.size(), 3u);
  EXPECT_NEAR(points[0].loss, 5.0, 1e-12);
  EXPECT_NEAR(points[1].loss, 10.0, 1e-12);
  EXPECT_NEAR(points[2].loss, 13.0, 1e-12);
  EXPECT_TRUE(points[0].is_global_min);
  EXPECT_FALSE(points[1].is_global_min || points[2].is_global_min);
  EXPECT_EQ(points[0].index_set, std::vector<int>{0});
}

TEST(CriticalPoints, CountsAndCriticality) {
  std::mt19937_64 rng(20);
  const GroupRep rep = cyclic_permutation(8, 2);  // nullity 4
  const auto p = problem(random_instance(rep, 5, 24, rng), 2, 0.3);
  const auto inv = enumerate_critical_points(p, Mode::Constrained);
  const auto reg = enumerate_critical_points(p, Mode::Regularized);
  EXPECT_EQ(inv.size(), 6u);
  EXPECT_EQ(reg.size(), 10u);
  for (Mode mode : {Mode::Constrained, Mode::Regularized, Mode::Augmented}) {
    const TransformedTarget t = transformed_target(p, mode);
    const auto points = enumerate_critical_points(p, mode);
    int global = 0;
    for (const auto& cp : points) {
      global += cp.is_global_min;
      EXPECT_LT(oracle::tangent_residual(t.target, cp.transformed, 2), 1e-8);
      EXPECT_LT((cp.transformed * t.right_factor - cp.W).norm(), 1e-12 * std::max(1.0, cp.W.norm()));
      EXPECT_NEAR((t.target - cp.transformed).squaredNorm(), cp.loss, 1e-9 * std::max(1.0, cp.loss));
    }
    EXPECT_EQ(global, 1);
    for (std::size_t i = 1; i < points.size(); ++i) EXPECT_LE(points[i - 1].loss, points[i].loss);
    EXPECT_LT((points.front().W - solve(p, mode).W).norm(), 1e-9);
  }
}

TEST(CriticalPoints, ConstrainedAndAugmentedSetsCoincide) {
  std::mt19937_64 rng(21);
  const GroupRep rep = c4_image_rotation(3);  // nullity 3
  const auto p = problem(random_instance(rep, 4, 27, rng), 1);
  const auto a = enumerate_critical_points(p, Mode::Constrained);
  const auto b = enumerate_critical_points(p, Mode::Augmented);
  ASSERT_EQ(a.size(), b.size());
  for (const auto& cp : a) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& other : b) nearest = std::min(nearest, (cp.W - other.W).norm());
    EXPECT_LT(nearest, 1e-8);
  }
}

TEST(CriticalPoints, ZeroRankGivesSingleZeroPoint) {
  std::mt19937_64 rng(22);
  const auto p = problem(random_instance(cyclic_permutation(6, 2), 3, 18, rng), 0);
  const auto points = enumerate_critical_points(p, Mode::Constrained);
  ASSERT_EQ(points.size(), 1u);
  EXPECT_TRUE(points[0].index_set.empty());
  EXPECT_EQ(points[0].W.norm(), 0.0);
  EXPECT_TRUE(points[0].is_global_min);
}

TEST(CriticalPoints, DegenerateSpectrumRejected) {
  const Matrix target = Vector((Vector(3) << 2, 2, 1).finished()).asDiagonal();
  EXPECT_EQ(code_of([&] { enumerate_critical_points(target, 1); }), ErrorCode::DegenerateSpectrum);
}

TEST(InvarianceDecomposition, HandComputedSplit) {
  Matrix swap(2, 2);
  swap << 0, 1, 1, 0;
  const ConstraintMatrix g = invariance_constraint(rep_from_generator(swap, 2));
  Matrix w(1, 2);
  w << 1, 0;
  const InvarianceSplit s = invariance_decomposition(w, g);
  EXPECT_LT((s.invariant - Matrix::Constant(1, 2, 0.5)).norm(), 1e-15);
  Matrix perp(1, 2);
  perp << 0.5, -0.5;
  EXPECT_LT((s.perp - perp).norm(), 1e-15);
  EXPECT_NEAR(s.ratio, 0.5, 1e-15);
  const InvarianceSplit inv = invariance_decomposition(Matrix::Constant(1, 2, 3.0), g);
  EXPECT_LT(inv.perp.norm(), 1e-15);
  EXPECT_NEAR(inv.ratio, 1.0, 1e-15);
  EXPECT_EQ(invariance_decomposition(Matrix::Zero(1, 2), g).ratio, 1.0);
}

TEST(InvarianceDecomposition, OrthogonalSplit) {
  std::mt19937_64 rng(23);
  const ConstraintMatrix g = invariance_constraint(c4_image_rotation(3));
  for (int t = 0; t < 20; ++t) {
    const Matrix w = oracle::gaussian(4, 9, rng);
    const InvarianceSplit s = invariance_decomposition(w, g);
    EXPECT_LE((s.invariant + s.perp - w).norm(), 1e-15 * w.norm());
    EXPECT_LT((s.invariant * g.entries).norm(), 1e-9 * w.norm() * g.entries.norm());
    EXPECT_NEAR(w.squaredNorm(), s.invariant.squaredNorm() + s.perp.squaredNorm(), 1e-10 * w.squaredNorm());
  }
}

TEST(Warnings, Formatting) {
  EXPECT_EQ(to_string(Warnings{}), "none");
  EXPECT_EQ(parse_mode("augmented"), Mode::Augmented);
  EXPECT_EQ(code_of([] { parse_mode("bogus"); }), ErrorCode::InvalidConfig);
}
