#include "invlr/solvers.hpp"

#include <algorithm>
#include <cmath>

#include "invlr/error.hpp"
#include "invlr/tolerances.hpp"

namespace invlr {

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Constrained: return "constrained";
    case Mode::Regularized: return "regularized";
    case Mode::Augmented: return "augmented";
  }
  return "?";
}

Mode parse_mode(const std::string& name) {
  if (name == "constrained") return Mode::Constrained;
  if (name == "regularized") return Mode::Regularized;
  if (name == "augmented") return Mode::Augmented;
  throw Error(ErrorCode::InvalidConfig, "unknown solver mode '" + name + "'");
}

std::string to_string(Warning w) {
  switch (w) {
    case Warning::Filling: return "Filling";
    case Warning::RankConstraintVacuous: return "RankConstraintVacuous";
    case Warning::RankAssumptionViolated: return "RankAssumptionViolated";
    case Warning::NonUniqueOptimum: return "NonUniqueOptimum";
    case Warning::SpectralGapSmall: return "SpectralGapSmall";
  }
  return "?";
}

std::string to_string(const Warnings& ws) {
  if (ws.empty()) return "none";
  std::string out;
  for (Warning w : ws) {
    if (!out.empty()) out += '|';
    out += to_string(w);
  }
  return out;
}

RegressionProblem::RegressionProblem(Matrix x, Matrix y, ConstraintMatrix constraint, Eigen::Index r,
                                     double lambda)
    : x_(std::move(x)), y_(std::move(y)), constraint_(std::move(constraint)), r_(r), lambda_(lambda) {
  validate();
}

RegressionProblem::RegressionProblem(Matrix x, Matrix y, GroupRep rep, Eigen::Index r, double lambda)
    : x_(std::move(x)),
      y_(std::move(y)),
      constraint_(invariance_constraint(rep)),
      rep_(std::move(rep)),
      r_(r),
      lambda_(lambda) {
  validate();
}

void RegressionProblem::validate() {
  if (x_.cols() != y_.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "X has " + std::to_string(x_.cols()) + " columns, Y has " +
                                              std::to_string(y_.cols()));
  }
  if (constraint_.entries.rows() != x_.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "constraint has " + std::to_string(constraint_.entries.rows()) +
                                              " rows, data has d0 = " + std::to_string(x_.rows()));
  }
  if (r_ < 0) throw Error(ErrorCode::RankOutOfRange, "rank bound must be nonnegative");
  if (!(lambda_ >= 0.0) || !std::isfinite(lambda_)) {
    throw Error(ErrorCode::InvalidConfig, "lambda must be finite and >= 0");
  }
  if (!x_.allFinite() || !y_.allFinite()) throw Error(ErrorCode::SingularData, "data has non-finite entries");
  try {
    const Matrix xxt = x_ * x_.transpose();
    data_root_ = pd_root(0.5 * (xxt + xxt.transpose()));
  } catch (const Error& e) {
    throw Error(ErrorCode::SingularData, std::string("X X^T is not positive definite (") + e.what() + ")");
  }
  target_ = y_ * x_.transpose() * data_root_.inv_root;
}

Warnings RegressionProblem::structural_warnings() const {
  Warnings w;
  if (!non_filling()) w.insert(Warning::Filling);
  if (r_ >= constraint_.nullity) w.insert(Warning::RankConstraintVacuous);
  return w;
}

RegressionProblem RegressionProblem::with_lambda(double lambda) const {
  RegressionProblem copy = *this;
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::InvalidConfig, "lambda must be finite and >= 0");
  }
  copy.lambda_ = lambda;
  return copy;
}

RegressionProblem RegressionProblem::with_rank(Eigen::Index r) const {
  if (r < 0) throw Error(ErrorCode::RankOutOfRange, "rank bound must be nonnegative");
  RegressionProblem copy = *this;
  copy.r_ = r;
  return copy;
}

namespace {

const GroupRep& require_rep(const RegressionProblem& problem) {
  if (!problem.rep()) throw Error(ErrorCode::InvalidConfig, "augmented mode needs a group representation");
  return *problem.rep();
}

// Q^2 = sum_g rho(g) X X^T rho(g)^T
PdRoot augmented_root(const RegressionProblem& problem) {
  const GroupRep& rep = require_rep(problem);
  const Matrix xxt = problem.x() * problem.x().transpose();
  Matrix q2 = Matrix::Zero(problem.d0(), problem.d0());
  for (const Matrix& g : elements(rep)) q2 += g * xxt * g.transpose();
  try {
    return pd_root(0.5 * (q2 + q2.transpose()));
  } catch (const Error& e) {
    throw Error(ErrorCode::SingularData, std::string("augmented Gram matrix is not positive definite (") +
                                             e.what() + ")");
  }
}

Warnings spectral_warnings(const Vector& sigma, Eigen::Index r, Eigen::Index rank) {
  Warnings w;
  if (rank <= r) w.insert(Warning::RankAssumptionViolated);
  const Eigen::Index k = sigma.size();
  if (r >= 1 && r < k) {
    const double above = sigma(r - 1);
    const double below = sigma(r);
    if (above > 0.0 && above <= below * (1.0 + tol::kSpectralGap)) w.insert(Warning::NonUniqueOptimum);
  }
  return w;
}

RankBoundedSolution finish(const RegressionProblem& problem, Mode mode, const TransformedTarget& t) {
  const Eigen::Index k = t.factors.sigma.size();
  const Eigen::Index r = std::min(problem.r(), k);
  RankBoundedSolution s;
  s.W = best_rank_r(t.factors, r) * t.right_factor;
  s.loss = objective(problem, mode, s.W);
  s.rank = s.W.size() ? numerical_rank(s.W) : 0;
  s.invariance_residual = (s.W * problem.constraint().entries).norm();
  s.spectrum = t.factors.sigma;
  s.warnings = problem.structural_warnings();
  const Eigen::Index target_rank = numerical_rank(t.factors, t.target.rows(), t.target.cols());
  s.warnings.merge(spectral_warnings(t.factors.sigma, problem.r(), target_rank));
  return s;
}

}  // namespace

TransformedTarget transformed_target(const RegressionProblem& problem, Mode mode) {
  TransformedTarget t;
  const Matrix& p_inv = problem.data_root().inv_root;
  switch (mode) {
    case Mode::Constrained: {
      const Matrix g_tilde = p_inv * problem.constraint().entries;
      t.target = problem.target() * left_null_projector(g_tilde);
      t.right_factor = p_inv;
      break;
    }
    case Mode::Regularized: {
      const Matrix g_tilde = p_inv * problem.constraint().entries;
      const auto d0 = problem.d0();
      const double scale = static_cast<double>(problem.n()) * problem.lambda();
      const PdRoot b = pd_root(Matrix::Identity(d0, d0) + scale * (g_tilde * g_tilde.transpose()));
      t.target = problem.target() * b.inv_root;
      t.right_factor = b.inv_root * p_inv;
      break;
    }
    case Mode::Augmented: {
      const GroupRep& rep = require_rep(problem);
      const PdRoot q = augmented_root(problem);
      const double order = static_cast<double>(rep.order());
      t.target = order * problem.y() * problem.x().transpose() * group_average(rep).transpose() * q.inv_root;
      t.right_factor = q.inv_root;
      break;
    }
  }
  t.factors = svd(t.target);
  return t;
}

RankBoundedSolution solve_constrained(const RegressionProblem& problem) {
  return finish(problem, Mode::Constrained, transformed_target(problem, Mode::Constrained));
}

RankBoundedSolution solve_regularized(const RegressionProblem& problem) {
  return finish(problem, Mode::Regularized, transformed_target(problem, Mode::Regularized));
}

RankBoundedSolution solve_augmented(const RegressionProblem& problem) {
  return finish(problem, Mode::Augmented, transformed_target(problem, Mode::Augmented));
}

RankBoundedSolution solve(const RegressionProblem& problem, Mode mode) {
  return finish(problem, mode, transformed_target(problem, mode));
}

double empirical_risk(const Matrix& w, const Matrix& x, const Matrix& y, const Matrix* g, double lambda) {
  if (w.cols() != x.rows() || w.rows() != y.rows() || x.cols() != y.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "W, X and Y shapes disagree");
  }
  if (x.cols() == 0) throw Error(ErrorCode::ShapeMismatch, "no samples");
  double risk = (w * x - y).squaredNorm() / static_cast<double>(x.cols());
  if (g != nullptr && lambda != 0.0) {
    if (g->rows() != w.cols()) throw Error(ErrorCode::ShapeMismatch, "constraint rows differ from d0");
    risk += lambda * (w * (*g)).squaredNorm();
  }
  return risk;
}

double augmented_risk(const Matrix& w, const Matrix& x, const Matrix& y, const GroupRep& rep) {
  if (w.cols() != x.rows() || w.rows() != y.rows() || x.cols() != y.cols() || rep.dim() != x.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "W, X, Y and representation shapes disagree");
  }
  double total = 0.0;
  const auto els = elements(rep);
  for (const Matrix& g : els) total += (w * g * x - y).squaredNorm();
  return total / (static_cast<double>(x.cols()) * static_cast<double>(els.size()));
}

double objective(const RegressionProblem& problem, Mode mode, const Matrix& w) {
  switch (mode) {
    case Mode::Constrained: return empirical_risk(w, problem.x(), problem.y());
    case Mode::Regularized:
      return empirical_risk(w, problem.x(), problem.y(), &problem.constraint().entries, problem.lambda());
    case Mode::Augmented: return augmented_risk(w, problem.x(), problem.y(), require_rep(problem));
  }
  return 0.0;
}

std::vector<PathSample> regularization_path(const RegressionProblem& problem, const std::vector<double>& lambdas) {
  if (lambdas.empty()) throw Error(ErrorCode::InvalidGrid, "empty lambda grid");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0) || !std::isfinite(lambdas[i])) {
      throw Error(ErrorCode::InvalidGrid, "lambda grid entries must be finite and > 0");
    }
    if (i > 0 && !(lambdas[i] > lambdas[i - 1])) {
      throw Error(ErrorCode::InvalidGrid, "lambda grid must be strictly increasing");
    }
  }
  const Matrix w_inv = solve_constrained(problem).W;
  std::vector<PathSample> path;
  path.reserve(lambdas.size());
  for (double lambda : lambdas) {
    const RegressionProblem p = problem.with_lambda(lambda);
    const TransformedTarget t = transformed_target(p, Mode::Regularized);
    const RankBoundedSolution s = finish(p, Mode::Regularized, t);
    PathSample sample;
    sample.lambda = lambda;
    sample.W = s.W;
    sample.loss = s.loss;
    sample.invariance_residual = s.invariance_residual;
    sample.distance_to_inv = (s.W - w_inv).norm();
    sample.warnings = s.warnings;
    const Vector& sig = t.factors.sigma;
    const Eigen::Index r = p.r();
    if (r >= 1 && r < sig.size() && sig(r - 1) - sig(r) < tol::kSpectralGap * sig(0)) {
      sample.warnings.insert(Warning::SpectralGapSmall);
    }
    path.push_back(std::move(sample));
  }
  return path;
}

bool distance_nonincreasing(const std::vector<PathSample>& path, double slack) {
  for (std::size_t i = 1; i < path.size(); ++i) {
    if (path[i].distance_to_inv > path[i - 1].distance_to_inv + slack) return false;
  }
  return true;
}

std::vector<double> geometric_grid(double lo, double hi, int count) {
  if (count < 1 || !(lo > 0.0) || !(hi >= lo)) throw Error(ErrorCode::InvalidGrid, "bad geometric grid");
  std::vector<double> grid(static_cast<std::size_t>(count));
  if (count == 1) {
    grid[0] = lo;
    return grid;
  }
  const double llo = std::log10(lo);
  const double step = (std::log10(hi) - llo) / (count - 1);
  for (int i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = std::pow(10.0, llo + step * i);
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

double binomial(Eigen::Index n, Eigen::Index k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double out = 1.0;
  for (Eigen::Index i = 1; i <= k; ++i) out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(out);
}

std::vector<CriticalPoint> enumerate_critical_points(const Matrix& target, Eigen::Index r,
                                                     const Matrix& right_factor) {
  if (r < 0) throw Error(ErrorCode::RankOutOfRange, "rank bound must be nonnegative");
  const SvdFactors f = svd(target);
  const Eigen::Index k = numerical_rank(f, target.rows(), target.cols());
  const Vector& sigma = f.sigma;
  for (Eigen::Index i = 0; i + 1 < k; ++i) {
    if (sigma(i) - sigma(i + 1) <= tol::kSpectralGap * sigma(i)) {
      throw Error(ErrorCode::DegenerateSpectrum, "singular values " + std::to_string(i + 1) + " and " +
                                                     std::to_string(i + 2) + " coincide");
    }
  }
  const Eigen::Index s = std::min(r, k);
  if (binomial(k, s) > tol::kMaxSubsets) {
    throw Error(ErrorCode::TooManySubsets, "binom(" + std::to_string(k) + ", " + std::to_string(s) + ") subsets");
  }

  std::vector<CriticalPoint> points;
  std::vector<int> idx(static_cast<std::size_t>(s));
  for (Eigen::Index i = 0; i < s; ++i) idx[static_cast<std::size_t>(i)] = static_cast<int>(i);
  while (true) {
    CriticalPoint cp;
    cp.index_set = idx;
    cp.transformed = Matrix::Zero(target.rows(), target.cols());
    for (int i : idx) cp.transformed += sigma(i) * f.U.col(i) * f.V.col(i).transpose();
    double loss = 0.0;
    for (Eigen::Index i = 0, j = 0; i < k; ++i) {
      if (j < s && idx[static_cast<std::size_t>(j)] == i) {
        ++j;
        continue;
      }
      loss += sigma(i) * sigma(i);
    }
    cp.loss = loss;
    cp.W = right_factor.size() ? Matrix(cp.transformed * right_factor) : cp.transformed;
    points.push_back(std::move(cp));

    // next combination in lexicographic order
    Eigen::Index pos = s - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == static_cast<int>(k - s + pos)) --pos;
    if (pos < 0) break;
    ++idx[static_cast<std::size_t>(pos)];
    for (Eigen::Index j = pos + 1; j < s; ++j) {
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  for (CriticalPoint& cp : points) {
    bool leading = true;
    for (Eigen::Index i = 0; i < s; ++i) leading = leading && cp.index_set[static_cast<std::size_t>(i)] == i;
    cp.is_global_min = leading;
  }
  std::stable_sort(points.begin(), points.end(),
                   [](const CriticalPoint& a, const CriticalPoint& b) { return a.loss < b.loss; });
  return points;
}

std::vector<CriticalPoint> enumerate_critical_points(const RegressionProblem& problem, Mode mode) {
  const TransformedTarget t = transformed_target(problem, mode);
  std::vector<CriticalPoint> points = enumerate_critical_points(t.target, problem.r(), t.right_factor);
  for (CriticalPoint& cp : points) cp.objective = objective(problem, mode, cp.W);
  return points;
}

InvarianceSplit invariance_decomposition(const Matrix& w, const ConstraintMatrix& g) {
  if (w.cols() != g.entries.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "W has " + std::to_string(w.cols()) + " columns, constraint has " +
                                              std::to_string(g.entries.rows()) + " rows");
  }
  InvarianceSplit split;
  split.invariant = w * left_null_projector(g.entries);
  split.perp = w - split.invariant;
  const double total = w.squaredNorm();
  split.ratio = total == 0.0 ? 1.0 : split.invariant.squaredNorm() / total;
  return split;
}

}  // namespace invlr
