#include "invlr/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "invlr/error.hpp"
#include "invlr/solvers.hpp"
#include "invlr/tolerances.hpp"

namespace invlr {

std::string to_string(TrainMode m) {
  switch (m) {
    case TrainMode::Augmented: return "augmented";
    case TrainMode::Hardwired: return "hardwired";
    case TrainMode::Regularized: return "regularized";
  }
  return "?";
}

std::string to_string(Loss l) { return l == Loss::Mse ? "mse" : "cross_entropy"; }

TrainMode parse_train_mode(const std::string& name) {
  if (name == "augmented") return TrainMode::Augmented;
  if (name == "hardwired") return TrainMode::Hardwired;
  if (name == "regularized") return TrainMode::Regularized;
  throw Error(ErrorCode::InvalidConfig, "unknown training mode '" + name + "'");
}

Loss parse_loss(const std::string& name) {
  if (name == "mse") return Loss::Mse;
  if (name == "cross_entropy") return Loss::CrossEntropy;
  throw Error(ErrorCode::InvalidConfig, "unknown loss '" + name + "'");
}

void TrainConfig::validate() const {
  if (!(adam.learning_rate > 0.0)) throw Error(ErrorCode::InvalidConfig, "learning_rate must be > 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "Adam betas must lie in [0, 1)");
  }
  if (!(adam.eps > 0.0)) throw Error(ErrorCode::InvalidConfig, "adam_eps must be > 0");
  if (epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be >= 1");
  if (!(init_scale > 0.0)) throw Error(ErrorCode::InvalidConfig, "init_scale must be > 0");
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidConfig, "lambda must be >= 0");
  for (Eigen::Index h : hidden) {
    if (h < 1) throw Error(ErrorCode::InvalidConfig, "hidden widths must be >= 1");
  }
}

std::vector<Eigen::Index> LinearNetParams::dims() const {
  std::vector<Eigen::Index> d;
  if (weights.empty()) return d;
  d.push_back(weights.front().cols());
  for (const Matrix& w : weights) d.push_back(w.rows());
  return d;
}

LinearNetParams init_params(const std::vector<Eigen::Index>& dims, std::uint64_t seed, double init_scale) {
  if (!(init_scale > 0.0)) throw Error(ErrorCode::InvalidConfig, "init_scale must be > 0");
  if (dims.size() < 2) throw Error(ErrorCode::InvalidConfig, "a network needs at least two dims");
  for (Eigen::Index d : dims) {
    if (d < 1) throw Error(ErrorCode::InvalidConfig, "layer widths must be >= 1");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  LinearNetParams p;
  for (std::size_t j = 1; j < dims.size(); ++j) {
    const double std_dev = init_scale / std::sqrt(static_cast<double>(dims[j - 1]));
    Matrix w(dims[j], dims[j - 1]);
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = std_dev * normal(rng);
    }
    p.weights.push_back(std::move(w));
  }
  return p;
}

Matrix end_to_end(const LinearNetParams& params) {
  if (params.weights.empty()) throw Error(ErrorCode::InvalidConfig, "empty network");
  Matrix w = params.weights.front();
  for (std::size_t j = 1; j < params.weights.size(); ++j) {
    if (params.weights[j].cols() != w.rows()) throw Error(ErrorCode::ShapeMismatch, "layer shapes do not chain");
    w = params.weights[j] * w;
  }
  return w;
}

namespace {

void check_one_hot(const Matrix& y) {
  for (Eigen::Index c = 0; c < y.cols(); ++c) {
    int ones = 0;
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      const double v = y(r, c);
      if (v == 1.0) {
        ++ones;
      } else if (v != 0.0) {
        throw Error(ErrorCode::NonOneHotTargets, "column " + std::to_string(c) + " is not one-hot");
      }
    }
    if (ones != 1) throw Error(ErrorCode::NonOneHotTargets, "column " + std::to_string(c) + " is not one-hot");
  }
}

// Column-wise softmax, shifted by the column max.
Matrix softmax(const Matrix& logits) {
  Matrix s(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const double mx = logits.col(c).maxCoeff();
    const Vector e = (logits.col(c).array() - mx).exp().matrix();
    s.col(c) = e / e.sum();
  }
  return s;
}

double cross_entropy(const Matrix& logits, const Matrix& y) {
  double total = 0.0;
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const double mx = logits.col(c).maxCoeff();
    const double lse = mx + std::log((logits.col(c).array() - mx).exp().sum());
    Eigen::Index label = 0;
    y.col(c).maxCoeff(&label);
    total += lse - logits(label, c);
  }
  return total / static_cast<double>(logits.cols());
}

void check_shapes(const Matrix& w, const Matrix& x, const Matrix& y, const Matrix* g) {
  if (w.cols() != x.rows() || w.rows() != y.rows() || x.cols() != y.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "network, X and Y shapes disagree");
  }
  if (x.cols() == 0) throw Error(ErrorCode::ShapeMismatch, "no samples");
  if (g != nullptr && g->rows() != w.cols()) throw Error(ErrorCode::ShapeMismatch, "constraint rows differ from d0");
}

}  // namespace

double training_objective(const Matrix& w, const Matrix& x, const Matrix& y, Loss loss, double lambda,
                          const Matrix* g) {
  check_shapes(w, x, y, g);
  const double n = static_cast<double>(x.cols());
  const Matrix out = w * x;
  double value = 0.0;
  if (loss == Loss::Mse) {
    value = (out - y).squaredNorm() / n;
  } else {
    check_one_hot(y);
    value = cross_entropy(out, y);
  }
  if (g != nullptr && lambda != 0.0) value += lambda * (w * (*g)).squaredNorm();
  return value;
}

Matrix end_to_end_gradient(const Matrix& w, const Matrix& x, const Matrix& y, Loss loss, double lambda,
                           const Matrix* g) {
  check_shapes(w, x, y, g);
  const double n = static_cast<double>(x.cols());
  Matrix grad;
  if (loss == Loss::Mse) {
    grad = (2.0 / n) * (w * x - y) * x.transpose();
  } else {
    check_one_hot(y);
    grad = (1.0 / n) * (softmax(w * x) - y) * x.transpose();
  }
  if (g != nullptr && lambda != 0.0) grad += 2.0 * lambda * (w * (*g)) * g->transpose();
  return grad;
}

Gradient gradient(const LinearNetParams& params, const Matrix& x, const Matrix& y, Loss loss, double lambda,
                  const Matrix* g) {
  const auto& ws = params.weights;
  const std::size_t depth = ws.size();
  if (depth == 0) throw Error(ErrorCode::InvalidConfig, "empty network");
  // right[j] = W_{j-1} ... W_1 (identity for j = 0)
  std::vector<Matrix> right(depth);
  right[0] = Matrix::Identity(ws[0].cols(), ws[0].cols());
  for (std::size_t j = 1; j < depth; ++j) {
    if (ws[j].cols() != ws[j - 1].rows()) throw Error(ErrorCode::ShapeMismatch, "layer shapes do not chain");
    right[j] = ws[j - 1] * right[j - 1];
  }
  const Matrix w = ws[depth - 1] * right[depth - 1];
  Gradient out;
  out.objective = training_objective(w, x, y, loss, lambda, g);
  const Matrix e = end_to_end_gradient(w, x, y, loss, lambda, g);
  out.layers.resize(depth);
  // left = W_L ... W_{j+1} (identity for the last layer)
  Matrix left = Matrix::Identity(w.rows(), w.rows());
  for (std::size_t j = depth; j-- > 0;) {
    out.layers[j] = left.transpose() * e * right[j].transpose();
    left = left * ws[j];
  }
  return out;
}

double accuracy(const Matrix& outputs, const Matrix& targets) {
  if (outputs.rows() != targets.rows() || outputs.cols() != targets.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "outputs and targets differ in shape");
  }
  if (outputs.cols() == 0) return 0.0;
  Eigen::Index hits = 0;
  for (Eigen::Index c = 0; c < outputs.cols(); ++c) {
    Eigen::Index a = 0;
    Eigen::Index b = 0;
    outputs.col(c).maxCoeff(&a);
    targets.col(c).maxCoeff(&b);
    if (a == b) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(outputs.cols());
}

AdamState AdamState::zeros_like(const std::vector<Matrix>& params) {
  AdamState s;
  for (const Matrix& p : params) {
    s.m.push_back(Matrix::Zero(p.rows(), p.cols()));
    s.v.push_back(Matrix::Zero(p.rows(), p.cols()));
  }
  return s;
}

void adam_step(std::vector<Matrix>& params, AdamState& state, const std::vector<Matrix>& grads,
               const AdamConfig& config) {
  if (grads.size() != params.size() || state.m.size() != params.size()) {
    throw Error(ErrorCode::ShapeMismatch, "Adam state, gradients and parameters differ in length");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    state.m[k] = config.beta1 * state.m[k] + (1.0 - config.beta1) * grads[k];
    state.v[k] = config.beta2 * state.v[k] + (1.0 - config.beta2) * grads[k].cwiseAbs2();
    const auto m_hat = state.m[k].array() / c1;
    const auto v_hat = state.v[k].array() / c2;
    params[k].array() -= config.learning_rate * m_hat / (v_hat.sqrt() + config.eps);
  }
}

std::pair<Matrix, Matrix> augment_dataset(const Matrix& x, const Matrix& y, const GroupRep& rep) {
  if (x.cols() != y.cols()) throw Error(ErrorCode::ShapeMismatch, "X and Y differ in sample count");
  if (rep.dim() != x.rows()) throw Error(ErrorCode::ShapeMismatch, "representation acts on a different dim");
  const auto els = elements(rep);
  const Eigen::Index n = x.cols();
  const auto k = static_cast<Eigen::Index>(els.size());
  Matrix xa(x.rows(), n * k);
  Matrix ya(y.rows(), n * k);
  for (Eigen::Index j = 0; j < k; ++j) {
    xa.middleCols(j * n, n) = els[static_cast<std::size_t>(j)] * x;
    ya.middleCols(j * n, n) = y;
  }
  return {xa, ya};
}

Matrix hardwired_forward(const LinearNetParams& params, const Matrix& basis, const Matrix& x) {
  if (params.weights.empty() || params.weights.front().cols() != basis.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "first layer width differs from the basis rank");
  }
  if (basis.cols() != x.rows()) throw Error(ErrorCode::ShapeMismatch, "basis and input dims differ");
  return end_to_end(params) * (basis * x);
}

TrainLog train(const TrainConfig& config, const Matrix& x, const Matrix& y, const TrainSetup& setup) {
  config.validate();
  if (x.cols() != y.cols()) throw Error(ErrorCode::ShapeMismatch, "X and Y differ in sample count");

  std::optional<ConstraintMatrix> constraint = setup.constraint;
  if (!constraint && setup.rep) constraint = invariance_constraint(*setup.rep);

  Matrix train_x;
  Matrix train_y = y;
  Matrix basis;
  const Matrix* penalty = nullptr;
  double lambda = 0.0;
  switch (config.mode) {
    case TrainMode::Augmented: {
      if (!setup.rep) throw Error(ErrorCode::InvalidConfig, "augmented training needs a representation");
      std::tie(train_x, train_y) = augment_dataset(x, y, *setup.rep);
      break;
    }
    case TrainMode::Hardwired: {
      if (setup.basis) {
        basis = *setup.basis;
      } else if (constraint) {
        basis = invariant_basis(*constraint);
      } else {
        throw Error(ErrorCode::InvalidConfig, "hardwired training needs an invariant basis");
      }
      if (!constraint) {
        // left null space of I - B^T B is the row space of B
        constraint = constraint_from_matrix(Matrix::Identity(basis.cols(), basis.cols()) -
                                            basis.transpose() * basis);
      }
      train_x = basis * x;
      break;
    }
    case TrainMode::Regularized: {
      if (!constraint) throw Error(ErrorCode::InvalidConfig, "regularized training needs a constraint");
      train_x = x;
      penalty = &constraint->entries;
      lambda = config.lambda;
      break;
    }
  }
  if (constraint && constraint->entries.rows() != x.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "constraint acts on a different input dim");
  }

  std::vector<Eigen::Index> dims{train_x.rows()};
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(y.rows());
  TrainLog log;
  log.params = init_params(dims, config.seed, config.init_scale);
  AdamState state = AdamState::zeros_like(log.params.weights);

  const double initial = training_objective(end_to_end(log.params), train_x, train_y, config.loss, lambda, penalty);
  log.records.reserve(static_cast<std::size_t>(config.epochs));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const Gradient grad = gradient(log.params, train_x, train_y, config.loss, lambda, penalty);
    adam_step(log.params.weights, state, grad.layers, config.adam);

    const Matrix w = end_to_end(log.params);
    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.objective = training_objective(w, train_x, train_y, config.loss, lambda, penalty);
    if (!std::isfinite(rec.objective) || rec.objective > tol::kDivergence * std::max(initial, 1e-300)) {
      throw Error(ErrorCode::DivergenceDetected, "objective " + std::to_string(rec.objective) + " at epoch " +
                                                     std::to_string(rec.epoch));
    }
    const Matrix full = config.mode == TrainMode::Hardwired ? Matrix(w * basis) : w;
    if (constraint) {
      const InvarianceSplit split = invariance_decomposition(full, *constraint);
      rec.w_perp_frob = split.perp.norm();
      rec.invariance_ratio = split.ratio;
    }
    rec.accuracy = accuracy(w * train_x, train_y);
    log.records.push_back(rec);
  }
  log.final_w = config.mode == TrainMode::Hardwired ? Matrix(end_to_end(log.params) * basis)
                                                    : end_to_end(log.params);
  return log;
}

NonlinearNetParams init_nonlinear(Eigen::Index d0, Eigen::Index d1, Eigen::Index dl, Activation activation,
                                  std::uint64_t seed) {
  if (d0 < 1 || d1 < 1 || dl < 1) throw Error(ErrorCode::InvalidConfig, "layer widths must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  NonlinearNetParams p;
  p.activation = activation;
  p.hidden.resize(d1, d0);
  p.output.resize(dl, d1);
  for (Eigen::Index i = 0; i < p.hidden.size(); ++i) p.hidden.data()[i] = normal(rng);
  for (Eigen::Index i = 0; i < p.output.size(); ++i) p.output.data()[i] = normal(rng);
  return p;
}

namespace {

void check_nonlinear(const NonlinearNetParams& p) {
  if (p.output.cols() != p.hidden.rows()) throw Error(ErrorCode::ShapeMismatch, "hidden and output widths differ");
}

}  // namespace

Matrix nonlinear_forward(const NonlinearNetParams& params, const Matrix& x) {
  check_nonlinear(params);
  if (x.rows() != params.hidden.cols()) throw Error(ErrorCode::ShapeMismatch, "input dim differs from d0");
  const Matrix pre = params.hidden * x;
  const Matrix act = pre.unaryExpr([&](double z) { return activate(params.activation, z); });
  return params.output * act / std::sqrt(static_cast<double>(params.hidden.rows()));
}

NonlinearGradient nonlinear_gradient(const NonlinearNetParams& params, const Matrix& x, const Matrix& y) {
  check_nonlinear(params);
  if (x.rows() != params.hidden.cols() || y.rows() != params.output.rows() || x.cols() != y.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "network, X and Y shapes disagree");
  }
  const double n = static_cast<double>(x.cols());
  const double scale = 1.0 / std::sqrt(static_cast<double>(params.hidden.rows()));
  const Matrix pre = params.hidden * x;
  const Matrix act = pre.unaryExpr([&](double z) { return activate(params.activation, z); });
  const Matrix dact = pre.unaryExpr([&](double z) { return activate_derivative(params.activation, z); });
  const Matrix resid = scale * params.output * act - y;
  NonlinearGradient g;
  g.objective = resid.squaredNorm() / n;
  const Matrix dout = (2.0 / n) * resid;  // dL x n
  g.output = scale * dout * act.transpose();
  const Matrix back = (scale * params.output.transpose() * dout).cwiseProduct(dact);  // d1 x n
  g.hidden = back * x.transpose();
  return g;
}

std::vector<double> train_nonlinear(NonlinearNetParams& params, const Matrix& x, const Matrix& y, int epochs,
                                    const AdamConfig& config) {
  if (epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be >= 1");
  std::vector<Matrix> ps{params.hidden, params.output};
  AdamState state = AdamState::zeros_like(ps);
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(epochs));
  for (int e = 0; e < epochs; ++e) {
    params.hidden = ps[0];
    params.output = ps[1];
    const NonlinearGradient g = nonlinear_gradient(params, x, y);
    adam_step(ps, state, {g.hidden, g.output}, config);
    history.push_back(g.objective);
  }
  params.hidden = ps[0];
  params.output = ps[1];
  return history;
}

double epsilon_inv(const std::function<double(const Vector&)>& predict, const Vector& x, const GroupRep& rep) {
  const auto els = elements(rep);
  std::vector<double> values;
  values.reserve(els.size());
  double mean = 0.0;
  for (const Matrix& g : els) {
    values.push_back(predict(g * x));
    mean += values.back();
  }
  mean /= static_cast<double>(values.size());
  if (std::abs(mean) < tol::kOrbitMean) throw Error(ErrorCode::OrbitMeanZero, "orbit mean is zero");
  double eps = 0.0;
  for (double v : values) eps += (1.0 - v / mean) * (1.0 - v / mean);
  return eps / static_cast<double>(values.size());
}

double median_epsilon_inv(const std::function<double(const Vector&)>& predict, const Matrix& x,
                          const GroupRep& rep) {
  if (x.cols() == 0) throw Error(ErrorCode::ShapeMismatch, "no inputs");
  std::vector<double> eps;
  eps.reserve(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index c = 0; c < x.cols(); ++c) eps.push_back(epsilon_inv(predict, x.col(c), rep));
  std::sort(eps.begin(), eps.end());
  const std::size_t mid = eps.size() / 2;
  return eps.size() % 2 == 1 ? eps[mid] : 0.5 * (eps[mid - 1] + eps[mid]);
}

}  // namespace invlr
