#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "invlr/activation.hpp"
#include "invlr/grouprep.hpp"
#include "invlr/linalg.hpp"

namespace invlr {

enum class TrainMode { Augmented, Hardwired, Regularized };
enum class Loss { Mse, CrossEntropy };

std::string to_string(TrainMode m);
std::string to_string(Loss l);
TrainMode parse_train_mode(const std::string& name);
Loss parse_loss(const std::string& name);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  TrainMode mode = TrainMode::Augmented;
  double lambda = 0.0;
  Loss loss = Loss::Mse;
  AdamConfig adam;
  int epochs = 1000;
  std::uint64_t seed = 0;
  double init_scale = 1.0;
  /// Widths of the hidden layers, e.g. {3} for a two-layer network.
  std::vector<Eigen::Index> hidden;

  /// Throws InvalidConfig on lr <= 0, betas outside [0, 1), epochs < 1,
  /// init_scale <= 0 or lambda < 0.
  void validate() const;
};

/// Weights W_1..W_L of a deep linear network, W_j of shape d_j x d_{j-1}.
struct LinearNetParams {
  std::vector<Matrix> weights;

  std::vector<Eigen::Index> dims() const;
};

/// Entries drawn from N(0, (init_scale / sqrt(fan_in))^2) with a seeded
/// mt19937_64; the same seed gives bit-identical weights.
LinearNetParams init_params(const std::vector<Eigen::Index>& dims, std::uint64_t seed, double init_scale = 1.0);

/// W_L * ... * W_1.
Matrix end_to_end(const LinearNetParams& params);

/// Objective and per-layer gradients of
///   data_loss(W X, Y) + lambda ||W G||_F^2,
/// where data_loss is (1/n)||WX - Y||_F^2 for MSE or the mean softmax
/// cross-entropy for CrossEntropy. The penalty applies only when g is given.
struct Gradient {
  double objective = 0.0;
  std::vector<Matrix> layers;
};

Gradient gradient(const LinearNetParams& params, const Matrix& x, const Matrix& y, Loss loss,
                  double lambda = 0.0, const Matrix* g = nullptr);

double training_objective(const Matrix& w, const Matrix& x, const Matrix& y, Loss loss, double lambda = 0.0,
                          const Matrix* g = nullptr);

/// Gradient of the objective with respect to the end-to-end matrix.
Matrix end_to_end_gradient(const Matrix& w, const Matrix& x, const Matrix& y, Loss loss, double lambda = 0.0,
                           const Matrix* g = nullptr);

/// Fraction of columns whose output argmax matches the target argmax.
double accuracy(const Matrix& outputs, const Matrix& targets);

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  long step = 0;

  static AdamState zeros_like(const std::vector<Matrix>& params);
};

/// One bias-corrected Adam update applied in place.
void adam_step(std::vector<Matrix>& params, AdamState& state, const std::vector<Matrix>& grads,
               const AdamConfig& config);

/// Full group orbit of the data: X_aug = [rho(g^0) X | ... | rho(g^{k-1}) X],
/// Y repeated per block.
std::pair<Matrix, Matrix> augment_dataset(const Matrix& x, const Matrix& y, const GroupRep& rep);

/// W_L ... W_1 B x with B from invariant_basis.
Matrix hardwired_forward(const LinearNetParams& params, const Matrix& basis, const Matrix& x);

struct EpochRecord {
  int epoch = 0;
  double objective = 0.0;
  double w_perp_frob = 0.0;
  double invariance_ratio = 1.0;
  double accuracy = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> records;
  /// End-to-end map on the original input space (W B in hardwired mode).
  Matrix final_w;
  LinearNetParams params;
};

/// What the chosen mode needs: a representation for augmented training, a
/// constraint and lambda for regularized, an invariant basis for hardwired.
/// Missing pieces are derived where possible (constraint from rep, basis from
/// constraint).
struct TrainSetup {
  std::optional<GroupRep> rep;
  std::optional<ConstraintMatrix> constraint;
  std::optional<Matrix> basis;
};

/// Full-batch Adam training for config.epochs epochs. Metrics are evaluated on
/// the end-to-end map after each update.
TrainLog train(const TrainConfig& config, const Matrix& x, const Matrix& y, const TrainSetup& setup);

// -- two-layer nonlinear networks ------------------------------------------

/// f(x) = (1/sqrt(d1)) * output * sigma(hidden * x), bias-free.
struct NonlinearNetParams {
  Matrix hidden;  // d1 x d0
  Matrix output;  // dL x d1
  Activation activation = Activation::Relu;
};

/// Standard normal entries in both layers.
NonlinearNetParams init_nonlinear(Eigen::Index d0, Eigen::Index d1, Eigen::Index dl, Activation activation,
                                  std::uint64_t seed);

/// Columns of x are inputs; returns dL x n outputs.
Matrix nonlinear_forward(const NonlinearNetParams& params, const Matrix& x);

struct NonlinearGradient {
  double objective = 0.0;
  Matrix hidden;
  Matrix output;
};

/// (1/n)||f(X) - Y||_F^2 and its gradient.
NonlinearGradient nonlinear_gradient(const NonlinearNetParams& params, const Matrix& x, const Matrix& y);

/// Full-batch Adam on the MSE objective; returns the per-epoch objective.
std::vector<double> train_nonlinear(NonlinearNetParams& params, const Matrix& x, const Matrix& y, int epochs,
                                    const AdamConfig& config = {});

/// Orbit-averaged squared relative deviation E_g (1 - f(gx)/mean_g f(gx))^2.
/// Throws OrbitMeanZero when |mean| < 1e-12.
double epsilon_inv(const std::function<double(const Vector&)>& predict, const Vector& x, const GroupRep& rep);

/// Median of epsilon_inv over the columns of x.
double median_epsilon_inv(const std::function<double(const Vector&)>& predict, const Matrix& x,
                          const GroupRep& rep);

}  // namespace invlr
