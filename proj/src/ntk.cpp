#include "invlr/ntk.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "invlr/error.hpp"
#include "invlr/tolerances.hpp"

namespace invlr {

namespace {

void check_pair(const WidthSampleSet& s, const Vector& x, const Vector& xp) {
  if (x.size() != xp.size() || x.size() != s.weights.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "inputs and samples differ in dimension");
  }
  if (s.out_scales.size() != s.weights.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "one out scale per hidden unit required");
  }
  if (s.weights.rows() == 0) throw Error(ErrorCode::DimensionMismatch, "empty sample set");
}

void check_unitary(const GroupRep& rep) {
  if (!is_unitary(rep, 1e-10)) throw Error(ErrorCode::NotUnitary, "representation is not orthogonal");
}

}  // namespace

WidthSampleSet sample_widths(Eigen::Index d0, Eigen::Index width, std::uint64_t seed) {
  if (d0 < 1 || width < 1) throw Error(ErrorCode::InvalidConfig, "width and d0 must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  WidthSampleSet s;
  s.seed = seed;
  s.weights.resize(width, d0);
  s.out_scales.resize(width);
  for (Eigen::Index d = 0; d < width; ++d) {
    for (Eigen::Index i = 0; i < d0; ++i) s.weights(d, i) = normal(rng);
    s.out_scales(d) = normal(rng);
  }
  return s;
}

WidthSampleSet orbit_symmetrize(const WidthSampleSet& samples, const GroupRep& rep) {
  const auto els = elements(rep);
  const auto k = static_cast<Eigen::Index>(els.size());
  const Eigen::Index width = samples.weights.rows();
  WidthSampleSet out;
  out.seed = samples.seed;
  out.weights.resize(width * k, samples.weights.cols());
  out.out_scales.resize(width * k);
  for (Eigen::Index d = 0; d < width; ++d) {
    for (Eigen::Index j = 0; j < k; ++j) {
      // row form of rho(g)^T w is w^T rho(g)
      out.weights.row(d * k + j) = samples.weights.row(d) * els[static_cast<std::size_t>(j)];
      out.out_scales(d * k + j) = samples.out_scales(d);
    }
  }
  return out;
}

double relu_limiting_ntk(const Vector& x, const Vector& xp) {
  if (x.size() != xp.size()) throw Error(ErrorCode::DimensionMismatch, "inputs differ in dimension");
  const double nx = x.norm();
  const double nxp = xp.norm();
  if (nx == 0.0 || nxp == 0.0) throw Error(ErrorCode::ZeroVector, "limiting NTK needs nonzero inputs");
  const double dot = x.dot(xp);
  // half-angle form stays accurate for nearly parallel inputs, where acos does not
  const Vector u = x / nx;
  const Vector v = xp / nxp;
  const double theta = 2.0 * std::atan2((u - v).norm(), (u + v).norm());
  const double pi = std::numbers::pi;
  return dot / (2.0 * pi) * (pi - theta) + nx * nxp / (2.0 * pi) * ((pi - theta) * (dot / (nx * nxp)) + std::sin(theta));
}

NtkEstimate empirical_ntk_estimate(const WidthSampleSet& samples, Activation activation, const Vector& x,
                                   const Vector& xp) {
  check_pair(samples, x, xp);
  const Vector px = samples.weights * x;
  const Vector pxp = samples.weights * xp;
  const double inner = x.dot(xp);
  const Eigen::Index width = samples.weights.rows();
  double sum = 0.0;
  double sum_sq = 0.0;
  for (Eigen::Index d = 0; d < width; ++d) {
    const double a = samples.out_scales(d);
    const double slope = activate_derivative(activation, px(d)) * activate_derivative(activation, pxp(d));
    const double term = a * a * slope * inner + activate(activation, px(d)) * activate(activation, pxp(d));
    sum += term;
    sum_sq += term * term;
  }
  const double w = static_cast<double>(width);
  NtkEstimate est;
  est.value = sum / w;
  if (width > 1) {
    const double var = std::max(0.0, (sum_sq - w * est.value * est.value) / (w - 1.0));
    est.std_error = std::sqrt(var / w);
  }
  return est;
}

double empirical_ntk(const WidthSampleSet& samples, Activation activation, const Vector& x, const Vector& xp) {
  return empirical_ntk_estimate(samples, activation, x, xp).value;
}

double augmented_kernel(const Kernel& kernel, const GroupRep& rep, const Vector& x, const Vector& xp) {
  if (x.size() != rep.dim()) throw Error(ErrorCode::DimensionMismatch, "input dim differs from the representation");
  const auto els = elements(rep);
  double sum = 0.0;
  for (const Matrix& g : els) sum += kernel(g * x, xp);
  return sum / static_cast<double>(els.size());
}

double conv_empirical_ntk(const WidthSampleSet& samples, Activation activation, const GroupRep& rep,
                          const Vector& x, const Vector& xp) {
  check_pair(samples, x, xp);
  check_unitary(rep);
  const auto els = elements(rep);
  const double k = static_cast<double>(els.size());
  const Eigen::Index d0 = x.size();
  const Eigen::Index width = samples.weights.rows();
  // orbit features: column j holds rho(g^j) x
  Matrix ox(d0, static_cast<Eigen::Index>(els.size()));
  Matrix oxp(d0, static_cast<Eigen::Index>(els.size()));
  for (std::size_t j = 0; j < els.size(); ++j) {
    ox.col(static_cast<Eigen::Index>(j)) = els[j] * x;
    oxp.col(static_cast<Eigen::Index>(j)) = els[j] * xp;
  }
  const Matrix px = samples.weights * ox;    // D x |G|
  const Matrix pxp = samples.weights * oxp;  // D x |G|
  double sum = 0.0;
  for (Eigen::Index d = 0; d < width; ++d) {
    double s_x = 0.0;
    double s_xp = 0.0;
    Vector h_x = Vector::Zero(d0);
    Vector h_xp = Vector::Zero(d0);
    for (Eigen::Index j = 0; j < ox.cols(); ++j) {
      s_x += activate(activation, px(d, j));
      s_xp += activate(activation, pxp(d, j));
      h_x += activate_derivative(activation, px(d, j)) * ox.col(j);
      h_xp += activate_derivative(activation, pxp(d, j)) * oxp.col(j);
    }
    const double a = samples.out_scales(d);
    sum += (s_x / k) * (s_xp / k) + a * a * (h_x / k).dot(h_xp / k);
  }
  return sum / static_cast<double>(width);
}

double shallow_forward(const WidthSampleSet& samples, Activation activation, const Vector& x) {
  if (x.size() != samples.weights.cols()) throw Error(ErrorCode::DimensionMismatch, "input dim differs");
  const Vector pre = samples.weights * x;
  double sum = 0.0;
  for (Eigen::Index d = 0; d < pre.size(); ++d) sum += samples.out_scales(d) * activate(activation, pre(d));
  return sum / std::sqrt(static_cast<double>(samples.weights.rows()));
}

double conv_forward(const WidthSampleSet& samples, Activation activation, const GroupRep& rep, const Vector& x) {
  if (x.size() != samples.weights.cols()) throw Error(ErrorCode::DimensionMismatch, "input dim differs");
  const auto els = elements(rep);
  double sum = 0.0;
  for (Eigen::Index d = 0; d < samples.weights.rows(); ++d) {
    double pooled = 0.0;
    for (const Matrix& g : els) pooled += activate(activation, samples.weights.row(d).dot(g * x));
    sum += samples.out_scales(d) * pooled / static_cast<double>(els.size());
  }
  return sum / std::sqrt(static_cast<double>(samples.weights.rows()));
}

Matrix cross_kernel(const Kernel& kernel, const Matrix& a, const Matrix& b) {
  Matrix k(a.cols(), b.cols());
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) k(i, j) = kernel(a.col(i), b.col(j));
  }
  return k;
}

KernelMatrix kernel_matrix(const Kernel& kernel, const Matrix& x) {
  KernelMatrix k;
  const Eigen::Index n = x.cols();
  k.entries.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = kernel(x.col(i), x.col(j));
      k.entries(i, j) = v;
      k.entries(j, i) = v;
    }
  }
  k.jitter = n > 0 ? tol::kKernelJitter * k.entries.trace() / static_cast<double>(n) : 0.0;
  return k;
}

Vector kernel_interpolate(const KernelMatrix& k, const Vector& y) {
  const Eigen::Index n = k.entries.rows();
  if (k.entries.cols() != n || y.size() != n) throw Error(ErrorCode::DimensionMismatch, "kernel and targets differ");
  const Matrix jittered = k.entries + k.jitter * Matrix::Identity(n, n);
  Eigen::LLT<Matrix> llt(jittered);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularKernel, "kernel matrix is not positive definite");
  const Vector diag = Matrix(llt.matrixL()).diagonal().cwiseAbs2();
  if (n > 0 && diag.minCoeff() <= tol::kCholeskyPivot * diag.maxCoeff()) {
    throw Error(ErrorCode::SingularKernel, "kernel matrix is numerically singular");
  }
  const Vector alpha = llt.solve(y);
  const double resid = (k.entries * alpha - y).norm();
  if (!(resid < tol::kKernelResidual * std::max(y.norm(), 1e-300))) {
    throw Error(ErrorCode::SingularKernel, "interpolation residual " + std::to_string(resid));
  }
  return alpha;
}

KernelPredictor::KernelPredictor(Kernel kernel, Matrix train, const Vector& y)
    : kernel_(std::move(kernel)), train_(std::move(train)) {
  alpha_ = kernel_interpolate(kernel_matrix(kernel_, train_), y);
}

double KernelPredictor::operator()(const Vector& x) const {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < train_.cols(); ++i) sum += alpha_(i) * kernel_(x, train_.col(i));
  return sum;
}

}  // namespace invlr
