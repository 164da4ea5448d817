#pragma once

#include <cstdint>
#include <functional>

#include "invlr/activation.hpp"
#include "invlr/grouprep.hpp"
#include "invlr/linalg.hpp"

namespace invlr {

using Kernel = std::function<double(const Vector&, const Vector&)>;

/// Hidden weights w_d (rows of `weights`) and output scales a_d of a
/// bias-free two-layer network f(x) = (1/sqrt(D)) sum_d a_d sigma(w_d^T x).
struct WidthSampleSet {
  Matrix weights;  // D x d0
  Vector out_scales;
  std::uint64_t seed = 0;

  Eigen::Index width() const { return weights.rows(); }
};

/// w_d ~ N(0, I), a_d ~ N(0, 1).
WidthSampleSet sample_widths(Eigen::Index d0, Eigen::Index width, std::uint64_t seed);

/// Replaces every sample w by the orbit {rho(g)^T w : g}, repeating its out
/// scale. The result is closed under the group action.
WidthSampleSet orbit_symmetrize(const WidthSampleSet& samples, const GroupRep& rep);

/// Closed-form infinite-width NTK of the two-layer ReLU network.
double relu_limiting_ntk(const Vector& x, const Vector& xp);

/// Finite-width NTK (1/D) sum_d [a_d^2 s'(w.x) s'(w.x') x.x' + s(w.x) s(w.x')].
double empirical_ntk(const WidthSampleSet& samples, Activation activation, const Vector& x, const Vector& xp);

/// Empirical NTK together with the standard error of its per-sample terms.
struct NtkEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

NtkEstimate empirical_ntk_estimate(const WidthSampleSet& samples, Activation activation, const Vector& x,
                                   const Vector& xp);

/// E_g kernel(rho(g) x, x').
double augmented_kernel(const Kernel& kernel, const GroupRep& rep, const Vector& x, const Vector& xp);

/// Finite-width NTK of the group-pooled network
///   f(x) = (1/sqrt(D)) sum_d a_d (1/|G|) sum_g sigma(w_d^T rho(g) x).
/// Requires a unitary representation.
double conv_empirical_ntk(const WidthSampleSet& samples, Activation activation, const GroupRep& rep,
                          const Vector& x, const Vector& xp);

/// Output of the group-pooled network.
double conv_forward(const WidthSampleSet& samples, Activation activation, const GroupRep& rep, const Vector& x);

/// Output of the plain two-layer network.
double shallow_forward(const WidthSampleSet& samples, Activation activation, const Vector& x);

struct KernelMatrix {
  Matrix entries;
  double jitter = 0.0;
};

/// Gram matrix over the columns of x, with jitter kKernelJitter * trace / n.
KernelMatrix kernel_matrix(const Kernel& kernel, const Matrix& x);

/// Cross-kernel k(a_i, b_j) over columns.
Matrix cross_kernel(const Kernel& kernel, const Matrix& a, const Matrix& b);

/// Solves (K + jitter I) alpha = y. Throws SingularKernel when the Cholesky
/// pivots collapse or ||K alpha - y|| >= kKernelResidual ||y||.
Vector kernel_interpolate(const KernelMatrix& k, const Vector& y);

/// Kernel interpolant sum_i alpha_i kernel(x, x_i) fitted on (train, y).
class KernelPredictor {
 public:
  KernelPredictor(Kernel kernel, Matrix train, const Vector& y);

  double operator()(const Vector& x) const;
  const Vector& coefficients() const { return alpha_; }

 private:
  Kernel kernel_;
  Matrix train_;
  Vector alpha_;
};

}  // namespace invlr
