#pragma once

// Reference computations used only by the tests. None of these call the
// library's solvers; they work directly on Eigen decompositions or on
// iterative methods so that agreement with the closed forms is meaningful.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

inline Vector unit_vector(Eigen::Index d, std::mt19937_64& rng) {
  Vector v = gaussian(d, 1, rng);
  return v / v.norm();
}

inline int uniform_int(int lo, int hi, std::mt19937_64& rng) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// Column j of the result is e_{perm[j]}.
inline Matrix permutation(const std::vector<int>& perm) {
  const auto d = static_cast<Eigen::Index>(perm.size());
  Matrix p = Matrix::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) p(perm[j], j) = 1.0;
  return p;
}

inline std::vector<int> random_perm(int d, std::mt19937_64& rng) {
  std::vector<int> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

/// Powers g^0, g^1, ... until the next power returns to the identity.
inline std::vector<Matrix> powers_until_identity(const Matrix& g, int max_order = 1000) {
  std::vector<Matrix> out{Matrix::Identity(g.rows(), g.cols())};
  Matrix p = g;
  while ((p - Matrix::Identity(g.rows(), g.cols())).norm() > 1e-9 && static_cast<int>(out.size()) < max_order) {
    out.push_back(p);
    p = p * g;
  }
  return out;
}

inline Matrix pseudo_inverse(const Matrix& m) {
  return Eigen::CompleteOrthogonalDecomposition<Matrix>(m).pseudoInverse();
}

/// Orthogonal projector onto the left null space of g: W = W P iff W g = 0.
inline Matrix left_null_projector(const Matrix& g) {
  if (g.norm() == 0.0) return Matrix::Identity(g.rows(), g.rows());
  Eigen::JacobiSVD<Matrix> svd(g, Eigen::ComputeFullU);
  const double tol = 1e-10 * svd.singularValues()(0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) rank += svd.singularValues()(i) > tol;
  const Matrix u = svd.matrixU().leftCols(rank);
  return Matrix::Identity(g.rows(), g.rows()) - u * u.transpose();
}

inline Matrix truncate(const Matrix& m, Eigen::Index r) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::Index k = std::min<Eigen::Index>(r, svd.singularValues().size());
  return svd.matrixU().leftCols(k) * svd.singularValues().head(k).asDiagonal() *
         svd.matrixV().leftCols(k).transpose();
}

inline double mse(const Matrix& w, const Matrix& x, const Matrix& y) {
  return (w * x - y).squaredNorm() / static_cast<double>(x.cols());
}

/// Orbit of the data, element-major: [g^0 X | g^1 X | ...].
inline std::pair<Matrix, Matrix> orbit_data(const std::vector<Matrix>& group, const Matrix& x, const Matrix& y) {
  const Eigen::Index n = x.cols();
  const auto k = static_cast<Eigen::Index>(group.size());
  Matrix xa(x.rows(), n * k);
  Matrix ya(y.rows(), n * k);
  for (Eigen::Index j = 0; j < k; ++j) {
    xa.middleCols(j * n, n) = group[j] * x;
    ya.middleCols(j * n, n) = y;
  }
  return {xa, ya};
}

/// Projected gradient descent on (1/n)||W X - Y||^2 over {rank W <= r, W G = 0}
/// (G may be empty for the rank constraint alone). The invariant projection
/// followed by truncation is the exact Euclidean projection onto that set.
/// Returns the smallest objective seen over all restarts.
inline double projected_gradient(const Matrix& x, const Matrix& y, const Matrix& g, Eigen::Index r, int restarts,
                                 int iterations, std::uint64_t seed) {
  const double n = static_cast<double>(x.cols());
  const Matrix proj = g.size() == 0 ? Matrix::Identity(x.rows(), x.rows()) : left_null_projector(g);
  const double lmax = Eigen::SelfAdjointEigenSolver<Matrix>(x * x.transpose()).eigenvalues().maxCoeff();
  const double step = n / (2.0 * lmax);
  std::mt19937_64 rng(seed);
  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < restarts; ++s) {
    Matrix w = truncate(gaussian(y.rows(), x.rows(), rng) * proj, r);
    for (int it = 0; it < iterations; ++it) {
      const Matrix grad = (2.0 / n) * (w * x - y) * x.transpose();
      w = truncate((w - step * grad) * proj, r);
    }
    best = std::min(best, mse(w, x, y));
  }
  return best;
}

/// Gradient descent with backtracking on W = A B (A: dL x r, B: r x d0) for
/// (1/n)||A B X - Y||^2 + lambda ||A B G||^2. Returns the best objective.
inline double factored_descent(const Matrix& x, const Matrix& y, const Matrix& g, double lambda, Eigen::Index r,
                               int restarts, int iterations, std::uint64_t seed) {
  const double n = static_cast<double>(x.cols());
  auto objective = [&](const Matrix& w) { return mse(w, x, y) + lambda * (w * g).squaredNorm(); };
  std::mt19937_64 rng(seed);
  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < restarts; ++s) {
    Matrix a = gaussian(y.rows(), r, rng, 0.5);
    Matrix b = gaussian(r, x.rows(), rng, 0.5);
    double f = objective(a * b);
    double step = 1e-2;
    for (int it = 0; it < iterations; ++it) {
      const Matrix w = a * b;
      const Matrix e = (2.0 / n) * (w * x - y) * x.transpose() + 2.0 * lambda * w * g * g.transpose();
      const Matrix ga = e * b.transpose();
      const Matrix gb = a.transpose() * e;
      const double gnorm2 = ga.squaredNorm() + gb.squaredNorm();
      if (gnorm2 < 1e-30) break;
      step *= 2.0;
      while (step > 1e-16) {
        const Matrix a2 = a - step * ga;
        const Matrix b2 = b - step * gb;
        const double f2 = objective(a2 * b2);
        if (f2 <= f - 0.5 * step * gnorm2) {
          a = a2;
          b = b2;
          f = f2;
          break;
        }
        step *= 0.5;
      }
    }
    best = std::min(best, f);
  }
  return best;
}

/// Central finite differences of a scalar function of one matrix argument.
inline Matrix finite_difference(const std::function<double(const Matrix&)>& f, const Matrix& at, double h = 1e-6) {
  Matrix grad(at.rows(), at.cols());
  Matrix probe = at;
  for (Eigen::Index i = 0; i < at.size(); ++i) {
    const double orig = probe.data()[i];
    probe.data()[i] = orig + h;
    const double fp = f(probe);
    probe.data()[i] = orig - h;
    const double fm = f(probe);
    probe.data()[i] = orig;
    grad.data()[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

inline double relative_error(const Matrix& a, const Matrix& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-300});
  return (a - b).norm() / scale;
}

/// Component of (target - w) tangent to the rank-r manifold at w; zero iff
/// w is a critical point of ||target - w||^2 restricted to rank-r matrices.
inline double tangent_residual(const Matrix& target, const Matrix& w, Eigen::Index r) {
  Eigen::JacobiSVD<Matrix> svd(w, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix u = svd.matrixU().leftCols(r);
  const Matrix v = svd.matrixV().leftCols(r);
  const Matrix pu = u * u.transpose();
  const Matrix pv = v * v.transpose();
  const Matrix a = target - w;
  return (pu * a + a * pv - pu * a * pv).norm();
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

}  // namespace oracle
