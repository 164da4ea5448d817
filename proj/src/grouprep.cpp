#include "invlr/grouprep.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "invlr/error.hpp"
#include "invlr/tolerances.hpp"

namespace invlr {

namespace {

Matrix matrix_power(const Matrix& g, int k) {
  Matrix out = Matrix::Identity(g.rows(), g.cols());
  for (int i = 0; i < k; ++i) out = out * g;
  return out;
}

void validate_generator(const Matrix& gen, int order) {
  if (gen.rows() != gen.cols() || gen.rows() == 0) {
    throw Error(ErrorCode::NonSquare, "generator is " + std::to_string(gen.rows()) + "x" +
                                          std::to_string(gen.cols()));
  }
  if (order < 1) throw Error(ErrorCode::NotARepresentation, "order must be >= 1");
  if (!gen.allFinite()) throw Error(ErrorCode::NotARepresentation, "generator has non-finite entries");
  const auto d0 = gen.rows();
  const double residual = (matrix_power(gen, order) - Matrix::Identity(d0, d0)).norm();
  if (residual > tol::kRepresentation * static_cast<double>(d0)) {
    throw Error(ErrorCode::NotARepresentation,
                "||g^" + std::to_string(order) + " - I||_F = " + std::to_string(residual));
  }
}

}  // namespace

GroupRep::GroupRep(std::vector<Matrix> generators, std::vector<int> orders)
    : generators_(std::move(generators)), orders_(std::move(orders)) {
  if (generators_.empty()) throw Error(ErrorCode::NotARepresentation, "no generators");
  if (generators_.size() != orders_.size()) {
    throw Error(ErrorCode::NotARepresentation, "one order per generator required");
  }
  for (std::size_t m = 0; m < generators_.size(); ++m) {
    validate_generator(generators_[m], orders_[m]);
    if (generators_[m].rows() != generators_.front().rows()) {
      throw Error(ErrorCode::DimensionMismatch, "generators differ in dimension");
    }
  }
}

int GroupRep::order() const {
  if (!is_cyclic()) throw Error(ErrorCode::NotCyclic, "group elements are only enumerated for one generator");
  return orders_.front();
}

GroupRep rep_from_generator(const Matrix& gen, int order) { return GroupRep({gen}, {order}); }

GroupRep rep_from_generators(const std::vector<Matrix>& gens, const std::vector<int>& orders) {
  return GroupRep(gens, orders);
}

Matrix permutation_matrix(const std::vector<int>& perm) {
  const auto n = static_cast<Eigen::Index>(perm.size());
  Matrix p = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const int i = perm[static_cast<std::size_t>(j)];
    if (i < 0 || i >= n) throw Error(ErrorCode::IndexOutOfRange, "permutation entry out of range");
    p(i, j) = 1.0;
  }
  return p;
}

int permutation_order(const std::vector<int>& perm) {
  std::vector<bool> seen(perm.size(), false);
  int order = 1;
  for (std::size_t s = 0; s < perm.size(); ++s) {
    if (seen[s]) continue;
    int len = 0;
    for (std::size_t j = s; !seen[j]; j = static_cast<std::size_t>(perm[j])) {
      seen[j] = true;
      ++len;
    }
    order = std::lcm(order, len);
  }
  return order;
}

GroupRep c4_image_rotation(int p) {
  if (p < 1) throw Error(ErrorCode::InvalidConfig, "grid side must be >= 1");
  std::vector<int> perm(static_cast<std::size_t>(p * p));
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < p; ++i) {
      const int ni = j;
      const int nj = p - 1 - i;
      perm[static_cast<std::size_t>(i + j * p)] = ni + nj * p;
    }
  }
  return rep_from_generator(permutation_matrix(perm), 4);
}

GroupRep cyclic_permutation(int d0, int k) {
  if (d0 < 1 || k < 1 || k > d0) throw Error(ErrorCode::InvalidConfig, "cyclic permutation needs 1 <= k <= d0");
  std::vector<int> perm(static_cast<std::size_t>(d0));
  std::iota(perm.begin(), perm.end(), 0);
  const int blocks = d0 / k;
  for (int b = 0; b < blocks; ++b) {
    for (int t = 0; t < k; ++t) perm[static_cast<std::size_t>(b * k + t)] = b * k + (t + 1) % k;
  }
  return rep_from_generator(permutation_matrix(perm), k);
}

GroupRep rotation2d(int k) {
  if (k < 1) throw Error(ErrorCode::InvalidConfig, "rotation order must be >= 1");
  const double a = 2.0 * std::numbers::pi / k;
  Matrix r(2, 2);
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return rep_from_generator(r, k);
}

GroupRep sign_rep() { return rep_from_generator(Matrix::Constant(1, 1, -1.0), 2); }

GroupRep trivial_rep(int dim, int order) { return rep_from_generator(Matrix::Identity(dim, dim), order); }

Matrix element(const GroupRep& rep, int j) {
  const int order = rep.order();
  if (j < 0 || j >= order) {
    throw Error(ErrorCode::IndexOutOfRange,
                "element " + std::to_string(j) + " of a group of order " + std::to_string(order));
  }
  return matrix_power(rep.generator(), j);
}

std::vector<Matrix> elements(const GroupRep& rep) {
  const int order = rep.order();
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(order));
  out.push_back(Matrix::Identity(rep.dim(), rep.dim()));
  for (int j = 1; j < order; ++j) out.push_back(out.back() * rep.generator());
  return out;
}

Matrix group_average(const GroupRep& rep) {
  Matrix sum = Matrix::Zero(rep.dim(), rep.dim());
  for (const Matrix& g : elements(rep)) sum += g;
  return sum / static_cast<double>(rep.order());
}

ConstraintMatrix constraint_from_matrix(const Matrix& entries) {
  ConstraintMatrix c;
  c.entries = entries;
  c.nullity = entries.rows() - (entries.cols() == 0 ? 0 : numerical_rank(entries));
  return c;
}

ConstraintMatrix invariance_constraint(const GroupRep& rep) {
  const auto d0 = rep.dim();
  const auto m = static_cast<Eigen::Index>(rep.num_generators());
  Matrix g(d0, m * d0);
  for (Eigen::Index k = 0; k < m; ++k) {
    g.middleCols(k * d0, d0) = Matrix::Identity(d0, d0) - rep.generator(static_cast<std::size_t>(k));
  }
  return constraint_from_matrix(g);
}

EquivarianceConstraint equivariance_constraint(const GroupRep& rep_x, const GroupRep& rep_y) {
  if (rep_x.num_generators() != rep_y.num_generators()) {
    throw Error(ErrorCode::OrderMismatch, "representations have different generator counts");
  }
  for (std::size_t m = 0; m < rep_x.num_generators(); ++m) {
    if (rep_x.generator_order(m) != rep_y.generator_order(m)) {
      throw Error(ErrorCode::OrderMismatch, "generator " + std::to_string(m) + " has order " +
                                                std::to_string(rep_x.generator_order(m)) + " vs " +
                                                std::to_string(rep_y.generator_order(m)));
    }
  }
  const auto d0 = rep_x.dim();
  const auto dl = rep_y.dim();
  const auto n = d0 * dl;
  const auto m = static_cast<Eigen::Index>(rep_x.num_generators());
  EquivarianceConstraint c;
  c.rows_out = dl;
  c.cols_in = d0;
  c.entries.resize(n, m * n);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    // rho_Y(g^{-1}) = rho_Y(g)^{order-1}
    Matrix y_inv = Matrix::Identity(dl, dl);
    for (int t = 0; t < rep_y.generator_order(idx) - 1; ++t) y_inv = y_inv * rep_y.generator(idx);
    const Matrix block = kron(rep_x.generator(idx).transpose(), y_inv) - Matrix::Identity(n, n);
    c.entries.middleCols(k * n, n) = block.transpose();
  }
  c.nullity = n - numerical_rank(c.entries);
  return c;
}

Matrix invariant_basis(const ConstraintMatrix& g) {
  if (g.nullity == 0) throw Error(ErrorCode::EmptyNullSpace, "constraint has trivial left null space");
  return left_null_basis(g.entries);
}

Matrix equivariant_basis(const EquivarianceConstraint& c) {
  if (c.nullity == 0) throw Error(ErrorCode::EmptyNullSpace, "no nonzero equivariant maps");
  return left_null_basis(c.entries).transpose();
}

bool is_unitary(const GroupRep& rep, double tolerance) {
  for (const Matrix& g : rep.generators()) {
    const auto d = g.rows();
    if ((g.transpose() * g - Matrix::Identity(d, d)).norm() > tolerance) return false;
  }
  return true;
}

}  // namespace invlr
