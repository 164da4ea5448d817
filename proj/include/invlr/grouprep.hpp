#pragma once

#include <cstdint>
#include <vector>

#include "invlr/linalg.hpp"

namespace invlr {

/// A finite group representation on R^{d0}, given by generator matrices and
/// the order of each generator. Construct through rep_from_generator or
/// rep_from_generators; both validate g^order = I.
class GroupRep {
 public:
  GroupRep(std::vector<Matrix> generators, std::vector<int> orders);

  Eigen::Index dim() const { return generators_.front().rows(); }
  std::size_t num_generators() const { return generators_.size(); }
  bool is_cyclic() const { return generators_.size() == 1; }

  const Matrix& generator(std::size_t m = 0) const { return generators_.at(m); }
  int generator_order(std::size_t m = 0) const { return orders_.at(m); }
  const std::vector<Matrix>& generators() const { return generators_; }
  const std::vector<int>& orders() const { return orders_; }

  /// |G| for a single-generator rep. Throws NotCyclic otherwise.
  int order() const;

 private:
  std::vector<Matrix> generators_;
  std::vector<int> orders_;
};

/// Left null space constraint G = [I - rho(g_1), ..., I - rho(g_M)].
/// A map W is invariant iff W * entries = 0.
struct ConstraintMatrix {
  Matrix entries;
  Eigen::Index nullity = 0;

  Eigen::Index dim() const { return entries.rows(); }
};

/// Constraint on vec(W) (column-major) for equivariant maps.
///
/// entries = [B_1^T, ..., B_M^T] with B_m = rho_X(g_m)^T (x) rho_Y(g_m^{-1}) - I,
/// so vec(W)^T * entries = 0 iff every B_m vec(W) = 0, matching the left null
/// convention of ConstraintMatrix.
struct EquivarianceConstraint {
  Matrix entries;
  Eigen::Index nullity = 0;
  Eigen::Index rows_out = 0;  // d_L
  Eigen::Index cols_in = 0;   // d_0
};

GroupRep rep_from_generator(const Matrix& gen, int order);
GroupRep rep_from_generators(const std::vector<Matrix>& gens, const std::vector<int>& orders);

/// 90 degree rotation of a p x p image vectorized column-major, pixel (i, j)
/// at index i + j * p, moving (i, j) to (j, p - 1 - i). Order 4.
GroupRep c4_image_rotation(int p);

/// Permutation on R^{d0} made of floor(d0 / k) disjoint k-cycles over the
/// leading coordinates; the remaining coordinates are fixed. Order k.
GroupRep cyclic_permutation(int d0, int k);

/// Planar rotation by 2*pi/k, order k.
GroupRep rotation2d(int k);

/// rho(g) = -1 on R^1, order 2.
GroupRep sign_rep();

/// rho = I_dim for a group of the given order.
GroupRep trivial_rep(int dim, int order = 1);

/// Permutation matrix P with P e_j = e_{perm[j]}.
Matrix permutation_matrix(const std::vector<int>& perm);

/// Order of a permutation (lcm of its cycle lengths).
int permutation_order(const std::vector<int>& perm);

/// rho(g^j) for a single-generator rep, 0 <= j < order.
Matrix element(const GroupRep& rep, int j);

/// All rho(g^j), j = 0..order-1.
std::vector<Matrix> elements(const GroupRep& rep);

/// Mean of rho(g) over the group.
Matrix group_average(const GroupRep& rep);

ConstraintMatrix invariance_constraint(const GroupRep& rep);
ConstraintMatrix constraint_from_matrix(const Matrix& entries);

EquivarianceConstraint equivariance_constraint(const GroupRep& rep_x, const GroupRep& rep_y);

/// d x d0 matrix B with orthonormal rows spanning the left null space of G.
/// Throws EmptyNullSpace when the nullity is zero.
Matrix invariant_basis(const ConstraintMatrix& g);

/// Orthonormal basis (as columns) of vectorized equivariant maps.
Matrix equivariant_basis(const EquivarianceConstraint& c);

bool is_unitary(const GroupRep& rep, double tolerance);

}  // namespace invlr
