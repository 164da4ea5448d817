#pragma once

#include <random>

#include "invlr/grouprep.hpp"
#include "oracles.hpp"

namespace fixture {

struct Instance {
  invlr::Matrix x;
  invlr::Matrix y;
  invlr::GroupRep rep;
};

/// Generic data: Gaussian X, Y from an unconstrained map plus noise, so no
/// structure of the group is baked into the targets.
inline Instance random_instance(const invlr::GroupRep& rep, Eigen::Index dl, Eigen::Index n, std::mt19937_64& rng,
                                double noise = 0.5) {
  const Eigen::Index d0 = rep.dim();
  invlr::Matrix x = oracle::gaussian(d0, n, rng);
  invlr::Matrix w = oracle::gaussian(dl, d0, rng);
  invlr::Matrix y = w * x + noise * oracle::gaussian(dl, n, rng);
  return {std::move(x), std::move(y), rep};
}

/// Reduced-rank regression without any group constraint, computed directly
/// from an eigendecomposition of X X^T.
inline invlr::Matrix unconstrained_rrr(const invlr::Matrix& x, const invlr::Matrix& y, Eigen::Index r) {
  Eigen::SelfAdjointEigenSolver<invlr::Matrix> eig(x * x.transpose());
  const invlr::Matrix p_inv = eig.operatorInverseSqrt();
  return oracle::truncate(y * x.transpose() * p_inv, r) * p_inv;
}

}  // namespace fixture

#include "invlr/harness.hpp"

namespace fixture {

/// The desk-scale training instance: 4x4 images under 90 degree rotation,
/// 16 -> 3 -> 4 linear net, n = 64, invariant target plus noise.
inline invlr::SyntheticData standard_training_data(std::uint64_t seed = 3) {
  invlr::SyntheticSpec spec;
  spec.dl = 4;
  spec.n = 64;
  spec.noise_sigma = 0.1;
  spec.seed = seed;
  return invlr::make_synthetic(invlr::c4_image_rotation(4), spec);
}

}  // namespace fixture
