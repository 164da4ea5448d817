#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "invlr/config.hpp"
#include "invlr/error.hpp"
#include "invlr/grouprep.hpp"
#include "invlr/linalg.hpp"

namespace invlr {

struct SyntheticData {
  Matrix x;
  Matrix y;
  Matrix w_true;
};

struct SyntheticSpec {
  Eigen::Index dl = 4;
  Eigen::Index n = 64;
  double noise_sigma = 0.1;
  std::uint64_t seed = 0;
  bool invariant_target = true;
  /// 0 keeps the full rank of the (projected) target map.
  Eigen::Index true_rank = 0;
  /// One-hot labels from argmax(W_true X + noise) instead of real targets.
  bool one_hot = false;
};

/// X ~ N(0, 1) entries (d0 x n), W_true ~ N(0, 1/d0) entries projected onto
/// invariant maps when requested, Y = W_true X + noise_sigma E. Draws are made
/// in that order from one mt19937_64 stream.
SyntheticData make_synthetic(const GroupRep& rep, const SyntheticSpec& spec);

/// One row of the ntk-check report.
struct NtkTrial {
  std::string suite;
  int trial = 0;
  double discrepancy = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct NtkCheckSpec {
  Eigen::Index width = 65536;
  int trials = 50;
  Eigen::Index orbit_width = 256;
  Eigen::Index n = 12;
  int test_points = 20;
  std::uint64_t seed = 0;
};

/// Runs the equivariance, Monte-Carlo, orbit-symmetrized and
/// augmented-predictor property suites.
std::vector<NtkTrial> run_ntk_suites(const GroupRep& rep, const NtkCheckSpec& spec);

/// Exit status for a library error: 1 for input problems (I/O, config,
/// shapes, grids), 2 for numerical failures.
int exit_code_for(const Error& e);

struct CommandContext {
  ExperimentConfig config;
  std::filesystem::path out_dir = ".";
  std::ostream& out;
  std::ostream& err;
};

void cmd_gen_data(const CommandContext& ctx);
void cmd_solve(const CommandContext& ctx);
void cmd_path(const CommandContext& ctx);
void cmd_critical_points(const CommandContext& ctx);
void cmd_train(const CommandContext& ctx);
/// Returns false (exit 2) when any property fails.
bool cmd_ntk_check(const CommandContext& ctx);
/// Relative Frobenius distance ||A - B|| / max(||A||, ||B||); exit 2 above tol.
bool cmd_compare(const std::filesystem::path& a, const std::filesystem::path& b, double tol, std::ostream& out);

/// Runs a command body, reporting errors on `err` and mapping them to the
/// exit-code contract (0 ok, 1 usage/I-O/config, 2 numerical).
int run_command(const std::string& name, std::ostream& err, const std::function<int()>& body);

}  // namespace invlr
