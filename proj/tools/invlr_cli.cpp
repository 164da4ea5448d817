#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "invlr/harness.hpp"

namespace {

using invlr::CommandContext;
using invlr::ExperimentConfig;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rank-bounded invariant linear regression toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "experiment config file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "overrides the config seed");

  auto* gen = app.add_subcommand("gen-data", "draw a synthetic data set (X.mat, Y.mat, Wtrue.mat)");
  auto* solve = app.add_subcommand("solve", "closed-form optimum for the configured mode (W.mat)");
  auto* path = app.add_subcommand("path", "regularization path over lambda_grid (path.csv)");
  auto* crit = app.add_subcommand("critical-points", "enumerate critical points (critical.csv)");
  auto* train = app.add_subcommand("train", "train a deep linear network with Adam (trainlog.csv)");
  auto* ntk = app.add_subcommand("ntk-check", "run kernel property suites (ntk.csv)");
  auto* compare = app.add_subcommand("compare", "relative Frobenius distance between two matrix files");
  std::string file_a;
  std::string file_b;
  double tol = 1e-9;
  compare->add_option("a", file_a, "first matrix file")->required();
  compare->add_option("b", file_b, "second matrix file")->required();
  compare->add_option("--tol", tol, "relative tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  return invlr::run_command(name, std::cerr, [&]() -> int {
    if (chosen == compare) return invlr::cmd_compare(file_a, file_b, tol, std::cout) ? 0 : 2;
    if (config_path.empty()) throw invlr::Error(invlr::ErrorCode::InvalidConfig, "--config is required");
    ExperimentConfig config = ExperimentConfig::load(config_path);
    if (seed) config.set("seed", std::to_string(*seed));
    const CommandContext ctx{std::move(config), out_dir, std::cout, std::cerr};
    if (chosen == gen) invlr::cmd_gen_data(ctx);
    else if (chosen == solve) invlr::cmd_solve(ctx);
    else if (chosen == path) invlr::cmd_path(ctx);
    else if (chosen == crit) invlr::cmd_critical_points(ctx);
    else if (chosen == train) invlr::cmd_train(ctx);
    else if (chosen == ntk) return invlr::cmd_ntk_check(ctx) ? 0 : 2;
    return 0;
  });
}
