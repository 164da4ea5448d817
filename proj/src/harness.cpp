#include "invlr/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>

#include "invlr/matrix_io.hpp"
#include "invlr/ntk.hpp"
#include "invlr/solvers.hpp"
#include "invlr/trainer.hpp"

namespace invlr {

namespace fs = std::filesystem;

SyntheticData make_synthetic(const GroupRep& rep, const SyntheticSpec& spec) {
  const Eigen::Index d0 = rep.dim();
  if (spec.n < d0) {
    throw Error(ErrorCode::InvalidConfig, "n = " + std::to_string(spec.n) + " must be >= d0 = " + std::to_string(d0));
  }
  if (spec.dl < 1) throw Error(ErrorCode::InvalidConfig, "dL must be >= 1");
  if (!(spec.noise_sigma >= 0.0)) throw Error(ErrorCode::InvalidConfig, "noise_sigma must be >= 0");
  if (spec.true_rank < 0) throw Error(ErrorCode::InvalidConfig, "true_rank must be >= 0");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gaussian = [&](Eigen::Index rows, Eigen::Index cols, double scale) {
    Matrix m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
      for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = scale * normal(rng);
    }
    return m;
  };
  SyntheticData data;
  data.x = gaussian(d0, spec.n, 1.0);
  data.w_true = gaussian(spec.dl, d0, 1.0 / std::sqrt(static_cast<double>(d0)));
  if (spec.invariant_target) data.w_true = data.w_true * left_null_projector(invariance_constraint(rep).entries);
  if (spec.true_rank > 0) {
    data.w_true = best_rank_r(data.w_true, std::min<Eigen::Index>(spec.true_rank, std::min(spec.dl, d0)));
  }
  const Matrix noise = gaussian(spec.dl, spec.n, 1.0);
  data.y = data.w_true * data.x + spec.noise_sigma * noise;
  if (spec.one_hot) {
    Matrix labels = Matrix::Zero(spec.dl, spec.n);
    for (Eigen::Index c = 0; c < spec.n; ++c) {
      Eigen::Index k = 0;
      data.y.col(c).maxCoeff(&k);
      labels(k, c) = 1.0;
    }
    data.y = labels;
  }
  return data;
}

namespace {

Vector unit_gaussian(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(d);
  do {
    for (Eigen::Index i = 0; i < d; ++i) v(i) = normal(rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

}  // namespace

std::vector<NtkTrial> run_ntk_suites(const GroupRep& rep, const NtkCheckSpec& spec) {
  if (spec.trials < 1 || spec.width < 2 || spec.orbit_width < 1 || spec.n < 1 || spec.test_points < 1) {
    throw Error(ErrorCode::InvalidConfig, "ntk-check needs trials, width, orbit_width, n, test_points >= 1");
  }
  const Eigen::Index d0 = rep.dim();
  const auto els = elements(rep);
  std::mt19937_64 rng(spec.seed);
  std::vector<NtkTrial> rows;

  // equivariance of the limiting kernel
  for (int t = 0; t < spec.trials; ++t) {
    const Vector x = unit_gaussian(d0, rng);
    const Vector xp = unit_gaussian(d0, rng);
    const double base = relu_limiting_ntk(x, xp);
    double worst = 0.0;
    for (const Matrix& g : els) worst = std::max(worst, std::abs(relu_limiting_ntk(g * x, g * xp) - base));
    rows.push_back({"equivariance", t, worst, 1e-12, worst <= 1e-12});
  }

  // Monte-Carlo convergence of the empirical kernel
  const WidthSampleSet wide = sample_widths(d0, spec.width, spec.seed + 1);
  for (int t = 0; t < spec.trials; ++t) {
    const Vector x = unit_gaussian(d0, rng);
    const Vector xp = unit_gaussian(d0, rng);
    const NtkEstimate est = empirical_ntk_estimate(wide, Activation::Relu, x, xp);
    const double gap = std::abs(est.value - relu_limiting_ntk(x, xp));
    rows.push_back({"monte_carlo", t, gap, 3.0 * est.std_error, gap < 3.0 * est.std_error});
  }

  // pooled-network kernel vs augmented kernel on an orbit-closed sample set
  const WidthSampleSet closed = orbit_symmetrize(sample_widths(d0, spec.orbit_width, spec.seed + 2), rep);
  const Kernel finite = [&](const Vector& a, const Vector& b) {
    return empirical_ntk(closed, Activation::Relu, a, b);
  };
  for (int t = 0; t < spec.trials; ++t) {
    const Vector x = unit_gaussian(d0, rng);
    const Vector xp = unit_gaussian(d0, rng);
    const double conv = conv_empirical_ntk(closed, Activation::Relu, rep, x, xp);
    const double aug = augmented_kernel(finite, rep, x, xp);
    const double gap = std::abs(conv - aug);
    rows.push_back({"orbit_symmetrized", t, gap, 1e-12, gap <= 1e-12});
  }

  // augmented-kernel predictor on D vs base-kernel predictor on the orbit of D
  Matrix x(d0, spec.n);
  Vector y(spec.n);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < spec.n; ++i) {
    x.col(i) = unit_gaussian(d0, rng);
    y(i) = normal(rng);
  }
  const Kernel limit = [](const Vector& a, const Vector& b) { return relu_limiting_ntk(a, b); };
  const Kernel limit_aug = [&](const Vector& a, const Vector& b) { return augmented_kernel(limit, rep, a, b); };
  Matrix x_aug;
  Matrix y_aug;
  std::tie(x_aug, y_aug) = augment_dataset(x, y.transpose(), rep);
  const KernelPredictor on_original(limit_aug, x, y);
  const KernelPredictor on_augmented(limit, x_aug, y_aug.row(0).transpose());
  const double ymax = y.cwiseAbs().maxCoeff();
  for (int t = 0; t < spec.test_points; ++t) {
    const Vector probe = unit_gaussian(d0, rng);
    const double base = on_augmented(probe);
    const double gap = std::abs(on_original(probe) - base);
    rows.push_back({"augmented_predictor", t, gap, 1e-6, gap < 1e-6});
    double worst = 0.0;
    for (const Matrix& g : els) worst = std::max(worst, std::abs(on_augmented(g * probe) - base));
    rows.push_back({"augmented_predictor_invariance", t, worst, 1e-6 * ymax, worst < 1e-6 * ymax});
  }
  return rows;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::Io:
    case ErrorCode::InvalidConfig:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::InvalidGrid:
      return 1;
    default:
      return 2;
  }
}

int run_command(const std::string& name, std::ostream& err, const std::function<int()>& body) {
  const auto start = std::chrono::steady_clock::now();
  int code = 0;
  try {
    code = body();
  } catch (const Error& e) {
    err << "invlr " << name << ": " << e.what() << "\n";
    code = exit_code_for(e);
  } catch (const std::exception& e) {
    err << "invlr " << name << ": " << e.what() << "\n";
    code = 1;
  }
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
  err << "elapsed_ms=" << ms.count() << "\n";
  return code;
}

namespace {

struct Dataset {
  Matrix x;
  Matrix y;
};

Dataset load_dataset(const CommandContext& ctx) {
  const fs::path xp = ctx.config.file("x_file").value_or(ctx.out_dir / "X.mat");
  const fs::path yp = ctx.config.file("y_file").value_or(ctx.out_dir / "Y.mat");
  for (const fs::path& p : {xp, yp}) {
    if (!fs::exists(p)) throw Error(ErrorCode::Io, "missing input file " + p.string());
  }
  Dataset d{read_matrix(xp), read_matrix(yp)};
  if (d.x.cols() != d.y.cols()) {
    throw Error(ErrorCode::ShapeMismatch, xp.string() + " and " + yp.string() + " differ in column count");
  }
  return d;
}

RegressionProblem make_problem(const CommandContext& ctx, const Dataset& data) {
  const GroupRep rep = ctx.config.group();
  if (rep.dim() != data.x.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "group acts on R^" + std::to_string(rep.dim()) + " but X has " +
                                              std::to_string(data.x.rows()) + " rows");
  }
  const long r = ctx.config.require_int("r");
  if (r < 0) throw Error(ErrorCode::InvalidConfig, "key 'r' must be >= 0");
  const double lambda = ctx.config.get_double("lambda", 0.0);
  if (lambda < 0.0) throw Error(ErrorCode::InvalidConfig, "key 'lambda' must be >= 0");
  return RegressionProblem(data.x, data.y, rep, r, lambda);
}

Mode solver_mode(const CommandContext& ctx) {
  const std::string mode = ctx.config.get_string("mode", "constrained");
  if (mode == "hardwired") return Mode::Constrained;
  return parse_mode(mode);
}

void ensure_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create output directory " + dir.string());
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

}  // namespace

void cmd_gen_data(const CommandContext& ctx) {
  const GroupRep rep = ctx.config.group();
  SyntheticSpec spec;
  spec.dl = ctx.config.require_int("dL");
  spec.n = ctx.config.require_int("n");
  spec.noise_sigma = ctx.config.get_double("noise_sigma", 0.1);
  spec.seed = ctx.config.get_u64("seed", 0);
  spec.invariant_target = ctx.config.get_bool("invariant_target", true);
  spec.true_rank = ctx.config.get_int("true_rank", 0);
  const std::string kind = ctx.config.get_string("target_kind", "regression");
  if (kind != "regression" && kind != "onehot") {
    throw Error(ErrorCode::InvalidConfig, "key 'target_kind' must be regression or onehot");
  }
  spec.one_hot = kind == "onehot";
  const SyntheticData data = make_synthetic(rep, spec);
  ensure_out_dir(ctx.out_dir);
  write_matrix(ctx.out_dir / "X.mat", data.x);
  write_matrix(ctx.out_dir / "Y.mat", data.y);
  write_matrix(ctx.out_dir / "Wtrue.mat", data.w_true);
  ctx.out << "gen-data d0=" << data.x.rows() << " dL=" << data.y.rows() << " n=" << data.x.cols() << "\n";
}

void cmd_solve(const CommandContext& ctx) {
  const Dataset data = load_dataset(ctx);
  const RegressionProblem problem = make_problem(ctx, data);
  const Mode mode = solver_mode(ctx);
  const RankBoundedSolution s = solve(problem, mode);
  ensure_out_dir(ctx.out_dir);
  write_matrix(ctx.out_dir / "W.mat", s.W);
  ctx.out << "mode=" << to_string(mode) << " loss=" << format_double(s.loss) << " rank=" << s.rank
          << " invariance_residual=" << format_double(s.invariance_residual) << " warnings=" << to_string(s.warnings)
          << "\n";
}

void cmd_path(const CommandContext& ctx) {
  const std::vector<double> grid = ctx.config.lambda_grid();
  const Dataset data = load_dataset(ctx);
  const RegressionProblem problem = make_problem(ctx, data);
  const auto path = regularization_path(problem, grid);
  ensure_out_dir(ctx.out_dir);
  std::ofstream csv = open_csv(ctx.out_dir / "path.csv");
  csv << "lambda,loss,invariance_residual,distance_to_inv\n";
  Warnings all;
  for (const PathSample& s : path) {
    csv << format_double(s.lambda) << ',' << format_double(s.loss) << ',' << format_double(s.invariance_residual)
        << ',' << format_double(s.distance_to_inv) << '\n';
    all.insert(s.warnings.begin(), s.warnings.end());
  }
  ctx.out << "path samples=" << path.size() << " monotone=" << (distance_nonincreasing(path) ? "true" : "false")
          << " warnings=" << to_string(all) << "\n";
}

void cmd_critical_points(const CommandContext& ctx) {
  const Dataset data = load_dataset(ctx);
  const RegressionProblem problem = make_problem(ctx, data);
  const Mode mode = solver_mode(ctx);
  const auto points = enumerate_critical_points(problem, mode);
  ensure_out_dir(ctx.out_dir);
  std::ofstream csv = open_csv(ctx.out_dir / "critical.csv");
  csv << "index_set,loss,is_global_min\n";
  for (const CriticalPoint& cp : points) {
    std::string set;
    for (int i : cp.index_set) {
      if (!set.empty()) set += ';';
      set += std::to_string(i + 1);
    }
    csv << set << ',' << format_double(cp.loss) << ',' << (cp.is_global_min ? "true" : "false") << '\n';
  }
  ctx.out << "critical-points mode=" << to_string(mode) << " count=" << points.size() << "\n";
}

void cmd_train(const CommandContext& ctx) {
  const Dataset data = load_dataset(ctx);
  TrainConfig cfg;
  cfg.mode = parse_train_mode(ctx.config.get_string("mode", "augmented"));
  cfg.lambda = ctx.config.get_double("lambda", 0.0);
  cfg.loss = parse_loss(ctx.config.get_string("loss", "mse"));
  cfg.adam.learning_rate = ctx.config.get_double("learning_rate", 1e-3);
  cfg.adam.beta1 = ctx.config.get_double("beta1", 0.9);
  cfg.adam.beta2 = ctx.config.get_double("beta2", 0.999);
  cfg.adam.eps = ctx.config.get_double("adam_eps", 1e-8);
  cfg.epochs = static_cast<int>(ctx.config.get_int("epochs", 1000));
  cfg.seed = ctx.config.get_u64("seed", 0);
  cfg.init_scale = ctx.config.get_double("init_scale", 1.0);
  for (long h : ctx.config.get_int_list("hidden")) cfg.hidden.push_back(h);
  TrainSetup setup;
  setup.rep = ctx.config.group();
  if (setup.rep->dim() != data.x.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "group dimension differs from the rows of X");
  }
  const TrainLog log = train(cfg, data.x, data.y, setup);
  ensure_out_dir(ctx.out_dir);
  std::ofstream csv = open_csv(ctx.out_dir / "trainlog.csv");
  csv << "epoch,objective,w_perp_frob,invariance_ratio,accuracy\n";
  for (const EpochRecord& r : log.records) {
    csv << r.epoch << ',' << format_double(r.objective) << ',' << format_double(r.w_perp_frob) << ','
        << format_double(r.invariance_ratio) << ',' << format_double(r.accuracy) << '\n';
  }
  write_matrix(ctx.out_dir / "Wfinal.mat", log.final_w);
  const EpochRecord& last = log.records.back();
  ctx.out << "train mode=" << to_string(cfg.mode) << " epochs=" << log.records.size()
          << " objective=" << format_double(last.objective) << " w_perp_frob=" << format_double(last.w_perp_frob)
          << "\n";
}

bool cmd_ntk_check(const CommandContext& ctx) {
  NtkCheckSpec spec;
  spec.width = ctx.config.get_int("width", spec.width);
  spec.trials = static_cast<int>(ctx.config.get_int("trials", spec.trials));
  spec.orbit_width = ctx.config.get_int("orbit_width", spec.orbit_width);
  spec.n = ctx.config.get_int("n", spec.n);
  spec.test_points = static_cast<int>(ctx.config.get_int("test_points", spec.test_points));
  spec.seed = ctx.config.get_u64("seed", 0);
  const GroupRep rep = ctx.config.group();
  if (!is_unitary(rep, 1e-10)) throw Error(ErrorCode::NotUnitary, "ntk-check needs an orthogonal representation");
  const auto rows = run_ntk_suites(rep, spec);
  ensure_out_dir(ctx.out_dir);
  std::ofstream csv = open_csv(ctx.out_dir / "ntk.csv");
  csv << "suite,trial,discrepancy,tolerance,pass\n";
  std::vector<std::string> failing;
  for (const NtkTrial& t : rows) {
    csv << t.suite << ',' << t.trial << ',' << format_double(t.discrepancy) << ',' << format_double(t.tolerance)
        << ',' << (t.pass ? "true" : "false") << '\n';
    if (!t.pass && std::find(failing.begin(), failing.end(), t.suite) == failing.end()) failing.push_back(t.suite);
  }
  std::vector<std::string> suites;
  for (const NtkTrial& t : rows) {
    if (std::find(suites.begin(), suites.end(), t.suite) == suites.end()) suites.push_back(t.suite);
  }
  for (const std::string& s : suites) {
    const bool ok = std::find(failing.begin(), failing.end(), s) == failing.end();
    ctx.out << (ok ? "PASS " : "FAIL ") << s << "\n";
  }
  if (!failing.empty()) {
    ctx.err << "ntk-check failed:";
    for (const std::string& s : failing) ctx.err << ' ' << s;
    ctx.err << "\n";
  }
  return failing.empty();
}

bool cmd_compare(const fs::path& a, const fs::path& b, double tol, std::ostream& out) {
  if (!(tol >= 0.0)) throw Error(ErrorCode::InvalidConfig, "--tol must be >= 0");
  const Matrix ma = read_matrix(a);
  const Matrix mb = read_matrix(b);
  if (ma.rows() != mb.rows() || ma.cols() != mb.cols()) {
    throw Error(ErrorCode::ShapeMismatch, a.string() + " and " + b.string() + " differ in shape");
  }
  const double scale = std::max(ma.norm(), mb.norm());
  const double dist = scale == 0.0 ? 0.0 : (ma - mb).norm() / scale;
  const bool ok = dist <= tol;
  out << "relative_distance=" << format_double(dist) << " tol=" << format_double(tol) << " "
      << (ok ? "equal" : "different") << "\n";
  return ok;
}

}  // namespace invlr
