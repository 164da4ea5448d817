#include "invlr/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "invlr/error.hpp"
#include "invlr/matrix_io.hpp"
#include "invlr/solvers.hpp"

namespace invlr {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if (begin < end && *begin == '+') ++begin;
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw Error(ErrorCode::InvalidConfig, "key '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

// Keys that name input files which must exist.
const std::vector<std::string> kFileKeys{"x_file", "y_file"};

}  // namespace

const std::vector<std::string>& ExperimentConfig::known_keys() {
  static const std::vector<std::string> keys{
      "mode",        "group",        "d0",          "dL",         "hidden",      "r",
      "lambda",      "lambda_grid",  "n",           "noise_sigma", "seed",       "epochs",
      "learning_rate", "loss",       "beta1",       "beta2",      "adam_eps",    "init_scale",
      "invariant_target", "true_rank", "target_kind", "x_file",   "y_file",      "width",
      "trials",      "orbit_width",  "test_points"};
  return keys;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  cfg.base_dir_ = base_dir;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    cfg.set(key, value);
  }
  for (const std::string& key : kFileKeys) {
    if (auto path = cfg.file(key); path && !std::filesystem::exists(*path)) {
      throw Error(ErrorCode::Io, "key '" + key + "': file " + path->string() + " does not exist");
    }
  }
  if (cfg.has("group")) (void)cfg.group();
  if (cfg.has("lambda_grid")) (void)cfg.lambda_grid();
  if (cfg.has("mode")) {
    const std::string mode = cfg.get_string("mode", "");
    if (mode != "constrained" && mode != "regularized" && mode != "augmented" && mode != "hardwired") {
      throw Error(ErrorCode::InvalidConfig, "key 'mode': unknown mode '" + mode + "'");
    }
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  const auto& keys = known_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
    throw Error(ErrorCode::InvalidConfig, "unknown key '" + key + "'");
  }
  values_[key] = value;
}

std::string ExperimentConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string ExperimentConfig::require_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw Error(ErrorCode::InvalidConfig, "missing key '" + key + "'");
  return it->second;
}

long ExperimentConfig::get_int(const std::string& key, long fallback) const {
  return has(key) ? parse_number<long>(key, values_.at(key)) : fallback;
}

long ExperimentConfig::require_int(const std::string& key) const {
  return parse_number<long>(key, require_string(key));
}

std::uint64_t ExperimentConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? parse_number<std::uint64_t>(key, values_.at(key)) : fallback;
}

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  const double v = parse_number<double>(key, values_.at(key));
  if (!std::isfinite(v)) throw Error(ErrorCode::InvalidConfig, "key '" + key + "' must be finite");
  return v;
}

bool ExperimentConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = values_.at(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorCode::InvalidConfig, "key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<long> ExperimentConfig::get_int_list(const std::string& key) const {
  std::vector<long> out;
  if (!has(key) || values_.at(key).empty()) return out;
  for (const std::string& part : split(values_.at(key), ',')) out.push_back(parse_number<long>(key, part));
  return out;
}

std::vector<double> ExperimentConfig::lambda_grid() const {
  const std::string spec = require_string("lambda_grid");
  std::vector<double> grid;
  if (spec.rfind("geom:", 0) == 0) {
    const auto parts = split(spec.substr(5), ':');
    if (parts.size() != 3) throw Error(ErrorCode::InvalidConfig, "key 'lambda_grid': expected geom:lo:hi:count");
    const double lo = parse_number<double>("lambda_grid", parts[0]);
    const double hi = parse_number<double>("lambda_grid", parts[1]);
    const long count = parse_number<long>("lambda_grid", parts[2]);
    if (!(lo > 0.0) || !(hi > lo) || count < 2) {
      throw Error(ErrorCode::InvalidGrid, "key 'lambda_grid': need 0 < lo < hi and count >= 2");
    }
    grid = geometric_grid(lo, hi, static_cast<int>(count));
  } else {
    for (const std::string& part : split(spec, ',')) grid.push_back(parse_number<double>("lambda_grid", part));
  }
  if (grid.empty()) throw Error(ErrorCode::InvalidGrid, "key 'lambda_grid': empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) {
      throw Error(ErrorCode::InvalidGrid, "key 'lambda_grid': entries must be finite and > 0");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw Error(ErrorCode::InvalidGrid, "key 'lambda_grid': entries must be strictly increasing");
    }
  }
  return grid;
}

std::optional<std::filesystem::path> ExperimentConfig::file(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  std::filesystem::path p(values_.at(key));
  return p.is_absolute() ? p : base_dir_ / p;
}

GroupRep ExperimentConfig::group() const {
  const std::string spec = require_string("group");
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto bad = [&](const std::string& why) {
    return Error(ErrorCode::InvalidConfig, "key 'group': " + why + " in '" + spec + "'");
  };
  GroupRep rep = trivial_rep(1);
  try {
    if (kind == "c4_image") {
      rep = c4_image_rotation(static_cast<int>(parse_number<long>("group", arg)));
    } else if (kind == "cyclic_perm") {
      const auto parts = split(arg, ':');
      const long d = parse_number<long>("group", parts.at(0));
      const long k = parts.size() > 1 ? parse_number<long>("group", parts[1]) : d;
      rep = cyclic_permutation(static_cast<int>(d), static_cast<int>(k));
    } else if (kind == "rotation2d") {
      rep = rotation2d(static_cast<int>(parse_number<long>("group", arg)));
    } else if (kind == "trivial") {
      rep = trivial_rep(static_cast<int>(parse_number<long>("group", arg)));
    } else if (kind == "custom") {
      const auto plus = arg.rfind('+');
      if (plus == std::string::npos) throw bad("expected custom:<file>+<order>");
      std::filesystem::path p(arg.substr(0, plus));
      if (!p.is_absolute()) p = base_dir_ / p;
      if (!std::filesystem::exists(p)) {
        throw Error(ErrorCode::Io, "key 'group': file " + p.string() + " does not exist");
      }
      const long order = parse_number<long>("group", arg.substr(plus + 1));
      rep = rep_from_generator(read_matrix(p), static_cast<int>(order));
    } else {
      throw bad("unknown preset '" + kind + "'");
    }
  } catch (const std::out_of_range&) {
    throw bad("missing argument");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io || e.code() == ErrorCode::InvalidConfig) throw;
    throw Error(ErrorCode::InvalidConfig, std::string("key 'group': ") + e.what());
  }
  if (has("d0") && get_int("d0", 0) != rep.dim()) {
    throw Error(ErrorCode::InvalidConfig, "key 'd0' = " + values_.at("d0") + " but group acts on R^" +
                                              std::to_string(rep.dim()));
  }
  return rep;
}

}  // namespace invlr
