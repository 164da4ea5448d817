#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "invlr/grouprep.hpp"

namespace invlr {

/// Flat `key = value` experiment description. Lines starting with `#` and
/// blank lines are ignored; unknown keys are rejected.
class ExperimentConfig {
 public:
  ExperimentConfig() = default;

  static ExperimentConfig parse(const std::string& text, const std::filesystem::path& base_dir = ".");
  static ExperimentConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  long get_int(const std::string& key, long fallback) const;
  long require_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<long> get_int_list(const std::string& key) const;

  /// Either `geom:lo:hi:count` or a comma-separated list; every entry must be
  /// finite and > 0 and the list strictly increasing.
  std::vector<double> lambda_grid() const;

  /// Builds the representation named by `group` (see README for presets).
  /// `d0`, when present, must agree with the preset dimension.
  GroupRep group() const;

  /// Resolves a file key against the config directory; nullopt when absent.
  std::optional<std::filesystem::path> file(const std::string& key) const;

  static const std::vector<std::string>& known_keys();

 private:
  std::map<std::string, std::string> values_;
  std::filesystem::path base_dir_ = ".";
};

}  // namespace invlr
