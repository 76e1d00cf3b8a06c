#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "algoforge/search.hpp"

namespace algoforge {

/// A user mistake in configuration or command-line input. Maps to exit
/// code 2; anything else escaping a command maps to exit code 3.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Fully resolved run configuration. The problem is validated and the
/// family/search/cost sections carry their defaults.
struct RunConfig {
  ProblemSpec problem;
  FamilyConfig family;
  SearchConfig search;
  CostModel cost;
  std::vector<std::vector<double>> starts;  // ensemble command
  std::optional<int> shortlist;             // ensemble command
  int workers = 1;
  std::string output_dir = ".";
  bool has_problem = false;
};

/// Command-line overrides; applied on top of the JSON config (or defaults).
struct ConfigOverrides {
  std::optional<std::string> problem;
  std::optional<std::string> family_kind;  // "single" | "two-step"
  std::optional<int> j_max;
  std::optional<std::string> beta_grid;    // comma-separated
  std::optional<double> epsilon;
  std::optional<int> it_max;
  std::optional<long> node_budget;
  bool monotone_residual = false;
  bool no_box = false;
  std::optional<std::string> cost_mode;    // "counted" | "residual-weighted"
  std::optional<int> workers;
  std::optional<std::string> output_dir;
  std::optional<std::string> starts;       // "x1,x2;x1,x2;..."
  std::optional<int> shortlist;
};

/// Parses and validates a JSON config document. Unknown keys are rejected
/// at every level. Throws ConfigError.
RunConfig parse_config_text(const std::string& json_text);

RunConfig load_config_file(const std::filesystem::path& path);

/// Builds the effective configuration: JSON config (when given), then CLI
/// overrides, then defaults; the ALGOFORGE_OUT environment variable supplies
/// the default output directory.
RunConfig build_config(const std::optional<std::string>& config_path,
                       const ConfigOverrides& overrides);

/// Deterministic JSON echo of the effective configuration (sorted keys,
/// two-space indent). Execution details (workers, output_dir) are omitted.
std::string effective_config_json(const RunConfig& config);

}  // namespace algoforge
