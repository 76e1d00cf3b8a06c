#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "algoforge/config.hpp"
#include "algoforge/search.hpp"

namespace algoforge {

/// Shortest round-trip decimal form (std::to_chars).
std::string format_double(double v);

/// RFC 4180 quoting: fields containing comma, quote or newline are wrapped
/// in double quotes with embedded quotes doubled.
std::string csv_field(std::string_view field);

/// "+0,-3,..." — one sign+abar token per iteration; empty for no steps.
std::string schedule_string(std::span<const StepChoice> schedule);

/// Inverse of schedule_string; throws ConfigError on malformed input.
std::vector<StepChoice> parse_schedule(std::string_view text);

/// Deterministic file-name stem for an algorithm spec string.
std::string sanitize_filename(std::string_view spec);

std::string results_csv(const std::vector<Discovery>& results);
std::string results_json(const RunConfig& cfg, const std::vector<Discovery>& results);
std::string trajectory_csv(const ProblemSpec& p, const Trajectory& traj, const CostModel& model,
                           CostMode mode);
std::string ensemble_csv(const ProblemSpec& p, const EnsembleResult& result);
std::string aggregate_csv(const EnsembleResult& result);
std::string ensemble_json(const RunConfig& cfg, const EnsembleResult& result);
std::string grid_csv(const ProblemSpec& p, int resolution);
std::string run_summary(const ProblemSpec& p, const Trajectory& traj);

void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace algoforge
