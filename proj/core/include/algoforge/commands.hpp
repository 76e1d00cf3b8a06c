#pragma once

#include <string>

#include "algoforge/config.hpp"

namespace algoforge {

/// Command entry points. Each returns a process exit code:
/// 0 success, 2 user/config error, 3 internal error.
int cmd_discover(const RunConfig& cfg);
int cmd_run(const RunConfig& cfg, const std::string& algorithm, const std::string& schedule);
int cmd_ensemble(const RunConfig& cfg);
int cmd_grid(const RunConfig& cfg, int resolution);
int cmd_list_problems();

}  // namespace algoforge
