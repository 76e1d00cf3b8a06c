#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "algoforge/commands.hpp"

namespace {

struct CommonArgs {
  std::optional<std::string> config;
  algoforge::ConfigOverrides overrides;
};

void add_common_flags(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "JSON config file");
  cmd->add_option("--problem", args.overrides.problem, "preset problem name");
  cmd->add_option("--family", args.overrides.family_kind, "algorithm family: single | two-step");
  cmd->add_option("--jmax", args.overrides.j_max,
                  "highest derivative order in the family (1 or 2)");
  cmd->add_option("--beta-grid", args.overrides.beta_grid,
                  "comma-separated beta grid for two-step methods");
  cmd->add_option("--eps", args.overrides.epsilon, "residual tolerance");
  cmd->add_option("--itmax", args.overrides.it_max, "iteration cap");
  cmd->add_option("--budget", args.overrides.node_budget, "search node budget");
  cmd->add_flag("--monotone-residual", args.overrides.monotone_residual,
                "restrict to strictly decreasing residuals");
  cmd->add_flag("--no-box", args.overrides.no_box, "disable box enforcement on iterates");
  cmd->add_option("--cost-mode", args.overrides.cost_mode,
                  "objective mode: counted | residual-weighted");
  cmd->add_option("--workers", args.overrides.workers, "parallel search workers");
  cmd->add_option("--out", args.overrides.output_dir,
                  "output directory (default: $ALGOFORGE_OUT or .)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discovery and ranking of iterative root-finding and minimization algorithms"};
  app.require_subcommand(1);

  CommonArgs discover_args;
  CLI::App* discover = app.add_subcommand(
      "discover", "enumerate the algorithm family and search schedules for each member");
  add_common_flags(discover, discover_args);

  CommonArgs run_args;
  std::string run_algorithm;
  std::string run_schedule;
  CLI::App* run = app.add_subcommand("run", "replay one algorithm under a fixed schedule");
  add_common_flags(run, run_args);
  run->add_option("--algo", run_algorithm, "algorithm spec, e.g. \"nu=(1,1,-1);beta=0\"")
      ->required();
  run->add_option("--schedule", run_schedule,
                  "steps as sign+abar tokens, e.g. \"-0,-0,-0\" (empty for none)");

  CommonArgs ensemble_args;
  CLI::App* ensemble =
      app.add_subcommand("ensemble", "re-rank algorithms across several starting points");
  add_common_flags(ensemble, ensemble_args);
  ensemble->add_option("--starts", ensemble_args.overrides.starts,
                       "start points \"x1,x2;x1,x2;...\"");
  ensemble->add_option("--shortlist", ensemble_args.overrides.shortlist,
                       "restrict to the k cheapest algorithms of a base run");

  CommonArgs grid_args;
  int resolution = 50;
  CLI::App* grid = app.add_subcommand("grid", "sample f on a 2-D grid over the box for plotting");
  add_common_flags(grid, grid_args);
  grid->add_option("--resolution", resolution, "points per axis (default 50)");

  app.add_subcommand("list-problems", "print the preset problems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (discover->parsed()) {
      auto cfg = algoforge::build_config(discover_args.config, discover_args.overrides);
      return algoforge::cmd_discover(cfg);
    }
    if (run->parsed()) {
      auto cfg = algoforge::build_config(run_args.config, run_args.overrides);
      return algoforge::cmd_run(cfg, run_algorithm, run_schedule);
    }
    if (ensemble->parsed()) {
      auto cfg = algoforge::build_config(ensemble_args.config, ensemble_args.overrides);
      return algoforge::cmd_ensemble(cfg);
    }
    if (grid->parsed()) {
      auto cfg = algoforge::build_config(grid_args.config, grid_args.overrides);
      return algoforge::cmd_grid(cfg, resolution);
    }
    return algoforge::cmd_list_problems();
  } catch (const algoforge::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
