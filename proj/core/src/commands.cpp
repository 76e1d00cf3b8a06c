#include "algoforge/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "algoforge/reports.hpp"

namespace algoforge {

namespace {

namespace fs = std::filesystem;

void require_problem(const RunConfig& cfg) {
  if (!cfg.has_problem)
    throw ConfigError("no problem selected: pass --problem <preset> or a config file");
}

fs::path prepare_output_dir(const RunConfig& cfg) {
  fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  return dir;
}

template <typename Fn>
int run_command(Fn&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int cmd_discover(const RunConfig& cfg) {
  return run_command([&] {
    require_problem(cfg);
    const std::vector<Discovery> results =
        discover(cfg.problem, cfg.family, cfg.search, cfg.cost, cfg.workers);

    const fs::path dir = prepare_output_dir(cfg);
    write_file(dir / "results.csv", results_csv(results));
    write_file(dir / "results.json", results_json(cfg, results));
    for (const Discovery& d : results) {
      if (d.verdict.status != SearchStatus::Feasible) continue;
      const std::string name = "traj_" + sanitize_filename(spec_string(d.spec)) + ".csv";
      write_file(dir / name,
                 trajectory_csv(cfg.problem, *d.verdict.best, cfg.cost, cfg.search.cost_mode));
    }

    long feasible = 0;
    for (const Discovery& d : results) feasible += d.verdict.status == SearchStatus::Feasible;
    std::cout << "discover: " << results.size() << " algorithms, " << feasible
              << " feasible; reports in " << dir.string() << "\n";
    return 0;
  });
}

int cmd_run(const RunConfig& cfg, const std::string& algorithm, const std::string& schedule) {
  return run_command([&] {
    require_problem(cfg);
    AlgorithmSpec spec;
    try {
      spec = parse_algorithm(algorithm);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    const std::vector<StepChoice> steps = parse_schedule(schedule);
    if (static_cast<int>(steps.size()) > cfg.problem.it_max)
      throw ConfigError("schedule has " + std::to_string(steps.size()) +
                        " steps but it_max is " + std::to_string(cfg.problem.it_max));
    for (const StepChoice& s : steps)
      if (s.abar > cfg.search.abar_max)
        throw ConfigError("schedule step exceeds abar_max of " +
                          std::to_string(cfg.search.abar_max));

    const Trajectory traj = simulate(cfg.problem, spec, steps, cfg.search, cfg.cost);
    const fs::path dir = prepare_output_dir(cfg);
    write_file(dir / "trajectory.csv",
               trajectory_csv(cfg.problem, traj, cfg.cost, cfg.search.cost_mode));
    std::cout << run_summary(cfg.problem, traj);
    return 0;
  });
}

int cmd_ensemble(const RunConfig& cfg) {
  return run_command([&] {
    require_problem(cfg);
    if (cfg.starts.empty())
      throw ConfigError("ensemble requires a starts list (--starts or config key 'starts')");
    EnsembleResult result;
    try {
      result = ensemble(cfg.problem, cfg.starts, cfg.family, cfg.search, cfg.cost, cfg.shortlist,
                        cfg.workers);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }

    const fs::path dir = prepare_output_dir(cfg);
    write_file(dir / "ensemble.csv", ensemble_csv(cfg.problem, result));
    write_file(dir / "aggregate.csv", aggregate_csv(result));
    write_file(dir / "ensemble.json", ensemble_json(cfg, result));
    std::cout << "ensemble: " << result.starts.size() << " starts x " << result.algorithms.size()
              << " algorithms; reports in " << dir.string() << "\n";
    return 0;
  });
}

int cmd_grid(const RunConfig& cfg, int resolution) {
  return run_command([&] {
    require_problem(cfg);
    if (cfg.problem.n != 2) throw ConfigError("grid requires a two-dimensional problem");
    if (resolution < 2) throw ConfigError("grid resolution must be at least 2");
    const fs::path dir = prepare_output_dir(cfg);
    write_file(dir / "grid.csv", grid_csv(cfg.problem, resolution));
    std::cout << "grid: " << resolution * resolution << " samples; reports in " << dir.string()
              << "\n";
    return 0;
  });
}

int cmd_list_problems() {
  return run_command([] {
    for (const std::string& name : builtin_names()) {
      const ProblemSpec p = builtin(name);
      std::cout << name << "\n";
      std::cout << "  kind: " << to_string(p.kind) << ", n: " << p.n << ", j_max: " << p.j_max
                << ", it_max: " << p.it_max << ", epsilon: " << format_double(p.epsilon) << "\n";
      std::cout << "  box:";
      for (int i = 0; i < p.n; ++i)
        std::cout << " [" << format_double(p.box_lo[i]) << ", " << format_double(p.box_hi[i])
                  << "]";
      std::cout << "\n  start: (";
      for (int i = 0; i < p.n; ++i) {
        if (i) std::cout << ", ";
        std::cout << format_double(p.initial_points[0][i]);
      }
      std::cout << ")\n";
      std::cout << "  exprs:";
      for (const Expression& e : p.exprs) std::cout << " " << e.text();
      std::cout << "\n";
    }
    return 0;
  });
}

}  // namespace algoforge
