// Acceptance suite: one criterion per command-line argument (1..9), all when
// none is given. Prints exactly one PASS/FAIL line per criterion; the exit
// code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "algoforge/commands.hpp"
#include "algoforge/reports.hpp"

using namespace algoforge;

namespace {

constexpr int kWorkers = 4;

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (cond) return;
    ok = false;
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

ProblemSpec golden_problem(double x0) {
  ProblemSpec p;
  p.kind = ProblemKind::RootFinding;
  p.n = 1;
  p.exprs.push_back(Expression::parse("x^2-3", 1));
  p.box_lo = {-1e11};
  p.box_hi = {1e11};
  p.initial_points = {{x0}};
  p.name = "xsq_minus_3";
  validate(p);
  return p;
}

const AlgorithmSpec kSteepest{AlgorithmKind::SingleStep, ExponentTuple{{0, 1, 0}}, 0.0};
const AlgorithmSpec kNewtonMin{AlgorithmKind::SingleStep, ExponentTuple{{0, 1, -1}}, 0.0};

// ---------------------------------------------------------------- criterion 1
Check criterion1() {
  Check c;
  SearchConfig cfg;
  cfg.enforce_box = false;
  const AlgorithmSpec algo{AlgorithmKind::SingleStep, ExponentTuple{{1, 1, -1}}, 0.0};
  const std::vector<StepChoice> sched(3, StepChoice{-1, 0});

  const Trajectory from_01 = simulate(golden_problem(0.1), algo, sched, cfg);
  c.require(from_01.points.size() == 4, "expected 4 iterates from 0.1");
  if (from_01.points.size() == 4) {
    c.require(std::fabs(from_01.points[1][0] - 0.399) <= 1e-9, "x1 != 0.399");
    c.require(std::fabs(from_01.points[2][0] - 1.532478801) <= 1e-9, "x2 != 1.532478801");
    c.require(std::fabs(from_01.points[3][0] - 2.53090211) <= 1e-9, "x3 != 2.53090211");
  }

  const Trajectory from_3 = simulate(golden_problem(3.0), algo, sched, cfg);
  c.require(from_3.points.size() == 4, "expected 4 iterates from 3");
  if (from_3.points.size() == 4) {
    c.require(from_3.points[1][0] == -15.0, "x1 != -15 exactly");
    c.require(from_3.points[2][0] == 3315.0, "x2 != 3315 exactly");
    c.require(from_3.points[3][0] == -36429267615.0,
              "x3 != 4*3315 - 3315^3 = -36429267615 exactly");
  }
  return c;
}

// ---------------------------------------------------------------- criterion 2
std::vector<Discovery> run_quartic_discover(int workers) {
  const ProblemSpec p = builtin("quartic_min");
  FamilyConfig fam;  // single-step, j_max 2, exponents -2..2: 125 algorithms
  SearchConfig cfg;  // default budget, box on, counted mode
  return discover(p, fam, cfg, CostModel{}, workers);
}

Check criterion2() {
  Check c;
  const auto results = run_quartic_discover(kWorkers);
  c.require(results.size() == 125, "expected 125 single-step algorithms");

  const Discovery* steepest = nullptr;
  for (const auto& d : results)
    if (d.spec.nu.nu == std::vector<int>{0, 1, 0}) steepest = &d;
  c.require(steepest != nullptr, "nu=(0,1,0) missing from the enumeration");
  if (!steepest) return c;
  c.require(steepest->verdict.status == SearchStatus::Feasible, "nu=(0,1,0) not Feasible");
  if (steepest->verdict.status != SearchStatus::Feasible) return c;

  const double sd_cost = steepest->verdict.best->total_cost;
  std::string cheaper;
  int n_cheaper = 0;
  for (const auto& d : results) {
    if (d.verdict.status != SearchStatus::Feasible) continue;
    if (d.verdict.best->total_cost < sd_cost) {
      ++n_cheaper;
      if (n_cheaper <= 3)
        cheaper += (cheaper.empty() ? "" : ", ") + spec_string(d.spec) + " cost " +
                   format_double(d.verdict.best->total_cost);
    }
  }
  c.require(n_cheaper == 0, "steepest descent (cost " + format_double(sd_cost) + ") beaten by " +
                                std::to_string(n_cheaper) + " feasible algorithms, e.g. " +
                                cheaper);
  return c;
}

// ---------------------------------------------------------------- criterion 3
Check criterion3() {
  Check c;
  const ProblemSpec p = builtin("rosenbrock_min");
  SearchConfig cfg;
  const Verdict sd = search_schedule(p, kSteepest, cfg);
  c.require(sd.status != SearchStatus::Feasible,
            "steepest descent unexpectedly Feasible on rosenbrock_min");
  const Verdict newton = search_schedule(p, kNewtonMin, cfg);
  c.require(newton.status == SearchStatus::Feasible, "Newton not Feasible on rosenbrock_min");
  if (newton.status == SearchStatus::Feasible)
    c.require(newton.best->it_con && *newton.best->it_con <= 20, "Newton needed more than 20 its");
  return c;
}

// ---------------------------------------------------------------- criterion 4
Check criterion4() {
  Check c;
  const ProblemSpec p = builtin("quad_2d");
  FamilyConfig fam;
  fam.kind = AlgorithmKind::TwoStep;  // beta grid of 8 by default
  SearchConfig cfg;
  const auto results = discover(p, fam, cfg, CostModel{}, kWorkers);

  int feasible = 0;
  for (const auto& d : results) feasible += d.verdict.status == SearchStatus::Feasible;
  c.require(feasible >= 5, "fewer than 5 feasible algorithms (" + std::to_string(feasible) + ")");

  const Discovery* nesterov = nullptr;  // best-ranked (0,1,0) with beta > 0
  std::size_t nesterov_rank = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& d = results[i];
    if (d.spec.nu.nu == std::vector<int>{0, 1, 0} && d.spec.beta > 0.0 &&
        d.verdict.status == SearchStatus::Feasible) {
      nesterov = &d;
      nesterov_rank = i;
      break;
    }
  }
  c.require(nesterov != nullptr, "no feasible nu=(0,1,0) with beta>0");
  if (!nesterov) return c;

  c.require(nesterov_rank == 0,
            "nu=(0,1,0);beta=" + format_double(nesterov->spec.beta) + " ranks " +
                std::to_string(nesterov_rank + 1) + " (cost " +
                format_double(nesterov->verdict.best->total_cost) + "), not cheapest; rank 1 is " +
                spec_string(results[0].spec) + " at cost " +
                format_double(results[0].verdict.best->total_cost));
  c.require(nesterov->verdict.best->it_con && *nesterov->verdict.best->it_con < 5,
            "its it_con is " +
                (nesterov->verdict.best->it_con ? std::to_string(*nesterov->verdict.best->it_con)
                                                : std::string("unset")) +
                ", not < 5");
  return c;
}

// ---------------------------------------------------------------- criterion 5
Check criterion5() {
  Check c;
  const ProblemSpec p = builtin("strongly_convex_1d");
  FamilyConfig fam;
  fam.kind = AlgorithmKind::TwoStep;
  SearchConfig cfg;

  std::vector<std::vector<double>> starts;
  for (int k = 0; k <= 16; ++k) starts.push_back({-2.0 + 0.25 * k});

  const EnsembleResult ens = ensemble(p, starts, fam, cfg, CostModel{}, 5, kWorkers);
  c.require(ens.algorithms.size() == 5, "base run produced fewer than 5 feasible algorithms");

  for (std::size_t s = 0; s < ens.per_start.size(); ++s)
    for (const auto& [idx, verdict] : ens.per_start[s])
      c.require(verdict.status == SearchStatus::Feasible,
                spec_string(ens.algorithms[idx]) + " infeasible at start " +
                    format_double(ens.starts[s][0]));

  std::size_t nesterov_index = ens.algorithms.size();
  for (std::size_t i = 0; i < ens.algorithms.size(); ++i)
    if (ens.algorithms[i].nu.nu == std::vector<int>{0, 1, 0}) {
      nesterov_index = i;
      break;
    }
  if (nesterov_index == ens.algorithms.size()) {
    std::string shortlist;
    for (const auto& a : ens.algorithms) shortlist += (shortlist.empty() ? "" : ", ") + spec_string(a);
    c.require(false, "nu=(0,1,0) not in the 5 cheapest of the base run (shortlist: " + shortlist + ")");
    return c;
  }
  for (std::size_t s = 0; s < ens.per_start.size(); ++s) {
    for (std::size_t rank = 0; rank < ens.per_start[s].size(); ++rank) {
      if (ens.per_start[s][rank].first == nesterov_index) {
        c.require(rank < 2, "nu=(0,1,0) rank " + std::to_string(rank + 1) + " at start " +
                                format_double(ens.starts[s][0]));
        break;
      }
    }
  }
  return c;
}

// ---------------------------------------------------------------- criterion 6
struct OracleResult {
  SearchStatus status = SearchStatus::InfeasibleProven;
  double cost = 0.0;
};

OracleResult oracle_best(const ProblemSpec& p, const AlgorithmSpec& a, const SearchConfig& cfg,
                         const CostModel& model) {
  OracleResult best;
  bool found = false;
  const int branching = 2 * (cfg.abar_max + 1);
  long total = 1;
  for (int k = 0; k < p.it_max; ++k) total *= branching;

  auto consider = [&](const Trajectory& t) {
    if (!t.feasible) return;
    if (!found || t.total_cost < best.cost) {
      best.cost = t.total_cost;
      found = true;
    }
  };
  consider(simulate(p, a, {}, cfg, model));
  std::vector<StepChoice> schedule(p.it_max);
  for (long code = 0; code < total; ++code) {
    long rem = code;
    for (int k = 0; k < p.it_max; ++k) {
      const int idx = static_cast<int>(rem % branching);
      rem /= branching;
      schedule[k] =
          idx <= cfg.abar_max ? StepChoice{+1, idx} : StepChoice{-1, idx - cfg.abar_max - 1};
    }
    consider(simulate(p, a, schedule, cfg, model));
  }
  best.status = found ? SearchStatus::Feasible : SearchStatus::InfeasibleProven;
  return best;
}

Check criterion6() {
  Check c;
  SearchConfig cfg;
  cfg.abar_max = 2;
  cfg.node_budget = 1000000;  // the 12^3 tree is far below this
  const CostModel model;
  std::mt19937_64 rng(61803398);

  for (const std::string& name : builtin_names()) {
    ProblemSpec p = builtin(name);
    p.it_max = 3;
    const auto singles = enumerate_algorithms(AlgorithmKind::SingleStep, p.j_max, -2, 2, {});
    FamilyConfig two;
    two.kind = AlgorithmKind::TwoStep;
    two.j_max = p.j_max;
    const auto twos = enumerate_algorithms(two);

    std::uniform_int_distribution<std::size_t> pick_single(0, singles.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_two(0, twos.size() - 1);
    for (int rep = 0; rep < 10; ++rep) {
      for (const AlgorithmSpec& a : {singles[pick_single(rng)], twos[pick_two(rng)]}) {
        const Verdict v = search_schedule(p, a, cfg, model);
        const OracleResult o = oracle_best(p, a, cfg, model);
        const bool status_ok = v.status == o.status;
        const bool cost_ok =
            v.status != SearchStatus::Feasible || v.best->total_cost == o.cost;
        if (!(status_ok && cost_ok))
          c.require(false, name + " " + spec_string(a) + ": search " +
                               std::string(to_string(v.status)) +
                               (v.best ? " cost " + format_double(v.best->total_cost) : "") +
                               " vs oracle " + to_string(o.status) + " cost " +
                               format_double(o.cost));
      }
    }
  }
  return c;
}

// ---------------------------------------------------------------- criterion 7
// Relative error <= 1e-5 against central differences. The absolute floor is
// the roundoff of the difference scheme itself (eps * |f| / h for gradients,
// eps * |f| / h^2 for Hessians, with a small safety factor); below that a
// finite-difference oracle carries no information.
Check criterion7() {
  Check c;
  std::mt19937_64 rng(271828);
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  constexpr double kSafety = 8.0;

  for (const std::string& name : builtin_names()) {
    const ProblemSpec p = builtin(name);
    std::vector<double> h(p.n);
    for (int i = 0; i < p.n; ++i) h[i] = 1e-5 * (p.box_hi[i] - p.box_lo[i]);

    for (const Expression& e : p.exprs) {
      std::vector<double> x(p.n);
      for (int rep = 0; rep < 100; ++rep) {
        for (int i = 0; i < p.n; ++i) {
          std::uniform_real_distribution<double> dist(p.box_lo[i], p.box_hi[i]);
          x[i] = dist(rng);
        }
        const Taylor2 t = e.eval_taylor2(x);
        const double fscale = std::max(1.0, std::fabs(e.eval(x)));
        for (int i = 0; i < p.n; ++i) {
          std::vector<double> xp = x, xm = x;
          xp[i] += h[i];
          xm[i] -= h[i];
          const double fd = (e.eval(xp) - e.eval(xm)) / (2 * h[i]);
          const double err = std::fabs(fd - t.gradient[i]);
          const double floor = std::max(1e-8, kSafety * kEps * fscale / (2 * h[i]));
          if (err > std::max(1e-5 * std::fabs(t.gradient[i]), floor))
            c.require(false, name + ": gradient FD mismatch " + format_double(err));
        }
        for (int i = 0; i < p.n; ++i) {
          for (int j = 0; j < p.n; ++j) {
            std::vector<double> xpp = x, xpm = x, xmp = x, xmm = x;
            xpp[i] += h[i]; xpp[j] += h[j];
            xpm[i] += h[i]; xpm[j] -= h[j];
            xmp[i] -= h[i]; xmp[j] += h[j];
            xmm[i] -= h[i]; xmm[j] -= h[j];
            const double fd =
                (e.eval(xpp) - e.eval(xpm) - e.eval(xmp) + e.eval(xmm)) / (4 * h[i] * h[j]);
            const double err = std::fabs(fd - t.hess(i, j));
            const double floor = std::max(1e-8, kSafety * kEps * fscale / (h[i] * h[j]));
            if (err > std::max(1e-5 * std::fabs(t.hess(i, j)), floor))
              c.require(false, name + ": hessian FD mismatch " + format_double(err));
          }
        }
      }
    }
  }
  if (!c.ok && c.detail.size() > 200) c.detail.resize(200);
  return c;
}

// ---------------------------------------------------------------- criterion 8
Check criterion8() {
  Check c;

  // two-step with beta = 0 is the single-step method, bit for bit
  std::mt19937_64 rng(8128);
  for (const std::string& name : builtin_names()) {
    const ProblemSpec p = builtin(name);
    const auto algos = enumerate_algorithms(AlgorithmKind::SingleStep, p.j_max, -2, 2, {});
    std::uniform_int_distribution<std::size_t> pick(0, algos.size() - 1);
    std::uniform_int_distribution<int> pick_abar(0, 10);
    std::uniform_int_distribution<int> pick_sign(0, 1);
    for (int rep = 0; rep < 1000; ++rep) {
      IterState s;
      s.x.resize(p.n);
      s.x_prev.resize(p.n);
      for (int i = 0; i < p.n; ++i) {
        std::uniform_real_distribution<double> dist(p.box_lo[i], p.box_hi[i]);
        s.x[i] = dist(rng);
        s.x_prev[i] = dist(rng);
      }
      const ExponentTuple& nu = algos[pick(rng)].nu;
      const StepChoice alpha{pick_sign(rng) ? 1 : -1, pick_abar(rng)};
      std::vector<double> single;
      IterState two;
      bool fail_single = false, fail_two = false;
      try {
        single = advance_single(p, nu, alpha, s.x);
      } catch (const std::exception&) {
        fail_single = true;
      }
      try {
        two = advance_two_step(p, nu, alpha, 0.0, s);
      } catch (const std::exception&) {
        fail_two = true;
      }
      if (fail_single != fail_two ||
          (!fail_single && std::memcmp(single.data(), two.x.data(),
                                       single.size() * sizeof(double)) != 0)) {
        c.require(false, name + ": beta=0 two-step diverged from single-step");
        break;
      }
    }
  }

  // the all-zero exponent tuple yields the all-ones direction
  for (const std::string& name : builtin_names()) {
    const ProblemSpec p = builtin(name);
    const auto d = direction(p, ExponentTuple{{0, 0, 0}}, p.initial_points[0]);
    c.require(d == std::vector<double>(p.n, 1.0), name + ": zero tuple direction not all-ones");
  }

  // a first step landing inside the tolerance is free
  {
    ProblemSpec tiny;
    tiny.kind = ProblemKind::Minimization;
    tiny.n = 1;
    tiny.exprs.push_back(Expression::parse("x^2", 1));
    tiny.box_lo = {-2};
    tiny.box_hi = {2};
    tiny.initial_points = {{0.5}};
    tiny.name = "parabola";
    validate(tiny);
    const std::vector<StepChoice> one_step = {{-1, 1}};  // 0.5 - 0.5*f'(0.5) = 0 exactly
    const Trajectory t = simulate(tiny, kSteepest, one_step, SearchConfig{});
    c.require(t.feasible && t.it_con && *t.it_con == 1 && t.total_cost == 0.0,
              "one-step convergence not free");
    const Verdict v = search_schedule(tiny, kSteepest, SearchConfig{});
    c.require(v.status == SearchStatus::Feasible && v.best->total_cost == 0.0,
              "search missed the free one-step schedule");
  }

  // zero-base-negative-power edges prune without crashing
  {
    ProblemSpec p = builtin("quartic_min");
    p.initial_points = {{1.0}};  // f(1) = 0 exactly, gradient 5
    validate(p);
    const AlgorithmSpec a{AlgorithmKind::SingleStep, ExponentTuple{{-1, 1, 0}}, 0.0};
    SearchConfig cfg;
    cfg.node_budget = 2000;
    const Verdict v = search_schedule(p, a, cfg);
    bool saw_step_error = false;
    for (const auto& r : v.proof_conditions) saw_step_error |= r == "step_error";
    c.require(saw_step_error, "zero-base edge did not register as step_error");
  }

  // singular-matrix edges prune without crashing
  {
    ProblemSpec p;
    p.kind = ProblemKind::Minimization;
    p.n = 2;
    p.exprs.push_back(Expression::parse("(x1+x2)^2", 2));
    p.box_lo = {-2, -2};
    p.box_hi = {2, 2};
    p.initial_points = {{0.5, 0.5}};
    p.name = "singular_hessian";
    validate(p);
    const Verdict v = search_schedule(p, kNewtonMin, SearchConfig{});
    c.require(v.status == SearchStatus::InfeasibleProven,
              "singular-hessian search did not prove infeasibility");
    bool saw_step_error = false;
    for (const auto& r : v.proof_conditions) saw_step_error |= r == "step_error";
    c.require(saw_step_error, "singular edge did not register as step_error");
  }
  return c;
}

// ---------------------------------------------------------------- criterion 9
Check criterion9() {
  Check c;
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "algoforge_acceptance_c9";
  fs::remove_all(base);

  ConfigOverrides o;
  o.problem = "quartic_min";
  RunConfig cfg = build_config(std::nullopt, o);

  cfg.workers = 1;
  cfg.output_dir = (base / "a").string();
  c.require(cmd_discover(cfg) == 0, "first discover run failed");
  cfg.workers = kWorkers;
  cfg.output_dir = (base / "b").string();
  c.require(cmd_discover(cfg) == 0, "second discover run failed");

  auto read = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  const std::string csv_a = read(base / "a" / "results.csv");
  const std::string csv_b = read(base / "b" / "results.csv");
  c.require(!csv_a.empty(), "results.csv missing");
  c.require(csv_a == csv_b, "results.csv differs across identical runs");
  const std::string json_a = read(base / "a" / "results.json");
  const std::string json_b = read(base / "b" / "results.json");
  c.require(json_a == json_b, "results.json differs across identical runs");
  fs::remove_all(base);
  return c;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Check()> run;
};

const Criterion kCriteria[] = {
    {1, "golden recurrence on x^2-3", criterion1},
    {2, "steepest-descent optimality on quartic_min", criterion2},
    {3, "rosenbrock: steepest descent infeasible, Newton feasible", criterion3},
    {4, "two-step quad_2d: Nesterov feasible, cheapest, it_con < 5", criterion4},
    {5, "strongly_convex_1d ensemble: shortlist feasible, Nesterov rank <= 2", criterion5},
    {6, "oracle equivalence on reduced instances", criterion6},
    {7, "AD matches central finite differences", criterion7},
    {8, "degeneracy suite", criterion8},
    {9, "byte-identical discover reruns", criterion9},
};

}  // namespace

int main(int argc, char** argv) {
  int selected = 0;
  if (argc > 1) selected = std::atoi(argv[1]);

  int failures = 0;
  for (const Criterion& crit : kCriteria) {
    if (selected != 0 && crit.id != selected) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    try {
      c = crit.run();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    const double sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.ok) {
      std::printf("PASS criterion %d: %s (%.1fs)\n", crit.id, crit.name, sec);
    } else {
      std::printf("FAIL criterion %d: %s (%.1fs) -- %s\n", crit.id, crit.name, sec,
                  c.detail.c_str());
      ++failures;
    }
    std::fflush(stdout);
  }
  return failures;
}
