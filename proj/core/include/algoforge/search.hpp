#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "algoforge/cost.hpp"

namespace algoforge {

enum class StopReason : int { Converged, ScheduleExhausted, BoxExit, StepFailed };

/// The iterate sequence produced by running one algorithm under one
/// step-size schedule. points[0] is the start; schedule holds the executed
/// steps only, so points.size() == schedule.size() + 1 always.
struct Trajectory {
  AlgorithmSpec algorithm;
  std::vector<std::vector<double>> points;
  std::vector<double> residuals;  // aligned with points
  std::vector<StepChoice> schedule;
  std::vector<bool> counted;  // per executed iteration
  std::optional<int> it_con;  // index of the first iterate meeting the tolerance
  double total_cost = 0.0;
  bool feasible = false;
  StopReason stop_reason = StopReason::ScheduleExhausted;
};

struct SearchConfig {
  long node_budget = 200000;
  bool monotone_residual = false;
  bool enforce_box = true;
  bool memoize_states = false;
  double memo_granularity = 1e-9;
  int abar_max = 10;
  CostMode cost_mode = CostMode::Counted;
};

enum class SearchStatus : int { Feasible, InfeasibleProven, Unknown };

/// Outcome of the per-algorithm schedule search.
struct Verdict {
  SearchStatus status = SearchStatus::Unknown;
  std::optional<Trajectory> best;
  long nodes_expanded = 0;
  bool budget_exhausted = false;
  std::vector<std::string> proof_conditions;  // pruning rules that fired
};

/// Runs the algorithm under a fixed schedule from `start` (default: the
/// problem's first initial point). Stops early at the first iterate with
/// residual <= epsilon; a step error or box exit truncates the trajectory
/// and marks it infeasible. Never throws for step-level failures.
Trajectory simulate(const ProblemSpec& p, const AlgorithmSpec& a,
                    std::span<const StepChoice> schedule, const SearchConfig& cfg = {},
                    const CostModel& model = {},
                    std::span<const double> start = {});

/// Recomputes the cost of a trajectory from (schedule, residuals, counted)
/// alone, independently of the incremental bookkeeping.
double schedule_cost(const Trajectory& traj, const CostModel& model, CostMode mode);

/// Exact minimum-cost schedule search: uniform-cost expansion over the tree
/// of per-iteration step choices (branching factor 2*(abar_max+1)), with
/// deterministic tie-breaking (path cost, then depth, then lexicographic
/// schedule with + before - and smaller abar first) and incumbent
/// branch-and-bound. Returns Feasible with the minimum-cost schedule,
/// InfeasibleProven when the frontier empties, Unknown when the node budget
/// is hit with no feasible schedule in hand.
Verdict search_schedule(const ProblemSpec& p, const AlgorithmSpec& a, const SearchConfig& cfg,
                        const CostModel& model = {},
                        std::span<const double> start = {});

struct Discovery {
  AlgorithmSpec spec;
  Verdict verdict;
  std::size_t enumeration_index = 0;
};

/// Runs search_schedule for every algorithm in the family (j_max clamped to
/// the problem's) and ranks the outcomes: Feasible first by ascending cost,
/// then proven-infeasible, then unknown; ties resolved by enumeration order.
/// Deterministic for any worker count.
std::vector<Discovery> discover(const ProblemSpec& p, const FamilyConfig& family,
                                const SearchConfig& cfg, const CostModel& model = {},
                                int workers = 1);

struct EnsembleAggregate {
  std::size_t algorithm_index = 0;  // into EnsembleResult::algorithms
  int n_feasible = 0;
  int n_cheapest = 0;
  std::optional<double> mean_cost;  // over feasible starts; empty when none
};

struct EnsembleResult {
  std::vector<std::vector<double>> starts;
  std::vector<AlgorithmSpec> algorithms;
  /// per_start[s] lists (algorithm index, verdict) in rank order.
  std::vector<std::vector<std::pair<std::size_t, Verdict>>> per_start;
  std::vector<EnsembleAggregate> aggregate;  // in algorithms order
};

/// Re-runs the schedule search from each start. With `shortlist` set, the
/// candidate set is the top-k feasible algorithms of a base discover run
/// from the problem's own initial point; otherwise the full family.
EnsembleResult ensemble(const ProblemSpec& p, std::span<const std::vector<double>> starts,
                        const FamilyConfig& family, const SearchConfig& cfg,
                        const CostModel& model = {}, std::optional<int> shortlist = {},
                        int workers = 1);

const char* to_string(SearchStatus status);
const char* to_string(StopReason reason);

/// Rank comparator used by discover and ensemble: true when verdict `lhs`
/// outranks `rhs` (Feasible first, then lower cost, then lower index).
bool ranks_before(const Verdict& lhs, std::size_t lhs_index, const Verdict& rhs,
                  std::size_t rhs_index);

}  // namespace algoforge
