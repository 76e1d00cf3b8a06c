#include "algoforge/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <exception>
#include <limits>
#include <mutex>
#include <queue>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace algoforge {

namespace {

constexpr int kMaxAbar = 60;

void validate_config(const SearchConfig& cfg) {
  if (cfg.node_budget < 1) throw std::invalid_argument("search: node_budget must be at least 1");
  if (cfg.abar_max < 0 || cfg.abar_max > kMaxAbar)
    throw std::invalid_argument("search: abar_max out of range");
  if (cfg.memo_granularity <= 0.0)
    throw std::invalid_argument("search: memo_granularity must be positive");
}

std::vector<double> resolve_start(const ProblemSpec& p, std::span<const double> start) {
  if (start.empty()) return p.initial_points.at(0);
  if (start.size() != static_cast<std::size_t>(p.n))
    throw std::invalid_argument("start point has wrong dimension");
  return std::vector<double>(start.begin(), start.end());
}

std::optional<double> beta_of(const AlgorithmSpec& a) {
  if (a.kind == AlgorithmKind::TwoStep) return a.beta;
  return std::nullopt;
}

// Pruning rules in the order they are reported.
enum Rule : unsigned {
  kDepthCap = 0,
  kBoxExit,
  kStepError,
  kMonotone,
  kMemo,
  kIncumbent,
  kRuleCount,
};

const char* const kRuleNames[kRuleCount] = {
    "depth_cap", "box_exit", "step_error", "monotone_residual", "memoization", "incumbent_bound",
};

std::vector<std::string> rule_names(const bool fired[kRuleCount]) {
  std::vector<std::string> out;
  for (unsigned r = 0; r < kRuleCount; ++r)
    if (fired[r]) out.emplace_back(kRuleNames[r]);
  return out;
}

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

Trajectory simulate(const ProblemSpec& p, const AlgorithmSpec& a,
                    std::span<const StepChoice> schedule, const SearchConfig& cfg,
                    const CostModel& model, std::span<const double> start) {
  validate_config(cfg);
  if (static_cast<int>(schedule.size()) > p.it_max)
    throw std::invalid_argument("schedule longer than it_max");
  std::vector<double> x0 = resolve_start(p, start);
  if (cfg.enforce_box && !in_box(p, x0))
    throw std::invalid_argument("start point lies outside the box");

  Trajectory traj;
  traj.algorithm = a;
  traj.points.push_back(x0);

  double res0;
  try {
    res0 = residual(p, x0);
  } catch (const EvalError&) {
    traj.residuals.push_back(std::numeric_limits<double>::infinity());
    traj.stop_reason = StopReason::StepFailed;
    return traj;
  }
  traj.residuals.push_back(res0);
  if (res0 <= p.epsilon) {
    traj.it_con = 0;
    traj.feasible = true;
    traj.stop_reason = StopReason::Converged;
    return traj;
  }

  const std::optional<double> beta = beta_of(a);
  IterState state = IterState::start(x0);
  traj.stop_reason = StopReason::ScheduleExhausted;

  for (std::size_t k = 0; k < schedule.size(); ++k) {
    std::vector<double> next;
    try {
      if (a.kind == AlgorithmKind::TwoStep) {
        IterState advanced = advance_two_step(p, a.nu, schedule[k], a.beta, state);
        next = advanced.x;
      } else {
        next = advance_single(p, a.nu, schedule[k], state.x);
      }
    } catch (const StepError&) {
      traj.stop_reason = StopReason::StepFailed;
      return traj;
    } catch (const EvalError&) {
      traj.stop_reason = StopReason::StepFailed;
      return traj;
    }
    if (cfg.enforce_box && !in_box(p, next)) {
      traj.stop_reason = StopReason::BoxExit;
      return traj;
    }
    double res;
    try {
      res = residual(p, next);
    } catch (const EvalError&) {
      traj.stop_reason = StopReason::StepFailed;
      return traj;
    }

    const bool counted = res > p.epsilon;
    traj.total_cost += edge_cost(cfg.cost_mode, a.nu, schedule[k], beta, counted, res, model);
    traj.schedule.push_back(schedule[k]);
    traj.counted.push_back(counted);
    state.x_prev = state.x;
    state.x = next;
    traj.points.push_back(std::move(next));
    traj.residuals.push_back(res);

    if (res <= p.epsilon) {
      traj.it_con = static_cast<int>(k) + 1;
      traj.feasible = true;
      traj.stop_reason = StopReason::Converged;
      return traj;
    }
  }
  return traj;
}

double schedule_cost(const Trajectory& traj, const CostModel& model, CostMode mode) {
  const std::optional<double> beta = beta_of(traj.algorithm);
  double total = 0.0;
  for (std::size_t k = 0; k < traj.schedule.size(); ++k)
    total += edge_cost(mode, traj.algorithm.nu, traj.schedule[k], beta, traj.counted[k],
                       traj.residuals[k + 1], model);
  return total;
}

namespace {

/// Uniform-cost tree search over per-iteration step choices for one
/// algorithm. Children of a node share one direction evaluation; a child's
/// x_prev is its parent's x, so states store x only.
class ScheduleSearch {
public:
  ScheduleSearch(const ProblemSpec& p, const AlgorithmSpec& a, const SearchConfig& cfg,
                 const CostModel& model, std::vector<double> start)
      : p_(p),
        a_(a),
        cfg_(cfg),
        model_(model),
        start_(std::move(start)),
        n_(static_cast<std::size_t>(p.n)),
        branching_(2 * (cfg.abar_max + 1)),
        packing_enabled_(branching_ <= 32) {}

  Verdict run() {
    Verdict verdict;
    double res0;
    try {
      res0 = residual(p_, start_);
    } catch (const EvalError&) {
      fired_[kStepError] = true;
      verdict.status = SearchStatus::InfeasibleProven;
      verdict.proof_conditions = rule_names(fired_);
      return verdict;
    }
    if (res0 <= p_.epsilon) {
      verdict.status = SearchStatus::Feasible;
      verdict.best = simulate(p_, a_, {}, cfg_, model_, start_);
      return verdict;
    }

    add_node(start_, 0.0, res0, kNoParent, 0, 0);
    push_entry(Entry{0.0, 0, 0, 0, 0, false});

    while (!frontier_.empty()) {
      Entry e = frontier_.top();
      frontier_.pop();

      if (e.goal) {
        verdict.status = SearchStatus::Feasible;
        verdict.best = reconstruct(e.node);
        verdict.nodes_expanded = nodes_expanded_;
        verdict.proof_conditions = rule_names(fired_);
        return verdict;
      }
      if (incumbent_node_ != kNoParent && e.g >= incumbent_g_) {
        fired_[kIncumbent] = true;
        continue;
      }
      if (cfg_.memoize_states) {
        auto it = memo_.find(memo_key(e.node));
        if (it != memo_.end() && it->second < e.g) {
          fired_[kMemo] = true;
          continue;
        }
      }
      if (nodes_expanded_ >= cfg_.node_budget) {
        verdict.budget_exhausted = true;
        verdict.nodes_expanded = nodes_expanded_;
        if (incumbent_node_ != kNoParent) {
          verdict.status = SearchStatus::Feasible;
          verdict.best = reconstruct(incumbent_node_);
        } else {
          verdict.status = SearchStatus::Unknown;
        }
        verdict.proof_conditions = rule_names(fired_);
        return verdict;
      }
      ++nodes_expanded_;
      expand(e);
    }

    verdict.status = SearchStatus::InfeasibleProven;
    verdict.nodes_expanded = nodes_expanded_;
    verdict.proof_conditions = rule_names(fired_);
    return verdict;
  }

private:
  static constexpr std::uint32_t kNoParent = 0xffffffffu;
  static constexpr int kPackedSteps = 24;  // 12 five-bit steps per word

  struct Meta {
    double g;
    double res;
    std::uint32_t parent;
    std::uint8_t step;
    std::uint16_t depth;
  };

  struct Entry {
    double g;
    std::uint64_t hi;
    std::uint64_t lo;
    std::uint32_t node;
    std::uint16_t depth;
    bool goal;
  };

  struct EntryAfter {
    const ScheduleSearch* search;
    // true when a pops after b
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.g != b.g) return a.g > b.g;
      if (a.depth != b.depth) return a.depth > b.depth;
      if (a.hi != b.hi) return a.hi > b.hi;
      if (a.lo != b.lo) return a.lo > b.lo;
      if (!search->packing_enabled_ || a.depth > kPackedSteps) {
        auto sa = search->steps_of(a.node);
        auto sb = search->steps_of(b.node);
        return std::lexicographical_compare(sb.begin(), sb.end(), sa.begin(), sa.end());
      }
      return false;
    }
  };

  std::span<const double> state_of(std::uint32_t node) const {
    return {states_.data() + static_cast<std::size_t>(node) * n_, n_};
  }

  std::span<const double> prev_state_of(std::uint32_t node) const {
    const Meta& m = meta_[node];
    return m.parent == kNoParent ? state_of(node) : state_of(m.parent);
  }

  std::uint32_t add_node(std::span<const double> x, double g, double res, std::uint32_t parent,
                         std::uint8_t step, std::uint16_t depth) {
    states_.insert(states_.end(), x.begin(), x.end());
    meta_.push_back({g, res, parent, step, depth});
    return static_cast<std::uint32_t>(meta_.size() - 1);
  }

  void push_entry(const Entry& e) { frontier_.push(e); }

  std::vector<std::uint8_t> steps_of(std::uint32_t node) const {
    std::vector<std::uint8_t> steps;
    for (std::uint32_t cur = node; meta_[cur].parent != kNoParent; cur = meta_[cur].parent)
      steps.push_back(meta_[cur].step);
    std::reverse(steps.begin(), steps.end());
    return steps;
  }

  StepChoice step_choice(int step_index) const {
    const int per_sign = cfg_.abar_max + 1;
    return step_index < per_sign ? StepChoice{+1, step_index}
                                 : StepChoice{-1, step_index - per_sign};
  }

  std::uint64_t memo_key(std::uint32_t node) const {
    const double gran = cfg_.memo_granularity;
    auto quantize = [gran](double v) -> std::uint64_t {
      double q = std::nearbyint(v / gran);
      if (q > 9e18) q = 9e18;
      if (q < -9e18) q = -9e18;
      return static_cast<std::uint64_t>(static_cast<std::int64_t>(q));
    };
    std::uint64_t h = splitmix64(meta_[node].depth);
    for (double c : state_of(node)) h = splitmix64(h ^ quantize(c));
    if (a_.kind == AlgorithmKind::TwoStep)
      for (double c : prev_state_of(node)) h = splitmix64(h ^ quantize(c));
    return h;
  }

  void expand(const Entry& e) {
    const Meta m = meta_[e.node];
    // add_node grows states_, so the expansion point must be materialized
    // before any child is stored.
    std::vector<double> y;
    std::vector<double> dir;
    try {
      if (a_.kind == AlgorithmKind::TwoStep)
        y = extrapolate(state_of(e.node), prev_state_of(e.node), a_.beta);
      else
        y.assign(state_of(e.node).begin(), state_of(e.node).end());
      dir = direction(p_, a_.nu, y);
    } catch (const StepError&) {
      fired_[kStepError] = true;
      return;
    } catch (const EvalError&) {
      fired_[kStepError] = true;
      return;
    }

    const std::optional<double> beta = beta_of(a_);
    const std::uint16_t child_depth = static_cast<std::uint16_t>(m.depth + 1);
    std::vector<double> child(n_);

    for (int step_index = 0; step_index < branching_; ++step_index) {
      const StepChoice alpha = step_choice(step_index);
      const double aval = alpha.value();

      bool finite = true;
      for (std::size_t i = 0; i < n_; ++i) {
        child[i] = y[i] + aval * dir[i];
        if (!std::isfinite(child[i])) finite = false;
      }
      if (!finite) {
        fired_[kStepError] = true;
        continue;
      }
      if (cfg_.enforce_box && !in_box(p_, child)) {
        fired_[kBoxExit] = true;
        continue;
      }
      double res;
      try {
        res = residual(p_, child);
      } catch (const EvalError&) {
        fired_[kStepError] = true;
        continue;
      }
      if (cfg_.monotone_residual && !(res < m.res)) {
        fired_[kMonotone] = true;
        continue;
      }

      const bool counted = res > p_.epsilon;
      const bool goal = !counted;
      const double g2 =
          e.g + edge_cost(cfg_.cost_mode, a_.nu, alpha, beta, counted, res, model_);

      if (incumbent_node_ != kNoParent && g2 >= incumbent_g_) {
        fired_[kIncumbent] = true;
        continue;
      }
      if (!goal && child_depth >= p_.it_max) {
        fired_[kDepthCap] = true;
        continue;
      }

      const std::uint32_t id =
          add_node(child, g2, res, e.node, static_cast<std::uint8_t>(step_index), child_depth);

      if (cfg_.memoize_states && !goal) {
        auto [it, inserted] = memo_.try_emplace(memo_key(id), g2);
        if (!inserted) {
          if (it->second <= g2) {
            fired_[kMemo] = true;
            drop_last_node();
            continue;
          }
          it->second = g2;
        }
      }

      Entry c{g2, e.hi, e.lo, id, child_depth, goal};
      if (packing_enabled_ && m.depth < kPackedSteps) {
        const int pos = m.depth;
        const int word = pos / 12;
        const int shift = 64 - 5 * (pos % 12 + 1);
        const std::uint64_t bits = static_cast<std::uint64_t>(step_index) << shift;
        if (word == 0)
          c.hi |= bits;
        else
          c.lo |= bits;
      }
      if (goal) {
        incumbent_g_ = g2;
        incumbent_node_ = id;
      }
      push_entry(c);
    }
  }

  void drop_last_node() {
    meta_.pop_back();
    states_.resize(states_.size() - n_);
  }

  Trajectory reconstruct(std::uint32_t node) {
    std::vector<StepChoice> schedule;
    for (std::uint8_t s : steps_of(node)) schedule.push_back(step_choice(s));
    return simulate(p_, a_, schedule, cfg_, model_, start_);
  }

  const ProblemSpec& p_;
  const AlgorithmSpec& a_;
  const SearchConfig& cfg_;
  const CostModel& model_;
  std::vector<double> start_;
  std::size_t n_;
  int branching_;
  bool packing_enabled_;

  std::vector<double> states_;
  std::vector<Meta> meta_;
  std::priority_queue<Entry, std::vector<Entry>, EntryAfter> frontier_{EntryAfter{this}};
  std::unordered_map<std::uint64_t, double> memo_;

  double incumbent_g_ = 0.0;
  std::uint32_t incumbent_node_ = kNoParent;
  long nodes_expanded_ = 0;
  bool fired_[kRuleCount] = {};
};

}  // namespace

Verdict search_schedule(const ProblemSpec& p, const AlgorithmSpec& a, const SearchConfig& cfg,
                        const CostModel& model, std::span<const double> start) {
  validate_config(cfg);
  validate(model);
  std::vector<double> x0 = resolve_start(p, start);
  if (cfg.enforce_box && !in_box(p, x0))
    throw std::invalid_argument("start point lies outside the box");
  ScheduleSearch search(p, a, cfg, model, std::move(x0));
  return search.run();
}

const char* to_string(SearchStatus status) {
  switch (status) {
    case SearchStatus::Feasible: return "feasible";
    case SearchStatus::InfeasibleProven: return "infeasible_proven";
    default: return "unknown";
  }
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Converged: return "converged";
    case StopReason::ScheduleExhausted: return "schedule_exhausted";
    case StopReason::BoxExit: return "box_exit";
    default: return "step_failed";
  }
}

bool ranks_before(const Verdict& lhs, std::size_t lhs_index, const Verdict& rhs,
                  std::size_t rhs_index) {
  auto status_rank = [](SearchStatus s) {
    switch (s) {
      case SearchStatus::Feasible: return 0;
      case SearchStatus::InfeasibleProven: return 1;
      default: return 2;
    }
  };
  const int ra = status_rank(lhs.status);
  const int rb = status_rank(rhs.status);
  if (ra != rb) return ra < rb;
  if (lhs.status == SearchStatus::Feasible && rhs.status == SearchStatus::Feasible) {
    const double ca = lhs.best->total_cost;
    const double cb = rhs.best->total_cost;
    if (ca != cb) return ca < cb;
  }
  return lhs_index < rhs_index;
}

namespace {

FamilyConfig clamp_family(const ProblemSpec& p, const FamilyConfig& family) {
  FamilyConfig f = family;
  f.j_max = std::min(f.j_max, p.j_max);
  return f;
}

/// Runs `count` independent jobs on up to `workers` threads. Job results are
/// stored by index, so the outcome is identical for any worker count.
template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  const int threads = std::max(1, std::min<int>(workers, static_cast<int>(count)));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(body);
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<Discovery> discover(const ProblemSpec& p, const FamilyConfig& family,
                                const SearchConfig& cfg, const CostModel& model, int workers) {
  validate(p);
  validate(model);
  validate_config(cfg);
  const std::vector<AlgorithmSpec> specs = enumerate_algorithms(clamp_family(p, family));

  std::vector<Discovery> results(specs.size());
  parallel_for(specs.size(), workers, [&](std::size_t i) {
    results[i] = Discovery{specs[i], search_schedule(p, specs[i], cfg, model), i};
  });

  std::sort(results.begin(), results.end(), [](const Discovery& a, const Discovery& b) {
    return ranks_before(a.verdict, a.enumeration_index, b.verdict, b.enumeration_index);
  });
  return results;
}

EnsembleResult ensemble(const ProblemSpec& p, std::span<const std::vector<double>> starts,
                        const FamilyConfig& family, const SearchConfig& cfg,
                        const CostModel& model, std::optional<int> shortlist, int workers) {
  validate(p);
  if (starts.empty()) throw std::invalid_argument("ensemble: at least one start is required");
  for (const auto& s : starts) {
    if (s.size() != static_cast<std::size_t>(p.n))
      throw std::invalid_argument("ensemble: start point has wrong dimension");
    if (!in_box(p, s)) throw std::invalid_argument("ensemble: start point lies outside the box");
  }

  EnsembleResult result;
  result.starts.assign(starts.begin(), starts.end());

  if (shortlist) {
    if (*shortlist < 1) throw std::invalid_argument("ensemble: shortlist must be positive");
    const std::vector<Discovery> base = discover(p, family, cfg, model, workers);
    for (const Discovery& d : base) {
      if (d.verdict.status != SearchStatus::Feasible) break;
      result.algorithms.push_back(d.spec);
      if (static_cast<int>(result.algorithms.size()) == *shortlist) break;
    }
    if (result.algorithms.empty())
      throw std::invalid_argument("ensemble: base run found no feasible algorithm to shortlist");
  } else {
    result.algorithms = enumerate_algorithms(clamp_family(p, family));
  }

  const std::size_t n_algos = result.algorithms.size();
  const std::size_t n_starts = result.starts.size();
  std::vector<Verdict> verdicts(n_algos * n_starts);
  parallel_for(n_algos * n_starts, workers, [&](std::size_t idx) {
    const std::size_t s = idx / n_algos;
    const std::size_t a = idx % n_algos;
    verdicts[idx] = search_schedule(p, result.algorithms[a], cfg, model, result.starts[s]);
  });

  result.per_start.resize(n_starts);
  for (std::size_t s = 0; s < n_starts; ++s) {
    std::vector<std::size_t> order(n_algos);
    for (std::size_t a = 0; a < n_algos; ++a) order[a] = a;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return ranks_before(verdicts[s * n_algos + a], a, verdicts[s * n_algos + b], b);
    });
    for (std::size_t a : order)
      result.per_start[s].emplace_back(a, verdicts[s * n_algos + a]);
  }

  result.aggregate.resize(n_algos);
  for (std::size_t a = 0; a < n_algos; ++a) {
    EnsembleAggregate& agg = result.aggregate[a];
    agg.algorithm_index = a;
    double cost_sum = 0.0;
    for (std::size_t s = 0; s < n_starts; ++s) {
      const Verdict& v = verdicts[s * n_algos + a];
      if (v.status == SearchStatus::Feasible) {
        ++agg.n_feasible;
        cost_sum += v.best->total_cost;
      }
      if (result.per_start[s].front().first == a) ++agg.n_cheapest;
    }
    if (agg.n_feasible > 0) agg.mean_cost = cost_sum / agg.n_feasible;
  }
  return result;
}

}  // namespace algoforge
