#pragma once

#include <map>
#include <optional>

#include "algoforge/family.hpp"

namespace algoforge {

enum class CostMode : int {
  Counted,           ///< only iterations that still violate the tolerance accrue cost
  ResidualWeighted,  ///< every executed iteration accrues residual * iteration term
};

/// Per-iteration cost model: exponent base costs, per-derivative-order
/// weights, step cost abar, and momentum cost beta. Immutable in use; all
/// operations on it are pure.
struct CostModel {
  std::map<int, double> exponent_cost = {{0, 0.0}, {1, 1.0}, {2, 1.5}, {-1, 2.0}, {-2, 3.0}};
  std::map<int, double> order_weight = {{0, 1.0}, {1, 10.0}, {2, 100.0}};

  double step_cost(int abar) const noexcept { return static_cast<double>(abar); }
  double beta_cost(double beta) const noexcept { return beta; }
};

/// Throws std::invalid_argument when the model violates its invariants
/// (exponent_cost[0] must be 0, weights positive, costs nonnegative).
void validate(const CostModel& m);

/// Derivative-usage cost of one counted iteration:
/// sum_j order_weight[j] * exponent_cost[nu[j]].
/// Throws std::out_of_range for exponents outside the table.
double base_cost(const ExponentTuple& nu, const CostModel& m);

/// Cost contribution of a single iteration: 0 when it is uncounted,
/// otherwise abar + base_cost + beta (beta only for two-step methods).
double iteration_cost(const ExponentTuple& nu, StepChoice alpha, std::optional<double> beta,
                      bool counted, const CostModel& m);

/// Cost of one search edge under the selected mode. In Counted mode this is
/// iteration_cost with the child's counted flag; in ResidualWeighted mode it
/// is the child residual times the iteration term.
double edge_cost(CostMode mode, const ExponentTuple& nu, StepChoice alpha,
                 std::optional<double> beta, bool counted, double child_residual,
                 const CostModel& m);

const char* to_string(CostMode mode);

}  // namespace algoforge
