#include "algoforge/cost.hpp"

#include <stdexcept>

namespace algoforge {

void validate(const CostModel& m) {
  auto it = m.exponent_cost.find(0);
  if (it == m.exponent_cost.end() || it->second != 0.0)
    throw std::invalid_argument("cost model: exponent_cost[0] must be 0");
  for (const auto& [k, c] : m.exponent_cost)
    if (c < 0.0) throw std::invalid_argument("cost model: exponent costs must be nonnegative");
  if (m.order_weight.empty())
    throw std::invalid_argument("cost model: order_weight must not be empty");
  for (const auto& [j, w] : m.order_weight) {
    if (j < 0) throw std::invalid_argument("cost model: derivative orders must be nonnegative");
    if (w <= 0.0) throw std::invalid_argument("cost model: order weights must be positive");
  }
}

double base_cost(const ExponentTuple& nu, const CostModel& m) {
  double total = 0.0;
  for (int j = 0; j < nu.order_count(); ++j) {
    auto cost = m.exponent_cost.find(nu.at(j));
    if (cost == m.exponent_cost.end())
      throw std::out_of_range("cost model: no cost for exponent " + std::to_string(nu.at(j)));
    auto weight = m.order_weight.find(j);
    if (weight == m.order_weight.end())
      throw std::out_of_range("cost model: no weight for derivative order " + std::to_string(j));
    total += weight->second * cost->second;
  }
  return total;
}

double iteration_cost(const ExponentTuple& nu, StepChoice alpha, std::optional<double> beta,
                      bool counted, const CostModel& m) {
  if (!counted) return 0.0;
  double total = m.step_cost(alpha.abar) + base_cost(nu, m);
  if (beta) total += m.beta_cost(*beta);
  return total;
}

double edge_cost(CostMode mode, const ExponentTuple& nu, StepChoice alpha,
                 std::optional<double> beta, bool counted, double child_residual,
                 const CostModel& m) {
  if (mode == CostMode::Counted) return iteration_cost(nu, alpha, beta, counted, m);
  double term = m.step_cost(alpha.abar) + base_cost(nu, m);
  if (beta) term += m.beta_cost(*beta);
  return child_residual * term;
}

const char* to_string(CostMode mode) {
  return mode == CostMode::Counted ? "counted" : "residual-weighted";
}

}  // namespace algoforge
