#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "algoforge/problem.hpp"

namespace algoforge {

enum class AlgorithmKind : int { SingleStep, TwoStep };

/// Integer exponents over derivative orders j = 0..j_max. nu[j] is the power
/// applied to the j-th derivative in the iteration monomial.
struct ExponentTuple {
  std::vector<int> nu;

  int order_count() const noexcept { return static_cast<int>(nu.size()); }
  int at(int j) const noexcept {
    return j < static_cast<int>(nu.size()) ? nu[static_cast<std::size_t>(j)] : 0;
  }
  /// Highest j with nu[j] != 0; 0 when every exponent is zero.
  int highest_used_order() const noexcept {
    for (int j = static_cast<int>(nu.size()) - 1; j >= 0; --j)
      if (nu[static_cast<std::size_t>(j)] != 0) return j;
    return 0;
  }
  bool operator==(const ExponentTuple&) const = default;
};

/// One per-iteration step-size choice with value sign * 2^-abar.
struct StepChoice {
  int sign = 1;  // +1 or -1
  int abar = 0;  // in [0, abar_max]

  double value() const noexcept { return sign < 0 ? -std::ldexp(1.0, -abar) : std::ldexp(1.0, -abar); }
  bool operator==(const StepChoice&) const = default;
};

/// A member of the algorithm family. The exponent tuple is shared across
/// iterations; beta is the constant extrapolation weight of two-step methods
/// and is unused (zero) for single-step methods.
struct AlgorithmSpec {
  AlgorithmKind kind = AlgorithmKind::SingleStep;
  ExponentTuple nu;
  double beta = 0.0;

  bool operator==(const AlgorithmSpec&) const = default;
};

/// Iteration state. x_prev is meaningful for two-step methods only and
/// equals x at the start (x0 = y0).
struct IterState {
  std::vector<double> x;
  std::vector<double> x_prev;

  static IterState start(std::vector<double> x0) {
    IterState s;
    s.x_prev = x0;
    s.x = std::move(x0);
    return s;
  }
};

struct FamilyConfig {
  AlgorithmKind kind = AlgorithmKind::SingleStep;
  int j_max = 2;
  int k_min = -2;
  int k_max = 2;
  std::vector<double> beta_grid = {0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875};
};

enum class StepErrorKind : std::uint8_t { ZeroBaseNegativePower, SingularMatrix };

/// A monomial direction could not be formed at the current point. The search
/// treats this as "edge not available", not as a failure of the run.
class StepError : public std::runtime_error {
public:
  StepError(StepErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  StepErrorKind kind() const noexcept { return kind_; }

private:
  StepErrorKind kind_;
};

/// Full Cartesian product over the exponent grid (and beta grid for
/// two-step), in deterministic lexicographic order: nu[0] slowest, then
/// nu[1], nu[2], then beta fastest.
std::vector<AlgorithmSpec> enumerate_algorithms(AlgorithmKind kind, int j_max, int k_min, int k_max,
                                                std::span<const double> beta_grid);
std::vector<AlgorithmSpec> enumerate_algorithms(const FamilyConfig& config);

/// The monomial direction d at point x:
///   n = 1:                d = prod_j (f^(j))^nu[j]
///   minimization, n > 1:  d = f^nu[0] * H^nu[2] * (grad f)^{elementwise nu[1]}
///   root-finding, n > 1:  d = J^nu[1] * f^{elementwise nu[0]}
/// Negative matrix powers are realized as successive partial-pivot linear
/// solves. Throws StepError / EvalError when the direction does not exist.
std::vector<double> direction(const ProblemSpec& p, const ExponentTuple& nu,
                              std::span<const double> x);

/// y + alpha * d, validated finite.
std::vector<double> apply_step(std::span<const double> y, StepChoice alpha,
                               std::span<const double> d);

/// x + beta * (x - x_prev); returns x unchanged when beta == 0 so that
/// two-step with beta = 0 matches single-step bit for bit.
std::vector<double> extrapolate(std::span<const double> x, std::span<const double> x_prev,
                                double beta);

std::vector<double> advance_single(const ProblemSpec& p, const ExponentTuple& nu, StepChoice alpha,
                                   std::span<const double> x);

IterState advance_two_step(const ProblemSpec& p, const ExponentTuple& nu, StepChoice alpha,
                           double beta, const IterState& s);

/// Partial-pivot Gaussian elimination on a dense row-major system.
/// Throws StepError(SingularMatrix) when a pivot falls below 1e-12 times the
/// largest row sum of the input matrix.
std::vector<double> solve_linear(std::vector<double> matrix, std::vector<double> rhs);

/// Compact form "nu=(a,b,c);beta=q" used in all reports.
std::string spec_string(const AlgorithmSpec& a);

/// Inverse of spec_string. A missing or zero beta yields a single-step spec
/// (two-step with beta = 0 is the same algorithm).
AlgorithmSpec parse_algorithm(std::string_view text);

}  // namespace algoforge
