#include "algoforge/family.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace algoforge {

namespace {

[[noreturn]] void throw_zero_base() {
  throw StepError(StepErrorKind::ZeroBaseNegativePower, "zero base raised to a negative power");
}

void check_finite(std::span<const double> v) {
  for (double c : v)
    if (!std::isfinite(c)) throw EvalError(EvalErrorKind::Overflow, "non-finite iterate component");
}

// b^k for integer k by repeated multiplication; k < 0 inverts the positive
// power and requires b != 0.
double scalar_power(double b, int k) {
  if (k == 0) return 1.0;
  if (b == 0.0 && k < 0) throw_zero_base();
  double r = b;
  for (int i = 1; i < std::abs(k); ++i) r *= b;
  return k < 0 ? 1.0 / r : r;
}

void elementwise_power_inplace(std::vector<double>& v, int k) {
  for (double& c : v) c = scalar_power(c, k);
}

// w <- A^k w, with negative k as |k| successive solves.
void apply_matrix_power(const std::vector<double>& matrix, int k, std::vector<double>& w) {
  const std::size_t n = w.size();
  for (int rep = 0; rep < std::abs(k); ++rep) {
    if (k > 0) {
      std::vector<double> out(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out[i] += matrix[i * n + j] * w[j];
      w = std::move(out);
    } else {
      w = solve_linear(matrix, w);
    }
  }
}

}  // namespace

std::vector<double> solve_linear(std::vector<double> matrix, std::vector<double> rhs) {
  const std::size_t n = rhs.size();
  double max_row_norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += std::fabs(matrix[i * n + j]);
    max_row_norm = std::max(max_row_norm, row);
  }
  const double pivot_floor = 1e-12 * max_row_norm;
  if (max_row_norm == 0.0)
    throw StepError(StepErrorKind::SingularMatrix, "zero matrix in linear solve");

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(matrix[r * n + col]) > std::fabs(matrix[pivot * n + col])) pivot = r;
    if (std::fabs(matrix[pivot * n + col]) < pivot_floor)
      throw StepError(StepErrorKind::SingularMatrix, "singular matrix in linear solve");
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(matrix[pivot * n + j], matrix[col * n + j]);
      std::swap(rhs[pivot], rhs[col]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      double factor = matrix[r * n + col] / matrix[col * n + col];
      if (factor == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) matrix[r * n + j] -= factor * matrix[col * n + j];
      rhs[r] -= factor * rhs[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double acc = rhs[i];
    for (std::size_t j = i + 1; j < n; ++j) acc -= matrix[i * n + j] * x[j];
    x[i] = acc / matrix[i * n + i];
  }
  check_finite(x);
  return x;
}

std::vector<AlgorithmSpec> enumerate_algorithms(AlgorithmKind kind, int j_max, int k_min, int k_max,
                                                std::span<const double> beta_grid) {
  if (j_max < 1 || j_max > 2) throw std::invalid_argument("enumerate_algorithms: j_max must be 1 or 2");
  if (k_min > k_max) throw std::invalid_argument("enumerate_algorithms: empty exponent grid");
  if (kind == AlgorithmKind::TwoStep && beta_grid.empty())
    throw std::invalid_argument("enumerate_algorithms: empty beta grid");

  std::vector<AlgorithmSpec> out;
  std::vector<int> nu(static_cast<std::size_t>(j_max) + 1, k_min);
  for (;;) {
    if (kind == AlgorithmKind::SingleStep) {
      out.push_back({AlgorithmKind::SingleStep, ExponentTuple{nu}, 0.0});
    } else {
      for (double beta : beta_grid) out.push_back({AlgorithmKind::TwoStep, ExponentTuple{nu}, beta});
    }
    // advance the odometer; nu[0] is the slowest digit
    int j = j_max;
    while (j >= 0 && nu[static_cast<std::size_t>(j)] == k_max) {
      nu[static_cast<std::size_t>(j)] = k_min;
      --j;
    }
    if (j < 0) break;
    ++nu[static_cast<std::size_t>(j)];
  }
  return out;
}

std::vector<AlgorithmSpec> enumerate_algorithms(const FamilyConfig& config) {
  return enumerate_algorithms(config.kind, config.j_max, config.k_min, config.k_max,
                              config.beta_grid);
}

std::vector<double> direction(const ProblemSpec& p, const ExponentTuple& nu,
                              std::span<const double> x) {
  if (nu.highest_used_order() > p.j_max)
    throw std::invalid_argument("direction: exponent tuple uses derivatives beyond j_max");

  const std::size_t n = static_cast<std::size_t>(p.n);

  if (p.n == 1) {
    Taylor2 t = p.exprs[0].eval_taylor2(x);
    const double derivs[3] = {t.value, t.gradient[0], t.hess(0, 0)};
    double d = 1.0;
    for (int j = 0; j < 3; ++j)
      if (nu.at(j) != 0) d *= scalar_power(derivs[j], nu.at(j));
    std::vector<double> out = {d};
    check_finite(out);
    return out;
  }

  if (p.kind == ProblemKind::Minimization) {
    Taylor2 t = p.exprs[0].eval_taylor2(x);
    std::vector<double> w(n, 1.0);
    if (nu.at(1) != 0) {
      w = t.gradient;
      elementwise_power_inplace(w, nu.at(1));
    }
    if (nu.at(2) != 0) apply_matrix_power(t.hessian, nu.at(2), w);
    if (nu.at(0) != 0) {
      double s = scalar_power(t.value, nu.at(0));
      for (double& c : w) c *= s;
    }
    check_finite(w);
    return w;
  }

  // Root-finding system: values and Jacobian rows, one expression per row.
  std::vector<double> values(n);
  std::vector<double> jac(n * n);
  bool need_jacobian = nu.at(1) != 0;
  for (std::size_t i = 0; i < n; ++i) {
    Taylor2 t = p.exprs[i].eval_taylor2(x);
    values[i] = t.value;
    if (need_jacobian)
      for (std::size_t j = 0; j < n; ++j) jac[i * n + j] = t.gradient[j];
  }
  std::vector<double> w(n, 1.0);
  if (nu.at(0) != 0) {
    w = std::move(values);
    elementwise_power_inplace(w, nu.at(0));
  }
  if (need_jacobian) apply_matrix_power(jac, nu.at(1), w);
  check_finite(w);
  return w;
}

std::vector<double> apply_step(std::span<const double> y, StepChoice alpha,
                               std::span<const double> d) {
  const double a = alpha.value();
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] + a * d[i];
  check_finite(out);
  return out;
}

std::vector<double> extrapolate(std::span<const double> x, std::span<const double> x_prev,
                                double beta) {
  if (beta == 0.0) return std::vector<double>(x.begin(), x.end());
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + beta * (x[i] - x_prev[i]);
  check_finite(y);
  return y;
}

std::vector<double> advance_single(const ProblemSpec& p, const ExponentTuple& nu, StepChoice alpha,
                                   std::span<const double> x) {
  return apply_step(x, alpha, direction(p, nu, x));
}

IterState advance_two_step(const ProblemSpec& p, const ExponentTuple& nu, StepChoice alpha,
                           double beta, const IterState& s) {
  std::vector<double> y = extrapolate(s.x, s.x_prev, beta);
  IterState next;
  next.x = apply_step(y, alpha, direction(p, nu, y));
  next.x_prev = s.x;
  return next;
}

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  out.append(buf, ptr);
}

}  // namespace

std::string spec_string(const AlgorithmSpec& a) {
  std::string out = "nu=(";
  for (std::size_t j = 0; j < a.nu.nu.size(); ++j) {
    if (j) out += ',';
    out += std::to_string(a.nu.nu[j]);
  }
  out += ");beta=";
  append_double(out, a.beta);
  return out;
}

AlgorithmSpec parse_algorithm(std::string_view text) {
  auto fail = [&] {
    throw std::invalid_argument("malformed algorithm spec: " + std::string(text));
  };
  AlgorithmSpec a;
  std::string_view rest = text;
  if (!rest.starts_with("nu=(")) fail();
  rest.remove_prefix(4);
  for (;;) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), v);
    if (ec != std::errc{}) fail();
    a.nu.nu.push_back(v);
    rest.remove_prefix(static_cast<std::size_t>(ptr - rest.data()));
    if (rest.starts_with(",")) {
      rest.remove_prefix(1);
      continue;
    }
    if (rest.starts_with(")")) {
      rest.remove_prefix(1);
      break;
    }
    fail();
  }
  if (rest.empty()) {
    a.kind = AlgorithmKind::SingleStep;
    return a;
  }
  if (!rest.starts_with(";beta=")) fail();
  rest.remove_prefix(6);
  double beta = 0.0;
  auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), beta);
  if (ec != std::errc{} || ptr != rest.data() + rest.size()) fail();
  if (beta < 0.0 || beta >= 1.0) fail();
  a.beta = beta;
  a.kind = beta == 0.0 ? AlgorithmKind::SingleStep : AlgorithmKind::TwoStep;
  return a;
}

}  // namespace algoforge
