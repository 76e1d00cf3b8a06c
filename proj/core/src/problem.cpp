#include "algoforge/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace algoforge {

void validate(const ProblemSpec& p) {
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument("problem '" + p.name + "': " + what);
  };
  if (p.n < 1) fail("dimension must be positive");
  if (p.epsilon <= 0.0) fail("epsilon must be positive");
  if (p.it_max < 1) fail("it_max must be at least 1");
  if (p.j_max != 1 && p.j_max != 2) fail("j_max must be 1 or 2");
  if (p.kind == ProblemKind::RootFinding && p.n > 1 && p.j_max > 1)
    fail("j_max must be 1 for root-finding systems with n > 1");

  const std::size_t want = p.kind == ProblemKind::RootFinding ? static_cast<std::size_t>(p.n) : 1u;
  if (p.exprs.size() != want) fail("wrong number of expressions for problem kind");
  for (const Expression& e : p.exprs)
    if (e.n_vars() != p.n) fail("expression arity differs from problem dimension");

  if (p.box_lo.size() != static_cast<std::size_t>(p.n) ||
      p.box_hi.size() != static_cast<std::size_t>(p.n))
    fail("box bounds must have length n");
  for (int i = 0; i < p.n; ++i) {
    if (!std::isfinite(p.box_lo[i]) || !std::isfinite(p.box_hi[i])) fail("box bounds must be finite");
    if (!(p.box_lo[i] < p.box_hi[i])) fail("box_lo must be strictly below box_hi");
  }

  if (p.initial_points.empty()) fail("at least one initial point is required");
  for (const auto& x0 : p.initial_points) {
    if (x0.size() != static_cast<std::size_t>(p.n)) fail("initial point has wrong dimension");
    if (!in_box(p, x0)) fail("initial point lies outside the box");
  }
}

double residual(const ProblemSpec& p, std::span<const double> x) {
  double res = 0.0;
  if (p.kind == ProblemKind::RootFinding) {
    for (const Expression& e : p.exprs) {
      double v = std::fabs(e.eval(x));
      if (v > res) res = v;
    }
  } else {
    thread_local std::vector<double> grad;
    grad.resize(static_cast<std::size_t>(p.n));
    p.exprs[0].eval_grad(x, grad);
    for (double g : grad) {
      double v = std::fabs(g);
      if (v > res) res = v;
    }
  }
  return res;
}

bool in_box(const ProblemSpec& p, std::span<const double> x) {
  for (int i = 0; i < p.n; ++i)
    if (x[i] < p.box_lo[i] || x[i] > p.box_hi[i]) return false;
  return true;
}

const char* to_string(ProblemKind kind) {
  return kind == ProblemKind::RootFinding ? "root_finding" : "minimization";
}

namespace {

ProblemSpec make_1d(ProblemKind kind, const char* name, const char* expr, double lo, double hi,
                    double x0, int it_max = 10, int j_max = 2) {
  ProblemSpec p;
  p.kind = kind;
  p.n = 1;
  p.exprs.push_back(Expression::parse(expr, 1));
  p.box_lo = {lo};
  p.box_hi = {hi};
  p.initial_points = {{x0}};
  p.it_max = it_max;
  p.j_max = j_max;
  p.name = name;
  return p;
}

ProblemSpec make_2d(ProblemKind kind, const char* name, std::vector<const char*> exprs, double lo,
                    double hi, std::vector<double> x0, int it_max, int j_max) {
  ProblemSpec p;
  p.kind = kind;
  p.n = 2;
  for (const char* e : exprs) p.exprs.push_back(Expression::parse(e, 2));
  p.box_lo = {lo, lo};
  p.box_hi = {hi, hi};
  p.initial_points = {std::move(x0)};
  p.it_max = it_max;
  p.j_max = j_max;
  p.name = name;
  return p;
}

}  // namespace

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {
      "cubic_root",   "xexp_root",          "quartic_min",
      "rosenbrock_min", "system2d",         "strongly_convex_1d",
      "quad_2d",      "expquad_2d",         "expquad_2d_literal",
  };
  return names;
}

ProblemSpec builtin(const std::string& name) {
  ProblemSpec p;
  if (name == "cubic_root") {
    p = make_1d(ProblemKind::RootFinding, "cubic_root", "x^3-1", -2, 2, 0.1);
  } else if (name == "xexp_root") {
    p = make_1d(ProblemKind::RootFinding, "xexp_root", "x*exp(x)-1", -2, 2, 0.1);
  } else if (name == "quartic_min") {
    p = make_1d(ProblemKind::Minimization, "quartic_min", "x^4+x^3-x^2-1", -2, 2, 0.1);
  } else if (name == "rosenbrock_min") {
    p = make_2d(ProblemKind::Minimization, "rosenbrock_min", {"100*(x2-x1^2)^2+(1-x1)^2"}, -2, 2,
                {0.7, 0.75}, 20, 2);
  } else if (name == "system2d") {
    // Second derivatives are unavailable for this system: j_max = 1.
    p = make_2d(ProblemKind::RootFinding, "system2d", {"x2-x1^2", "5*x2-exp(x1)"}, -2, 2,
                {0.1, 0.1}, 10, 1);
  } else if (name == "strongly_convex_1d") {
    p = make_1d(ProblemKind::Minimization, "strongly_convex_1d", "exp(x)+x^2", -2, 2, 0.1);
  } else if (name == "quad_2d") {
    p = make_2d(ProblemKind::Minimization, "quad_2d", {"(x1-1)^2+2*x2^2-x1*x2"}, -1, 2, {-1, -1},
                20, 2);
  } else if (name == "expquad_2d") {
    p = make_2d(ProblemKind::Minimization, "expquad_2d", {"exp(x1)+x1^2+exp(x2)+x2^2+x1*x2"}, -1,
                1, {0.5, 0.5}, 20, 2);
  } else if (name == "expquad_2d_literal") {
    // Same objective with the x1^2 term doubled instead of one per variable.
    p = make_2d(ProblemKind::Minimization, "expquad_2d_literal",
                {"exp(x1)+x1^2+exp(x2)+x1^2+x1*x2"}, -1, 1, {0.5, 0.5}, 20, 2);
  } else {
    throw std::invalid_argument("unknown preset problem: " + name);
  }
  validate(p);
  return p;
}

}  // namespace algoforge
