#pragma once

#include <span>
#include <string>
#include <vector>

#include "algoforge/expr.hpp"

namespace algoforge {

enum class ProblemKind : int { RootFinding, Minimization };

/// The task an algorithm has to solve: a square nonlinear system f(x)=0 or a
/// scalar minimization, with a closed box domain, starting points, residual
/// tolerance and an iteration cap. Immutable after construction; safe for
/// shared concurrent reads.
struct ProblemSpec {
  ProblemKind kind = ProblemKind::Minimization;
  int n = 1;
  std::vector<Expression> exprs;  // n equations, or one objective
  std::vector<double> box_lo;
  std::vector<double> box_hi;
  std::vector<std::vector<double>> initial_points;
  double epsilon = 1e-3;
  int it_max = 10;
  int j_max = 2;  // highest derivative order available
  std::string name;
};

/// Throws std::invalid_argument when an invariant is violated.
void validate(const ProblemSpec& p);

/// Infinity norm of the convergence residual: max_i |f_i(x)| for
/// root-finding, max_i |df/dx_i| for minimization. Propagates EvalError.
double residual(const ProblemSpec& p, std::span<const double> x);

/// Closed-box membership (boundary counts as inside).
bool in_box(const ProblemSpec& p, std::span<const double> x);

/// Named preset problems. Throws std::invalid_argument for unknown names.
ProblemSpec builtin(const std::string& name);

const std::vector<std::string>& builtin_names();

const char* to_string(ProblemKind kind);

}  // namespace algoforge
