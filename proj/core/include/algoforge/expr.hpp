#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace algoforge {

/// Error raised while parsing an expression string. Carries the byte offset
/// of the offending token in the input.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& message, std::size_t position)
      : std::runtime_error(message + " (at position " + std::to_string(position) + ")"),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

private:
  std::size_t position_;
};

enum class EvalErrorKind : std::uint8_t {
  Domain,    ///< log of a nonpositive value, division by zero
  Overflow,  ///< an intermediate value left the finite range
};

/// Error raised while evaluating an expression at a point.
class EvalError : public std::runtime_error {
public:
  EvalError(EvalErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  EvalErrorKind kind() const noexcept { return kind_; }

private:
  EvalErrorKind kind_;
};

/// Zeroth, first and second derivatives of a scalar expression at a point.
/// The Hessian is stored dense row-major and is exactly symmetric: both
/// triangles are written from the same propagated entry.
struct Taylor2 {
  double value = 0.0;
  std::vector<double> gradient;
  std::vector<double> hessian;

  std::size_t n() const noexcept { return gradient.size(); }
  double hess(std::size_t i, std::size_t j) const { return hessian[i * n() + j]; }
};

/// A parsed scalar expression over variables x1..xn (alias `x` when n == 1).
///
/// The expression is compiled to a flat instruction tape at parse time.
/// Plain evaluation and second-order forward-mode evaluation walk the same
/// tape and perform the value arithmetic in the same order, so
/// eval(p) == eval_taylor2(p).value bit for bit.
///
/// Expressions are immutable after parse; concurrent evaluation from
/// multiple threads needs no synchronization.
class Expression {
public:
  Expression() = default;

  /// Grammar: numbers, variables, + - * /, unary -, integer-constant ^
  /// (|exponent| <= 16, expanded to repeated multiplication), calls
  /// exp/log/sin/cos, parentheses, standard precedence.
  static Expression parse(std::string_view text, int n_vars);

  int n_vars() const noexcept { return n_vars_; }
  const std::string& text() const noexcept { return text_; }
  bool empty() const noexcept { return tape_.empty(); }

  /// Throws EvalError on domain violations or non-finite intermediates.
  double eval(std::span<const double> point) const;

  /// Value, gradient and Hessian by forward-mode propagation of
  /// (value, gradient, lower Hessian triangle) per tape instruction.
  Taylor2 eval_taylor2(std::span<const double> point) const;

  /// First-order pass: writes the gradient into grad_out (length n_vars)
  /// and returns the value. Bits match the eval_taylor2 value and gradient.
  double eval_grad(std::span<const double> point, std::span<double> grad_out) const;

private:
  enum class Op : std::uint8_t { Const, Var, Add, Sub, Mul, Div, Neg, Exp, Log, Sin, Cos };

  struct Instr {
    Op op;
    std::int32_t a = -1;  // operand slot, or variable index for Var
    std::int32_t b = -1;
    double value = 0.0;   // Const payload
  };

  friend class ExpressionParser;

  std::vector<Instr> tape_;
  int n_vars_ = 0;
  std::string text_;
};

Expression parse(std::string_view text, int n_vars);
double eval(const Expression& e, std::span<const double> point);
Taylor2 eval_taylor2(const Expression& e, std::span<const double> point);

}  // namespace algoforge
