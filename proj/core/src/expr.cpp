#include "algoforge/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>

namespace algoforge {

namespace {

constexpr int kMaxPowMagnitude = 16;

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

/// Recursive-descent parser emitting a flat SSA tape.
class ExpressionParser {
public:
  ExpressionParser(std::string_view text, int n_vars, Expression& out)
      : text_(text), n_vars_(n_vars), out_(out) {}

  void run() {
    if (n_vars_ < 1) throw ParseError("n_vars must be positive", 0);
    skip_ws();
    if (eof()) throw ParseError("empty expression", pos_);
    parse_sum();
    skip_ws();
    if (!eof()) throw ParseError("unexpected trailing input", pos_);
  }

private:
  using Op = Expression::Op;

  std::int32_t emit(Op op, std::int32_t a = -1, std::int32_t b = -1, double value = 0.0) {
    out_.tape_.push_back({op, a, b, value});
    return static_cast<std::int32_t>(out_.tape_.size() - 1);
  }

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return eof() ? '\0' : text_[pos_]; }
  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (!eof() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c, const char* what) {
    if (!accept(c)) throw ParseError(std::string("expected ") + what, pos_);
  }

  std::int32_t parse_sum() {
    std::int32_t lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        std::int32_t rhs = parse_term();
        lhs = emit(Op::Add, lhs, rhs);
      } else if (accept('-')) {
        std::int32_t rhs = parse_term();
        lhs = emit(Op::Sub, lhs, rhs);
      } else {
        return lhs;
      }
    }
  }

  std::int32_t parse_term() {
    std::int32_t lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        std::int32_t rhs = parse_unary();
        lhs = emit(Op::Mul, lhs, rhs);
      } else if (accept('/')) {
        std::int32_t rhs = parse_unary();
        lhs = emit(Op::Div, lhs, rhs);
      } else {
        return lhs;
      }
    }
  }

  std::int32_t parse_unary() {
    if (accept('-')) return emit(Op::Neg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  std::int32_t parse_power() {
    std::int32_t base = parse_primary();
    skip_ws();
    if (!accept('^')) return base;
    int k = parse_int_exponent();
    return expand_power(base, k);
  }

  // ^ takes an integer constant only; |k| <= 16. Negative exponents become
  // 1/(base^|k|), positive ones a left fold of multiplications so the base
  // subtree is evaluated once.
  std::int32_t expand_power(std::int32_t base, int k) {
    if (k == 0) return emit(Op::Const, -1, -1, 1.0);
    std::int32_t p = base;
    for (int i = 1; i < std::abs(k); ++i) p = emit(Op::Mul, p, base);
    if (k < 0) {
      std::int32_t one = emit(Op::Const, -1, -1, 1.0);
      p = emit(Op::Div, one, p);
    }
    return p;
  }

  int parse_int_exponent() {
    skip_ws();
    bool parenthesized = accept('(');
    skip_ws();
    bool negative = accept('-');
    skip_ws();
    std::size_t start = pos_;
    while (!eof() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start)
      throw ParseError("exponent of ^ must be an integer constant", start);
    if (!eof() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E'))
      throw ParseError("exponent of ^ must be an integer constant", start);
    int k = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, k);
    (void)ptr;
    if (ec != std::errc{} || k > kMaxPowMagnitude)
      throw ParseError("exponent magnitude exceeds 16", start);
    if (parenthesized) expect(')', "')' after exponent");
    return negative ? -k : k;
  }

  std::int32_t parse_primary() {
    skip_ws();
    if (eof()) throw ParseError("unexpected end of expression", pos_);
    char c = peek();
    if (c == '(') {
      ++pos_;
      std::int32_t inner = parse_sum();
      expect(')', "')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (is_ident_start(c)) return parse_identifier();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  std::int32_t parse_number() {
    std::size_t start = pos_;
    while (!eof() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    if (!eof() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_++;
      if (!eof() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (eof() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        pos_ = mark;  // the 'e' belongs to an identifier such as `exp`
      } else {
        while (!eof() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc{} || ptr != text_.data() + pos_)
      throw ParseError("malformed number", start);
    return emit(Op::Const, -1, -1, value);
  }

  std::int32_t parse_identifier() {
    std::size_t start = pos_;
    while (!eof() && is_ident_char(text_[pos_])) ++pos_;
    std::string_view name = text_.substr(start, pos_ - start);

    if (name == "exp" || name == "log" || name == "sin" || name == "cos") {
      expect('(', "'(' after function name");
      std::int32_t arg = parse_sum();
      expect(')', "')'");
      Op op = name == "exp" ? Op::Exp : name == "log" ? Op::Log : name == "sin" ? Op::Sin : Op::Cos;
      return emit(op, arg);
    }

    if (name == "x") {
      if (n_vars_ != 1)
        throw ParseError("variable alias 'x' is only valid for single-variable expressions", start);
      return emit(Op::Var, 0);
    }
    if (name.size() >= 2 && name[0] == 'x') {
      int index = 0;
      auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), index);
      if (ec == std::errc{} && ptr == name.data() + name.size()) {
        if (index < 1 || index > n_vars_)
          throw ParseError("variable index out of range: " + std::string(name), start);
        return emit(Op::Var, index - 1);
      }
    }
    throw ParseError("unknown identifier: " + std::string(name), start);
  }

  std::string_view text_;
  int n_vars_;
  Expression& out_;
  std::size_t pos_ = 0;
};

Expression Expression::parse(std::string_view text, int n_vars) {
  Expression e;
  e.n_vars_ = n_vars;
  e.text_ = std::string(text);
  ExpressionParser(text, n_vars, e).run();
  return e;
}

namespace {

[[noreturn]] void throw_domain(const char* what) { throw EvalError(EvalErrorKind::Domain, what); }
[[noreturn]] void throw_overflow() {
  throw EvalError(EvalErrorKind::Overflow, "non-finite intermediate value");
}

}  // namespace

double Expression::eval(std::span<const double> point) const {
  if (static_cast<int>(point.size()) != n_vars_)
    throw std::invalid_argument("eval: point dimension mismatch");
  thread_local std::vector<double> stack;
  stack.resize(tape_.size());
  for (std::size_t i = 0; i < tape_.size(); ++i) {
    const Instr& in = tape_[i];
    double r;
    switch (in.op) {
      case Op::Const: r = in.value; break;
      case Op::Var: r = point[static_cast<std::size_t>(in.a)]; break;
      case Op::Add: r = stack[in.a] + stack[in.b]; break;
      case Op::Sub: r = stack[in.a] - stack[in.b]; break;
      case Op::Mul: r = stack[in.a] * stack[in.b]; break;
      case Op::Div: {
        double den = stack[in.b];
        if (den == 0.0) throw_domain("division by zero");
        r = stack[in.a] / den;
        break;
      }
      case Op::Neg: r = -stack[in.a]; break;
      case Op::Exp: r = std::exp(stack[in.a]); break;
      case Op::Log: {
        double v = stack[in.a];
        if (v <= 0.0) throw_domain("log of nonpositive value");
        r = std::log(v);
        break;
      }
      case Op::Sin: r = std::sin(stack[in.a]); break;
      case Op::Cos: r = std::cos(stack[in.a]); break;
      default: r = 0.0; break;
    }
    if (!std::isfinite(r)) throw_overflow();
    stack[i] = r;
  }
  return stack.back();
}

// Forward-mode slots: [value, g_1..g_n, h_11, h_21, h_22, h_31, ...] with the
// Hessian as a packed lower triangle. Value arithmetic mirrors eval() exactly.
Taylor2 Expression::eval_taylor2(std::span<const double> point) const {
  const std::size_t n = static_cast<std::size_t>(n_vars_);
  if (point.size() != n) throw std::invalid_argument("eval_taylor2: point dimension mismatch");
  const std::size_t tri = n * (n + 1) / 2;
  const std::size_t stride = 1 + n + tri;

  thread_local std::vector<double> ws;
  ws.assign(tape_.size() * stride, 0.0);

  for (std::size_t idx = 0; idx < tape_.size(); ++idx) {
    const Instr& in = tape_[idx];
    double* out = ws.data() + idx * stride;
    const double* a = in.a >= 0 ? ws.data() + static_cast<std::size_t>(in.a) * stride : nullptr;
    const double* b = in.b >= 0 ? ws.data() + static_cast<std::size_t>(in.b) * stride : nullptr;
    double* og = out + 1;
    double* oh = out + 1 + n;
    const double* ag = a ? a + 1 : nullptr;
    const double* ah = a ? a + 1 + n : nullptr;
    const double* bg = b ? b + 1 : nullptr;
    const double* bh = b ? b + 1 + n : nullptr;

    switch (in.op) {
      case Op::Const:
        out[0] = in.value;
        break;
      case Op::Var:
        out[0] = point[static_cast<std::size_t>(in.a)];
        og[static_cast<std::size_t>(in.a)] = 1.0;
        break;
      case Op::Add:
        out[0] = a[0] + b[0];
        for (std::size_t i = 0; i < n; ++i) og[i] = ag[i] + bg[i];
        for (std::size_t t = 0; t < tri; ++t) oh[t] = ah[t] + bh[t];
        break;
      case Op::Sub:
        out[0] = a[0] - b[0];
        for (std::size_t i = 0; i < n; ++i) og[i] = ag[i] - bg[i];
        for (std::size_t t = 0; t < tri; ++t) oh[t] = ah[t] - bh[t];
        break;
      case Op::Mul: {
        out[0] = a[0] * b[0];
        for (std::size_t i = 0; i < n; ++i) og[i] = ag[i] * b[0] + a[0] * bg[i];
        std::size_t t = 0;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j <= i; ++j, ++t)
            oh[t] = ah[t] * b[0] + ag[i] * bg[j] + ag[j] * bg[i] + a[0] * bh[t];
        break;
      }
      case Op::Div: {
        double den = b[0];
        if (den == 0.0) throw_domain("division by zero");
        out[0] = a[0] / den;
        for (std::size_t i = 0; i < n; ++i) og[i] = (ag[i] - out[0] * bg[i]) / den;
        std::size_t t = 0;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j <= i; ++j, ++t)
            oh[t] = (ah[t] - out[0] * bh[t] - og[i] * bg[j] - og[j] * bg[i]) / den;
        break;
      }
      case Op::Neg:
        out[0] = -a[0];
        for (std::size_t i = 0; i < n; ++i) og[i] = -ag[i];
        for (std::size_t t = 0; t < tri; ++t) oh[t] = -ah[t];
        break;
      case Op::Exp: {
        double w = std::exp(a[0]);
        out[0] = w;
        for (std::size_t i = 0; i < n; ++i) og[i] = w * ag[i];
        std::size_t t = 0;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j <= i; ++j, ++t) oh[t] = w * (ah[t] + ag[i] * ag[j]);
        break;
      }
      case Op::Log: {
        double v = a[0];
        if (v <= 0.0) throw_domain("log of nonpositive value");
        out[0] = std::log(v);
        for (std::size_t i = 0; i < n; ++i) og[i] = ag[i] / v;
        std::size_t t = 0;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j <= i; ++j, ++t) oh[t] = (ah[t] - og[i] * ag[j]) / v;
        break;
      }
      case Op::Sin: {
        double s = std::sin(a[0]);
        double c = std::cos(a[0]);
        out[0] = s;
        for (std::size_t i = 0; i < n; ++i) og[i] = c * ag[i];
        std::size_t t = 0;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j <= i; ++j, ++t) oh[t] = c * ah[t] - s * ag[i] * ag[j];
        break;
      }
      case Op::Cos: {
        double s = std::sin(a[0]);
        double c = std::cos(a[0]);
        out[0] = c;
        for (std::size_t i = 0; i < n; ++i) og[i] = -s * ag[i];
        std::size_t t = 0;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j <= i; ++j, ++t) oh[t] = -s * ah[t] - c * ag[i] * ag[j];
        break;
      }
    }
    for (std::size_t k = 0; k < stride; ++k)
      if (!std::isfinite(out[k])) throw_overflow();
  }

  const double* last = ws.data() + (tape_.size() - 1) * stride;
  Taylor2 result;
  result.value = last[0];
  result.gradient.assign(last + 1, last + 1 + n);
  result.hessian.assign(n * n, 0.0);
  std::size_t t = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j, ++t) {
      result.hessian[i * n + j] = last[1 + n + t];
      result.hessian[j * n + i] = last[1 + n + t];
    }
  return result;
}

// Same propagation restricted to (value, gradient). The Hessian rows never
// feed back into lower orders, so values and gradients match eval_taylor2
// bit for bit.
double Expression::eval_grad(std::span<const double> point, std::span<double> grad_out) const {
  const std::size_t n = static_cast<std::size_t>(n_vars_);
  if (point.size() != n || grad_out.size() != n)
    throw std::invalid_argument("eval_grad: dimension mismatch");
  const std::size_t stride = 1 + n;

  thread_local std::vector<double> ws;
  ws.assign(tape_.size() * stride, 0.0);

  for (std::size_t idx = 0; idx < tape_.size(); ++idx) {
    const Instr& in = tape_[idx];
    double* out = ws.data() + idx * stride;
    const double* a = in.a >= 0 ? ws.data() + static_cast<std::size_t>(in.a) * stride : nullptr;
    const double* b = in.b >= 0 ? ws.data() + static_cast<std::size_t>(in.b) * stride : nullptr;
    double* og = out + 1;
    const double* ag = a ? a + 1 : nullptr;
    const double* bg = b ? b + 1 : nullptr;

    switch (in.op) {
      case Op::Const:
        out[0] = in.value;
        break;
      case Op::Var:
        out[0] = point[static_cast<std::size_t>(in.a)];
        og[static_cast<std::size_t>(in.a)] = 1.0;
        break;
      case Op::Add:
        out[0] = a[0] + b[0];
        for (std::size_t i = 0; i < n; ++i) og[i] = ag[i] + bg[i];
        break;
      case Op::Sub:
        out[0] = a[0] - b[0];
        for (std::size_t i = 0; i < n; ++i) og[i] = ag[i] - bg[i];
        break;
      case Op::Mul:
        out[0] = a[0] * b[0];
        for (std::size_t i = 0; i < n; ++i) og[i] = ag[i] * b[0] + a[0] * bg[i];
        break;
      case Op::Div: {
        double den = b[0];
        if (den == 0.0) throw_domain("division by zero");
        out[0] = a[0] / den;
        for (std::size_t i = 0; i < n; ++i) og[i] = (ag[i] - out[0] * bg[i]) / den;
        break;
      }
      case Op::Neg:
        out[0] = -a[0];
        for (std::size_t i = 0; i < n; ++i) og[i] = -ag[i];
        break;
      case Op::Exp: {
        double w = std::exp(a[0]);
        out[0] = w;
        for (std::size_t i = 0; i < n; ++i) og[i] = w * ag[i];
        break;
      }
      case Op::Log: {
        double v = a[0];
        if (v <= 0.0) throw_domain("log of nonpositive value");
        out[0] = std::log(v);
        for (std::size_t i = 0; i < n; ++i) og[i] = ag[i] / v;
        break;
      }
      case Op::Sin: {
        double c = std::cos(a[0]);
        out[0] = std::sin(a[0]);
        for (std::size_t i = 0; i < n; ++i) og[i] = c * ag[i];
        break;
      }
      case Op::Cos: {
        double s = std::sin(a[0]);
        out[0] = std::cos(a[0]);
        for (std::size_t i = 0; i < n; ++i) og[i] = -s * ag[i];
        break;
      }
    }
    for (std::size_t k = 0; k < stride; ++k)
      if (!std::isfinite(out[k])) throw_overflow();
  }

  const double* last = ws.data() + (tape_.size() - 1) * stride;
  for (std::size_t i = 0; i < n; ++i) grad_out[i] = last[1 + i];
  return last[0];
}

Expression parse(std::string_view text, int n_vars) { return Expression::parse(text, n_vars); }

double eval(const Expression& e, std::span<const double> point) { return e.eval(point); }

Taylor2 eval_taylor2(const Expression& e, std::span<const double> point) {
  return e.eval_taylor2(point);
}

}  // namespace algoforge
