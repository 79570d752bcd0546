#pragma once

// Complex-valued expression language used for conformal maps, kernels and
// right-hand-side pieces.
//
//   expr    := term (('+'|'-') term)*
//   term    := unary (('*'|'/') unary)*
//   unary   := ('-'|'+') unary | power
//   power   := primary ('^' integer)?          right-associative, integer exponents
//   primary := literal | identifier | call | '(' expr ')'
//   call    := ('exp'|'sin'|'cos') '(' expr ')'
//
// Literals are decimal numbers with an optional imaginary suffix ("1.5i");
// the bare identifier "i" is the imaginary unit.

#include <array>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdio>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fredholm/errors.hpp"

namespace fredholm::expr {

using complex = std::complex<double>;

enum class Op { Literal, Variable, Negate, Add, Sub, Mul, Div, Power, Exp, Sin, Cos };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::Literal;
  complex value{};    // Literal
  std::string name;   // Variable
  int exponent = 0;   // Power
  NodePtr lhs, rhs;   // operands; unary ops and calls use lhs only
};

/// Variable bindings for evaluation.
class Environment {
 public:
  Environment() = default;
  Environment(std::initializer_list<std::pair<std::string, complex>> init) {
    for (const auto& [k, v] : init) bind(k, v);
  }

  /// Adds a new binding; rebinding an existing name is an error.
  void bind(const std::string& name, complex value) {
    if (!values_.emplace(name, value).second)
      throw ConfigError("duplicate binding for variable '" + name + "'");
  }
  void assign(const std::string& name, complex value) { values_[name] = value; }

  const complex* find(const std::string& name) const {
    auto it = values_.find(name);
    return it == values_.end() ? nullptr : &it->second;
  }

 private:
  std::map<std::string, complex> values_;
};

namespace detail {

inline complex ipow(complex x, int n) {
  if (n < 0) {
    if (x == complex(0.0)) throw EvaluationError("division by zero in negative power");
    return 1.0 / ipow(x, -n);
  }
  complex result(1.0);
  while (n > 0) {
    if (n & 1) result *= x;
    x *= x;
    n >>= 1;
  }
  return result;
}

inline complex checked_div(complex a, complex b) {
  if (b == complex(0.0)) throw EvaluationError("division by zero");
  return a / b;
}

inline NodePtr literal(complex v) { return std::make_shared<const Node>([&] { Node n; n.value = v; return n; }()); }

inline bool is_literal(const NodePtr& n, complex v) { return n->op == Op::Literal && n->value == v; }

inline NodePtr unary(Op op, NodePtr a) {
  Node n;
  n.op = op;
  n.lhs = std::move(a);
  return std::make_shared<const Node>(std::move(n));
}

inline NodePtr binary(Op op, NodePtr a, NodePtr b) {
  Node n;
  n.op = op;
  n.lhs = std::move(a);
  n.rhs = std::move(b);
  return std::make_shared<const Node>(std::move(n));
}

inline NodePtr power(NodePtr base, int exponent) {
  Node n;
  n.op = Op::Power;
  n.lhs = std::move(base);
  n.exponent = exponent;
  return std::make_shared<const Node>(std::move(n));
}

// Folding constructors used by the differentiator.
inline NodePtr make_neg(NodePtr a) {
  if (a->op == Op::Literal) return literal(-a->value);
  if (a->op == Op::Negate) return a->lhs;
  return unary(Op::Negate, std::move(a));
}

inline NodePtr make_add(NodePtr a, NodePtr b) {
  if (is_literal(a, 0.0)) return b;
  if (is_literal(b, 0.0)) return a;
  if (a->op == Op::Literal && b->op == Op::Literal) return literal(a->value + b->value);
  return binary(Op::Add, std::move(a), std::move(b));
}

inline NodePtr make_sub(NodePtr a, NodePtr b) {
  if (is_literal(b, 0.0)) return a;
  if (is_literal(a, 0.0)) return make_neg(std::move(b));
  if (a->op == Op::Literal && b->op == Op::Literal) return literal(a->value - b->value);
  return binary(Op::Sub, std::move(a), std::move(b));
}

inline NodePtr make_mul(NodePtr a, NodePtr b) {
  if (is_literal(a, 0.0) || is_literal(b, 0.0)) return literal(0.0);
  if (is_literal(a, 1.0)) return b;
  if (is_literal(b, 1.0)) return a;
  if (a->op == Op::Literal && b->op == Op::Literal) return literal(a->value * b->value);
  return binary(Op::Mul, std::move(a), std::move(b));
}

inline NodePtr make_div(NodePtr a, NodePtr b) {
  if (is_literal(a, 0.0)) return literal(0.0);
  if (is_literal(b, 1.0)) return a;
  return binary(Op::Div, std::move(a), std::move(b));
}

inline NodePtr make_pow(NodePtr base, int n) {
  if (n == 0) return literal(1.0);
  if (n == 1) return base;
  return power(std::move(base), n);
}

inline NodePtr derivative(const NodePtr& e, const std::string& var) {
  switch (e->op) {
    case Op::Literal:
      return literal(0.0);
    case Op::Variable:
      return literal(e->name == var ? 1.0 : 0.0);
    case Op::Negate:
      return make_neg(derivative(e->lhs, var));
    case Op::Add:
      return make_add(derivative(e->lhs, var), derivative(e->rhs, var));
    case Op::Sub:
      return make_sub(derivative(e->lhs, var), derivative(e->rhs, var));
    case Op::Mul:
      return make_add(make_mul(derivative(e->lhs, var), e->rhs),
                      make_mul(e->lhs, derivative(e->rhs, var)));
    case Op::Div: {
      auto num = make_sub(make_mul(derivative(e->lhs, var), e->rhs),
                          make_mul(e->lhs, derivative(e->rhs, var)));
      return make_div(std::move(num), make_pow(e->rhs, 2));
    }
    case Op::Power: {
      auto du = derivative(e->lhs, var);
      return make_mul(make_mul(literal(static_cast<double>(e->exponent)),
                               make_pow(e->lhs, e->exponent - 1)),
                      std::move(du));
    }
    case Op::Exp:
      return make_mul(e, derivative(e->lhs, var));
    case Op::Sin:
      return make_mul(unary(Op::Cos, e->lhs), derivative(e->lhs, var));
    case Op::Cos:
      return make_mul(make_neg(unary(Op::Sin, e->lhs)), derivative(e->lhs, var));
  }
  throw Error("unreachable expression node");
}

inline complex evaluate(const Node& e, const Environment& env) {
  switch (e.op) {
    case Op::Literal:
      return e.value;
    case Op::Variable: {
      const complex* v = env.find(e.name);
      if (!v) throw EvaluationError("unbound variable '" + e.name + "'");
      return *v;
    }
    case Op::Negate:
      return -evaluate(*e.lhs, env);
    case Op::Add:
      return evaluate(*e.lhs, env) + evaluate(*e.rhs, env);
    case Op::Sub:
      return evaluate(*e.lhs, env) - evaluate(*e.rhs, env);
    case Op::Mul:
      return evaluate(*e.lhs, env) * evaluate(*e.rhs, env);
    case Op::Div: {
      complex a = evaluate(*e.lhs, env);
      return checked_div(a, evaluate(*e.rhs, env));
    }
    case Op::Power:
      return ipow(evaluate(*e.lhs, env), e.exponent);
    case Op::Exp:
      return std::exp(evaluate(*e.lhs, env));
    case Op::Sin:
      return std::sin(evaluate(*e.lhs, env));
    case Op::Cos:
      return std::cos(evaluate(*e.lhs, env));
  }
  throw Error("unreachable expression node");
}

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string print(const Node& e) {
  switch (e.op) {
    case Op::Literal: {
      const double re = e.value.real(), im = e.value.imag();
      if (im == 0.0) return re < 0 || std::signbit(re) ? "(" + format_double(re) + ")" : format_double(re);
      std::string im_part = format_double(std::abs(im)) + "i";
      if (re == 0.0 && !std::signbit(re))
        return im < 0 ? "(-" + im_part + ")" : im_part;
      return "(" + format_double(re) + (im < 0 ? "-" : "+") + im_part + ")";
    }
    case Op::Variable:
      return e.name;
    case Op::Negate:
      return "(-" + print(*e.lhs) + ")";
    case Op::Add:
      return "(" + print(*e.lhs) + "+" + print(*e.rhs) + ")";
    case Op::Sub:
      return "(" + print(*e.lhs) + "-" + print(*e.rhs) + ")";
    case Op::Mul:
      return "(" + print(*e.lhs) + "*" + print(*e.rhs) + ")";
    case Op::Div:
      return "(" + print(*e.lhs) + "/" + print(*e.rhs) + ")";
    case Op::Power:
      return "(" + print(*e.lhs) + "^" + std::to_string(e.exponent) + ")";
    case Op::Exp:
      return "exp(" + print(*e.lhs) + ")";
    case Op::Sin:
      return "sin(" + print(*e.lhs) + ")";
    case Op::Cos:
      return "cos(" + print(*e.lhs) + ")";
  }
  throw Error("unreachable expression node");
}

inline void collect_variables(const Node& e, std::set<std::string>& out) {
  if (e.op == Op::Variable) out.insert(e.name);
  if (e.lhs) collect_variables(*e.lhs, out);
  if (e.rhs) collect_variables(*e.rhs, out);
}

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
  Tok kind;
  std::size_t offset;
  std::string text;
  complex value{};
  bool integral = false;  // Number written without '.', exponent or 'i'
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::size_t start = pos_;
    if (pos_ >= src_.size()) return {Tok::End, start, {}};
    const char c = src_[pos_];
    // U+2212 MINUS SIGN, accepted so that formulas can be pasted from typeset text.
    if (src_.substr(pos_, 3) == "\xE2\x88\x92") {
      pos_ += 3;
      return {Tok::Minus, start, "-"};
    }
    switch (c) {
      case '+': ++pos_; return {Tok::Plus, start, "+"};
      case '-': ++pos_; return {Tok::Minus, start, "-"};
      case '*': ++pos_; return {Tok::Star, start, "*"};
      case '/': ++pos_; return {Tok::Slash, start, "/"};
      case '^': ++pos_; return {Tok::Caret, start, "^"};
      case '(': ++pos_; return {Tok::LParen, start, "("};
      case ')': ++pos_; return {Tok::RParen, start, ")"};
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number(start);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      return {Tok::Ident, start, std::string(src_.substr(start, pos_ - start))};
    }
    throw SyntaxError(std::string("unexpected character '") + c + "'", start);
  }

 private:
  Token number(std::size_t start) {
    bool integral = true;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_, ++n;
      return n;
    };
    std::size_t n = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      integral = false;
      ++pos_;
      n += digits();
    }
    if (n == 0) throw SyntaxError("malformed number", start);
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) {
        pos_ = save;  // not an exponent; leave 'e' for the identifier check below
      } else {
        integral = false;
      }
    }
    const std::string text(src_.substr(start, pos_ - start));
    const double x = std::strtod(text.c_str(), nullptr);
    bool imaginary = false;
    if (pos_ < src_.size() && src_[pos_] == 'i') {
      imaginary = true;
      integral = false;
      ++pos_;
    }
    if (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      throw SyntaxError("unexpected identifier character after number", pos_);
    Token t{Tok::Number, start, text};
    t.value = imaginary ? complex(0.0, x) : complex(x, 0.0);
    t.integral = integral;
    return t;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lexer_(src) { advance(); }

  NodePtr parse() {
    NodePtr e = expression();
    if (tok_.kind != Tok::End) fail("expected one of {'+', '-', '*', '/', '^', end of input}");
    return e;
  }

 private:
  void advance() { tok_ = lexer_.next(); }
  [[noreturn]] void fail(const std::string& what) const { throw SyntaxError(what, tok_.offset); }

  NodePtr expression() {
    NodePtr lhs = term();
    while (tok_.kind == Tok::Plus || tok_.kind == Tok::Minus) {
      const Op op = tok_.kind == Tok::Plus ? Op::Add : Op::Sub;
      advance();
      lhs = binary(op, lhs, term());
    }
    return lhs;
  }

  NodePtr term() {
    NodePtr lhs = unary_expr();
    while (tok_.kind == Tok::Star || tok_.kind == Tok::Slash) {
      const Op op = tok_.kind == Tok::Star ? Op::Mul : Op::Div;
      advance();
      lhs = binary(op, lhs, unary_expr());
    }
    return lhs;
  }

  NodePtr unary_expr() {
    if (tok_.kind == Tok::Minus) {
      advance();
      return unary(Op::Negate, unary_expr());
    }
    if (tok_.kind == Tok::Plus) {
      advance();
      return unary_expr();
    }
    return power_expr();
  }

  NodePtr power_expr() {
    NodePtr base = primary();
    if (tok_.kind != Tok::Caret) return base;
    advance();
    return power(base, integer_exponent());
  }

  int integer_exponent() {
    int sign = 1;
    if (tok_.kind == Tok::Minus || tok_.kind == Tok::Plus) {
      sign = tok_.kind == Tok::Minus ? -1 : 1;
      advance();
    }
    if (tok_.kind != Tok::Number) fail("expected one of {integer exponent}");
    if (!tok_.integral) fail("exponent must be an integer");
    const double mag = tok_.value.real();
    if (mag > 4096) fail("exponent out of range");
    int n = sign * static_cast<int>(mag);
    advance();
    if (tok_.kind == Tok::Caret) {  // a^b^c == a^(b^c)
      advance();
      const int rest = integer_exponent();
      if (rest < 0) fail("integer exponent tower must be non-negative");
      double folded = std::pow(static_cast<double>(n), rest);
      if (std::abs(folded) > 4096) fail("exponent out of range");
      n = static_cast<int>(folded);
    }
    return n;
  }

  NodePtr primary() {
    switch (tok_.kind) {
      case Tok::Number: {
        NodePtr n = literal(tok_.value);
        advance();
        return n;
      }
      case Tok::Ident: {
        const std::string name = tok_.text;
        advance();
        if (name == "i") return literal(complex(0.0, 1.0));
        if (name == "exp" || name == "sin" || name == "cos") {
          if (tok_.kind != Tok::LParen) fail("expected one of {'('}");
          advance();
          NodePtr arg = expression();
          if (tok_.kind != Tok::RParen) fail("expected one of {')'}");
          advance();
          const Op op = name == "exp" ? Op::Exp : name == "sin" ? Op::Sin : Op::Cos;
          return unary(op, arg);
        }
        Node v;
        v.op = Op::Variable;
        v.name = name;
        return std::make_shared<const Node>(std::move(v));
      }
      case Tok::LParen: {
        advance();
        NodePtr e = expression();
        if (tok_.kind != Tok::RParen) fail("expected one of {')'}");
        advance();
        return e;
      }
      default:
        fail("expected one of {number, identifier, '(', '-'}");
    }
  }

  Lexer lexer_;
  Token tok_{Tok::End, 0, {}};
};

}  // namespace detail

class CompiledExpression;

/// Immutable parsed expression.
class Expression {
 public:
  Expression() : root_(detail::literal(0.0)) {}
  explicit Expression(NodePtr root) : root_(std::move(root)) {}

  static Expression parse(std::string_view text) { return Expression(detail::Parser(text).parse()); }
  static Expression constant(complex v) { return Expression(detail::literal(v)); }

  complex eval(const Environment& env) const { return detail::evaluate(*root_, env); }

  /// Symbolic derivative; the result is folded but not otherwise simplified.
  Expression differentiate(const std::string& var) const {
    return Expression(detail::derivative(root_, var));
  }

  /// Fully parenthesized text that parses back to an equivalent tree.
  std::string to_string() const { return detail::print(*root_); }

  std::set<std::string> variables() const {
    std::set<std::string> out;
    detail::collect_variables(*root_, out);
    return out;
  }

  const Node& root() const { return *root_; }

  /// Compiles for repeated evaluation; `slots` fixes the argument order.
  CompiledExpression compile(std::vector<std::string> slots) const;

 private:
  NodePtr root_;
};

/// Flat stack program for hot-loop evaluation with positional arguments.
class CompiledExpression {
 public:
  CompiledExpression() = default;

  complex operator()(std::span<const complex> args) const {
    std::array<complex, kMaxDepth> stack;
    std::size_t sp = 0;
    for (const Instr& in : code_) {
      switch (in.op) {
        case Op::Literal: stack[sp++] = in.value; break;
        case Op::Variable: stack[sp++] = args[in.arg]; break;
        case Op::Negate: stack[sp - 1] = -stack[sp - 1]; break;
        case Op::Add: --sp; stack[sp - 1] += stack[sp]; break;
        case Op::Sub: --sp; stack[sp - 1] -= stack[sp]; break;
        case Op::Mul: --sp; stack[sp - 1] *= stack[sp]; break;
        case Op::Div: --sp; stack[sp - 1] = detail::checked_div(stack[sp - 1], stack[sp]); break;
        case Op::Power: stack[sp - 1] = detail::ipow(stack[sp - 1], in.arg); break;
        case Op::Exp: stack[sp - 1] = std::exp(stack[sp - 1]); break;
        case Op::Sin: stack[sp - 1] = std::sin(stack[sp - 1]); break;
        case Op::Cos: stack[sp - 1] = std::cos(stack[sp - 1]); break;
      }
    }
    return stack[0];
  }

  complex operator()(std::initializer_list<complex> args) const {
    return (*this)(std::span<const complex>(args.begin(), args.size()));
  }

  std::size_t arity() const { return arity_; }

 private:
  friend class Expression;
  static constexpr std::size_t kMaxDepth = 64;

  struct Instr {
    Op op;
    int arg = 0;
    complex value{};
  };

  std::size_t emit(const Node& e, const std::vector<std::string>& slots) {
    switch (e.op) {
      case Op::Literal:
        code_.push_back({Op::Literal, 0, e.value});
        return 1;
      case Op::Variable: {
        for (std::size_t i = 0; i < slots.size(); ++i)
          if (slots[i] == e.name) {
            code_.push_back({Op::Variable, static_cast<int>(i)});
            return 1;
          }
        throw ConfigError("expression uses unknown variable '" + e.name + "'");
      }
      case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: {
        std::size_t a = emit(*e.lhs, slots);
        std::size_t b = emit(*e.rhs, slots);
        code_.push_back({e.op});
        return std::max(a, b + 1);
      }
      case Op::Power: {
        std::size_t a = emit(*e.lhs, slots);
        code_.push_back({Op::Power, e.exponent});
        return a;
      }
      case Op::Negate: case Op::Exp: case Op::Sin: case Op::Cos: {
        std::size_t a = emit(*e.lhs, slots);
        code_.push_back({e.op});
        return a;
      }
    }
    throw Error("unreachable expression node");
  }

  std::vector<Instr> code_;
  std::size_t arity_ = 0;
};

inline CompiledExpression Expression::compile(std::vector<std::string> slots) const {
  CompiledExpression c;
  c.arity_ = slots.size();
  if (c.emit(*root_, slots) > CompiledExpression::kMaxDepth)
    throw ConfigError("expression nesting too deep to compile");
  return c;
}

}  // namespace fredholm::expr
