#pragma once

// Arithmetic expressions for problem coefficients: parse, evaluate,
// differentiate. Trees are immutable after construction and safe to share
// across threads.

#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace layerfem {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : Error {
  ParseError(const std::string& msg, std::size_t byte_offset)
      : Error(msg + " (at byte " + std::to_string(byte_offset) + ")"),
        offset(byte_offset) {}
  std::size_t offset;
};

struct EvalError : Error {
  using Error::Error;
};

namespace expr_detail {

enum class Kind { Number, Symbol, Pi, Neg, Add, Sub, Mul, Div, Pow, Call };
enum class Fn { Sin, Cos, Exp, Ln, Sqrt, Abs };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Kind kind;
  double number = 0.0;   // Kind::Number
  std::string name;      // Kind::Symbol
  Fn fn = Fn::Sin;       // Kind::Call
  NodePtr a, b;          // operands

  Node(Kind k) : kind(k) {}
};

inline NodePtr make_number(double v) {
  auto n = std::make_shared<Node>(Kind::Number);
  n->number = v;
  return n;
}

inline NodePtr make_symbol(std::string name) {
  auto n = std::make_shared<Node>(Kind::Symbol);
  n->name = std::move(name);
  return n;
}

inline NodePtr make_pi() { return std::make_shared<Node>(Kind::Pi); }

inline bool is_number(const NodePtr& n, double v) {
  return n->kind == Kind::Number && n->number == v;
}

// Smart constructors fold literal arithmetic and the trivial 0/1 identities;
// no deeper simplification is attempted.
inline NodePtr make_neg(NodePtr a) {
  if (a->kind == Kind::Number) return make_number(-a->number);
  auto n = std::make_shared<Node>(Kind::Neg);
  n->a = std::move(a);
  return n;
}

inline NodePtr make_binary(Kind k, NodePtr a, NodePtr b) {
  if (a->kind == Kind::Number && b->kind == Kind::Number) {
    const double x = a->number, y = b->number;
    switch (k) {
      case Kind::Add: return make_number(x + y);
      case Kind::Sub: return make_number(x - y);
      case Kind::Mul: return make_number(x * y);
      case Kind::Div:
        if (y != 0.0) return make_number(x / y);
        break;
      case Kind::Pow: {
        const double r = std::pow(x, y);
        if (std::isfinite(r)) return make_number(r);
        break;
      }
      default: break;
    }
  }
  switch (k) {
    case Kind::Add:
      if (is_number(a, 0.0)) return b;
      if (is_number(b, 0.0)) return a;
      break;
    case Kind::Sub:
      if (is_number(b, 0.0)) return a;
      if (is_number(a, 0.0)) return make_neg(std::move(b));
      break;
    case Kind::Mul:
      if (is_number(a, 0.0) || is_number(b, 0.0)) return make_number(0.0);
      if (is_number(a, 1.0)) return b;
      if (is_number(b, 1.0)) return a;
      break;
    case Kind::Div:
      if (is_number(b, 1.0)) return a;
      if (is_number(a, 0.0)) return make_number(0.0);
      break;
    case Kind::Pow:
      if (is_number(b, 1.0)) return a;
      if (is_number(b, 0.0)) return make_number(1.0);
      break;
    default:
      break;
  }
  auto n = std::make_shared<Node>(k);
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

inline NodePtr make_call(Fn f, NodePtr a) {
  auto n = std::make_shared<Node>(Kind::Call);
  n->fn = f;
  n->a = std::move(a);
  return n;
}

inline const char* fn_name(Fn f) {
  switch (f) {
    case Fn::Sin: return "sin";
    case Fn::Cos: return "cos";
    case Fn::Exp: return "exp";
    case Fn::Ln: return "ln";
    case Fn::Sqrt: return "sqrt";
    case Fn::Abs: return "abs";
  }
  return "?";
}

}  // namespace expr_detail

using Bindings = std::map<std::string, double, std::less<>>;

class Expr {
 public:
  Expr() : node_(expr_detail::make_number(0.0)) {}
  explicit Expr(expr_detail::NodePtr n) : node_(std::move(n)) {}

  static Expr number(double v) { return Expr(expr_detail::make_number(v)); }
  static Expr symbol(std::string name) {
    return Expr(expr_detail::make_symbol(std::move(name)));
  }

  const expr_detail::NodePtr& node() const { return node_; }

  bool is_constant() const {
    return node_->kind == expr_detail::Kind::Number;
  }
  double constant_value() const { return node_->number; }

  double operator()(const Bindings& bindings) const { return eval(bindings); }
  double eval(const Bindings& bindings) const;

  friend Expr operator+(const Expr& a, const Expr& b) {
    return Expr(expr_detail::make_binary(expr_detail::Kind::Add, a.node_, b.node_));
  }
  friend Expr operator-(const Expr& a, const Expr& b) {
    return Expr(expr_detail::make_binary(expr_detail::Kind::Sub, a.node_, b.node_));
  }
  friend Expr operator*(const Expr& a, const Expr& b) {
    return Expr(expr_detail::make_binary(expr_detail::Kind::Mul, a.node_, b.node_));
  }
  friend Expr operator/(const Expr& a, const Expr& b) {
    return Expr(expr_detail::make_binary(expr_detail::Kind::Div, a.node_, b.node_));
  }
  friend Expr operator-(const Expr& a) {
    return Expr(expr_detail::make_neg(a.node_));
  }

 private:
  expr_detail::NodePtr node_;
};

inline Expr pow(const Expr& a, const Expr& b) {
  return Expr(expr_detail::make_binary(expr_detail::Kind::Pow, a.node(), b.node()));
}
inline Expr sin(const Expr& a) {
  return Expr(expr_detail::make_call(expr_detail::Fn::Sin, a.node()));
}
inline Expr cos(const Expr& a) {
  return Expr(expr_detail::make_call(expr_detail::Fn::Cos, a.node()));
}
inline Expr exp(const Expr& a) {
  return Expr(expr_detail::make_call(expr_detail::Fn::Exp, a.node()));
}

namespace expr_detail {

// ---------------------------------------------------------------------------
// Printing. The printer is deterministic and parse(print(e)) reproduces the
// tree exactly (round-trip property).

inline int precedence(Kind k) {
  switch (k) {
    case Kind::Add:
    case Kind::Sub: return 1;
    case Kind::Mul:
    case Kind::Div: return 2;
    case Kind::Neg: return 3;
    case Kind::Pow: return 4;
    default: return 5;
  }
}

inline void print_number(std::string& out, double v) {
  if (v == static_cast<long long>(v) && std::abs(v) < 1e15) {
    out += std::to_string(static_cast<long long>(v));
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

inline void print_node(std::string& out, const NodePtr& n) {
  const int prec = precedence(n->kind);
  auto child = [&](const NodePtr& c, bool needs_paren) {
    if (needs_paren) {
      out += '(';
      print_node(out, c);
      out += ')';
    } else {
      print_node(out, c);
    }
  };
  switch (n->kind) {
    case Kind::Number:
      if (n->number < 0.0 || std::signbit(n->number)) {
        out += '(';
        print_number(out, n->number);
        out += ')';
      } else {
        print_number(out, n->number);
      }
      break;
    case Kind::Symbol: out += n->name; break;
    case Kind::Pi: out += "pi"; break;
    case Kind::Neg:
      out += '-';
      child(n->a, precedence(n->a->kind) < prec);
      break;
    case Kind::Add:
      child(n->a, precedence(n->a->kind) < prec);
      out += '+';
      child(n->b, precedence(n->b->kind) <= prec);
      break;
    case Kind::Sub:
      child(n->a, precedence(n->a->kind) < prec);
      out += '-';
      child(n->b, precedence(n->b->kind) <= prec);
      break;
    case Kind::Mul:
      child(n->a, precedence(n->a->kind) < prec);
      out += '*';
      child(n->b, precedence(n->b->kind) <= prec);
      break;
    case Kind::Div:
      child(n->a, precedence(n->a->kind) < prec);
      out += '/';
      child(n->b, precedence(n->b->kind) <= prec);
      break;
    case Kind::Pow:
      child(n->a, precedence(n->a->kind) <= prec);
      out += '^';
      child(n->b, precedence(n->b->kind) < prec);
      break;
    case Kind::Call:
      out += fn_name(n->fn);
      out += '(';
      print_node(out, n->a);
      out += ')';
      break;
  }
}

}  // namespace expr_detail

inline std::string to_string(const Expr& e) {
  std::string out;
  expr_detail::print_node(out, e.node());
  return out;
}

inline bool structurally_equal(const Expr& a, const Expr& b) {
  using namespace expr_detail;
  const NodePtr& x = a.node();
  const NodePtr& y = b.node();
  if (x->kind != y->kind) return false;
  switch (x->kind) {
    case Kind::Number:
      return x->number == y->number ||
             (std::isnan(x->number) && std::isnan(y->number));
    case Kind::Symbol: return x->name == y->name;
    case Kind::Pi: return true;
    case Kind::Neg: return structurally_equal(Expr(x->a), Expr(y->a));
    case Kind::Call:
      return x->fn == y->fn && structurally_equal(Expr(x->a), Expr(y->a));
    default:
      return structurally_equal(Expr(x->a), Expr(y->a)) &&
             structurally_equal(Expr(x->b), Expr(y->b));
  }
}

// ---------------------------------------------------------------------------
// Evaluation

inline double Expr::eval(const Bindings& bindings) const {
  using namespace expr_detail;
  struct Eval {
    const Bindings& env;
    double run(const NodePtr& n) const {
      switch (n->kind) {
        case Kind::Number: return n->number;
        case Kind::Pi: return 3.14159265358979323846;
        case Kind::Symbol: {
          auto it = env.find(n->name);
          if (it == env.end())
            throw EvalError("unbound variable or parameter '" + n->name + "'");
          return it->second;
        }
        case Kind::Neg: return -run(n->a);
        case Kind::Add: return run(n->a) + run(n->b);
        case Kind::Sub: return run(n->a) - run(n->b);
        case Kind::Mul: return run(n->a) * run(n->b);
        case Kind::Div: return run(n->a) / run(n->b);
        case Kind::Pow: {
          const double base = run(n->a);
          const double ex = run(n->b);
          if (base < 0.0 && ex != std::floor(ex))
            throw EvalError("fractional power of negative base in '" +
                            to_string(Expr(n)) + "'");
          return std::pow(base, ex);
        }
        case Kind::Call: {
          const double v = run(n->a);
          switch (n->fn) {
            case Fn::Sin: return std::sin(v);
            case Fn::Cos: return std::cos(v);
            case Fn::Exp: return std::exp(v);
            case Fn::Ln:
              if (v <= 0.0)
                throw EvalError("ln of non-positive value in '" +
                                to_string(Expr(n)) + "'");
              return std::log(v);
            case Fn::Sqrt:
              if (v < 0.0)
                throw EvalError("sqrt of negative value in '" +
                                to_string(Expr(n)) + "'");
              return std::sqrt(v);
            case Fn::Abs: return std::abs(v);
          }
          return 0.0;
        }
      }
      return 0.0;
    }
  };
  return Eval{bindings}.run(node_);
}

// ---------------------------------------------------------------------------
// Differentiation. Exact symbolic derivative; integer-literal exponents are
// lowered to repeated multiplication so the result stays closed-form.

namespace expr_detail {

inline NodePtr pow_int(const NodePtr& base, long long n) {
  if (n == 0) return make_number(1.0);
  const bool negative = n < 0;
  long long m = negative ? -n : n;
  NodePtr r = base;
  for (long long i = 1; i < m; ++i) r = make_binary(Kind::Mul, r, base);
  if (negative) return make_binary(Kind::Div, make_number(1.0), r);
  return r;
}

inline NodePtr diff(const NodePtr& n, std::string_view var) {
  switch (n->kind) {
    case Kind::Number:
    case Kind::Pi:
      return make_number(0.0);
    case Kind::Symbol:
      return make_number(n->name == var ? 1.0 : 0.0);
    case Kind::Neg:
      return make_neg(diff(n->a, var));
    case Kind::Add:
      return make_binary(Kind::Add, diff(n->a, var), diff(n->b, var));
    case Kind::Sub:
      return make_binary(Kind::Sub, diff(n->a, var), diff(n->b, var));
    case Kind::Mul:
      return make_binary(Kind::Add,
                         make_binary(Kind::Mul, diff(n->a, var), n->b),
                         make_binary(Kind::Mul, n->a, diff(n->b, var)));
    case Kind::Div:
      return make_binary(
          Kind::Div,
          make_binary(Kind::Sub,
                      make_binary(Kind::Mul, diff(n->a, var), n->b),
                      make_binary(Kind::Mul, n->a, diff(n->b, var))),
          make_binary(Kind::Mul, n->b, n->b));
    case Kind::Pow: {
      if (n->b->kind == Kind::Number &&
          n->b->number == std::floor(n->b->number) &&
          std::abs(n->b->number) < 1e9) {
        const long long m = static_cast<long long>(n->b->number);
        // d(u^m) = m * u^(m-1) * u'
        return make_binary(
            Kind::Mul, make_number(static_cast<double>(m)),
            make_binary(Kind::Mul, pow_int(n->a, m - 1), diff(n->a, var)));
      }
      // d(u^v) = u^v * (v' ln u + v u'/u)
      NodePtr self = make_binary(Kind::Pow, n->a, n->b);
      NodePtr t1 = make_binary(Kind::Mul, diff(n->b, var),
                               make_call(Fn::Ln, n->a));
      NodePtr t2 = make_binary(Kind::Div,
                               make_binary(Kind::Mul, n->b, diff(n->a, var)),
                               n->a);
      return make_binary(Kind::Mul, self, make_binary(Kind::Add, t1, t2));
    }
    case Kind::Call: {
      NodePtr inner = diff(n->a, var);
      NodePtr outer;
      switch (n->fn) {
        case Fn::Sin: outer = make_call(Fn::Cos, n->a); break;
        case Fn::Cos: outer = make_neg(make_call(Fn::Sin, n->a)); break;
        case Fn::Exp: outer = make_call(Fn::Exp, n->a); break;
        case Fn::Ln:
          outer = make_binary(Kind::Div, make_number(1.0), n->a);
          break;
        case Fn::Sqrt:
          outer = make_binary(
              Kind::Div, make_number(1.0),
              make_binary(Kind::Mul, make_number(2.0),
                          make_call(Fn::Sqrt, n->a)));
          break;
        case Fn::Abs:
          // sign(u) = u/|u|; undefined at u = 0 as usual
          outer = make_binary(Kind::Div, n->a, make_call(Fn::Abs, n->a));
          break;
      }
      return make_binary(Kind::Mul, outer, inner);
    }
  }
  return make_number(0.0);
}

}  // namespace expr_detail

inline Expr differentiate(const Expr& e, std::string_view var) {
  return Expr(expr_detail::diff(e.node(), var));
}

// ---------------------------------------------------------------------------
// Parsing. Recursive descent; precedence ^ > unary - > * / > + -, with + - * /
// left-associative and ^ right-associative.

namespace expr_detail {

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse() {
    NodePtr e = parse_sum();
    skip_ws();
    if (pos_ != src_.size())
      throw ParseError("unexpected trailing input, expected operator or end",
                       pos_);
    return e;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < src_.size() &&
           (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
            src_[pos_] == '\r'))
      ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < src_.size() && src_[pos_] == c;
  }

  bool accept(char c) {
    if (peek(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c, const char* what) {
    if (!accept(c))
      throw ParseError(std::string("expected '") + c + "' (" + what + ")",
                       pos_);
  }

  NodePtr parse_sum() {
    NodePtr e = parse_term();
    for (;;) {
      if (accept('+'))
        e = make_binary(Kind::Add, e, parse_term());
      else if (accept('-'))
        e = make_binary(Kind::Sub, e, parse_term());
      else
        return e;
    }
  }

  NodePtr parse_term() {
    NodePtr e = parse_factor();
    for (;;) {
      if (accept('*'))
        e = make_binary(Kind::Mul, e, parse_factor());
      else if (accept('/'))
        e = make_binary(Kind::Div, e, parse_factor());
      else
        return e;
    }
  }

  // factor := '-' factor | power  (so ^ binds tighter than unary minus)
  NodePtr parse_factor() {
    if (accept('-')) return make_neg(parse_factor());
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (accept('^')) {
      NodePtr ex = parse_factor();  // right-assoc, allows x^-2
      return make_binary(Kind::Pow, base, ex);
    }
    return base;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos_ >= src_.size())
      throw ParseError("unexpected end of input, expected value", pos_);
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = parse_sum();
      expect(')', "to close parenthesized expression");
      return e;
    }
    if ((c >= '0' && c <= '9') || c == '.') return parse_number();
    if (is_ident_start(c)) return parse_identifier();
    throw ParseError(std::string("unexpected character '") + c +
                         "', expected number, identifier, or '('",
                     pos_);
  }

  static bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool is_ident_char(char c) {
    return is_ident_start(c) || (c >= '0' && c <= '9');
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9') ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9')
        ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-'))
        ++pos_;
      if (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9') {
        while (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9')
          ++pos_;
      } else {
        pos_ = mark;  // 'e' belongs to a following identifier, not an exponent
      }
    }
    const std::string text(src_.substr(start, pos_ - start));
    if (text == ".")
      throw ParseError("malformed number", start);
    return make_number(std::strtod(text.c_str(), nullptr));
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
    const std::string name(src_.substr(start, pos_ - start));
    if (name == "pi") return make_pi();

    static const std::map<std::string, Fn, std::less<>> fns = {
        {"sin", Fn::Sin}, {"cos", Fn::Cos},   {"exp", Fn::Exp},
        {"ln", Fn::Ln},   {"sqrt", Fn::Sqrt}, {"abs", Fn::Abs}};
    const bool has_call = peek('(');
    auto it = fns.find(name);
    if (it != fns.end()) {
      if (!has_call)
        throw ParseError("function '" + name + "' requires an argument list",
                         pos_);
      ++pos_;  // consume '('
      NodePtr arg = parse_sum();
      expect(')', "to close argument list");
      return make_call(it->second, arg);
    }
    if (name == "pow") {
      if (!has_call)
        throw ParseError("function 'pow' requires an argument list", pos_);
      ++pos_;
      NodePtr a = parse_sum();
      expect(',', "between pow arguments");
      NodePtr b = parse_sum();
      expect(')', "to close argument list");
      return make_binary(Kind::Pow, a, b);
    }
    if (has_call)
      throw ParseError("unknown function '" + name +
                           "'; allowed: sin, cos, exp, ln, sqrt, abs, pow",
                       start);
    return make_symbol(name);  // variable (x, u) or named parameter
  }
};

}  // namespace expr_detail

inline Expr parse_expression(std::string_view source) {
  return Expr(expr_detail::Parser(source).parse());
}

}  // namespace layerfem
