#include "toeplitz/expression.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "toeplitz/errors.hpp"

namespace toeplitz::expr {

Jet operator+(const Jet& a, const Jet& b) {
  return {a.v + b.v, a.dp + b.dp, a.dq + b.dq, a.dpp + b.dpp, a.dpq + b.dpq, a.dqq + b.dqq};
}

Jet operator-(const Jet& a, const Jet& b) {
  return {a.v - b.v, a.dp - b.dp, a.dq - b.dq, a.dpp - b.dpp, a.dpq - b.dpq, a.dqq - b.dqq};
}

Jet operator-(const Jet& a) { return {-a.v, -a.dp, -a.dq, -a.dpp, -a.dpq, -a.dqq}; }

Jet operator*(const Jet& a, const Jet& b) {
  return {a.v * b.v,
          a.dp * b.v + a.v * b.dp,
          a.dq * b.v + a.v * b.dq,
          a.dpp * b.v + 2.0 * a.dp * b.dp + a.v * b.dpp,
          a.dpq * b.v + a.dp * b.dq + a.dq * b.dp + a.v * b.dpq,
          a.dqq * b.v + 2.0 * a.dq * b.dq + a.v * b.dqq};
}

Jet compose(const Jet& a, double h, double h1, double h2) {
  return {h,
          h1 * a.dp,
          h1 * a.dq,
          h2 * a.dp * a.dp + h1 * a.dpp,
          h2 * a.dp * a.dq + h1 * a.dpq,
          h2 * a.dq * a.dq + h1 * a.dqq};
}

Jet operator/(const Jet& a, const Jet& b) {
  const double inv = 1.0 / b.v;
  return a * compose(b, inv, -inv * inv, 2.0 * inv * inv * inv);
}

Jet pow(const Jet& a, const Jet& b) {
  if (b.is_constant()) {
    const double c = b.v;
    if (c == 0.0) return Jet::constant(1.0);
    return compose(a, std::pow(a.v, c), c * std::pow(a.v, c - 1.0),
                   c * (c - 1.0) * std::pow(a.v, c - 2.0));
  }
  const double l = std::log(a.v);
  const Jet la = compose(a, l, 1.0 / a.v, -1.0 / (a.v * a.v));
  const Jet e = b * la;
  const double ex = std::exp(e.v);
  return compose(e, ex, ex, ex);
}

struct Node {
  enum class Kind { Number, VarP, VarQ, VarT, Neg, Add, Sub, Mul, Div, Pow, Call };
  Kind kind = Kind::Number;
  double number = 0.0;
  std::string func;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Node>;

const std::vector<std::string>& function_names() {
  static const std::vector<std::string> names = {"sin",  "cos",  "tan",  "exp", "log",
                                                 "sqrt", "sinh", "cosh", "tanh"};
  return names;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse_all() {
    NodePtr n = parse_sum();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected character");
    return n;
  }

  bool uses_t = false;

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("expression '" + s_ + "': " + what + " at position " + std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr make(Node::Kind kind, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
  }

  NodePtr parse_sum() {
    NodePtr n = parse_product();
    for (;;) {
      if (accept('+')) {
        n = make(Node::Kind::Add, n, parse_product());
      } else if (accept('-')) {
        n = make(Node::Kind::Sub, n, parse_product());
      } else {
        return n;
      }
    }
  }

  NodePtr parse_product() {
    NodePtr n = parse_unary();
    for (;;) {
      if (accept('*')) {
        n = make(Node::Kind::Mul, n, parse_unary());
      } else if (accept('/')) {
        n = make(Node::Kind::Div, n, parse_unary());
      } else {
        return n;
      }
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return make(Node::Kind::Neg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (accept('^')) return make(Node::Kind::Pow, base, parse_unary());
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = parse_sum();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      auto n = std::make_shared<Node>();
      n->number = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string id = s_.substr(start, pos_ - start);
      if (id == "p") return make(Node::Kind::VarP);
      if (id == "q") return make(Node::Kind::VarQ);
      if (id == "t") {
        uses_t = true;
        return make(Node::Kind::VarT);
      }
      if (id == "pi" || id == "e") {
        auto n = std::make_shared<Node>();
        n->number = id == "pi" ? std::numbers::pi : std::numbers::e;
        return n;
      }
      for (const auto& f : function_names()) {
        if (f == id) {
          if (!accept('(')) fail("expected '(' after " + id);
          NodePtr arg = parse_sum();
          if (!accept(')')) fail("expected ')'");
          auto n = std::make_shared<Node>();
          n->kind = Node::Kind::Call;
          n->func = id;
          n->lhs = arg;
          return n;
        }
      }
      pos_ = start;
      fail("unknown identifier '" + id + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

Jet apply_function(const std::string& f, const Jet& a) {
  const double x = a.v;
  if (f == "sin") return compose(a, std::sin(x), std::cos(x), -std::sin(x));
  if (f == "cos") return compose(a, std::cos(x), -std::sin(x), -std::cos(x));
  if (f == "tan") {
    const double tn = std::tan(x);
    const double s2 = 1.0 + tn * tn;
    return compose(a, tn, s2, 2.0 * tn * s2);
  }
  if (f == "exp") {
    const double e = std::exp(x);
    return compose(a, e, e, e);
  }
  if (f == "log") return compose(a, std::log(x), 1.0 / x, -1.0 / (x * x));
  if (f == "sqrt") {
    const double r = std::sqrt(x);
    return compose(a, r, 0.5 / r, -0.25 / (r * x));
  }
  if (f == "sinh") return compose(a, std::sinh(x), std::cosh(x), std::sinh(x));
  if (f == "cosh") return compose(a, std::cosh(x), std::sinh(x), std::cosh(x));
  const double th = std::tanh(x);
  const double s2 = 1.0 - th * th;
  return compose(a, th, s2, -2.0 * th * s2);
}

Jet eval_node(const Node& n, double t, const Jet& p, const Jet& q) {
  switch (n.kind) {
    case Node::Kind::Number: return Jet::constant(n.number);
    case Node::Kind::VarP: return p;
    case Node::Kind::VarQ: return q;
    case Node::Kind::VarT: return Jet::constant(t);
    case Node::Kind::Neg: return -eval_node(*n.lhs, t, p, q);
    case Node::Kind::Add: return eval_node(*n.lhs, t, p, q) + eval_node(*n.rhs, t, p, q);
    case Node::Kind::Sub: return eval_node(*n.lhs, t, p, q) - eval_node(*n.rhs, t, p, q);
    case Node::Kind::Mul: return eval_node(*n.lhs, t, p, q) * eval_node(*n.rhs, t, p, q);
    case Node::Kind::Div: return eval_node(*n.lhs, t, p, q) / eval_node(*n.rhs, t, p, q);
    case Node::Kind::Pow: return pow(eval_node(*n.lhs, t, p, q), eval_node(*n.rhs, t, p, q));
    case Node::Kind::Call: return apply_function(n.func, eval_node(*n.lhs, t, p, q));
  }
  return {};
}

}  // namespace

Expression Expression::parse(const std::string& text) {
  Parser parser(text);
  Expression e;
  e.root_ = parser.parse_all();
  e.text_ = text;
  e.uses_t_ = parser.uses_t;
  return e;
}

Jet Expression::eval(double t, double p, double q) const {
  const Jet jp{p, 1.0, 0.0, 0.0, 0.0, 0.0};
  const Jet jq{q, 0.0, 1.0, 0.0, 0.0, 0.0};
  return eval_node(*root_, t, jp, jq);
}

}  // namespace toeplitz::expr
