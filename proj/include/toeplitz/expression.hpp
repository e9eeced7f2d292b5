#pragma once
// Small expression language for symbols H(t, p, q), evaluated together with
// first and second (p, q)-derivatives.
//
// Grammar: numbers, variables p q t, constants pi e, operators + - * / ^
// (right associative), and the functions sin cos tan exp log sqrt sinh cosh tanh.

#include <memory>
#include <string>

namespace toeplitz::expr {

// Value with gradient and Hessian in (p, q).
struct Jet {
  double v = 0.0;
  double dp = 0.0;
  double dq = 0.0;
  double dpp = 0.0;
  double dpq = 0.0;
  double dqq = 0.0;

  static Jet constant(double c) { return Jet{c}; }
  bool is_constant() const { return dp == 0.0 && dq == 0.0 && dpp == 0.0 && dpq == 0.0 && dqq == 0.0; }
};

Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator-(const Jet& a);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet pow(const Jet& a, const Jet& b);
// h(a) given h, h', h'' at a.v
Jet compose(const Jet& a, double h, double h1, double h2);

struct Node;

class Expression {
 public:
  // Throws ConfigError with the offending position on malformed input.
  static Expression parse(const std::string& text);

  Jet eval(double t, double p, double q) const;
  double value(double t, double p, double q) const { return eval(t, p, q).v; }
  bool depends_on_time() const { return uses_t_; }
  const std::string& text() const { return text_; }

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
  bool uses_t_ = false;
};

}  // namespace toeplitz::expr
