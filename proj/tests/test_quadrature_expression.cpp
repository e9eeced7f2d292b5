#include <cmath>
#include <numbers>

#include "doctest.h"
#include "toeplitz/errors.hpp"
#include "toeplitz/expression.hpp"
#include "toeplitz/quadrature.hpp"

using namespace toeplitz;
using std::numbers::pi;

namespace {
double integrate(const quad::Rule& r, auto f) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * f(r.nodes[i]);
  return s;
}
}  // namespace

TEST_CASE("Gauss-Legendre is exact for polynomials of degree 2n-1") {
  for (int n : {1, 2, 5, 16, 64}) {
    const auto r = quad::gauss_legendre(n, -0.5, 2.0);
    const int deg = 2 * n - 1;
    const double exact = (std::pow(2.0, deg + 1) - std::pow(-0.5, deg + 1)) / (deg + 1);
    const double got = integrate(r, [&](double x) { return std::pow(x, deg); });
    CHECK(std::abs(got - exact) <= 1e-12 * std::max(1.0, std::abs(exact)));
    for (std::size_t i = 1; i < r.size(); ++i) CHECK(r.nodes[i] > r.nodes[i - 1]);
  }
}

TEST_CASE("Gauss-Legendre against a smooth integral") {
  const auto r = quad::gauss_legendre(40, 0.0, 1.0);
  CHECK(std::abs(integrate(r, [](double x) { return std::exp(-3.0 * x * x); }) -
                 std::sqrt(pi / 3.0) / 2.0 * std::erf(std::sqrt(3.0))) < 1e-14);
  const auto c = quad::composite_gauss_legendre(8, 16, -3.0, 3.0);
  CHECK(std::abs(integrate(c, [](double x) { return std::cos(20.0 * x); }) - std::sin(60.0) / 10.0) < 1e-13);
}

TEST_CASE("periodic trapezoid is spectrally accurate") {
  const auto r = quad::periodic_trapezoid(32, 0.0, 1.0);
  // integral of exp(cos 2 pi x) over a period is I_0(1)
  const double i0 = std::cyl_bessel_i(0.0, 1.0);
  CHECK(std::abs(integrate(r, [](double x) { return std::exp(std::cos(2 * pi * x)); }) - i0) < 1e-15);
  const auto t = quad::trapezoid(3, 0.0, 1.0);
  CHECK(std::abs(integrate(t, [](double x) { return x; }) - 0.5) < 1e-15);
}

TEST_CASE("expression values and derivatives") {
  const auto e = expr::Expression::parse("cos(2*pi*q) + 0.3*sin(2*pi*p)*q^2 - exp(-p)/2");
  const double p = 0.37;
  const double q = 0.81;
  const auto j = e.eval(0.0, p, q);
  const double v = std::cos(2 * pi * q) + 0.3 * std::sin(2 * pi * p) * q * q - std::exp(-p) / 2;
  CHECK(std::abs(j.v - v) < 1e-14);
  CHECK(std::abs(j.dp - (0.3 * 2 * pi * std::cos(2 * pi * p) * q * q + std::exp(-p) / 2)) < 1e-13);
  CHECK(std::abs(j.dq - (-2 * pi * std::sin(2 * pi * q) + 0.6 * std::sin(2 * pi * p) * q)) < 1e-13);
  CHECK(std::abs(j.dpp - (-0.3 * 4 * pi * pi * std::sin(2 * pi * p) * q * q - std::exp(-p) / 2)) < 1e-12);
  CHECK(std::abs(j.dpq - 0.6 * 2 * pi * std::cos(2 * pi * p) * q) < 1e-12);
  CHECK(std::abs(j.dqq - (-4 * pi * pi * std::cos(2 * pi * q) + 0.6 * std::sin(2 * pi * p))) < 1e-12);
  CHECK_FALSE(e.depends_on_time());
}

TEST_CASE("expression grammar details") {
  CHECK(expr::Expression::parse("-2^2").value(0, 0, 0) == doctest::Approx(-4.0));
  CHECK(expr::Expression::parse("2^3^2").value(0, 0, 0) == doctest::Approx(512.0));
  CHECK(expr::Expression::parse("t*p").depends_on_time());
  CHECK(expr::Expression::parse("sqrt(p)+log(q)+tanh(p)").value(0, 4.0, std::numbers::e) == doctest::Approx(3.0 + std::tanh(4.0)));
  CHECK_THROWS_AS(expr::Expression::parse("cos(q"), ConfigError);
  CHECK_THROWS_AS(expr::Expression::parse("foo(q)"), ConfigError);
  CHECK_THROWS_AS(expr::Expression::parse("q q"), ConfigError);
  // finite-difference cross-check of a composite
  const auto e = expr::Expression::parse("sinh(p*q)/cosh(q) + p^q");
  const double h = 1e-5;
  const auto j = e.eval(0, 1.3, 0.7);
  const double fd = (e.value(0, 1.3 + h, 0.7) - e.value(0, 1.3 - h, 0.7)) / (2 * h);
  CHECK(std::abs(j.dp - fd) < 1e-8);
  const double fdq = (e.value(0, 1.3, 0.7 + h) - e.value(0, 1.3, 0.7 - h)) / (2 * h);
  CHECK(std::abs(j.dq - fdq) < 1e-8);
}
