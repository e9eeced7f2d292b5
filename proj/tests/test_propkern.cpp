#include <cmath>
#include <numbers>

#include "doctest.h"
#include "toeplitz/errors.hpp"
#include "toeplitz/propkern.hpp"

using namespace toeplitz;
using prop::Complex;
using std::numbers::pi;
using torus::Point;

namespace {

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

Eigen::MatrixXcd identity(int n) { return Eigen::MatrixXcd::Identity(n, n); }

// Closed form of the shear predictor: (k/2pi)(1 + a^2)^{-1/4} with phase
// -kt(cos + pi q sin) + arctan(a)/2, a = pi t cos(2 pi q)/2.
Complex shear_closed_form(int k, double q, double t) {
  const double c = std::cos(2 * pi * q);
  const double s = std::sin(2 * pi * q);
  const double a = pi * t * c / 2;
  const double phase = -k * t * (c + pi * q * s) + 0.5 * std::atan(a);
  return k / (2 * pi) * std::pow(1 + a * a, -0.25) * std::polar(1.0, phase);
}

}  // namespace

TEST_CASE("autonomous propagator") {
  const theta::QuantumSpace qs(10);
  const auto op = theta::model_operator(qs);
  CHECK(max_abs(prop::propagate_autonomous(op, 0.0) - identity(20)) == 0.0);
  const Eigen::MatrixXcd u = prop::propagate_autonomous(op, 0.37);
  for (int l = 0; l < 20; ++l) {
    CHECK(std::abs(u(l, l) - std::polar(1.0, -10 * 0.37 * std::cos(pi * l / 10))) < 1e-14);
  }
  CHECK(max_abs(u.adjoint() * u - identity(20)) <= 1e-10);

  const auto dense = theta::toeplitz_build(qs, torus::SymbolField::from_expression("cos(2*pi*p)+0.3*sin(2*pi*q)"));
  const Eigen::MatrixXcd a = prop::propagate_autonomous(dense, 0.2);
  const Eigen::MatrixXcd b = prop::propagate_autonomous(dense, 0.55);
  CHECK(max_abs(a.adjoint() * a - identity(20)) <= 1e-10);
  CHECK(max_abs(a * b - prop::propagate_autonomous(dense, 0.75)) <= 1e-10);
  // against a truncated Taylor series of exp(-i k t T) at small t
  const Eigen::MatrixXcd gen = Complex(0.0, -10 * 0.01) * dense.matrix();
  Eigen::MatrixXcd taylor = identity(20);
  Eigen::MatrixXcd term = identity(20);
  for (int n = 1; n < 30; ++n) {
    term = term * gen / static_cast<double>(n);
    taylor += term;
  }
  CHECK(max_abs(prop::propagate_autonomous(dense, 0.01) - taylor) <= 1e-12);
}

TEST_CASE("time-dependent propagator") {
  const theta::QuantumSpace qs(8);
  const auto dense = theta::toeplitz_build(qs, torus::SymbolField::from_expression("cos(2*pi*p)*cos(2*pi*q)"));
  const auto grid = torus::time_grid(0.0, 0.5, 0.01);
  const auto props = prop::propagate_timedep([&](double) { return dense; }, grid);
  REQUIRE(props.size() == grid.size());
  CHECK(max_abs(props.back() - prop::propagate_autonomous(dense, 0.5)) <= 1e-8);

  // T = c(t) I gives the global phase exp(-i k int c)
  const auto scalar = [&](double t) {
    return theta::HermitianOperator::diagonal(8, Eigen::VectorXd::Constant(16, std::cos(3 * t)));
  };
  const auto grid2 = torus::time_grid(0.0, 1.0, 1e-3);
  const auto ph = prop::propagate_timedep(scalar, grid2);
  CHECK(grid2.size() == 1001);
  const Complex expected = std::polar(1.0, -8 * std::sin(3.0) / 3);
  CHECK(std::abs(ph.back()(0, 0) - expected) < 1e-5);
  CHECK(max_abs(ph.back().adjoint() * ph.back() - identity(16)) <= 1e-9);

  // a genuinely time-dependent family: second-order convergence under refinement
  const auto f0 = theta::toeplitz_build(qs, torus::SymbolField::from_expression("cos(2*pi*q)"));
  const auto f1 = theta::toeplitz_build(qs, torus::SymbolField::from_expression("sin(2*pi*p)"));
  const auto family = [&](double t) {
    return theta::HermitianOperator(8, f0.matrix() + std::sin(2 * t) * f1.matrix());
  };
  const auto coarse = prop::propagate_timedep(family, torus::time_grid(0.0, 1.0, 0.02)).back();
  const auto mid = prop::propagate_timedep(family, torus::time_grid(0.0, 1.0, 0.01)).back();
  const auto fine = prop::propagate_timedep(family, torus::time_grid(0.0, 1.0, 0.005)).back();
  const double r = max_abs(coarse - mid) / max_abs(mid - fine);
  CHECK(r > 3.5);
  CHECK(r < 4.5);
}

TEST_CASE("kernel evaluation") {
  const theta::QuantumSpace qs(12);
  const Point x(0.23, 0.61);
  const Point y(0.4, 0.55);
  CHECK(std::abs(prop::kernel_eval(qs, identity(24), x, x) - theta::bergman_diag(qs, x)) < 1e-12);
  const auto op = theta::toeplitz_build(qs, torus::SymbolField::from_expression("cos(2*pi*p)"));
  const Eigen::MatrixXcd u0 = prop::propagate_autonomous(op, 0.0);
  CHECK(std::abs(prop::kernel_eval(qs, u0, y, x) - std::conj(prop::kernel_eval(qs, u0, x, y))) <= 1e-10);
  const auto model = theta::model_operator(qs);
  Eigen::VectorXcd phases(24);
  for (int l = 0; l < 24; ++l) phases(l) = std::polar(1.0, -12 * 0.3 * model.eigenvalues()(l));
  const Complex d = prop::kernel_eval_diagonal(qs, phases, y, x);
  CHECK(std::abs(d - prop::kernel_eval(qs, prop::propagate_autonomous(model, 0.3), y, x)) < 1e-12);
  // direct sum of the basis functions
  Complex direct = 0.0;
  for (int l = 0; l < 24; ++l) {
    direct += phases(l) * qs.basis_eval(l, Complex(y(0), y(1))) * std::conj(qs.basis_eval(l, Complex(x(0), x(1))));
  }
  CHECK(std::abs(d - direct) < 1e-12);
}

TEST_CASE("graph predictor") {
  const torus::TorusPhaseSpace ps;
  const auto model = torus::SymbolField::model_cos();
  CHECK(std::abs(prop::asymptotic_graph_kernel(ps, model, Point(0.3, 0.1), 0.0, 100) - 100 / (2 * pi)) < 1e-12);
  for (double t : {0.05, 0.4, 1.0, -0.7}) {
    for (double q : {0.1, 0.7}) {
      const Complex v = prop::asymptotic_graph_kernel(ps, model, Point(0.3, q), t, 50);
      CHECK(std::abs(v - shear_closed_form(50, q, t)) < 1e-10);
    }
  }
  // the same symbol through the generic integrator
  const auto generic = torus::SymbolField::from_expression("cos(2*pi*q)");
  CHECK_FALSE(generic.is_model_shear());
  const Complex g = prop::asymptotic_graph_kernel(ps, generic, Point(0.3, 0.1), 0.8, 50);
  CHECK(std::abs(g - shear_closed_form(50, 0.1, 0.8)) < 1e-6);
  // constant subprincipal shift multiplies by exp(-i c t)
  const auto shifted = model.with_subprincipal_shift(0.7);
  const Complex a = prop::asymptotic_graph_kernel(ps, model, Point(0.3, 0.1), 0.6, 40);
  const Complex b = prop::asymptotic_graph_kernel(ps, shifted, Point(0.3, 0.1), 0.6, 40);
  CHECK(std::abs(b - std::polar(1.0, -0.7 * 0.6) * a) <= 1e-12 * std::abs(a));

  const std::vector<double> grid{-0.3, 0.0, 0.25, 0.5};
  const auto path = prop::asymptotic_graph_path(ps, model, Point(0.3, 0.1), grid, 30);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(path.values[i] - shear_closed_form(30, 0.1, grid[i])) < 1e-10);
  }
  // phase derivative at t = 0 by finite differences
  const double h = 1e-5;
  const Complex plus = prop::asymptotic_graph_kernel(ps, model, Point(0.3, 0.1), h, 40);
  const Complex minus = prop::asymptotic_graph_kernel(ps, model, Point(0.3, 0.1), -h, 40);
  const double c = std::cos(0.2 * pi);
  const double s = std::sin(0.2 * pi);
  const double slope = std::arg(plus / minus) / (2 * h);
  CHECK(std::abs(slope - (-40 * (c + pi * 0.1 * s) + 0.25 * pi * c)) < 1e-6);
}

TEST_CASE("exact kernel against the predictor on the graph") {
  const torus::TorusPhaseSpace ps;
  const auto model = torus::SymbolField::model_cos();
  const theta::QuantumSpace qs(100);
  const auto op = theta::model_operator(qs);
  const auto grid = torus::time_grid(0.0, 0.1, 0.001);
  const auto rows = prop::graph_compare(qs, op, ps, model, Point(0.3, 0.1), grid);
  REQUIRE(rows.size() == 101);
  CHECK(prop::max_rel_err_modulus(rows) <= 0.02);
  CHECK(std::abs(rows[0].exact - theta::bergman_diag(qs, Point(0.3, 0.1))) < 1e-10);
  CHECK(std::abs(rows[0].predicted - 100 / (2 * pi)) < 1e-12);
  for (const auto& r : rows) {
    CHECK(r.rel_err_modulus == std::abs(std::abs(r.exact) - std::abs(r.predicted)) / std::abs(r.predicted));
    CHECK(std::abs(r.phase_err) < 0.01);
  }
  // single-point comparison at t = 0.05
  const Complex exact = rows[50].exact;
  const Complex pred = prop::asymptotic_graph_kernel(ps, model, Point(0.3, 0.1), 0.05, 100);
  CHECK(std::abs(exact - pred) <= 0.02 * std::abs(pred));

  // square-root modulus exponent does not fit the exact kernel
  const auto long_grid = torus::time_grid(0.0, 1.0, 0.01);
  const auto long_rows = prop::graph_compare(qs, op, ps, model, Point(0.3, 0.1), long_grid);
  double alt = 0.0;
  for (const auto& r : long_rows) {
    const double a = pi * r.t * std::cos(0.2 * pi) / 2;
    const double alt_mod = 100 / (2 * pi) / std::sqrt(1 + a * a);
    alt = std::max(alt, std::abs(std::abs(r.exact) - alt_mod) / alt_mod);
  }
  CHECK(alt > 10 * prop::max_rel_err_modulus(long_rows));
}

TEST_CASE("predictor error decreases with k") {
  const torus::TorusPhaseSpace ps;
  const auto model = torus::SymbolField::model_cos();
  const auto grid = torus::time_grid(0.0, 1.0, 0.01);
  double prev = 0.0;
  for (int k : {50, 100}) {
    const theta::QuantumSpace qs(k);
    const double err = prop::max_rel_err_modulus(
        prop::graph_compare(qs, theta::model_operator(qs), ps, model, Point(0.5, 0.7), grid));
    CHECK(err < 5.0 / k);
    if (prev > 0.0) CHECK(err <= 0.65 * prev);
    prev = err;
  }
}

TEST_CASE("off-graph decay") {
  const torus::TorusPhaseSpace ps;
  const auto model = torus::SymbolField::model_cos();
  const std::vector<int> ks{50, 100};
  const auto rep = prop::offgraph_probe(ks, ps, model, Point(0.3, 0.1), 0.5, Eigen::Vector2d(0.2, 0.0));
  CHECK(rep.min_order >= 3.0);
  CHECK(rep.orders.size() == 1);
  CHECK_THROWS_AS(prop::offgraph_probe(ks, ps, model, Point(0.3, 0.1), 0.5, Eigen::Vector2d(0.0, 0.0)),
                  ValidationError);
  CHECK_THROWS_AS(prop::offgraph_probe(ks, ps, model, Point(0.3, 0.1), 0.5, Eigen::Vector2d(1.01, -2.0)),
                  ValidationError);
  const std::vector<int> small{25, 50};
  for (double t : {0.0, 0.1}) {
    const auto far = prop::offgraph_probe(small, ps, model, Point(0.3, 0.1), t, Eigen::Vector2d(0.5, 0.0));
    for (std::size_t i = 0; i < 2; ++i) CHECK(far.abs_kernel[i] < 1e-6 * small[i] / (2 * pi));
  }
}

TEST_CASE("exact and predicted kernels under a constant shift") {
  const torus::TorusPhaseSpace ps;
  const auto model = torus::SymbolField::model_cos();
  const theta::QuantumSpace qs(30);
  const auto op = theta::model_operator(qs);
  const auto shifted = op.shifted(0.7 / 30);
  const std::vector<double> grid{0.0, 0.3, 0.9};
  const auto base = prop::graph_compare(qs, op, ps, model, Point(0.3, 0.1), grid);
  const auto moved = prop::graph_compare(qs, shifted, ps, model.with_subprincipal_shift(0.7), Point(0.3, 0.1), grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Complex f = std::polar(1.0, -0.7 * grid[i]);
    CHECK(std::abs(moved[i].exact - f * base[i].exact) <= 1e-12 * std::abs(base[i].exact));
    CHECK(std::abs(moved[i].predicted - f * base[i].predicted) <= 1e-12 * std::abs(base[i].predicted));
  }
}
