#include <cmath>
#include <numbers>

#include "doctest.h"
#include "toeplitz/errors.hpp"
#include "toeplitz/specproj.hpp"

using namespace toeplitz;
using spec::Complex;
using std::numbers::pi;
using torus::Point;

namespace {

// int_{-1}^{1} exp(-1/(1-u^2)) du
constexpr double kBumpIntegral = 0.44399381616807943;

const double kE = std::cos(0.2 * pi);

}  // namespace

TEST_CASE("Fourier pairs") {
  const auto bump = spec::build_fourier_pair(spec::PairKind::Bump, 3.0);
  CHECK(bump.fhat(3.0) == 0.0);
  CHECK(bump.fhat(-3.0) == 0.0);
  CHECK(bump.fhat(2.999999) < 1e-14);
  CHECK(bump.fhat(0.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(std::abs(bump.f0() - 3.0 * kBumpIntegral / std::sqrt(2 * pi)) < 1e-12);
  for (double e : {0.3, -2.0, 7.5, 31.0}) {
    const Complex v = bump.f_eval(e);
    CHECK(std::abs(v.imag()) <= 1e-10 * std::max(1e-6, std::abs(v)));
    CHECK(std::abs(v - bump.f_eval(-e)) <= 1e-14);
  }
  CHECK(std::abs(bump.f_eval(50.0)) < 1e-4 * std::abs(bump.f0()));

  // the truncated Gaussian transforms to sigma exp(-sigma^2 E^2 / 2), sigma = T / 9
  const auto gauss = spec::build_fourier_pair(spec::PairKind::GaussianTruncated, 4.5);
  CHECK(gauss.fhat(4.5) == 0.0);
  CHECK(gauss.fhat(4.4999) < 1e-14);
  for (double e : {0.0, 1.0, 3.3, -6.0, 20.0}) {
    CHECK(std::abs(gauss.f_eval(e) - 0.5 * std::exp(-0.125 * e * e)) < 1e-13);
  }
  CHECK_THROWS_AS(spec::build_fourier_pair(spec::PairKind::Bump, 3.0, 16), ResolutionError);
  CHECK_THROWS_AS(spec::build_fourier_pair(spec::PairKind::Bump, -1.0), ValidationError);
  CHECK(spec::parse_pair_kind("gaussian") == spec::PairKind::GaussianTruncated);
  CHECK_THROWS_AS(spec::parse_pair_kind("box"), ConfigError);
}

TEST_CASE("exact projector kernels") {
  const auto pair = spec::build_fourier_pair(spec::PairKind::Bump, 3.0);
  const theta::QuantumSpace qs(10);
  const Point x(0.3, 0.1);
  const Point y(0.45, 0.72);
  // T_k = E I
  const auto scalar = theta::HermitianOperator::diagonal(10, Eigen::VectorXd::Constant(20, kE));
  const Complex ref = pair.f0() * prop::kernel_eval(qs, Eigen::MatrixXcd::Identity(20, 20), y, x);
  CHECK(std::abs(spec::projector_kernel_exact(qs, scalar, pair, kE, y, x) - ref) < 1e-12);

  const auto dense = theta::toeplitz_build(qs, torus::SymbolField::from_expression("cos(2*pi*q)+0.2*sin(2*pi*p)"));
  const Complex a = spec::projector_kernel_exact(qs, dense, pair, 0.4, y, x);
  const Complex b = spec::projector_kernel_exact(qs, dense, pair, 0.4, x, y);
  CHECK(std::abs(a - std::conj(b)) <= 1e-10);
  // dense route against the spectral matrix built explicitly
  Eigen::VectorXcd fv(20);
  for (int l = 0; l < 20; ++l) fv(l) = pair.f_eval(10 * (0.4 - dense.eigenvalues()(l)));
  const Eigen::MatrixXcd m = dense.eigenvectors() * fv.asDiagonal() * dense.eigenvectors().adjoint();
  CHECK(std::abs(a - prop::kernel_eval(qs, m, y, x)) < 1e-12);

  // trace identity: sum_l f(k(E - lambda_l)) = int K(x, x) 4 pi dp dq
  const auto model = theta::model_operator(qs);
  Complex trace = 0.0;
  for (int l = 0; l < 20; ++l) trace += pair.f_eval(10 * (kE - model.eigenvalues()(l)));
  Complex integral = 0.0;
  const int n = 48;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Point z((i + 0.5) / n, (j + 0.5) / n);
      integral += 4 * pi / (n * n) * spec::projector_kernel_exact(qs, model, pair, kE, z, z);
    }
  }
  CHECK(std::abs(trace - integral) < 1e-9 * std::abs(trace));
}

TEST_CASE("time-quadrature route") {
  const auto pair = spec::build_fourier_pair(spec::PairKind::Bump, 3.0);
  const theta::QuantumSpace qs(20);
  const Point x(0.3, 0.1);
  const Point y(0.81, 0.9);
  const auto model = theta::model_operator(qs);
  const Complex direct = spec::projector_kernel_exact(qs, model, pair, kE, y, x);
  const Complex timed = spec::projector_kernel_time_route(qs, model, pair, kE, y, x, 512);
  CHECK(std::abs(direct - timed) <= 1e-8 * std::abs(direct));
  const auto dense = theta::toeplitz_build(qs, torus::SymbolField::from_expression("cos(2*pi*q)+0.1*cos(2*pi*p)"));
  const Complex d2 = spec::projector_kernel_exact(qs, dense, pair, 0.3, y, x);
  const Complex t2 = spec::projector_kernel_time_route(qs, dense, pair, 0.3, y, x, 512);
  CHECK(std::abs(d2 - t2) <= 1e-8 * std::max(1.0, std::abs(d2)));
}

TEST_CASE("return-time predictor") {
  const torus::TorusPhaseSpace ps;
  const auto model = torus::SymbolField::model_cos();
  const Point x(0.3, 0.1);
  const auto p3 = spec::build_fourier_pair(spec::PairKind::Bump, 3.0);
  const double amp = std::sqrt(2.0) / torus::norm_X(ps, model, 0.0, x);
  CHECK(std::abs(amp - std::sqrt(2.0) / (std::sqrt(4 * pi) * 0.5 * std::sin(0.2 * pi))) < 1e-14);
  CHECK(amp == doctest::Approx(1.35744).epsilon(1e-5));
  for (int k : {100, 101}) {
    const auto single = spec::projector_kernel_asymptotic(ps, model, p3, kE, x, x, k);
    REQUIRE(single.terms.size() == 1);
    CHECK_FALSE(single.off_image);
    CHECK(std::abs(single.value - std::sqrt(k) / (2 * pi) * p3.fhat(0.0) * amp) < 1e-12);
  }

  const auto p7 = spec::build_fourier_pair(spec::PairKind::Bump, 7.0);
  const double period = 2.0 / std::sin(0.2 * pi);
  CHECK(period == doctest::Approx(3.4026).epsilon(1e-5));
  for (int k : {100, 101}) {
    const auto multi = spec::projector_kernel_asymptotic(ps, model, p7, kE, x, x, k);
    REQUIRE(multi.terms.size() == 5);
    Complex sum = 0.0;
    for (const auto& term : multi.terms) {
      const int m = static_cast<int>(std::lround(term.t / period));
      CHECK(std::abs(term.t - m * period) < 1e-12);
      CHECK(term.winding == Eigen::Vector2i(m, 0));
      // m windings of the closed orbit contribute exp(-4 pi i k q m)
      const Complex expected = std::sqrt(k) / (2 * pi) * p7.fhat(term.t) * amp * std::polar(1.0, -4 * pi * k * 0.1 * m);
      CHECK(std::abs(term.value - expected) < 1e-10);
      sum += term.value;
    }
    CHECK(std::abs(sum - multi.value) < 1e-14);
    CHECK(std::abs(multi.value.imag()) < 1e-12);
    // the t = 0 term scales with fhat only
    CHECK(std::abs(multi.terms[2].value / p7.fhat(0.0) -
                   spec::projector_kernel_asymptotic(ps, model, p3, kE, x, x, k).value / p3.fhat(0.0)) < 1e-12);
  }

  // y on the other orbit of the level set
  const auto off = spec::projector_kernel_asymptotic(ps, model, p7, kE, Point(0.3, 0.9), x, 200);
  CHECK(off.off_image);
  CHECK(off.value == 0.0);
  CHECK(off.terms.empty());

  // transported point on the same orbit
  const auto moved = spec::projector_kernel_asymptotic(ps, model, p3, kE, Point(0.55, 0.1), x, 50);
  REQUIRE(moved.terms.size() == 2);
  CHECK(moved.terms[0].winding == Eigen::Vector2i(-1, 0));

  CHECK_THROWS_AS(spec::projector_kernel_asymptotic(ps, model, p3, 0.2, x, x, 50), ValidationError);
  CHECK_THROWS_AS(spec::projector_kernel_asymptotic(ps, model, p3, -1.0, Point(0.3, 0.5), Point(0.3, 0.5), 50),
                  NonRegularError);
  Eigen::Matrix2d lattice;
  lattice << 1.0, 0.5, 0.0, 1.0;
  CHECK_THROWS_AS(spec::projector_kernel_asymptotic(torus::TorusPhaseSpace(lattice), model, p3, kE, x, x, 50),
                  ValidationError);
}

TEST_CASE("exact projector against the predictor") {
  const torus::TorusPhaseSpace ps;
  const auto model = torus::SymbolField::model_cos();
  const Point x(0.3, 0.1);
  const auto pair = spec::build_fourier_pair(spec::PairKind::Bump, 3.0);
  const std::vector<int> ks{100, 200};
  const std::vector<std::pair<Point, Point>> pts{{x, x}, {Point(0.3, 0.9), x}, {Point(0.8, 0.1), x}};
  const auto rows = spec::projector_compare(ks, ps, model, pair, kE, pts);
  REQUIRE(rows.size() == 6);
  CHECK(rows[3].rel_err_modulus <= 0.05);
  CHECK(rows[3].decay_ratio <= 0.7);
  CHECK(std::isnan(rows[0].decay_ratio));
  CHECK(rows[4].off_image);
  CHECK(std::abs(rows[4].exact) < 1e-3 * std::sqrt(200 / (2 * pi)));
  CHECK(rows[5].terms == 2);
  CHECK(rows[5].rel_err_modulus <= 0.05);

  // the maximal-speed level gives the smallest relative error when every
  // level contributes a single return (periods 2/sin(2 pi q) exceed T)
  const auto narrow = spec::build_fourier_pair(spec::PairKind::Bump, 1.5);
  double best = 1.0;
  double at_quarter = 1.0;
  for (double q : {0.1, 0.17, 0.25, 0.33, 0.4}) {
    const Point z(0.3, q);
    const double e = std::cos(2 * pi * q);
    const std::vector<std::pair<Point, Point>> diag{{z, z}};
    const std::vector<int> one{100};
    const auto row = spec::projector_compare(one, ps, model, narrow, e, diag)[0];
    CHECK(row.terms == 1);
    const double err = row.rel_err_modulus;
    if (q == 0.25) {
      at_quarter = err;
    } else {
      best = std::min(best, err);
    }
  }
  CHECK(at_quarter < best);
}
