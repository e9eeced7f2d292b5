#include "toeplitz/acceptance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <random>
#include <sstream>

#include "toeplitz/errors.hpp"
#include "toeplitz/propkern.hpp"
#include "toeplitz/specproj.hpp"
#include "toeplitz/symplin.hpp"
#include "toeplitz/thetaq.hpp"
#include "toeplitz/torusgeo.hpp"

namespace toeplitz::acceptance {

namespace {

constexpr double kPi = std::numbers::pi;
using Complex = std::complex<double>;
using torus::Point;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

CriterionResult make(std::string id, std::string description, double measured, double bound, bool pass,
                     std::string note = {}, bool gating = true) {
  return {std::move(id), std::move(description), measured, bound, pass, gating, std::move(note)};
}

const torus::TorusPhaseSpace& space() {
  static const torus::TorusPhaseSpace ps;
  return ps;
}

CriterionResult a1() {
  double worst = 0.0;
  std::string note;
  for (int k : {5, 10, 20, 50}) {
    const theta::QuantumSpace qs(k);
    const Eigen::MatrixXcd g = theta::gram_matrix(qs);
    const double d = (g - Eigen::MatrixXcd::Identity(qs.dim(), qs.dim())).cwiseAbs().maxCoeff();
    worst = std::max(worst, d);
    if (k == 5) {
      note = "basis gauge " + theta::gauge_name(qs.gauge()) + " (constant-phase defect " +
             num(qs.selection().constant_phase_defect) + ")";
    }
  }
  return make("A1", "Gram matrix orthonormality, k in {5,10,20,50}", worst, 1e-8, worst <= 1e-8, note);
}

CriterionResult a2(std::mt19937_64& rng) {
  const theta::QuantumSpace qs(100);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    const Point x(u(rng), u(rng));
    worst = std::max(worst, std::abs(theta::bergman_diag(qs, x) / (100 / (2 * kPi)) - 1.0));
  }
  return make("A2", "Bergman diagonal equals k/2pi at k=100, 5 random points", worst, 1e-3, worst <= 1e-3);
}

// Modulus error of the square-root-exponent alternative (1 + a^2)^{-1/2}.
double alternative_modulus_error(const std::vector<prop::KernelSample>& rows, double q) {
  double worst = 0.0;
  for (const auto& r : rows) {
    const double a = kPi * r.t * std::cos(2 * kPi * q) / 2;
    const double alt = r.k / (2 * kPi) / std::sqrt(1 + a * a);
    worst = std::max(worst, std::abs(std::abs(r.exact) - alt) / alt);
  }
  return worst;
}

std::vector<CriterionResult> a3_a4() {
  const auto& ps = space();
  const auto model = torus::SymbolField::model_cos();
  const Point x(0.3, 0.1);
  const theta::QuantumSpace q100(100);
  const auto op100 = theta::model_operator(q100);
  const auto short_grid = torus::time_grid(0.0, 0.1, 0.001);
  const auto rows = prop::graph_compare(q100, op100, ps, model, x, short_grid);
  const double err = prop::max_rel_err_modulus(rows);

  const auto long_grid = torus::time_grid(0.0, 1.0, 0.01);
  const auto long100 = prop::graph_compare(q100, op100, ps, model, x, long_grid);
  const theta::QuantumSpace q50(50);
  const auto long50 = prop::graph_compare(q50, theta::model_operator(q50), ps, model, x, long_grid);
  const double e100 = prop::max_rel_err_modulus(long100);
  const double e50 = prop::max_rel_err_modulus(long50);

  const double alt_short = alternative_modulus_error(rows, 0.1);
  const double alt_long = alternative_modulus_error(long100, 0.1);
  const bool quarter_wins = e100 < alt_long && err < alt_short;
  std::string note = "modulus exponent: (1+a^2)^(-1/4) " + std::string(quarter_wins ? "wins" : "loses") +
                     " (max rel err t<=0.1: " + num(err) + " vs " + num(alt_short) + " for (1+a^2)^(-1/2); t<=1: " +
                     num(e100) + " vs " + num(alt_long) + ")";
  double phase = 0.0;
  for (const auto& r : rows) phase = std::max(phase, std::abs(r.phase_err));
  note += "; max phase error " + num(phase) + " rad";

  std::vector<CriterionResult> out;
  out.push_back(make("A3", "propagator graph kernel, k=100, (0.3,0.1), t in [0,0.1], 101 samples", err, 0.02,
                     err <= 0.02, note));
  const double ratio = e100 / e50;
  out.push_back(make("A4", "propagator O(1/k) trend on t in [0,1]: err(k=100)/err(k=50)", ratio, 0.65,
                     ratio <= 0.65, "err(50)=" + num(e50) + ", err(100)=" + num(e100)));
  return out;
}

CriterionResult a5() {
  const std::vector<int> ks{50, 100};
  const auto rep = prop::offgraph_probe(ks, space(), torus::SymbolField::model_cos(), Point(0.3, 0.1), 0.5,
                                        Eigen::Vector2d(0.2, 0.0));
  return make("A5", "off-graph decay order log2(|K_50|/|K_100|), offset 0.2 in p, t=0.5", rep.min_order, 3.0,
              rep.min_order >= 3.0, "|K_50|=" + num(rep.abs_kernel[0]) + ", |K_100|=" + num(rep.abs_kernel[1]));
}

CriterionResult a6(std::mt19937_64& rng) {
  double worst = 0.0;
  for (int n : {1, 2, 3}) {
    for (int i = 0; i < 1000; ++i) {
      const symplin::LinearSymplectomorphism g(symplin::random_symplectic(n, rng, 0.7));
      const Complex hd = symplin::holomorphic_determinant(g);
      worst = std::max(worst, std::abs(hd - symplin::polar_determinant(g)) / (1.0 + std::abs(hd)));
    }
  }
  return make("A6", "polar formula, 1000 random symplectic matrices for each n in {1,2,3}", worst, 1e-9,
              worst <= 1e-9);
}

CriterionResult a7() {
  const double c = 0.7;
  const int k = 100;
  const auto& ps = space();
  const auto model = torus::SymbolField::model_cos();
  const theta::QuantumSpace qs(k);
  const auto op = theta::model_operator(qs);
  const auto grid = torus::time_grid(0.0, 1.0, 0.05);
  const auto base = prop::graph_compare(qs, op, ps, model, Point(0.3, 0.1), grid);
  const auto moved =
      prop::graph_compare(qs, op.shifted(c / k), ps, model.with_subprincipal_shift(c), Point(0.3, 0.1), grid);
  double exact = 0.0;
  double pred = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Complex f = std::polar(1.0, -c * grid[i]);
    exact = std::max(exact, std::abs(moved[i].exact - f * base[i].exact) / std::abs(base[i].exact));
    pred = std::max(pred, std::abs(moved[i].predicted - f * base[i].predicted) / std::abs(base[i].predicted));
  }
  const double worst = std::max(exact, pred);
  return make("A7", "constant subprincipal shift c=0.7 gives exp(-ict) on exact and predicted kernels", worst, 1e-12,
              worst <= 1e-12, "exact " + num(exact) + ", predicted " + num(pred));
}

struct ProjectorDiagonal {
  double exact100 = 0.0;
  double exact200 = 0.0;
};

std::vector<CriterionResult> a8_a9_a10() {
  const auto& ps = space();
  const auto model = torus::SymbolField::model_cos();
  const Point x(0.3, 0.1);
  const double E = std::cos(0.2 * kPi);
  const auto p3 = spec::build_fourier_pair(spec::PairKind::Bump, 3.0);
  const auto p7 = spec::build_fourier_pair(spec::PairKind::Bump, 7.0);
  const double amp = std::sqrt(2.0) / torus::norm_X(ps, model, 0.0, x);

  double stated[2];
  double derived[2];
  double three_term = 0.0;
  double single_term = 0.0;
  double all_terms = 0.0;
  std::size_t n_terms = 0;
  for (int i = 0; i < 2; ++i) {
    const int k = i == 0 ? 100 : 200;
    const theta::QuantumSpace qs(k);
    const auto op = theta::model_operator(qs);
    const Complex ex3 = spec::projector_kernel_exact(qs, op, p3, E, x, x);
    const double stated_pred = std::sqrt(k / (2 * kPi)) * p3.fhat(0.0) * amp;
    stated[i] = prop::rel_err_modulus(ex3, stated_pred);
    derived[i] = prop::rel_err_modulus(ex3, spec::projector_kernel_asymptotic(ps, model, p3, E, x, x, k).value);
    if (k == 200) {
      const Complex ex7 = spec::projector_kernel_exact(qs, op, p7, E, x, x);
      const auto pred = spec::projector_kernel_asymptotic(ps, model, p7, E, x, x, k);
      Complex three = 0.0;
      Complex single = 0.0;
      for (const auto& term : pred.terms) {
        if (std::abs(term.t) < 4.0) three += term.value;
        if (term.t == 0.0) single = term.value;
      }
      three_term = prop::rel_err_modulus(ex7, three);
      single_term = prop::rel_err_modulus(ex7, single);
      all_terms = prop::rel_err_modulus(ex7, pred.value);
      n_terms = pred.terms.size();
    }
  }
  std::vector<CriterionResult> out;
  const double r_stated = stated[1] / stated[0];
  out.push_back(make("A8", "projector diagonal vs (k/2pi)^(1/2) fhat(0) sqrt2/|X|, k=200 err <= 5% and ratio <= 0.7",
                     stated[1], 0.05, stated[1] <= 0.05 && r_stated <= 0.7,
                     "err(100)=" + num(stated[0]) + ", err(200)=" + num(stated[1]) + ", ratio " + num(r_stated) +
                         "; exact/predicted tends to (2pi)^(-1/2), see A8-derived"));
  const double r_derived = derived[1] / derived[0];
  out.push_back(make("A8-derived", "A8 checks with prefactor k^(1/2)/(2pi)", derived[1], 0.05,
                     derived[1] <= 0.05 && r_derived <= 0.7,
                     "err(100)=" + num(derived[0]) + ", err(200)=" + num(derived[1]) + ", ratio " + num(r_derived),
                     false));
  const double degrade = single_term / three_term;
  out.push_back(make("A9", "three-term return sum at T=7, k=200 within 10%; dropping +-3.4026 worsens error >= 2x",
                     three_term, 0.10, three_term <= 0.10 && degrade >= 2.0,
                     "three-term err " + num(three_term) + ", t=0 only err " + num(single_term) + " (x" +
                         num(degrade) + "); full predictor with " + std::to_string(n_terms) + " terms err " +
                         num(all_terms)));

  const theta::QuantumSpace q50(50);
  const auto op50 = theta::model_operator(q50);
  double gap = 0.0;
  for (const auto& [y, z] : {std::pair<Point, Point>{x, x}, {Point(0.8, 0.9), x}, {Point(0.55, 0.1), x}}) {
    const Complex direct = spec::projector_kernel_exact(q50, op50, p3, E, y, z);
    const Complex timed = spec::projector_kernel_time_route(q50, op50, p3, E, y, z, 1024);
    gap = std::max(gap, std::abs(direct - timed) / std::abs(direct));
  }
  out.push_back(make("A10", "spectral sum vs time quadrature of the propagator, k=50", gap, 1e-6, gap <= 1e-6));
  return out;
}

std::vector<CriterionResult> a11() {
  const auto& ps = space();
  const auto grid = torus::time_grid(0.0, 1.0, 1e-3);
  double routes = 0.0;
  const auto generic = torus::SymbolField::from_expression("cos(2*pi*q)+0.3*sin(2*pi*p)");
  for (const auto& [sym, x] : {std::pair{torus::SymbolField::model_cos(), Point(0.3, 0.1)},
                               std::pair{generic, Point(0.21, 0.33)}}) {
    const auto tr = torus::integrate_flow(ps, sym, x, grid);
    const auto a = torus::rho_graph(ps, tr);
    const auto b = torus::rho_graph_frame(ps, tr);
    for (std::size_t i = 0; i < a.size(); ++i) routes = std::max(routes, std::abs(a[i] - b[i]) / std::abs(a[i]));
  }

  const auto model = torus::SymbolField::model_cos();
  double ratio = 0.0;
  double literal = 0.0;
  double diagonal = 0.0;
  for (double q : {0.1, 0.23, 0.37, 0.81}) {
    const Point x(0.3, q);
    const std::array<double, 1> zero{0.0};
    const auto tr = torus::integrate_flow(ps, model, x, zero);
    const Complex rho0 = torus::rho_graph(ps, tr)[0];
    const Complex rhol0 = torus::rho_level(ps, model, tr, model.H(0.0, x))[0];
    const double nx = torus::norm_X(ps, model, 0.0, x);
    ratio = std::max(ratio, std::abs(rhol0 / rho0 - 2.0 / (nx * nx)) / (2.0 / (nx * nx)));
    const Complex b = torus::b_coefficient(ps, model, x, Eigen::Vector2d(0.0, 1.0));
    literal = std::max(literal, std::abs(rhol0 - 1.0 / b) * std::abs(b));

    // diagonal of M x conj(M): omega (+) -omega, j (+) -j, field (X, 0)
    Eigen::MatrixXd om = Eigen::MatrixXd::Zero(4, 4);
    om.topLeftCorner(2, 2) = ps.omega_matrix();
    om.bottomRightCorner(2, 2) = -ps.omega_matrix();
    Eigen::MatrixXd cs = Eigen::MatrixXd::Zero(4, 4);
    cs.topLeftCorner(2, 2) = ps.complex_structure();
    cs.bottomRightCorner(2, 2) = -ps.complex_structure();
    Eigen::MatrixXd lag(4, 2);
    lag << 1, 0, 0, 1, 1, 0, 0, 1;
    Eigen::VectorXd field = Eigen::VectorXd::Zero(4);
    field.head(2) = torus::hamiltonian_vector_field(model, 0.0, x);
    const Complex bd = symplin::b_coefficient(field, lag, om, cs);
    diagonal = std::max(diagonal, std::abs(rhol0 - rho0 / bd) * std::abs(bd));
  }
  std::vector<CriterionResult> out;
  const double normalized = std::max({routes / 1e-9, ratio / 1e-10, literal / 1e-10});
  out.push_back(make("A11", "rho route cross-check, rho'_0/rho_0 = 2|X|^-2, rho'_0 = 1/B for {p=const}", normalized,
                     1.0, normalized <= 1.0,
                     "residual/tolerance; routes " + num(routes) + " (1e-9), ratio " + num(ratio) +
                         " (1e-10), |rho'_0 B - 1| " + num(literal) + " (1e-10)"));
  out.push_back(make("A11a", "rho determinant route vs frame route, t in [0,1]", routes, 1e-9, routes <= 1e-9, {}, false));
  out.push_back(make("A11b", "rho'_0/rho_0 = 2|X|^-2", ratio, 1e-10, ratio <= 1e-10, {}, false));
  out.push_back(make("A11c", "rho'_0 B(0,x) = 1 with B from Gamma_0 = {p=const}", literal, 1e-10, literal <= 1e-10,
                     "B = pi sin^2(2 pi q) gives rho'_0 B = 2", false));
  out.push_back(make("A11c-diagonal", "rho'_0 B(0,x) = rho_0 with B from the diagonal of M x conj(M)", diagonal, 1e-10,
                     diagonal <= 1e-10, "B = |X|^2/2", false));
  return out;
}

CriterionResult a12() {
  const auto& ps = space();
  const auto grid = torus::time_grid(0.0, 1.0, 1e-3);
  double jump = 0.0;
  double square = 0.0;
  const auto generic = torus::SymbolField::from_expression("cos(2*pi*q)+0.3*sin(2*pi*p)");
  for (const auto& [sym, x] : {std::pair{torus::SymbolField::model_cos(), Point(0.3, 0.1)},
                               std::pair{torus::SymbolField::model_cos(), Point(0.5, 0.7)},
                               std::pair{generic, Point(0.21, 0.33)}}) {
    const auto tr = torus::integrate_flow(ps, sym, x, grid);
    const auto rho = torus::rho_graph(ps, tr);
    const auto half = torus::rho_graph_half(ps, tr);
    for (std::size_t i = 0; i < half.size(); ++i) {
      square = std::max(square, std::abs(half[i].value * half[i].value - rho[i]) / std::abs(rho[i]));
      if (i > 0) jump = std::max(jump, std::abs(half[i].branch_angle - half[i - 1].branch_angle));
    }
  }
  return make("A12", "branch continuity of rho_t^(1/2) on t in [0,1] step 1e-3", jump, kPi / 4,
              jump < kPi / 4 && square <= 1e-12, "squared path residual " + num(square) + " (1e-12)");
}

}  // namespace

std::uint64_t seed_from_env() {
  const char* env = std::getenv("TP_SEED");
  if (env == nullptr || *env == '\0') return SuiteOptions{}.seed;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0') throw ConfigError("TP_SEED must be a non-negative integer");
  return v;
}

std::vector<CriterionResult> run_all(const SuiteOptions& opts) {
  std::vector<CriterionResult> out;
  std::mt19937_64 rng(opts.seed);
  auto add = [&](CriterionResult r) {
    if (opts.on_result) opts.on_result(r);
    out.push_back(std::move(r));
  };
  auto guarded = [&](const std::string& id, const std::function<std::vector<CriterionResult>()>& fn) {
    try {
      for (auto& r : fn()) add(std::move(r));
    } catch (const std::exception& e) {
      add(make(id, "evaluation raised an error", std::nan(""), 0.0, false, e.what()));
    }
  };
  guarded("A1", [] { return std::vector{a1()}; });
  guarded("A2", [&] { return std::vector{a2(rng)}; });
  guarded("A3", a3_a4);
  guarded("A5", [] { return std::vector{a5()}; });
  guarded("A6", [&] { return std::vector{a6(rng)}; });
  guarded("A7", [] { return std::vector{a7()}; });
  guarded("A8", a8_a9_a10);
  guarded("A11", a11);
  guarded("A12", [] { return std::vector{a12()}; });
  return out;
}

bool all_gating_pass(const std::vector<CriterionResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CriterionResult& r) { return !r.gating || r.pass; });
}

std::string format_line(const CriterionResult& r) {
  std::ostringstream os;
  char head[160];
  std::snprintf(head, sizeof head, "%-14s %s  measured=%-12s bound=%-10s ", r.id.c_str(),
                r.pass ? "PASS" : "FAIL", num(r.measured).c_str(), num(r.bound).c_str());
  os << head << r.description;
  if (!r.gating) os << " (diagnostic)";
  if (!r.note.empty()) os << " [" << r.note << "]";
  return os.str();
}

}  // namespace toeplitz::acceptance
