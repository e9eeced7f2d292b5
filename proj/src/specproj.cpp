#include "toeplitz/specproj.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "toeplitz/errors.hpp"
#include "toeplitz/quadrature.hpp"

namespace toeplitz::spec {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPairTolerance = 1e-10;
constexpr double kLevelTolerance = 1e-10;

const quad::Rule& panel_rule() {
  static const quad::Rule rule = quad::gauss_legendre(kPanelNodes, -1.0, 1.0);
  return rule;
}

// Eigenvector amplitudes (V^T Psi(y))_l, (V^T Psi(x))_l with the metric weight folded in.
std::pair<Eigen::VectorXcd, Eigen::VectorXcd> spectral_amplitudes(const QuantumSpace& qs, const HermitianOperator& op,
                                                                  const Point& y, const Point& x) {
  Eigen::VectorXcd by = qs.basis_vector(y) * std::sqrt(qs.metric_weight(y(0), y(1)));
  Eigen::VectorXcd bx = qs.basis_vector(x) * std::sqrt(qs.metric_weight(x(0), x(1)));
  if (op.is_diagonal()) return {by, bx};
  return {op.eigenvectors().transpose() * by, op.eigenvectors().transpose() * bx};
}

}  // namespace

PairKind parse_pair_kind(const std::string& name) {
  if (name == "bump") return PairKind::Bump;
  if (name == "gaussian" || name == "gaussian-truncated") return PairKind::GaussianTruncated;
  throw ConfigError("unknown Fourier pair '" + name + "' (expected bump or gaussian)");
}

std::string pair_kind_name(PairKind kind) { return kind == PairKind::Bump ? "bump" : "gaussian-truncated"; }

FourierPair::FourierPair(PairKind kind, double support_T, int nodes) : kind_(kind), T_(support_T), nodes_(nodes) {
  if (!(support_T > 0.0) || !std::isfinite(support_T)) throw ValidationError("FourierPair: support must be positive");
  if (nodes < kPanelNodes) throw ValidationError("FourierPair: at least 16 nodes needed");
  f0_ = f_eval(0.0);
}

double FourierPair::fhat(double t) const {
  const double u = t / T_;
  if (!(std::abs(u) < 1.0)) return 0.0;
  if (kind_ == PairKind::Bump) return std::exp(-1.0 / (1.0 - u * u));
  const double sigma = T_ / 9.0;
  return std::exp(-t * t / (2.0 * sigma * sigma));
}

Complex FourierPair::f_eval(double E) const {
  const int panels = std::max(nodes_ / kPanelNodes, static_cast<int>(std::ceil(std::abs(E) * T_ / kPi)));
  const quad::Rule& base = panel_rule();
  const double h = 2.0 * T_ / panels;
  Complex sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = -T_ + (p + 0.5) * h;
    for (std::size_t i = 0; i < base.size(); ++i) {
      const double t = mid + 0.5 * h * base.nodes[i];
      sum += 0.5 * h * base.weights[i] * fhat(t) * std::polar(1.0, t * E);
    }
  }
  return sum / std::sqrt(2.0 * kPi);
}

FourierPair build_fourier_pair(PairKind kind, double support_T, int nodes) {
  FourierPair pair(kind, support_T, nodes);
  const FourierPair fine(kind, support_T, 2 * nodes);
  const double change = std::abs(fine.f0() - pair.f0());
  if (change > kPairTolerance) {
    throw ResolutionError("build_fourier_pair: f(0) moved by " + std::to_string(change) + " under node doubling; use more than " +
                          std::to_string(nodes) + " nodes");
  }
  return pair;
}

Complex projector_kernel_exact(const QuantumSpace& qs, const HermitianOperator& op, const FourierPair& pair,
                               double E, const Point& y, const Point& x) {
  const auto [ay, ax] = spectral_amplitudes(qs, op, y, x);
  const double k = static_cast<double>(qs.k());
  Complex sum = 0.0;
  for (int l = 0; l < op.dim(); ++l) {
    sum += pair.f_eval(k * (E - op.eigenvalues()(l))) * ay(l) * std::conj(ax(l));
  }
  return sum;
}

Complex projector_kernel_time_route(const QuantumSpace& qs, const HermitianOperator& op, const FourierPair& pair,
                                    double E, const Point& y, const Point& x, int intervals) {
  if (intervals < 2) throw ValidationError("projector_kernel_time_route: need at least two intervals");
  const double T = pair.support_T();
  const quad::Rule rule = quad::trapezoid(intervals + 1, -T, T);
  const double k = static_cast<double>(qs.k());
  Complex sum = 0.0;
  for (std::size_t j = 0; j < rule.size(); ++j) {
    const double t = rule.nodes[j];
    const double w = rule.weights[j] * pair.fhat(t);
    if (w == 0.0) continue;
    const Complex kernel = prop::kernel_eval(qs, prop::propagate_autonomous(op, t), y, x);
    sum += w * std::polar(1.0, k * t * E) * kernel;
  }
  return sum / std::sqrt(2.0 * kPi);
}

double projector_prefactor(int k) { return std::sqrt(static_cast<double>(k)) / (2.0 * kPi); }

ProjectorPrediction projector_kernel_asymptotic(const torus::TorusPhaseSpace& ps, const torus::SymbolField& sym,
                                                const FourierPair& pair, double E, const Point& y,
                                                const Point& x, int k) {
  if (!ps.standard_lattice()) {
    throw ValidationError("projector_kernel_asymptotic: lattice multipliers are implemented for Z^2 only");
  }
  if (!sym.autonomous()) throw ValidationError("projector_kernel_asymptotic: autonomous symbol required");
  if (std::abs(sym.H(0.0, x) - E) > kLevelTolerance || std::abs(sym.H(0.0, y) - E) > kLevelTolerance) {
    throw ValidationError("projector_kernel_asymptotic: x and y must lie on the level set H = E");
  }
  torus::norm_X(ps, sym, 0.0, x);
  torus::norm_X(ps, sym, 0.0, y);

  ProjectorPrediction out;
  const double T = pair.support_T();
  std::vector<torus::ReturnTime> returns;
  for (const auto& r : torus::return_times(ps, sym, x, y, -T, T)) {
    if (std::abs(r.t) < T) returns.push_back(r);
  }
  if (returns.empty()) {
    out.value = 0.0;
    out.off_image = true;
    return out;
  }

  const double pref = projector_prefactor(k);
  auto evaluate = [&](const std::vector<torus::ReturnTime>& part) {
    if (part.empty()) return;
    std::vector<double> targets;
    for (const auto& r : part) targets.push_back(r.t);
    std::vector<std::size_t> index;
    const auto grid = torus::grid_through(targets, prop::kPredictorStep, index);
    const auto tr = torus::integrate_flow(ps, sym, x, grid);
    const auto half = torus::rho_level_half(ps, sym, tr, E);
    const auto acc = torus::prequantum_accumulator(tr, k);
    for (std::size_t i = 0; i < part.size(); ++i) {
      const std::size_t g = index[i];
      ProjectorTerm term;
      term.t = part[i].t;
      term.winding = part[i].winding;
      term.fhat = pair.fhat(term.t);
      term.rho_level_half = half[g].value;
      const double lattice = -2.0 * kPi * k * (term.winding(0) * y(1) - term.winding(1) * y(0));
      term.phase = std::polar(1.0, acc[g] + k * term.t * E + lattice);
      term.value = pref * term.fhat * term.rho_level_half * term.phase;
      out.terms.push_back(term);
    }
  };
  std::vector<torus::ReturnTime> forward;
  std::vector<torus::ReturnTime> backward;
  for (const auto& r : returns) {
    if (r.t >= 0.0) forward.push_back(r);
  }
  for (auto it = returns.rbegin(); it != returns.rend(); ++it) {
    if (it->t < 0.0) backward.push_back(*it);
  }
  evaluate(forward);
  evaluate(backward);
  std::sort(out.terms.begin(), out.terms.end(), [](const ProjectorTerm& a, const ProjectorTerm& b) { return a.t < b.t; });
  out.value = 0.0;
  for (const auto& t : out.terms) out.value += t.value;
  return out;
}

std::vector<ProjectorRow> projector_compare(std::span<const int> levels, const torus::TorusPhaseSpace& ps,
                                            const torus::SymbolField& sym, const FourierPair& pair, double E,
                                            std::span<const std::pair<Point, Point>> points,
                                            const prop::OperatorFactory& make_op) {
  std::vector<ProjectorRow> rows;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> previous(points.size(), nan);
  for (int k : levels) {
    const QuantumSpace qs(k);
    const HermitianOperator op = make_op(qs);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& [y, x] = points[i];
      ProjectorRow row;
      row.k = k;
      row.x = x;
      row.y = y;
      row.exact = projector_kernel_exact(qs, op, pair, E, y, x);
      const auto pred = projector_kernel_asymptotic(ps, sym, pair, E, y, x, k);
      row.predicted = pred.value;
      row.off_image = pred.off_image;
      row.terms = static_cast<int>(pred.terms.size());
      row.rel_err_modulus = pred.off_image ? nan : prop::rel_err_modulus(row.exact, row.predicted);
      row.decay_ratio = row.rel_err_modulus / previous[i];
      previous[i] = row.rel_err_modulus;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace toeplitz::spec
