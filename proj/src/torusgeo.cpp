#include "toeplitz/torusgeo.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "toeplitz/errors.hpp"

namespace toeplitz::torus {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFdStep = 1e-5;

Jet finite_difference_jet(const SymbolField::Scalar& f, double t, double p, double q) {
  const double h = kFdStep;
  const double f0 = f(t, p, q);
  const double fpp_ = f(t, p + h, q);
  const double fpm = f(t, p - h, q);
  const double fqp = f(t, p, q + h);
  const double fqm = f(t, p, q - h);
  const double fpq = (f(t, p + h, q + h) - f(t, p + h, q - h) - f(t, p - h, q + h) + f(t, p - h, q - h)) /
                     (4.0 * h * h);
  return {f0,
          (fpp_ - fpm) / (2.0 * h),
          (fqp - fqm) / (2.0 * h),
          (fpp_ - 2.0 * f0 + fpm) / (h * h),
          fpq,
          (fqp - 2.0 * f0 + fqm) / (h * h)};
}

using State = std::array<double, 9>;  // p, q, M00, M01, M10, M11, int H, int Hsub, int alpha

State derivative(const TorusPhaseSpace& ps, const SymbolField& sym, double t, const State& y) {
  const Point x(y[0], y[1]);
  const Jet h = sym.principal(t, x(0), x(1));
  const double xp = -h.dq / kSymplecticArea;
  const double xq = h.dp / kSymplecticArea;
  // DX = [[-H_pq, -H_qq], [H_pp, H_pq]] / 4 pi
  const double a = -h.dpq / kSymplecticArea;
  const double b = -h.dqq / kSymplecticArea;
  const double c = h.dpp / kSymplecticArea;
  const double d = h.dpq / kSymplecticArea;
  const Eigen::Vector2d al = ps.alpha(x);
  State dy;
  dy[0] = xp;
  dy[1] = xq;
  dy[2] = a * y[2] + b * y[4];
  dy[3] = a * y[3] + b * y[5];
  dy[4] = c * y[2] + d * y[4];
  dy[5] = c * y[3] + d * y[5];
  dy[6] = h.v;
  dy[7] = sym.Hsub(t, x);
  dy[8] = al(0) * xp + al(1) * xq;
  return dy;
}

State rk4(const TorusPhaseSpace& ps, const SymbolField& sym, double t0, double t1, const State& y0, int n) {
  const double h = (t1 - t0) / n;
  State y = y0;
  auto axpy = [](const State& base, double s, const State& k) {
    State r;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = base[i] + s * k[i];
    return r;
  };
  for (int i = 0; i < n; ++i) {
    const double t = t0 + i * h;
    const State k1 = derivative(ps, sym, t, y);
    const State k2 = derivative(ps, sym, t + 0.5 * h, axpy(y, 0.5 * h, k1));
    const State k3 = derivative(ps, sym, t + 0.5 * h, axpy(y, 0.5 * h, k2));
    const State k4 = derivative(ps, sym, t + h, axpy(y, h, k3));
    for (std::size_t j = 0; j < y.size(); ++j) y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  }
  return y;
}

void check_monotone_grid(std::span<const double> times) {
  if (times.empty() || times[0] != 0.0) throw ValidationError("time grid must start at 0");
  if (times.size() < 2) return;
  const bool increasing = times[1] > times[0];
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double step = times[i] - times[i - 1];
    if (step == 0.0 || (step > 0.0) != increasing) {
      throw ValidationError("time grid must be strictly monotone");
    }
  }
}

}  // namespace

TorusPhaseSpace::TorusPhaseSpace() : lattice_(Eigen::Matrix2d::Identity()) {}

TorusPhaseSpace::TorusPhaseSpace(const Eigen::Matrix2d& lattice) : lattice_(lattice) {
  const double area = kSymplecticArea * lattice_.determinant();
  if (std::abs(area - kSymplecticArea) > 1e-10 * kSymplecticArea) {
    throw ValidationError("lattice must have symplectic volume 4 pi (positively oriented, det 1)");
  }
}

bool TorusPhaseSpace::standard_lattice() const {
  return (lattice_ - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() == 0.0;
}

double TorusPhaseSpace::omega(const Eigen::Vector2d& u, const Eigen::Vector2d& v) const {
  return kSymplecticArea * (u(0) * v(1) - u(1) * v(0));
}

Eigen::Matrix2d TorusPhaseSpace::omega_matrix() const {
  return kSymplecticArea * symplin::symplectic_form(1);
}

Eigen::Matrix2d TorusPhaseSpace::complex_structure() const {
  return symplin::standard_complex_structure(1);
}

Eigen::Vector2d TorusPhaseSpace::alpha(const Point& x) const {
  return {-2.0 * kPi * x(1), 2.0 * kPi * x(0)};
}

TorusPhaseSpace::Reduced TorusPhaseSpace::reduce(const Point& x) const {
  const Eigen::Vector2d c = lattice_.inverse() * x;
  Eigen::Vector2i w(static_cast<int>(std::floor(c(0))), static_cast<int>(std::floor(c(1))));
  Point r = x - lattice_ * w.cast<double>();
  return {r, w};
}

Eigen::Vector2d TorusPhaseSpace::nearest_offset(const Point& x, const Point& y, Eigen::Vector2i* winding) const {
  const Eigen::Vector2d d = x - y;
  const Eigen::Vector2d c = lattice_.inverse() * d;
  const Eigen::Vector2i w(static_cast<int>(std::lround(c(0))), static_cast<int>(std::lround(c(1))));
  if (winding != nullptr) *winding = w;
  return d - lattice_ * w.cast<double>();
}

double TorusPhaseSpace::lattice_distance(const Point& x, const Point& y) const {
  return nearest_offset(x, y).norm();
}

double TorusPhaseSpace::curvature_defect() const {
  const double h = 1e-4;
  double worst = 0.0;
  for (double p : {0.1, 0.45, 0.8}) {
    for (double q : {0.05, 0.5, 0.95}) {
      const double dq_alpha_p = (alpha({p, q + h})(0) - alpha({p, q - h})(0)) / (2.0 * h);
      const double dp_alpha_q = (alpha({p + h, q})(1) - alpha({p - h, q})(1)) / (2.0 * h);
      worst = std::max(worst, std::abs(dp_alpha_q - dq_alpha_p - kSymplecticArea));
    }
  }
  return worst;
}

SymbolField SymbolField::model_cos() {
  SymbolField s;
  s.principal_ = [](double, double, double q) {
    const double c = std::cos(2.0 * kPi * q);
    const double sn = std::sin(2.0 * kPi * q);
    return Jet{c, 0.0, -2.0 * kPi * sn, 0.0, 0.0, -4.0 * kPi * kPi * c};
  };
  s.subprincipal_ = [](double, double, double) { return Jet::constant(0.0); };
  s.autonomous_ = true;
  s.model_shear_ = true;
  s.constant_sub_ = 0.0;
  s.name_ = "model-cos";
  return s;
}

SymbolField SymbolField::from_expression(const std::string& principal, const std::string& subprincipal) {
  const auto h = expr::Expression::parse(principal);
  const auto hs = expr::Expression::parse(subprincipal);
  SymbolField s;
  s.principal_ = [h](double t, double p, double q) { return h.eval(t, p, q); };
  s.subprincipal_ = [hs](double t, double p, double q) { return hs.eval(t, p, q); };
  s.autonomous_ = !h.depends_on_time() && !hs.depends_on_time();
  const Jet probe = hs.eval(0.0, 0.123, 0.456);
  if (!hs.depends_on_time() && probe.is_constant() && hs.eval(0.0, 0.789, 0.321).is_constant()) {
    s.constant_sub_ = probe.v;
  }
  s.name_ = principal;
  if (s.periodicity_defect() > 1e-12) {
    throw ValidationError("symbol '" + principal + "' is not periodic under the lattice");
  }
  return s;
}

SymbolField SymbolField::from_functions(Scalar principal, Scalar subprincipal, bool autonomous, std::string name) {
  SymbolField s;
  s.principal_ = [principal](double t, double p, double q) { return finite_difference_jet(principal, t, p, q); };
  s.subprincipal_ = [subprincipal](double t, double p, double q) {
    return finite_difference_jet(subprincipal, t, p, q);
  };
  s.autonomous_ = autonomous;
  s.name_ = std::move(name);
  return s;
}

SymbolField SymbolField::with_subprincipal_shift(double c) const {
  SymbolField s = *this;
  auto base = subprincipal_;
  s.subprincipal_ = [base, c](double t, double p, double q) { return base(t, p, q) + Jet::constant(c); };
  if (constant_sub_) s.constant_sub_ = *constant_sub_ + c;
  return s;
}

SymbolField SymbolField::with_laplacian_subprincipal() const {
  SymbolField s = *this;
  auto base = subprincipal_;
  auto h = principal_;
  s.subprincipal_ = [base, h](double t, double p, double q) {
    const Jet j = h(t, p, q);
    return base(t, p, q) + Jet::constant((j.dpp + j.dqq) / (4.0 * kSymplecticArea));
  };
  s.constant_sub_.reset();
  s.model_shear_ = false;
  return s;
}

double SymbolField::periodicity_defect() const {
  double worst = 0.0;
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) {
      const double p = (i + 0.31) / 7.0;
      const double q = (j + 0.17) / 7.0;
      const double h0 = principal_(0.0, p, q).v;
      const double scale = std::max(1.0, std::abs(h0));
      worst = std::max(worst, std::abs(principal_(0.0, p + 1.0, q).v - h0) / scale);
      worst = std::max(worst, std::abs(principal_(0.0, p, q + 1.0).v - h0) / scale);
    }
  }
  return worst;
}

Eigen::Vector2d hamiltonian_vector_field(const SymbolField& sym, double t, const Point& x) {
  const Jet h = sym.principal(t, x(0), x(1));
  return {-h.dq / kSymplecticArea, h.dp / kSymplecticArea};
}

Eigen::Matrix2d field_derivative(const SymbolField& sym, double t, const Point& x) {
  const Jet h = sym.principal(t, x(0), x(1));
  Eigen::Matrix2d d;
  d << -h.dpq, -h.dqq, h.dpp, h.dpq;
  return d / kSymplecticArea;
}

double field_sup(const SymbolField& sym, std::span<const double> times) {
  double sup = 0.0;
  std::vector<double> ts(times.begin(), times.end());
  if (ts.empty()) ts.push_back(0.0);
  if (sym.autonomous()) ts.assign(1, ts.front());
  for (double t : ts) {
    for (int i = 0; i < 16; ++i) {
      for (int j = 0; j < 16; ++j) {
        const Point x((i + 0.5) / 16.0, (j + 0.5) / 16.0);
        sup = std::max(sup, hamiltonian_vector_field(sym, t, x).norm());
      }
    }
  }
  return sup;
}

std::vector<double> time_grid(double a, double b, double max_step) {
  if (!(max_step > 0.0)) throw ValidationError("time_grid: step must be positive");
  const int n = std::max(1, static_cast<int>(std::ceil(std::abs(b - a) / max_step - 1e-9)));
  std::vector<double> g(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) g[static_cast<std::size_t>(i)] = a + (b - a) * i / n;
  g.back() = b;
  return g;
}

std::vector<double> grid_through(std::span<const double> targets, double max_step, std::vector<std::size_t>& index) {
  std::vector<double> grid{0.0};
  index.clear();
  for (double t : targets) {
    if (t != grid.back()) {
      const auto piece = time_grid(grid.back(), t, max_step);
      grid.insert(grid.end(), piece.begin() + 1, piece.end());
    }
    index.push_back(grid.size() - 1);
  }
  return grid;
}

Trajectory integrate_flow(const TorusPhaseSpace& ps, const SymbolField& sym, const Point& x,
                          std::span<const double> times, const FlowOptions& opts) {
  check_monotone_grid(times);
  Trajectory tr;
  tr.start = x;
  tr.times.assign(times.begin(), times.end());
  const std::size_t n = times.size();
  tr.lifted.resize(n);
  tr.points.resize(n);
  tr.jacobians.resize(n);
  tr.action_H.resize(n);
  tr.action_Hsub.resize(n);
  tr.conn_L.resize(n);
  tr.conn_K.assign(n, 0.0);

  if (sym.is_model_shear() && sym.constant_subprincipal()) {
    const double c0 = *sym.constant_subprincipal();
    const double s = std::sin(2.0 * kPi * x(1));
    const double c = std::cos(2.0 * kPi * x(1));
    for (std::size_t i = 0; i < n; ++i) {
      const double t = times[i];
      tr.lifted[i] = Point(x(0) + 0.5 * t * s, x(1));
      tr.jacobians[i] << 1.0, kPi * t * c, 0.0, 1.0;
      tr.action_H[i] = t * c;
      tr.action_Hsub[i] = c0 * t;
      tr.conn_L[i] = -kPi * x(1) * s * t;
      tr.points[i] = ps.reduce(tr.lifted[i]).point;
    }
    return tr;
  }

  const double h = opts.max_step / (1.0 + field_sup(sym, times));
  State y{x(0), x(1), 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0};
  auto store = [&](std::size_t i, const State& s) {
    tr.lifted[i] = Point(s[0], s[1]);
    tr.points[i] = ps.reduce(tr.lifted[i]).point;
    tr.jacobians[i] << s[2], s[3], s[4], s[5];
    tr.action_H[i] = s[6];
    tr.action_Hsub[i] = s[7];
    tr.conn_L[i] = s[8];
    const double det = tr.jacobians[i].determinant();
    if (std::abs(det - 1.0) > 1e-9 * std::max(1.0, tr.jacobians[i].squaredNorm())) {
      throw NumericalError("integrate_flow: Jacobian lost symplecticity (det = " + std::to_string(det) + ")");
    }
  };
  store(0, y);
  for (std::size_t i = 1; i < n; ++i) {
    const double t0 = times[i - 1];
    const double t1 = times[i];
    int steps = std::max(1, static_cast<int>(std::ceil(std::abs(t1 - t0) / h - 1e-9)));
    State coarse = rk4(ps, sym, t0, t1, y, steps);
    State fine = rk4(ps, sym, t0, t1, y, 2 * steps);
    int refinements = 0;
    for (;;) {
      double err = 0.0;
      for (std::size_t j = 0; j < y.size(); ++j) {
        err = std::max(err, std::abs(fine[j] - coarse[j]) / (15.0 * std::max(1.0, std::abs(fine[j]))));
      }
      if (err <= opts.tolerance) break;
      if (++refinements > opts.max_refinements) {
        throw NumericalError("integrate_flow: local error estimate " + std::to_string(err) +
                             " exceeds tolerance after step refinement");
      }
      steps *= 2;
      coarse = fine;
      fine = rk4(ps, sym, t0, t1, y, 2 * steps);
    }
    y = fine;
    store(i, y);
  }
  return tr;
}

Bundle parse_bundle(const std::string& tag) {
  if (tag == "L") return Bundle::L;
  if (tag == "K") return Bundle::K;
  throw ValidationError("unknown bundle tag '" + tag + "' (expected L or K)");
}

std::vector<Complex> transport_phase(const TorusPhaseSpace&, const Trajectory& traj, Bundle bundle) {
  const auto& conn = bundle == Bundle::L ? traj.conn_L : traj.conn_K;
  std::vector<Complex> out(conn.size());
  for (std::size_t i = 0; i < conn.size(); ++i) out[i] = std::polar(1.0, conn[i]);
  return out;
}

std::vector<double> prequantum_accumulator(const Trajectory& traj, int k) {
  std::vector<double> out(traj.times.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = -traj.action_Hsub[i] + static_cast<double>(k) * (traj.conn_L[i] - traj.action_H[i]);
  }
  return out;
}

std::vector<Complex> prequantum_phase(const SymbolField&, const Trajectory& traj, int k) {
  const auto acc = prequantum_accumulator(traj, k);
  std::vector<Complex> out(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = std::polar(1.0, acc[i]);
  return out;
}

std::vector<Complex> rho_graph(const TorusPhaseSpace& ps, const Trajectory& traj) {
  const auto tk = transport_phase(ps, traj, Bundle::K);
  std::vector<Complex> out(traj.times.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const symplin::LinearSymplectomorphism g(traj.jacobians[i]);
    out[i] = 1.0 / symplin::holomorphic_determinant(g) / tk[i];
  }
  return out;
}

std::vector<Complex> rho_graph_frame(const TorusPhaseSpace&, const Trajectory& traj) {
  std::vector<Complex> out(traj.times.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    // c_t times exp(-i int f_K), with f_K the K connection coefficient along the path
    out[i] = symplin::graph_pairing_ratio(traj.jacobians[i]) * std::polar(1.0, -traj.conn_K[i]);
  }
  return out;
}

std::vector<BranchedPhase> rho_graph_half(const TorusPhaseSpace& ps, const Trajectory& traj) {
  const auto rho = rho_graph(ps, traj);
  return symplin::branch_sqrt_path(rho);
}

double norm_X(const TorusPhaseSpace& ps, const SymbolField& sym, double t, const Point& x) {
  const Eigen::Vector2d v = hamiltonian_vector_field(sym, t, x);
  const double n = std::sqrt(ps.omega(v, ps.complex_structure() * v));
  if (!(n >= kFieldThreshold)) {
    throw NonRegularError("Hamiltonian vector field vanishes at (" + std::to_string(x(0)) + ", " +
                          std::to_string(x(1)) + "): |X| = " + std::to_string(n));
  }
  return n;
}

std::vector<Complex> rho_level(const TorusPhaseSpace& ps, const SymbolField& sym, const Trajectory& traj,
                               double E) {
  if (!sym.autonomous()) throw ValidationError("rho_level: level sets need an autonomous symbol");
  if (std::abs(sym.H(0.0, traj.start) - E) > 1e-10) {
    throw ValidationError("rho_level: start point is not on the level set H = E");
  }
  norm_X(ps, sym, 0.0, traj.start);
  const Eigen::Vector2d vx = hamiltonian_vector_field(sym, 0.0, traj.start);
  const auto tk = transport_phase(ps, traj, Bundle::K);
  std::vector<Complex> out(traj.times.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    norm_X(ps, sym, traj.times[i], traj.lifted[i]);
    const Eigen::Vector2d vy = hamiltonian_vector_field(sym, traj.times[i], traj.lifted[i]);
    out[i] = symplin::level_set_factor(traj.jacobians[i], vx, vy, kSymplecticArea) / tk[i];
  }
  return out;
}

std::vector<BranchedPhase> rho_level_half(const TorusPhaseSpace& ps, const SymbolField& sym,
                                          const Trajectory& traj, double E) {
  const auto rho = rho_level(ps, sym, traj, E);
  return symplin::branch_sqrt_path(rho);
}

Complex b_coefficient(const TorusPhaseSpace& ps, const SymbolField& sym, const Point& x,
                      const Eigen::Vector2d& tangent) {
  if (tangent.norm() == 0.0) throw ValidationError("b_coefficient: zero tangent vector");
  const Eigen::Vector2d v = hamiltonian_vector_field(sym, 0.0, x);
  const Eigen::MatrixXd lag = tangent.normalized();
  return symplin::b_coefficient(v, lag, ps.omega_matrix(), ps.complex_structure());
}

std::vector<ReturnTime> return_times(const TorusPhaseSpace& ps, const SymbolField& sym, const Point& x,
                                     const Point& y, double t_min, double t_max) {
  if (!sym.autonomous()) throw ValidationError("return_times: autonomous symbol required");
  if (!(t_min <= t_max)) throw ValidationError("return_times: empty window");
  if (std::abs(sym.H(0.0, x) - sym.H(0.0, y)) > 1e-10) {
    throw ValidationError("return_times: x and y are not on the same level set");
  }
  norm_X(ps, sym, 0.0, x);
  std::vector<ReturnTime> out;

  if (sym.is_model_shear() && ps.standard_lattice()) {
    const double s = std::sin(2.0 * kPi * x(1));
    const double dq = x(1) - y(1);
    const double b = std::round(dq);
    if (std::abs(dq - b) > 1e-10) return out;  // y lies on the other orbit of this level
    // p_x + t s / 2 = p_y + a
    const double a_lo = x(0) - y(0) + 0.5 * s * (s > 0 ? t_min : t_max);
    const double a_hi = x(0) - y(0) + 0.5 * s * (s > 0 ? t_max : t_min);
    for (double a = std::ceil(a_lo - 1e-12); a <= a_hi + 1e-12; a += 1.0) {
      const double t = 2.0 * (y(0) + a - x(0)) / s;
      if (t < t_min - 1e-12 || t > t_max + 1e-12) continue;
      out.push_back({t, Eigen::Vector2i(static_cast<int>(a), static_cast<int>(b))});
    }
    std::sort(out.begin(), out.end(), [](const ReturnTime& l, const ReturnTime& r) { return l.t < r.t; });
    return out;
  }

  norm_X(ps, sym, 0.0, y);
  const Eigen::Vector2d xy = hamiltonian_vector_field(sym, 0.0, y);
  const double sample = std::min(0.01, 0.05 / (1.0 + field_sup(sym, {})));

  auto signed_gap = [&](const Point& lifted, Eigen::Vector2i* w) {
    const Eigen::Vector2d off = ps.nearest_offset(lifted, y, w);
    return std::pair<double, double>(off.dot(xy) / xy.squaredNorm(), off.norm());
  };

  auto scan = [&](double t_end) {
    if (t_end == 0.0) return;
    const auto grid = time_grid(0.0, t_end, sample);
    const Trajectory tr = integrate_flow(ps, sym, x, grid);
    std::vector<double> f(grid.size());
    std::vector<double> dist(grid.size());
    std::vector<Eigen::Vector2i> wind(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      auto [g, d] = signed_gap(tr.lifted[i], &wind[i]);
      f[i] = g;
      dist[i] = d;
    }
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      if (!(f[i] < 0.0 && f[i + 1] > 0.0) && !(f[i] > 0.0 && f[i + 1] < 0.0)) continue;
      if (wind[i] != wind[i + 1] || dist[i] > 0.25 || dist[i + 1] > 0.25) continue;
      // bisection on [grid[i], grid[i+1]] starting from the stored state
      double lo = 0.0;
      double hi = grid[i + 1] - grid[i];
      const Point base = tr.lifted[i];
      const double f_lo = f[i];
      auto point_at = [&](double dt) {
        const std::array<double, 2> g2{0.0, dt};
        const Trajectory piece = integrate_flow(ps, sym, base, g2);
        return Point(piece.lifted[1]);
      };
      for (int it = 0; it < 200 && std::abs(hi - lo) > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = signed_gap(point_at(mid), nullptr).first;
        if ((fm < 0.0) == (f_lo < 0.0)) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      const double dt = 0.5 * (lo + hi);
      Eigen::Vector2i w;
      const Point end = dt == 0.0 ? base : point_at(dt);
      const double miss = ps.nearest_offset(end, y, &w).norm();
      if (miss < 1e-9) out.push_back({grid[i] + dt, w});
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
      if (dist[i] < 1e-12) out.push_back({grid[i], wind[i]});
    }
  };
  if (t_min <= 0.0 && t_max >= 0.0) {
    Eigen::Vector2i w;
    if (ps.nearest_offset(x, y, &w).norm() < 1e-12) out.push_back({0.0, w});
  }
  if (t_max > 0.0) scan(t_max);
  if (t_min < 0.0) scan(t_min);
  std::sort(out.begin(), out.end(), [](const ReturnTime& l, const ReturnTime& r) { return l.t < r.t; });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const ReturnTime& l, const ReturnTime& r) { return std::abs(l.t - r.t) < 1e-9; }),
            out.end());
  std::vector<ReturnTime> in_window;
  for (const auto& r : out) {
    if (r.t >= t_min - 1e-12 && r.t <= t_max + 1e-12) in_window.push_back(r);
  }
  return in_window;
}

BoxResult box_operator(const TorusPhaseSpace&, const SymbolField& sym, double t, const Point& x) {
  const Jet h = sym.principal(t, x(0), x(1));
  // derivatives in w = sqrt(2 pi) z
  const double scale = 4.0 * kMetricScale;
  const Complex h_wwbar((h.dpp + h.dqq) / scale, 0.0);
  const Complex h_wbarwbar((h.dpp - h.dqq) / scale, 2.0 * h.dpq / scale);
  BoxResult r;
  r.box = h_wwbar + 0.5 * h_wbarwbar;
  r.theta = h_wwbar + h_wbarwbar;
  r.zeta = 0.5 * r.theta + sym.Hsub(t, x);
  return r;
}

}  // namespace toeplitz::torus
