#include "toeplitz/propkern.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "toeplitz/errors.hpp"

namespace toeplitz::prop {

namespace {

constexpr double kPi = std::numbers::pi;

double unitarity_defect(const Eigen::MatrixXcd& u) {
  return (u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

Eigen::MatrixXcd spectral_exponential(const HermitianOperator& op, double factor) {
  const Eigen::VectorXcd phases =
      (Complex(0.0, -factor) * op.eigenvalues().cast<Complex>()).array().exp().matrix();
  if (op.is_diagonal()) return phases.asDiagonal();
  const Eigen::MatrixXcd& v = op.eigenvectors();
  return v * phases.asDiagonal() * v.adjoint();
}

// Basis vector with the square root of the metric weight folded in.
Eigen::VectorXcd weighted_basis(const QuantumSpace& qs, const Point& x) {
  return qs.basis_vector(x) * std::sqrt(qs.metric_weight(x(0), x(1)));
}

}  // namespace

Eigen::MatrixXcd propagate_autonomous(const HermitianOperator& op, double t) {
  return spectral_exponential(op, static_cast<double>(op.k()) * t);
}

std::vector<Eigen::MatrixXcd> propagate_timedep(const std::function<HermitianOperator(double)>& op_at,
                                                std::span<const double> tgrid) {
  if (tgrid.empty()) throw ValidationError("propagate_timedep: empty time grid");
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(tgrid.size());
  const HermitianOperator first = op_at(tgrid[0]);
  out.push_back(Eigen::MatrixXcd::Identity(first.dim(), first.dim()));
  for (std::size_t i = 1; i < tgrid.size(); ++i) {
    const double dt = tgrid[i] - tgrid[i - 1];
    const HermitianOperator mid = op_at(0.5 * (tgrid[i] + tgrid[i - 1]));
    const Eigen::MatrixXcd step = spectral_exponential(mid, static_cast<double>(mid.k()) * dt);
    const double local = unitarity_defect(step);
    if (local > kUnitarityTolerance) {
      throw NumericalError("propagate_timedep: step " + std::to_string(i) + " has unitarity defect " +
                           std::to_string(local) + "; refine the time grid");
    }
    out.push_back(step * out.back());
  }
  const double drift = unitarity_defect(out.back());
  if (drift > kUnitarityTolerance) {
    throw NumericalError("propagate_timedep: accumulated unitarity defect " + std::to_string(drift));
  }
  return out;
}

Complex kernel_eval(const QuantumSpace& qs, const Eigen::MatrixXcd& u, const Point& y, const Point& x) {
  const Eigen::VectorXcd by = weighted_basis(qs, y);
  const Eigen::VectorXcd bx = weighted_basis(qs, x);
  return by.transpose() * (u * bx.conjugate());
}

Complex kernel_eval_diagonal(const QuantumSpace& qs, const Eigen::VectorXcd& phases, const Point& y,
                             const Point& x) {
  const Eigen::VectorXcd by = weighted_basis(qs, y);
  const Eigen::VectorXcd bx = weighted_basis(qs, x);
  return (by.array() * phases.array() * bx.conjugate().array()).sum();
}

GraphPrediction asymptotic_graph_path(const torus::TorusPhaseSpace& ps, const torus::SymbolField& sym,
                                      const Point& x, std::span<const double> tgrid, int k) {
  for (std::size_t i = 1; i < tgrid.size(); ++i) {
    if (!(tgrid[i] > tgrid[i - 1])) throw ValidationError("asymptotic_graph_path: time grid must be ascending");
  }
  GraphPrediction out;
  out.times.assign(tgrid.begin(), tgrid.end());
  out.lifted.resize(tgrid.size());
  out.values.resize(tgrid.size());
  const double scale = static_cast<double>(k) / (2.0 * kPi);

  auto fill = [&](const std::vector<double>& targets, const std::vector<std::size_t>& slots) {
    if (targets.empty()) return;
    std::vector<std::size_t> index;
    const auto grid = torus::grid_through(targets, kPredictorStep, index);
    const auto tr = torus::integrate_flow(ps, sym, x, grid);
    const auto half = torus::rho_graph_half(ps, tr);
    const auto phase = torus::prequantum_phase(sym, tr, k);
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const std::size_t g = index[i];
      out.lifted[slots[i]] = tr.lifted[g];
      out.values[slots[i]] = scale * half[g].value * phase[g];
    }
  };

  std::vector<double> forward;
  std::vector<std::size_t> forward_slots;
  std::vector<double> backward;
  std::vector<std::size_t> backward_slots;
  for (std::size_t i = 0; i < tgrid.size(); ++i) {
    if (tgrid[i] >= 0.0) {
      forward.push_back(tgrid[i]);
      forward_slots.push_back(i);
    }
  }
  for (std::size_t i = tgrid.size(); i-- > 0;) {
    if (tgrid[i] < 0.0) {
      backward.push_back(tgrid[i]);
      backward_slots.push_back(i);
    }
  }
  fill(forward, forward_slots);
  fill(backward, backward_slots);
  return out;
}

Complex asymptotic_graph_kernel(const torus::TorusPhaseSpace& ps, const torus::SymbolField& sym,
                                const Point& x, double t, int k) {
  const std::array<double, 1> grid{t};
  return asymptotic_graph_path(ps, sym, x, grid, k).values[0];
}

double rel_err_modulus(Complex exact, Complex predicted) {
  return std::abs(std::abs(exact) - std::abs(predicted)) / std::abs(predicted);
}

double max_rel_err_modulus(std::span<const KernelSample> samples) {
  double m = 0.0;
  for (const auto& s : samples) m = std::max(m, s.rel_err_modulus);
  return m;
}

std::vector<KernelSample> graph_compare(const QuantumSpace& qs, std::span<const Eigen::MatrixXcd> props,
                                        const torus::TorusPhaseSpace& ps, const torus::SymbolField& sym,
                                        const Point& x, std::span<const double> tgrid) {
  if (props.size() != tgrid.size()) throw ValidationError("graph_compare: one propagator per time needed");
  const auto pred = asymptotic_graph_path(ps, sym, x, tgrid, qs.k());
  std::vector<KernelSample> out(tgrid.size());
  double previous = 0.0;
  for (std::size_t i = 0; i < tgrid.size(); ++i) {
    KernelSample& s = out[i];
    s.k = qs.k();
    s.t = tgrid[i];
    s.x = x;
    s.y = pred.lifted[i];
    s.exact = kernel_eval(qs, props[i], s.y, x);
    s.predicted = pred.values[i];
    s.rel_err_modulus = rel_err_modulus(s.exact, s.predicted);
    double phase = std::arg(s.exact / s.predicted);
    if (i > 0) phase += 2.0 * kPi * std::round((previous - phase) / (2.0 * kPi));
    s.phase_err = phase;
    previous = phase;
  }
  return out;
}

std::vector<KernelSample> graph_compare(const QuantumSpace& qs, const HermitianOperator& op,
                                        const torus::TorusPhaseSpace& ps, const torus::SymbolField& sym,
                                        const Point& x, std::span<const double> tgrid) {
  std::vector<Eigen::MatrixXcd> props;
  props.reserve(tgrid.size());
  for (double t : tgrid) props.push_back(propagate_autonomous(op, t));
  return graph_compare(qs, props, ps, sym, x, tgrid);
}

DecayReport offgraph_probe(std::span<const int> levels, const torus::TorusPhaseSpace& ps,
                           const torus::SymbolField& sym, const Point& x, double t,
                           const Eigen::Vector2d& offset, const OperatorFactory& make_op) {
  const double dist = ps.lattice_distance(Point::Zero(), offset);
  if (!(dist >= kMinOffGraphDistance)) {
    throw ValidationError("offgraph_probe: offset lies within " + std::to_string(kMinOffGraphDistance) +
                          " of the graph (lattice distance " + std::to_string(dist) + ")");
  }
  if (levels.size() < 2) throw ValidationError("offgraph_probe: need at least two levels");
  const auto grid = t == 0.0 ? std::vector<double>{0.0} : torus::time_grid(0.0, t, kPredictorStep);
  const auto tr = torus::integrate_flow(ps, sym, x, grid);
  DecayReport rep;
  rep.graph_point = tr.lifted.back();
  rep.probe_point = rep.graph_point + offset;
  for (int k : levels) {
    const QuantumSpace qs(k);
    const HermitianOperator op = make_op(qs);
    rep.levels.push_back(k);
    rep.abs_kernel.push_back(std::abs(kernel_eval(qs, propagate_autonomous(op, t), rep.probe_point, x)));
  }
  rep.min_order = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < rep.levels.size(); ++i) {
    const double order = std::log(rep.abs_kernel[i] / rep.abs_kernel[i + 1]) /
                         std::log(static_cast<double>(rep.levels[i + 1]) / rep.levels[i]);
    rep.orders.push_back(order);
    rep.min_order = std::min(rep.min_order, order);
  }
  return rep;
}

}  // namespace toeplitz::prop
