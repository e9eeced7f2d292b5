#pragma once
// Classical geometry of the flat torus R^2 / Z^2 with omega = 4 pi dp ^ dq,
// connection form alpha = 2 pi (p dq - q dp) and complex coordinate z = p + i q.

#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "toeplitz/expression.hpp"
#include "toeplitz/symplin.hpp"

namespace toeplitz::torus {

using Complex = std::complex<double>;
using Point = Eigen::Vector2d;  // (p, q)
using symplin::BranchedPhase;

inline constexpr double kSymplecticArea = 4.0 * std::numbers::pi;
inline constexpr double kMetricScale = 2.0 * std::numbers::pi;
inline constexpr double kFieldThreshold = 1e-6;

class TorusPhaseSpace {
 public:
  TorusPhaseSpace();
  // Columns of `lattice` are the basis (e, f); omega(e, f) must equal 4 pi.
  explicit TorusPhaseSpace(const Eigen::Matrix2d& lattice);

  const Eigen::Matrix2d& lattice() const { return lattice_; }
  bool standard_lattice() const;
  double omega(const Eigen::Vector2d& u, const Eigen::Vector2d& v) const;
  Eigen::Matrix2d omega_matrix() const;
  Eigen::Matrix2d complex_structure() const;
  // Coefficients (alpha_p, alpha_q) of alpha at x.
  Eigen::Vector2d alpha(const Point& x) const;

  struct Reduced {
    Point point;              // in the fundamental domain spanned by the lattice
    Eigen::Vector2i winding;  // x = point + lattice * winding
  };
  Reduced reduce(const Point& x) const;
  // x - y - L w with the lattice vector L w closest to x - y.
  Eigen::Vector2d nearest_offset(const Point& x, const Point& y, Eigen::Vector2i* winding = nullptr) const;
  double lattice_distance(const Point& x, const Point& y) const;

  // Largest deviation of d alpha from omega, by centred differences at a few points.
  double curvature_defect() const;

 private:
  Eigen::Matrix2d lattice_;
};

using expr::Jet;

class SymbolField {
 public:
  using Scalar = std::function<double(double t, double p, double q)>;
  using JetFn = std::function<Jet(double t, double p, double q)>;

  // H = cos(2 pi q) with vanishing subprincipal symbol.
  static SymbolField model_cos();
  static SymbolField from_expression(const std::string& principal, const std::string& subprincipal = "0");
  // Derivatives by centred differences with step 1e-5.
  static SymbolField from_functions(Scalar principal, Scalar subprincipal, bool autonomous,
                                    std::string name);

  Jet principal(double t, double p, double q) const { return principal_(t, p, q); }
  Jet subprincipal(double t, double p, double q) const { return subprincipal_(t, p, q); }
  double H(double t, const Point& x) const { return principal_(t, x(0), x(1)).v; }
  double Hsub(double t, const Point& x) const { return subprincipal_(t, x(0), x(1)).v; }

  bool autonomous() const { return autonomous_; }
  bool is_model_shear() const { return model_shear_; }
  std::optional<double> constant_subprincipal() const { return constant_sub_; }
  const std::string& name() const { return name_; }

  SymbolField with_subprincipal_shift(double c) const;
  // Adds (H_pp + H_qq) / (16 pi), the subprincipal symbol of the Toeplitz
  // operator T_k(H) itself.
  SymbolField with_laplacian_subprincipal() const;

  // Largest |H(p+1,q) - H(p,q)|, |H(p,q+1) - H(p,q)| over a sample grid.
  double periodicity_defect() const;

 private:
  JetFn principal_;
  JetFn subprincipal_;
  bool autonomous_ = true;
  bool model_shear_ = false;
  std::optional<double> constant_sub_;
  std::string name_;
};

Eigen::Vector2d hamiltonian_vector_field(const SymbolField& sym, double t, const Point& x);
Eigen::Matrix2d field_derivative(const SymbolField& sym, double t, const Point& x);
// sup |X| over a sample grid of the fundamental domain at the given times.
double field_sup(const SymbolField& sym, std::span<const double> times);

struct Trajectory {
  Point start;
  std::vector<double> times;
  std::vector<Point> lifted;
  std::vector<Point> points;
  std::vector<Eigen::Matrix2d> jacobians;
  std::vector<double> action_H;
  std::vector<double> action_Hsub;
  std::vector<double> conn_L;
  std::vector<double> conn_K;
};

struct FlowOptions {
  double max_step = 1e-3;
  double tolerance = 1e-10;
  int max_refinements = 6;
};

// times must start at 0 and be strictly monotone (either direction).
Trajectory integrate_flow(const TorusPhaseSpace& ps, const SymbolField& sym, const Point& x,
                          std::span<const double> times, const FlowOptions& opts = {});

// Uniform grid from a to b, both included, with spacing at most max_step.
std::vector<double> time_grid(double a, double b, double max_step);
// Grid from 0 through every target (all of one sign, ordered away from 0) with
// spacing at most max_step; index[i] receives the position of targets[i].
std::vector<double> grid_through(std::span<const double> targets, double max_step, std::vector<std::size_t>& index);

enum class Bundle { L, K };
Bundle parse_bundle(const std::string& tag);

std::vector<Complex> transport_phase(const TorusPhaseSpace& ps, const Trajectory& traj, Bundle bundle);
// -int H^sub + k (int alpha - int H), the argument of the prequantum lift.
std::vector<double> prequantum_accumulator(const Trajectory& traj, int k);
std::vector<Complex> prequantum_phase(const SymbolField& sym, const Trajectory& traj, int k);

// rho_t = 1 / det(T phi_t)^{1,0}, divided by the K transport.
std::vector<Complex> rho_graph(const TorusPhaseSpace& ps, const Trajectory& traj);
// Same quantity from the pairing of dz with d conj(z) along the graph.
std::vector<Complex> rho_graph_frame(const TorusPhaseSpace& ps, const Trajectory& traj);
std::vector<BranchedPhase> rho_graph_half(const TorusPhaseSpace& ps, const Trajectory& traj);

std::vector<Complex> rho_level(const TorusPhaseSpace& ps, const SymbolField& sym, const Trajectory& traj,
                               double E);
std::vector<BranchedPhase> rho_level_half(const TorusPhaseSpace& ps, const SymbolField& sym,
                                          const Trajectory& traj, double E);

double norm_X(const TorusPhaseSpace& ps, const SymbolField& sym, double t, const Point& x);

// B for the Lagrangian line spanned by `tangent` at x (field taken at t = 0).
Complex b_coefficient(const TorusPhaseSpace& ps, const SymbolField& sym, const Point& x,
                      const Eigen::Vector2d& tangent);

struct ReturnTime {
  double t = 0.0;
  Eigen::Vector2i winding = Eigen::Vector2i::Zero();  // lifted phi_t(x) = y + lattice * winding
};

std::vector<ReturnTime> return_times(const TorusPhaseSpace& ps, const SymbolField& sym, const Point& x,
                                     const Point& y, double t_min, double t_max);

struct BoxResult {
  Complex box;
  Complex theta;
  Complex zeta;
};

BoxResult box_operator(const TorusPhaseSpace& ps, const SymbolField& sym, double t, const Point& x);

}  // namespace toeplitz::torus
