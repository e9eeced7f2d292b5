#pragma once
// Quantum propagators, their Schwartz kernels on the torus and the graph
// predictor (k/2pi) rho_t^{1/2} e^{i(prequantum phase)} evaluated along the flow.

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "toeplitz/thetaq.hpp"
#include "toeplitz/torusgeo.hpp"

namespace toeplitz::prop {

using Complex = std::complex<double>;
using theta::HermitianOperator;
using theta::QuantumSpace;
using torus::Point;

inline constexpr double kUnitarityTolerance = 1e-9;
inline constexpr double kPredictorStep = 1e-3;
inline constexpr double kMinOffGraphDistance = 0.05;

struct KernelSample {
  int k = 0;
  double t = 0.0;
  Point x = Point::Zero();
  Point y = Point::Zero();
  Complex exact;
  Complex predicted;
  double rel_err_modulus = 0.0;
  double phase_err = 0.0;  // arg(exact / predicted), unwrapped along the time grid
};

// exp(-i k t op)
Eigen::MatrixXcd propagate_autonomous(const HermitianOperator& op, double t);

// Propagators at every grid time, U(tgrid[0]) = I, by the exponential midpoint
// rule with exact exponentials of the frozen operators. Throws NumericalError
// when a step loses unitarity by more than kUnitarityTolerance.
std::vector<Eigen::MatrixXcd> propagate_timedep(const std::function<HermitianOperator(double)>& op_at,
                                                std::span<const double> tgrid);

// sum U_{l l'} Psi_l(y) conj(Psi_l'(x)), points taken as given (not reduced).
Complex kernel_eval(const QuantumSpace& qs, const Eigen::MatrixXcd& u, const Point& y, const Point& x);
// Same for U = diag(phases).
Complex kernel_eval_diagonal(const QuantumSpace& qs, const Eigen::VectorXcd& phases, const Point& y,
                             const Point& x);

// Predicted U_{k,t}(phi_t(x), x) at the lifted endpoint of the flow from x.
Complex asymptotic_graph_kernel(const torus::TorusPhaseSpace& ps, const torus::SymbolField& sym,
                                const Point& x, double t, int k);

struct GraphPrediction {
  std::vector<double> times;
  std::vector<Point> lifted;  // lifted phi_t(x)
  std::vector<Complex> values;
};

// Predictor at each time of an ascending grid; the flow is refined internally
// to steps of at most kPredictorStep starting from t = 0.
GraphPrediction asymptotic_graph_path(const torus::TorusPhaseSpace& ps, const torus::SymbolField& sym,
                                      const Point& x, std::span<const double> tgrid, int k);

// Exact kernel of op against the predictor built from sym, on the lifted graph.
std::vector<KernelSample> graph_compare(const QuantumSpace& qs, const HermitianOperator& op,
                                        const torus::TorusPhaseSpace& ps, const torus::SymbolField& sym,
                                        const Point& x, std::span<const double> tgrid);
// Same with precomputed propagators, one per grid time.
std::vector<KernelSample> graph_compare(const QuantumSpace& qs, std::span<const Eigen::MatrixXcd> props,
                                        const torus::TorusPhaseSpace& ps, const torus::SymbolField& sym,
                                        const Point& x, std::span<const double> tgrid);

double rel_err_modulus(Complex exact, Complex predicted);
double max_rel_err_modulus(std::span<const KernelSample> samples);

struct DecayReport {
  std::vector<int> levels;
  std::vector<double> abs_kernel;
  std::vector<double> orders;  // log(|K_a| / |K_b|) / log(b / a) for consecutive levels
  Point graph_point = Point::Zero();
  Point probe_point = Point::Zero();
  double min_order = 0.0;
};

using OperatorFactory = std::function<HermitianOperator(const QuantumSpace&)>;

// |U_{k,t}(phi_t(x) + offset, x)| over the given levels. The offset must stay
// at least kMinOffGraphDistance from the lattice (ValidationError otherwise).
DecayReport offgraph_probe(std::span<const int> levels, const torus::TorusPhaseSpace& ps,
                           const torus::SymbolField& sym, const Point& x, double t,
                           const Eigen::Vector2d& offset, const OperatorFactory& make_op = theta::model_operator);

}  // namespace toeplitz::prop
