#pragma once
// Smoothed spectral projectors f(k(E - T_k)): Fourier pairs with compactly
// supported transform, exact kernels by spectral sums and by time quadrature
// of the propagator, and the return-time predictor.

#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "toeplitz/propkern.hpp"
#include "toeplitz/thetaq.hpp"
#include "toeplitz/torusgeo.hpp"

namespace toeplitz::spec {

using Complex = std::complex<double>;
using theta::HermitianOperator;
using theta::QuantumSpace;
using torus::Point;

enum class PairKind { Bump, GaussianTruncated };
PairKind parse_pair_kind(const std::string& name);
std::string pair_kind_name(PairKind kind);

inline constexpr int kPanelNodes = 16;
inline constexpr int kDefaultPairNodes = 256;

// f(E) = (2 pi)^{-1/2} int_{-T}^{T} exp(i t E) fhat(t) dt
class FourierPair {
 public:
  FourierPair(PairKind kind, double support_T, int nodes);

  PairKind kind() const { return kind_; }
  double support_T() const { return T_; }
  int quad_nodes() const { return nodes_; }
  double fhat(double t) const;
  // Composite Gauss-Legendre with enough panels to resolve exp(i t E).
  Complex f_eval(double E) const;
  Complex f0() const { return f0_; }

 private:
  PairKind kind_;
  double T_;
  int nodes_;
  Complex f0_;
};

// bump: exp(-1/(1 - (t/T)^2)); gaussian-truncated: exp(-t^2 / (2 (T/9)^2)),
// both zero for |t| >= T. Throws ResolutionError when doubling the nodes moves
// f(0) by more than 1e-10.
FourierPair build_fourier_pair(PairKind kind, double support_T, int nodes = kDefaultPairNodes);

// sum_l f(k(E - lambda_l)) (eigenvector kernel at (y, x)).
Complex projector_kernel_exact(const QuantumSpace& qs, const HermitianOperator& op, const FourierPair& pair,
                               double E, const Point& y, const Point& x);

// (2 pi)^{-1/2} int exp(i k t E) fhat(t) U_{k,t}(y, x) dt by the trapezoid rule
// on [-T, T] with the given number of intervals.
Complex projector_kernel_time_route(const QuantumSpace& qs, const HermitianOperator& op, const FourierPair& pair,
                                    double E, const Point& y, const Point& x, int intervals);

struct ProjectorTerm {
  double t = 0.0;
  Eigen::Vector2i winding = Eigen::Vector2i::Zero();
  double fhat = 0.0;
  Complex rho_level_half;
  Complex phase;  // subprincipal, prequantum and lattice factors
  Complex value;  // prefactor included
};

struct ProjectorPrediction {
  Complex value;
  bool off_image = false;  // no return time in the support: the kernel is O(k^-infinity)
  std::vector<ProjectorTerm> terms;
};

// k^{1/2} / (2 pi)
double projector_prefactor(int k);

// Sum over return times t in [-T, T] with phi_t(x) = y of
// fhat(t) rho'_t^{1/2} exp(-i int H^sub) (prequantum lift)^k (lattice multiplier),
// times projector_prefactor(k). Standard lattice only.
ProjectorPrediction projector_kernel_asymptotic(const torus::TorusPhaseSpace& ps, const torus::SymbolField& sym,
                                                const FourierPair& pair, double E, const Point& y,
                                                const Point& x, int k);

struct ProjectorRow {
  int k = 0;
  Point x = Point::Zero();
  Point y = Point::Zero();
  Complex exact;
  Complex predicted;
  bool off_image = false;
  int terms = 0;
  double rel_err_modulus = 0.0;  // against the prediction; NaN off the image
  double decay_ratio = 0.0;      // rel_err at this k over the previous k; NaN for the first level
};

// Exact against predicted kernels at each (y, x) pair and level.
std::vector<ProjectorRow> projector_compare(std::span<const int> levels, const torus::TorusPhaseSpace& ps,
                                            const torus::SymbolField& sym, const FourierPair& pair, double E,
                                            std::span<const std::pair<Point, Point>> points,
                                            const prop::OperatorFactory& make_op = theta::model_operator);

}  // namespace toeplitz::spec
