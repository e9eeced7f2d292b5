#pragma once
// Theta-function basis of the level-k quantum space on the torus, Gram and
// Toeplitz matrices by quadrature, and the diagonal model operator.

#include <complex>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "toeplitz/hermitian_eigen.hpp"
#include "toeplitz/torusgeo.hpp"

namespace toeplitz::theta {

using Complex = std::complex<double>;
using torus::Point;

inline constexpr int kMaxLevel = 400;

// mantissa * exp(exponent)
struct ScaledComplex {
  Complex mantissa;
  double exponent = 0.0;
  Complex value() const { return mantissa * std::exp(exponent); }
  double log_abs() const { return std::log(std::abs(mantissa)) + exponent; }
};

// theta_3(w) = sum_n exp(n^2 nome_log + 2 i n w), summed over |n - n*| <= terms
// around the dominant index n*. terms <= 0 picks a radius from nome_log.
// Throws ResolutionError if the outermost terms exceed 1e-13 of the result.
ScaledComplex theta3(Complex w, double nome_log, int terms = 0);

// ConstantPhase: prefactor exp(2 i pi (l + k Im z)), candidate weight exp(-2 pi k q^2).
// LinearPhase: prefactor exp(2 i pi (l + k Im z) z), weight 1.
enum class BasisGauge { ConstantPhase, LinearPhase };
std::string gauge_name(BasisGauge g);

struct GaugeSelection {
  BasisGauge gauge = BasisGauge::LinearPhase;
  int test_level = 0;
  double constant_phase_defect = 0.0;  // |G - I|_inf of the constant-phase form
  double linear_phase_defect = 0.0;
};

// Quadrature multiplier from TP_QUAD_SCALE (default 1).
int quad_scale_from_env();

class QuantumSpace {
 public:
  // Selects the basis gauge by Gram self-test (cached per process) and, for
  // k <= 50, checks orthonormality at this level.
  explicit QuantumSpace(int k, int quad_scale = quad_scale_from_env());
  // Fixed gauge, no self-test.
  QuantumSpace(int k, BasisGauge gauge, int quad_scale);

  int k() const { return k_; }
  int dim() const { return 2 * k_; }
  int theta_terms() const { return terms_; }
  int quad_order() const { return quad_order_; }
  BasisGauge gauge() const { return gauge_; }
  const GaugeSelection& selection() const { return selection_; }
  // |G - I|_inf measured at construction, if it was run.
  std::optional<double> self_test_defect() const { return self_test_; }

  double metric_weight(double p, double q) const;
  ScaledComplex basis_eval_scaled(int l, Complex z) const;
  Complex basis_eval(int l, Complex z) const;
  // (Psi_0(z), ..., Psi_{2k-1}(z)) at z = p + i q, unweighted.
  Eigen::VectorXcd basis_vector(const Point& x) const;

 private:
  int k_;
  int terms_;
  int quad_order_;
  BasisGauge gauge_;
  GaugeSelection selection_;
  std::optional<double> self_test_;
};

// G_{l l'} = int Psi_l' conj(Psi_l) weight 4 pi dp dq with n nodes per axis.
Eigen::MatrixXcd gram_matrix_at(const QuantumSpace& qs, int nodes);
// Same with the default node count, checked against doubled nodes at 1e-9.
Eigen::MatrixXcd gram_matrix(const QuantumSpace& qs);

class HermitianOperator {
 public:
  // Eigendecomposition by the in-module solver; throws on non-Hermitian input.
  HermitianOperator(int k, Eigen::MatrixXcd matrix);
  static HermitianOperator diagonal(int k, const Eigen::VectorXd& values);

  int k() const { return k_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  const Eigen::VectorXd& eigenvalues() const { return values_; }
  const Eigen::MatrixXcd& eigenvectors() const { return vectors_; }
  bool is_diagonal() const { return diagonal_; }
  double max_residual() const;
  // this + s I, eigenvectors reused
  HermitianOperator shifted(double s) const;

  std::string principal_symbol;
  std::string subprincipal_symbol;

 private:
  HermitianOperator() = default;
  int k_ = 0;
  Eigen::MatrixXcd matrix_;
  Eigen::VectorXd values_;
  Eigen::MatrixXcd vectors_;
  bool diagonal_ = false;
};

// diag(cos(pi l / k)): principal symbol cos(2 pi q), vanishing subprincipal symbol.
HermitianOperator model_operator(const QuantumSpace& qs);

// (T_k(f))_{l l'} = int f Psi_l' conj(Psi_l) weight 4 pi dp dq at time t.
HermitianOperator toeplitz_build(const QuantumSpace& qs, const torus::SymbolField& f, double t = 0.0,
                                 bool check_resolution = true);

double bergman_diag(const QuantumSpace& qs, const Point& x);

}  // namespace toeplitz::theta
