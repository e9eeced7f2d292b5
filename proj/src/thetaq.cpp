#include "toeplitz/thetaq.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "toeplitz/errors.hpp"
#include "toeplitz/quadrature.hpp"

namespace toeplitz::theta {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGramTolerance = 1e-8;
constexpr double kTruncation = 1e-13;

int default_terms(double abs_nome_log) {
  return std::max(2, static_cast<int>(std::ceil(0.5 + std::sqrt(37.0 / abs_nome_log))));
}

int default_nodes(int k, int scale) {
  return 64 * std::max(1, (k + 24) / 25) * std::max(1, scale);
}

template <typename Fn>
Eigen::MatrixXcd weighted_matrix(const QuantumSpace& qs, int nodes, Fn multiplier) {
  const int dim = qs.dim();
  const quad::Rule rp = quad::periodic_trapezoid(nodes, 0.0, 1.0);
  const quad::Rule rq = quad::gauss_legendre(nodes, 0.0, 1.0);
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dim, dim);
  Eigen::MatrixXcd block(nodes, dim);
  Eigen::MatrixXcd weighted(nodes, dim);
  for (int i = 0; i < nodes; ++i) {
    const double p = rp.nodes[static_cast<std::size_t>(i)];
    for (int j = 0; j < nodes; ++j) {
      const double q = rq.nodes[static_cast<std::size_t>(j)];
      const double w = 4.0 * kPi * rp.weights[static_cast<std::size_t>(i)] *
                       rq.weights[static_cast<std::size_t>(j)] * qs.metric_weight(p, q) * multiplier(p, q);
      const Eigen::VectorXcd b = qs.basis_vector(Point(p, q));
      block.row(j) = b.transpose();
      weighted.row(j) = w * b.transpose();
    }
    acc.noalias() += weighted.adjoint() * block;
  }
  return acc;
}

double identity_defect(const Eigen::MatrixXcd& g) {
  return (g - Eigen::MatrixXcd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

GaugeSelection select_gauge(int scale) {
  static std::mutex mutex;
  static std::map<int, GaugeSelection> cache;
  std::lock_guard<std::mutex> lock(mutex);
  if (auto it = cache.find(scale); it != cache.end()) return it->second;
  GaugeSelection sel;
  sel.test_level = 5;
  const QuantumSpace constant_phase(sel.test_level, BasisGauge::ConstantPhase, scale);
  sel.constant_phase_defect = identity_defect(gram_matrix_at(constant_phase, constant_phase.quad_order()));
  const QuantumSpace linear_phase(sel.test_level, BasisGauge::LinearPhase, scale);
  sel.linear_phase_defect = identity_defect(gram_matrix_at(linear_phase, linear_phase.quad_order()));
  if (sel.constant_phase_defect <= kGramTolerance) {
    sel.gauge = BasisGauge::ConstantPhase;
  } else if (sel.linear_phase_defect <= kGramTolerance) {
    sel.gauge = BasisGauge::LinearPhase;
  } else {
    throw NumericalError("no basis gauge passes the orthonormality self-test");
  }
  cache.emplace(scale, sel);
  return sel;
}

}  // namespace

ScaledComplex theta3(Complex w, double nome_log, int terms) {
  if (std::isinf(nome_log) && nome_log < 0.0) return {Complex(1.0, 0.0), 0.0};
  if (!(nome_log < 0.0)) throw ValidationError("theta3: log of the nome must be negative");
  if (terms <= 0) terms = default_terms(-nome_log);
  const double center = std::round(w.imag() / nome_log);
  const int count = 2 * terms + 1;
  std::vector<Complex> logs(static_cast<std::size_t>(count));
  double top = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < count; ++i) {
    const double n = center - terms + i;
    logs[static_cast<std::size_t>(i)] = Complex(n * n * nome_log, 0.0) + Complex(0.0, 2.0 * n) * w;
    top = std::max(top, logs[static_cast<std::size_t>(i)].real());
  }
  Complex sum = 0.0;
  for (const auto& l : logs) sum += std::exp(l - top);
  const double edge = std::max(std::exp(logs.front().real() - top), std::exp(logs.back().real() - top));
  if (edge > kTruncation * std::abs(sum)) {
    throw ResolutionError("theta3: truncation error above 1e-13; increase the number of terms");
  }
  return {sum, top};
}

std::string gauge_name(BasisGauge g) {
  return g == BasisGauge::ConstantPhase ? "constant-phase" : "linear-phase";
}

int quad_scale_from_env() {
  const char* env = std::getenv("TP_QUAD_SCALE");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1 || v > 64) {
    throw ConfigError("TP_QUAD_SCALE must be an integer in [1, 64]");
  }
  return static_cast<int>(v);
}

QuantumSpace::QuantumSpace(int k, BasisGauge gauge, int quad_scale)
    : k_(k), terms_(0), quad_order_(0), gauge_(gauge) {
  if (k < 1 || k > kMaxLevel) {
    throw ValidationError("level k must lie in [1, " + std::to_string(kMaxLevel) + "]");
  }
  if (quad_scale < 1) throw ValidationError("quadrature scale must be positive");
  terms_ = default_terms(2.0 * kPi * k);
  quad_order_ = default_nodes(k, quad_scale);
  selection_.gauge = gauge;
}

QuantumSpace::QuantumSpace(int k, int quad_scale) : QuantumSpace(k, BasisGauge::LinearPhase, quad_scale) {
  selection_ = select_gauge(quad_scale);
  gauge_ = selection_.gauge;
  if (k <= 50) {
    self_test_ = identity_defect(gram_matrix_at(*this, quad_order_));
    if (*self_test_ > kGramTolerance) {
      throw NumericalError("orthonormality self-test failed at k = " + std::to_string(k) +
                           ": |G - I| = " + std::to_string(*self_test_));
    }
  }
}

double QuantumSpace::metric_weight(double, double q) const {
  if (gauge_ == BasisGauge::ConstantPhase) return std::exp(-2.0 * kPi * k_ * q * q);
  return 1.0;
}

ScaledComplex QuantumSpace::basis_eval_scaled(int l, Complex z) const {
  if (l < 0 || l >= dim()) {
    throw std::out_of_range("basis index " + std::to_string(l) + " outside [0, " + std::to_string(dim()) + ")");
  }
  const double k = k_;
  const double q = z.imag();
  const double ld = l;
  const Complex prefactor = gauge_ == BasisGauge::ConstantPhase
                                ? Complex(0.0, 2.0 * kPi * (ld + k * q))
                                : Complex(0.0, 2.0 * kPi * (ld + k * q)) * z;
  const Complex base = Complex(0.25 * std::log(k) - 0.5 * std::log(2.0 * kPi) - kPi * ld * ld / (2.0 * k), 0.0) +
                       prefactor;
  const double center = std::round(-q - ld / (2.0 * k));
  const int count = 2 * terms_ + 1;
  Complex logs[64];
  if (count > 64) throw NumericalError("basis_eval: too many theta terms");
  double top = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < count; ++i) {
    const double n = center - terms_ + i;
    logs[i] = base + Complex(-2.0 * kPi * k * n * n - 2.0 * kPi * n * ld, 0.0) +
              Complex(0.0, 4.0 * kPi * k * n) * z;
    top = std::max(top, logs[i].real());
  }
  Complex sum = 0.0;
  for (int i = 0; i < count; ++i) sum += std::exp(logs[i] - top);
  const double edge = std::max(std::exp(logs[0].real() - top), std::exp(logs[count - 1].real() - top));
  if (edge > kTruncation) throw ResolutionError("basis_eval: theta series truncated too early");
  if (!std::isfinite(sum.real()) || !std::isfinite(sum.imag())) {
    throw NumericalError("basis_eval: non-finite value");
  }
  return {sum, top};
}

Complex QuantumSpace::basis_eval(int l, Complex z) const {
  const Complex v = basis_eval_scaled(l, z).value();
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
    throw NumericalError("basis_eval: value overflows double precision");
  }
  return v;
}

Eigen::VectorXcd QuantumSpace::basis_vector(const Point& x) const {
  Eigen::VectorXcd v(dim());
  const Complex z(x(0), x(1));
  for (int l = 0; l < dim(); ++l) v(l) = basis_eval(l, z);
  return v;
}

Eigen::MatrixXcd gram_matrix_at(const QuantumSpace& qs, int nodes) {
  return weighted_matrix(qs, nodes, [](double, double) { return 1.0; });
}

Eigen::MatrixXcd gram_matrix(const QuantumSpace& qs) {
  const Eigen::MatrixXcd coarse = gram_matrix_at(qs, qs.quad_order());
  const Eigen::MatrixXcd fine = gram_matrix_at(qs, 2 * qs.quad_order());
  const double change = (fine - coarse).cwiseAbs().maxCoeff();
  if (change > 1e-9) {
    throw ResolutionError("gram_matrix: doubling the nodes changed the result by " + std::to_string(change));
  }
  return fine;
}

HermitianOperator::HermitianOperator(int k, Eigen::MatrixXcd matrix) : k_(k), matrix_(std::move(matrix)) {
  if (matrix_.rows() != 2 * k || matrix_.cols() != 2 * k) {
    throw ValidationError("HermitianOperator: matrix must be 2k x 2k");
  }
  const double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
  if ((matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ValidationError("HermitianOperator: matrix is not Hermitian");
  }
  auto eig = linalg::hermitian_eigensolve(matrix_);
  values_ = std::move(eig.values);
  vectors_ = std::move(eig.vectors);
  const double res = max_residual();
  if (res > 1e-9 * scale) {
    throw NumericalError("HermitianOperator: eigendecomposition residual " + std::to_string(res));
  }
}

HermitianOperator HermitianOperator::diagonal(int k, const Eigen::VectorXd& values) {
  if (values.size() != 2 * k) throw ValidationError("HermitianOperator: need 2k eigenvalues");
  HermitianOperator op;
  op.k_ = k;
  op.matrix_ = values.cast<Complex>().asDiagonal();
  op.values_ = values;
  op.vectors_ = Eigen::MatrixXcd::Identity(2 * k, 2 * k);
  op.diagonal_ = true;
  return op;
}

double HermitianOperator::max_residual() const {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < values_.size(); ++j) {
    worst = std::max(worst, (matrix_ * vectors_.col(j) - values_(j) * vectors_.col(j)).norm());
  }
  return worst;
}

HermitianOperator HermitianOperator::shifted(double s) const {
  HermitianOperator op = *this;
  op.matrix_ += s * Eigen::MatrixXcd::Identity(dim(), dim());
  op.values_.array() += s;
  return op;
}

HermitianOperator model_operator(const QuantumSpace& qs) {
  const int k = qs.k();
  Eigen::VectorXd values(2 * k);
  for (int l = 0; l < 2 * k; ++l) values(l) = std::cos(kPi * l / k);
  HermitianOperator op = HermitianOperator::diagonal(k, values);
  op.principal_symbol = "cos(2*pi*q)";
  op.subprincipal_symbol = "0";
  return op;
}

HermitianOperator toeplitz_build(const QuantumSpace& qs, const torus::SymbolField& f, double t,
                                 bool check_resolution) {
  auto mult = [&](double p, double q) { return f.principal(t, p, q).v; };
  Eigen::MatrixXcd raw = weighted_matrix(qs, qs.quad_order(), mult);
  if (check_resolution) {
    const Eigen::MatrixXcd fine = weighted_matrix(qs, 2 * qs.quad_order(), mult);
    const double change = (fine - raw).cwiseAbs().maxCoeff();
    if (change > 1e-9) {
      throw ResolutionError("toeplitz_build: doubling the nodes changed the result by " + std::to_string(change));
    }
    raw = fine;
  }
  const double scale = std::max(1.0, raw.cwiseAbs().maxCoeff());
  if ((raw - raw.adjoint()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw NumericalError("toeplitz_build: quadrature matrix far from Hermitian");
  }
  HermitianOperator op(qs.k(), 0.5 * (raw + raw.adjoint()));
  op.principal_symbol = f.name();
  return op;
}

double bergman_diag(const QuantumSpace& qs, const Point& x) {
  return qs.basis_vector(x).squaredNorm() * qs.metric_weight(x(0), x(1));
}

}  // namespace toeplitz::theta
