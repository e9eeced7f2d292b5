#include "toeplitz/symplin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "toeplitz/errors.hpp"

namespace toeplitz::symplin {

namespace {

double scale_of(const Eigen::MatrixXd& g) {
  return std::max(1.0, g.cwiseAbs().maxCoeff());
}

void check_square_even(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0 || m.rows() % 2 != 0) {
    throw ValidationError(std::string(what) + ": expected an even-dimensional square matrix");
  }
}

void check_complex_structure(const Eigen::MatrixXd& cs, const char* what) {
  check_square_even(cs, what);
  const auto dim = cs.rows();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(dim, dim);
  const double s = scale_of(cs);
  if ((cs * cs + id).cwiseAbs().maxCoeff() > kStructuralTolerance * s * s) {
    throw ValidationError(std::string(what) + ": j^2 != -I");
  }
  const Eigen::MatrixXd omega = symplectic_form(static_cast<int>(dim / 2));
  if ((cs.transpose() * omega * cs - omega).cwiseAbs().maxCoeff() >
      kStructuralTolerance * s * s) {
    throw ValidationError(std::string(what) + ": j does not preserve omega");
  }
  // omega(., j .) must be a Euclidean metric
  const Eigen::MatrixXd metric = omega * cs;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (metric + metric.transpose()));
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0) {
    throw ValidationError(std::string(what) + ": omega(., j .) is not positive definite");
  }
}

Eigen::VectorXcd to_complex(const Eigen::VectorXd& u) {
  const auto n = u.size() / 2;
  Eigen::VectorXcd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = Complex(u(i), u(n + i));
  return z;
}

Eigen::VectorXd to_real(const Eigen::VectorXcd& z) {
  const auto n = z.size();
  Eigen::VectorXd u(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    u(i) = z(i).real();
    u(n + i) = z(i).imag();
  }
  return u;
}

Eigen::MatrixXd realify(const Eigen::MatrixXcd& u) {
  const auto n = u.rows();
  Eigen::MatrixXd r(2 * n, 2 * n);
  r << u.real(), -u.imag(), u.imag(), u.real();
  return r;
}

}  // namespace

Eigen::MatrixXd symplectic_form(int n) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n).setIdentity();
  j.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
  return j;
}

Eigen::MatrixXd standard_complex_structure(int n) {
  return -symplectic_form(n);
}

LinearSymplectomorphism::LinearSymplectomorphism(Eigen::MatrixXd matrix)
    : LinearSymplectomorphism(matrix, standard_complex_structure(static_cast<int>(matrix.rows() / 2)),
                              standard_complex_structure(static_cast<int>(matrix.rows() / 2))) {}

LinearSymplectomorphism::LinearSymplectomorphism(Eigen::MatrixXd matrix, Eigen::MatrixXd source_cs,
                                                 Eigen::MatrixXd target_cs)
    : matrix_(std::move(matrix)), source_cs_(std::move(source_cs)), target_cs_(std::move(target_cs)) {
  check_square_even(matrix_, "LinearSymplectomorphism");
  if (source_cs_.rows() != matrix_.rows() || target_cs_.rows() != matrix_.rows()) {
    throw ValidationError("LinearSymplectomorphism: complex structure dimension mismatch");
  }
  const Eigen::MatrixXd omega = symplectic_form(half_dim());
  const double s = scale_of(matrix_);
  if ((matrix_.transpose() * omega * matrix_ - omega).cwiseAbs().maxCoeff() >
      kStructuralTolerance * s * s) {
    throw ValidationError("LinearSymplectomorphism: g^T J g != J");
  }
  check_complex_structure(source_cs_, "source complex structure");
  check_complex_structure(target_cs_, "target complex structure");
}

bool LinearSymplectomorphism::same_structures() const {
  return (source_cs_ - target_cs_).cwiseAbs().maxCoeff() <= kStructuralTolerance;
}

Eigen::MatrixXcd complex_linear_part(const Eigen::MatrixXd& g) {
  const auto n = g.rows() / 2;
  const auto a = g.topLeftCorner(n, n);
  const auto b = g.topRightCorner(n, n);
  const auto c = g.bottomLeftCorner(n, n);
  const auto d = g.bottomRightCorner(n, n);
  Eigen::MatrixXcd p(n, n);
  p.real() = 0.5 * (a + d);
  p.imag() = 0.5 * (c - b);
  return p;
}

Eigen::MatrixXd unitary_frame(const Eigen::MatrixXd& cs) {
  check_complex_structure(cs, "unitary_frame");
  const auto dim = cs.rows();
  const auto n = dim / 2;
  const Eigen::MatrixXd metric = symplectic_form(static_cast<int>(n)) * cs;
  auto inner = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    return u.dot(metric * v);
  };

  std::vector<Eigen::VectorXd> basis;
  for (Eigen::Index cand = 0; cand < dim && static_cast<Eigen::Index>(basis.size()) < n; ++cand) {
    Eigen::VectorXd u = Eigen::VectorXd::Unit(dim, cand);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& e : basis) {
        const Eigen::VectorXd je = cs * e;
        u -= inner(e, u) * e + inner(je, u) * je;
      }
    }
    const double norm2 = inner(u, u);
    if (norm2 > 1e-8) basis.push_back(u / std::sqrt(norm2));
  }
  Eigen::MatrixXd frame(dim, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    frame.col(i) = basis[static_cast<std::size_t>(i)];
    frame.col(n + i) = cs * basis[static_cast<std::size_t>(i)];
  }
  return frame;
}

Eigen::MatrixXcd holomorphic_block(const LinearSymplectomorphism& g) {
  const int n = g.half_dim();
  const Eigen::MatrixXd std_j = standard_complex_structure(n);
  const bool src_std = (g.source_cs() - std_j).cwiseAbs().maxCoeff() <= kStructuralTolerance;
  const bool dst_std = (g.target_cs() - std_j).cwiseAbs().maxCoeff() <= kStructuralTolerance;
  if (src_std && dst_std) return complex_linear_part(g.matrix());
  const Eigen::MatrixXd fs = unitary_frame(g.source_cs());
  const Eigen::MatrixXd ft = unitary_frame(g.target_cs());
  return complex_linear_part(ft.inverse() * g.matrix() * fs);
}

Complex holomorphic_determinant(const LinearSymplectomorphism& g) {
  const Eigen::MatrixXcd block = holomorphic_block(g);
  const Complex det = block.rows() == 1 ? block(0, 0) : block.determinant();
  // |det| >= 1 for every symplectic map; anything far below means corrupted input.
  if (std::abs(det) < 0.5) {
    throw ValidationError("holomorphic_determinant: |det g^{1,0}| < 0.5, input is not symplectic");
  }
  return det;
}

PolarDecomposition polar_decompose(const LinearSymplectomorphism& g) {
  if (!g.same_structures()) {
    throw ValidationError("polar_decompose: source and target complex structures differ");
  }
  const int n = g.half_dim();
  const Eigen::MatrixXd std_j = standard_complex_structure(n);
  const bool is_std = (g.source_cs() - std_j).cwiseAbs().maxCoeff() <= kStructuralTolerance;
  const Eigen::MatrixXd frame =
      is_std ? Eigen::MatrixXd::Identity(2 * n, 2 * n) : unitary_frame(g.source_cs());
  const Eigen::MatrixXd frame_inv = is_std ? frame : Eigen::MatrixXd(frame.inverse());

  // In a unitary frame the metric omega(., j .) is the identity, so g^T M g = g^T g.
  const Eigen::MatrixXd local = frame_inv * g.matrix() * frame;
  const Eigen::MatrixXd gram = local.transpose() * local;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (gram + gram.transpose()));
  if (es.info() != Eigen::Success) throw NumericalError("polar_decompose: eigensolver failed");

  const Eigen::VectorXd lambda = es.eigenvalues().cwiseSqrt();
  const Eigen::MatrixXd& v = es.eigenvectors();
  const Eigen::MatrixXd stretch = v * lambda.asDiagonal() * v.transpose();
  const Eigen::MatrixXd stretch_inv = v * lambda.cwiseInverse().asDiagonal() * v.transpose();
  const Eigen::MatrixXd rotation = local * stretch_inv;

  return PolarDecomposition{
      LinearSymplectomorphism(frame * rotation * frame_inv, g.source_cs(), g.target_cs()),
      LinearSymplectomorphism(frame * stretch * frame_inv, g.source_cs(), g.source_cs()),
      lambda};
}

Complex polar_determinant(const LinearSymplectomorphism& g) {
  const PolarDecomposition pd = polar_decompose(g);
  const int n = g.half_dim();
  double stretch_factor = 1.0;
  for (int i = 0; i < n; ++i) {
    const double l = pd.stretch_eigenvalues(i);
    stretch_factor *= 0.5 * (l + 1.0 / l);
  }
  Complex rotation_det;
  if (n == 1 && (g.source_cs() - standard_complex_structure(1)).cwiseAbs().maxCoeff() <=
                    kStructuralTolerance) {
    // j-commuting 2x2 symplectic map [[a, -c], [c, a]] is multiplication by a + ic
    const Eigen::MatrixXd& r = pd.rotation.matrix();
    rotation_det = Complex(r(0, 0), r(1, 0));
  } else {
    const Eigen::MatrixXcd block = holomorphic_block(pd.rotation);
    rotation_det = block.determinant();
  }
  return stretch_factor * rotation_det;
}

std::vector<BranchedPhase> branch_sqrt_path(std::span<const Complex> values) {
  std::vector<BranchedPhase> out;
  out.reserve(values.size());
  if (values.empty()) return out;
  if (!(values[0].real() > 0.0)) {
    throw ValidationError("branch_sqrt_path: first value must have positive real part");
  }
  double angle = std::arg(values[0]);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Complex v = values[i];
    if (v == Complex(0.0, 0.0) || !std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw NumericalError("branch_sqrt_path: path vanishes or is not finite");
    }
    if (i > 0) {
      const double step = std::arg(v / values[i - 1]);
      if (std::abs(step) >= 0.5 * std::numbers::pi) {
        throw GridTooCoarseError("branch_sqrt_path: argument jump of " + std::to_string(step) +
                                 " rad between samples " + std::to_string(i - 1) + " and " +
                                 std::to_string(i) + "; refine the grid");
      }
      angle += step;
    }
    const double half = 0.5 * angle;
    out.push_back({std::polar(std::sqrt(std::abs(v)), half), half});
  }
  return out;
}

Complex graph_pairing_ratio(const Eigen::MatrixXd& g) {
  check_square_even(g, "graph_pairing_ratio");
  const auto dim = g.rows();
  const auto n = dim / 2;
  // Rows: p1^* dz_j evaluated on (g e_m, e_m), then p2^* conj(dz_j) on the same vectors.
  auto pairing_matrix = [&](const Eigen::MatrixXd& map) {
    Eigen::MatrixXcd m(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
      const Eigen::VectorXd image = map.col(col);
      for (Eigen::Index j = 0; j < n; ++j) {
        m(j, col) = Complex(image(j), image(n + j));
        const double ep = col == j ? 1.0 : 0.0;
        const double eq = col == n + j ? 1.0 : 0.0;
        m(n + j, col) = Complex(ep, -eq);
      }
    }
    return m;
  };
  const Complex at_zero = pairing_matrix(Eigen::MatrixXd::Identity(dim, dim)).determinant();
  const Complex at_t = pairing_matrix(g).determinant();
  return at_zero / at_t;
}

Complex level_set_factor(const Eigen::MatrixXd& g, const Eigen::VectorXd& field_source,
                         const Eigen::VectorXd& field_target, double omega_scale) {
  check_square_even(g, "level_set_factor");
  const auto n = g.rows() / 2;
  const Eigen::VectorXcd vx = to_complex(field_source);
  const Eigen::VectorXcd vy = to_complex(field_target);
  const double norm2 = omega_scale * vx.squaredNorm();
  if (norm2 < 1e-12 || vy.squaredNorm() * omega_scale < 1e-12) {
    throw NonRegularError("level_set_factor: Hamiltonian vector field vanishes");
  }
  Complex det_source;
  Complex det_target;
  if (n == 1) {
    det_source = vx(0);
    det_target = vy(0);
  } else {
    // G_x: Hermitian complement of C X_x, which is also its symplectic complement.
    const Eigen::MatrixXcd vx_col = vx;
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(vx_col);
    const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
    const Eigen::MatrixXcd w = q.rightCols(n - 1);

    auto project_target = [&](const Eigen::VectorXcd& u) -> Eigen::VectorXcd {
      return u - vy * (vy.dot(u) / vy.squaredNorm());
    };
    auto psi = [&](const Eigen::VectorXcd& u) -> Eigen::VectorXcd {
      return project_target(to_complex(g * to_real(u)));
    };
    const Complex i(0.0, 1.0);
    Eigen::MatrixXcd src(n, n);
    Eigen::MatrixXcd dst(n, n);
    src.col(0) = vx;
    dst.col(0) = vy;
    for (Eigen::Index c = 0; c < n - 1; ++c) {
      const Eigen::VectorXcd wc = w.col(c);
      src.col(c + 1) = wc;
      dst.col(c + 1) = 0.5 * (psi(wc) - i * psi(i * wc));
    }
    det_source = src.determinant();
    det_target = dst.determinant();
  }
  return (2.0 / norm2) * det_source / det_target;
}

Complex b_coefficient(const Eigen::VectorXd& field, const Eigen::MatrixXd& lagrangian,
                      const Eigen::MatrixXd& omega, const Eigen::MatrixXd& cs) {
  const auto dim = field.size();
  if (lagrangian.rows() != dim || 2 * lagrangian.cols() != dim || omega.rows() != dim ||
      cs.rows() != dim) {
    throw ValidationError("b_coefficient: dimension mismatch");
  }
  const double lag_scale = std::max(1.0, lagrangian.cwiseAbs().maxCoeff());
  if ((lagrangian.transpose() * omega * lagrangian).cwiseAbs().maxCoeff() >
      kStructuralTolerance * lag_scale * lag_scale * std::max(1.0, omega.cwiseAbs().maxCoeff())) {
    throw ValidationError("b_coefficient: subspace is not Lagrangian");
  }
  const auto n = lagrangian.cols();
  Eigen::MatrixXd split(dim, dim);
  split << cs * lagrangian, lagrangian;
  const Eigen::VectorXd coeffs = split.fullPivLu().solve(field);
  const Eigen::VectorXd x1 = cs * lagrangian * coeffs.head(n);
  const Eigen::VectorXd x2 = lagrangian * coeffs.tail(n);
  const double norm2 = x1.dot(omega * (cs * x1));
  if (norm2 <= 1e-12 * std::max(1.0, field.squaredNorm())) {
    throw DegenerateError("b_coefficient: Hamiltonian vector field is tangent to the Lagrangian");
  }
  return {norm2, x1.dot(omega * x2)};
}

Eigen::MatrixXd random_symplectic(int n, std::mt19937_64& rng, double spread) {
  std::normal_distribution<double> normal(0.0, spread);
  auto random_symmetric = [&]() {
    Eigen::MatrixXd s(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) s(i, j) = s(j, i) = normal(rng);
    return s;
  };
  Eigen::MatrixXd upper = Eigen::MatrixXd::Identity(2 * n, 2 * n);
  upper.topRightCorner(n, n) = random_symmetric();
  Eigen::MatrixXd lower = Eigen::MatrixXd::Identity(2 * n, 2 * n);
  lower.bottomLeftCorner(n, n) = random_symmetric();
  Eigen::MatrixXd squeeze = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    const double d = std::exp(0.5 * normal(rng));
    squeeze(i, i) = d;
    squeeze(n + i, n + i) = 1.0 / d;
  }
  Eigen::MatrixXcd gauss(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) gauss(i, j) = Complex(normal(rng), normal(rng));
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(gauss);
  const Eigen::MatrixXcd unitary = qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
  return realify(unitary) * upper * squeeze * lower;
}

}  // namespace toeplitz::symplin
