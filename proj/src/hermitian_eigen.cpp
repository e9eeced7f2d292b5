#include "toeplitz/hermitian_eigen.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <vector>

#include "toeplitz/errors.hpp"

namespace toeplitz::linalg {

namespace {

using Complex = std::complex<double>;

// Implicit QL on a real symmetric tridiagonal matrix. d: diagonal, e[i]:
// coupling between i and i + 1 (e[n-1] unused). Rotations are applied to z.
void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, Eigen::MatrixXd& z) {
  const int n = static_cast<int>(d.size());
  const double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m = l;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 60) throw NumericalError("hermitian_eigensolve: QL iteration did not converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0;
        double c = 1.0;
        double p = 0.0;
        int i = m - 1;
        for (; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (Eigen::Index k = 0; k < z.rows(); ++k) {
            f = z(k, i + 1);
            z(k, i + 1) = s * z(k, i) + c * f;
            z(k, i) = c * z(k, i) - s * f;
          }
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

}  // namespace

HermitianEigen hermitian_eigensolve(const Eigen::MatrixXcd& input) {
  const Eigen::Index n = input.rows();
  if (input.cols() != n) throw ValidationError("hermitian_eigensolve: matrix must be square");
  HermitianEigen out;
  if (n == 0) return out;
  Eigen::MatrixXcd a = 0.5 * (input + input.adjoint());
  Eigen::MatrixXcd q = Eigen::MatrixXcd::Identity(n, n);

  // A = Q T Q^H with T Hermitian tridiagonal
  for (Eigen::Index k = 0; k + 2 < n; ++k) {
    const Eigen::Index m = n - k - 1;
    Eigen::VectorXcd x = a.block(k + 1, k, m, 1);
    const double xnorm = x.norm();
    if (xnorm == 0.0) continue;
    const Complex phase = x(0) == Complex(0.0) ? Complex(1.0) : x(0) / std::abs(x(0));
    const Complex alpha = -phase * xnorm;
    Eigen::VectorXcd v = x;
    v(0) -= alpha;
    const double vnorm = v.norm();
    if (vnorm == 0.0) continue;
    v /= vnorm;
    auto sub = a.block(k + 1, k + 1, m, m);
    const Eigen::VectorXcd p = sub * v;
    const Complex kk = v.dot(p);
    const Eigen::VectorXcd w = p - kk * v;
    sub -= 2.0 * (v * w.adjoint() + w * v.adjoint());
    a.block(k + 1, k, m, 1).setZero();
    a.block(k, k + 1, 1, m).setZero();
    a(k + 1, k) = alpha;
    a(k, k + 1) = std::conj(alpha);
    auto qcols = q.block(0, k + 1, n, m);
    const Eigen::VectorXcd qv = qcols * v;
    qcols -= 2.0 * qv * v.adjoint();
  }

  // T = D T_r D^H with T_r real symmetric
  std::vector<double> d(static_cast<std::size_t>(n));
  std::vector<double> e(static_cast<std::size_t>(n), 0.0);
  Eigen::VectorXcd phases(n);
  phases(0) = 1.0;
  for (Eigen::Index j = 0; j < n; ++j) d[static_cast<std::size_t>(j)] = a(j, j).real();
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    const Complex sub = a(j + 1, j);
    const double mod = std::abs(sub);
    e[static_cast<std::size_t>(j)] = mod;
    phases(j + 1) = mod == 0.0 ? phases(j) : phases(j) * sub / mod;
  }

  Eigen::MatrixXd z = Eigen::MatrixXd::Identity(n, n);
  tridiagonal_ql(d, e, z);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return d[static_cast<std::size_t>(i)] < d[static_cast<std::size_t>(j)];
  });
  const Eigen::MatrixXcd qd = q * phases.asDiagonal();
  const Eigen::MatrixXcd full = qd * z.cast<Complex>();
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    out.values(c) = d[static_cast<std::size_t>(order[static_cast<std::size_t>(c)])];
    out.vectors.col(c) = full.col(order[static_cast<std::size_t>(c)]);
  }
  return out;
}

}  // namespace toeplitz::linalg
