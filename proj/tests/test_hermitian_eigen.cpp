#include <random>

#include "doctest.h"
#include "toeplitz/hermitian_eigen.hpp"

using toeplitz::linalg::hermitian_eigensolve;

namespace {
Eigen::MatrixXcd random_hermitian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = {nd(rng), nd(rng)};
  return 0.5 * (a + a.adjoint());
}
}  // namespace

TEST_CASE("Hermitian eigensolver against Eigen") {
  std::mt19937_64 rng(7);
  for (int n : {1, 2, 3, 7, 40, 120}) {
    const Eigen::MatrixXcd a = random_hermitian(n, rng);
    const auto mine = hermitian_eigensolve(a);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ref(a);
    CHECK((mine.values - ref.eigenvalues()).cwiseAbs().maxCoeff() < 1e-11 * n);
    const Eigen::MatrixXcd& v = mine.vectors;
    CHECK((v.adjoint() * v - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12 * n);
    CHECK((a * v - v * mine.values.asDiagonal()).cwiseAbs().maxCoeff() < 1e-11 * n);
  }
}

TEST_CASE("degenerate and structured spectra") {
  const int n = 30;
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) d(i, i) = (i % 3) - 1.0;
  std::mt19937_64 rng(9);
  const Eigen::MatrixXcd h = random_hermitian(n, rng);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::MatrixXcd u = es.eigenvectors();
  const Eigen::MatrixXcd a = u * d * u.adjoint();
  const auto r = hermitian_eigensolve(a);
  CHECK(std::abs(r.values(0) + 1.0) < 1e-12);
  CHECK(std::abs(r.values(n - 1) - 1.0) < 1e-12);
  CHECK((a * r.vectors - r.vectors * r.values.asDiagonal()).cwiseAbs().maxCoeff() < 1e-11);
  const auto id = hermitian_eigensolve(Eigen::MatrixXcd::Identity(5, 5));
  CHECK((id.values.array() - 1.0).abs().maxCoeff() == 0.0);
}
