#pragma once
// Dense Hermitian eigensolver: Householder reduction to a real symmetric
// tridiagonal matrix followed by implicit QL with Wilkinson shifts.

#include <Eigen/Dense>

namespace toeplitz::linalg {

struct HermitianEigen {
  Eigen::VectorXd values;    // ascending
  Eigen::MatrixXcd vectors;  // columns, orthonormal
};

HermitianEigen hermitian_eigensolve(const Eigen::MatrixXcd& a);

}  // namespace toeplitz::linalg
