#pragma once
// Linear symplectic algebra with complex structures.
//
// Vectors of R^{2n} are ordered (p_1..p_n, q_1..q_n). The symplectic form is
// omega(u, v) = u^T J v with J = [[0, I], [-I, 0]], the standard complex
// structure sends d/dp_i to d/dq_i, and z_i = p_i + i q_i. With these
// conventions a real map g = [[A, B], [C, D]] acts on complex coordinates as
// z -> P z + Q conj(z) with P = ((A + D) + i (C - B)) / 2; P is the (1,0)-block.

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace toeplitz::symplin {

using Complex = std::complex<double>;

inline constexpr double kStructuralTolerance = 1e-10;
inline constexpr double kPhaseTolerance = 1e-12;

Eigen::MatrixXd symplectic_form(int n);
Eigen::MatrixXd standard_complex_structure(int n);

class LinearSymplectomorphism {
 public:
  // Standard complex structure on both sides.
  explicit LinearSymplectomorphism(Eigen::MatrixXd matrix);
  LinearSymplectomorphism(Eigen::MatrixXd matrix, Eigen::MatrixXd source_cs,
                          Eigen::MatrixXd target_cs);

  int half_dim() const { return static_cast<int>(matrix_.rows() / 2); }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  const Eigen::MatrixXd& source_cs() const { return source_cs_; }
  const Eigen::MatrixXd& target_cs() const { return target_cs_; }
  bool same_structures() const;

 private:
  Eigen::MatrixXd matrix_;
  Eigen::MatrixXd source_cs_;
  Eigen::MatrixXd target_cs_;
};

// A square root carried together with its continuously tracked argument.
struct BranchedPhase {
  Complex value;
  double branch_angle = 0.0;
};

// Complex-linear part P of a real 2n x 2n matrix in standard coordinates.
Eigen::MatrixXcd complex_linear_part(const Eigen::MatrixXd& g);

// Symplectic basis (e_1..e_n, j e_1..j e_n), orthonormal for omega(., j .).
// Returns F with F * j_std = cs * F.
Eigen::MatrixXd unitary_frame(const Eigen::MatrixXd& cs);

Eigen::MatrixXcd holomorphic_block(const LinearSymplectomorphism& g);

// det_C(g^{1,0}). The canonical-line map K(g) is its reciprocal.
Complex holomorphic_determinant(const LinearSymplectomorphism& g);

struct PolarDecomposition {
  LinearSymplectomorphism rotation;  // commutes with j
  LinearSymplectomorphism stretch;   // symmetric positive definite for omega(., j .)
  Eigen::VectorXd stretch_eigenvalues;  // ascending; reciprocal pairs
};

PolarDecomposition polar_decompose(const LinearSymplectomorphism& g);

// prod_i (lambda_i + 1/lambda_i)/2 * det_C(rotation), lambda_i the eigenvalues
// of the stretch factor lying in (0, 1].
Complex polar_determinant(const LinearSymplectomorphism& g);

// Square roots of a nonvanishing path with continuously unwound argument. The
// first root has argument in (-pi/4, pi/4]. Throws GridTooCoarseError when two
// consecutive samples differ in argument by pi/2 or more.
std::vector<BranchedPhase> branch_sqrt_path(std::span<const Complex> values);

// Reciprocal holomorphic determinant obtained from the 2n-form
// p1^* dz_1..dz_n ^ p2^* conj(dz_1..dz_n) evaluated on the graph of g (frame
// route). Equals 1 / holomorphic_determinant(g) for the standard structure.
Complex graph_pairing_ratio(const Eigen::MatrixXd& g);

// Scalar of the level-set canonical lift Phi_F (x) Phi_G for a linear map g
// sending field_source to field_target (standard complex structure, omega
// scaled by omega_scale). Flat canonical frame dz_1 ^ .. ^ dz_n on both sides.
Complex level_set_factor(const Eigen::MatrixXd& g, const Eigen::VectorXd& field_source,
                         const Eigen::VectorXd& field_target, double omega_scale);

// B = |X_1|^2 + i omega(X_1, X_2) for X = X_1 + X_2, X_1 in j(Lambda),
// X_2 in Lambda. `lagrangian` holds a basis of Lambda as columns; omega(u, v)
// = u^T omega v.
Complex b_coefficient(const Eigen::VectorXd& field, const Eigen::MatrixXd& lagrangian,
                      const Eigen::MatrixXd& omega, const Eigen::MatrixXd& cs);

// Random element of Sp(2n) built from symmetric shears, a diagonal squeeze
// and a unitary rotation. `spread` controls the entry size of each factor.
Eigen::MatrixXd random_symplectic(int n, std::mt19937_64& rng, double spread = 1.0);

}  // namespace toeplitz::symplin
