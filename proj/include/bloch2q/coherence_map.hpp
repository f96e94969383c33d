// coherence_map.hpp: the coherence (Bloch) representation of two-qubit states.
//
// Basis of Hermitian 4x4 matrices, orthonormal for Tr(X^dag Y):
//   index 0        I4 / 2
//   index 1..3     sigma_i (x) I2 / 2
//   index 4..12    sigma_i (x) sigma_j / 2,  index = 3*i + j  (i, j in 1..3)
//   index 13..15   I2 (x) sigma_j / 2
// The nine correlation coordinates vAB are therefore stored with slot
// 3*(i-1) + (j-1) holding the sigma_i (x) sigma_j coefficient.

#pragma once

#include "bloch2q/quantum_core.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>

namespace bloch2q {

using Vec3 = Eigen::Vector3d;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Vec16 = Eigen::Matrix<double, 16, 1>;

inline constexpr int kIndexA = 1;
inline constexpr int kIndexAB = 4;
inline constexpr int kIndexB = 13;

/// vA (x) vB as a 9-vector, slot 3*(i-1) + (j-1) = vA_i * vB_j.
Vec9 kron3(const Vec3& a, const Vec3& b);

/// The sixteen basis matrices, Lambda_0 = I4/2 first.
const std::array<Mat4c, 16>& lambda_basis();

/// Coordinates (c0, vA, vAB, vB) of a trace-one Hermitian operator.
/// c0 is pinned to exactly 1/2; the other blocks are unconstrained here and
/// physicality is queried with the predicates below.
class BlochVector {
 public:
  BlochVector();  // maximally mixed state
  BlochVector(const Vec3& vA, const Vec9& vAB, const Vec3& vB);
  /// Throws std::invalid_argument unless coords[0] == 0.5 exactly.
  static BlochVector from_coordinates(const Vec16& coords);
  /// (1/2, vA, 2 vA (x) vB, vB).
  static BlochVector product(const Vec3& vA, const Vec3& vB);

  const Vec16& coordinates() const { return c_; }
  double c0() const { return c_[0]; }
  Vec3 vA() const { return c_.segment<3>(kIndexA); }
  Vec9 vAB() const { return c_.segment<9>(kIndexAB); }
  Vec3 vB() const { return c_.segment<3>(kIndexB); }

  /// ||(c0, vA, vAB, vB)||^2, equal to Tr rho^2.
  double squared_norm() const { return c_.squaredNorm(); }

  /// First violated norm bound (full purity <= 1, ||vA||^2, ||vB||^2 <= 1/4),
  /// or nullopt when all hold within tol.
  std::optional<std::string> bound_violation(double tol = 1e-10) const;

 private:
  explicit BlochVector(const Vec16& c) : c_(c) {}
  Vec16 c_;
};

BlochVector to_coherence(const DensityMatrix& rho);
/// Works for any trace-one Hermitian 4x4 matrix.
BlochVector to_coherence(const Mat4c& m);

/// sum_i v_i Lambda_i; Hermitian with unit trace, positivity not guaranteed.
Mat4c from_coherence(const BlochVector& v);

/// True when from_coherence(v) is positive semidefinite within eig_tol.
bool is_physical(const BlochVector& v, double eig_tol = kEigenvalueTol);

Vec3 reduced_bloch_A(const BlochVector& v);
Vec3 reduced_bloch_B(const BlochVector& v);
/// Tr rho_A^2 = 1/2 + 2 ||vA||^2.
double reduced_purity_A(const BlochVector& v);
/// Tr rho_B^2 = 1/2 + 2 ||vB||^2.
double reduced_purity_B(const BlochVector& v);

/// ||vAB - 2 vA (x) vB||; zero exactly on product states.
double factorization_residual(const BlochVector& v);

inline constexpr double kFactorizedThreshold = 1e-8;

inline bool is_factorized(const BlochVector& v, double threshold = kFactorizedThreshold) {
  return factorization_residual(v) <= threshold;
}

}  // namespace bloch2q
