// quantum_core.hpp: dense two-qubit linear algebra, density matrices and the
// GKSL right-hand side.
//
// Layout convention: a 4x4 operator on H_A (x) H_B is indexed by (a,b) with the
// A index varying slowest, i.e. row = 2*a + b.  tensor(A, B) follows the same
// Kronecker convention, so partial_trace_B(tensor(ra, rb)) == ra.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <vector>

namespace bloch2q {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using Mat2c = Eigen::Matrix2cd;
using Mat4c = Eigen::Matrix4cd;

inline constexpr Complex kI{0.0, 1.0};

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kEigenvalueTol = -1e-10;

/// Index of a Pauli matrix; only sigma1, sigma2 and sigma3 exist.
enum class Pauli : int { sigma1 = 1, sigma2 = 2, sigma3 = 3 };

inline constexpr Pauli kPaulis[3] = {Pauli::sigma1, Pauli::sigma2, Pauli::sigma3};

Mat2c pauli(Pauli i);
/// sigma_{+-} = sigma1 +- i sigma2, unnormalized.
Mat2c sigma_plus();
Mat2c sigma_minus();

/// Kronecker product; result has rows a.rows()*b.rows().
ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);
Mat4c tensor(const Mat2c& a, const Mat2c& b);

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

/// Max-abs-entry norm of M - M^dagger.
double hermiticity_defect(const ComplexMatrix& m);
bool is_hermitian(const ComplexMatrix& m, double tol = kHermitianTol);

/// Hermitian, unit trace and eigenvalues >= eig_tol.
bool is_density_matrix(const ComplexMatrix& m, double eig_tol = kEigenvalueTol);

/// Smallest eigenvalue of the Hermitian part of m.
double min_eigenvalue(const ComplexMatrix& m);

/// A validated density matrix (2x2 or 4x4 in this project).
class DensityMatrix {
 public:
  /// Throws std::invalid_argument if m violates any density-matrix invariant.
  explicit DensityMatrix(ComplexMatrix m);

  static DensityMatrix maximally_mixed(int dim);
  /// |psi><psi| for a (not necessarily normalized) nonzero state vector.
  static DensityMatrix pure(const Eigen::VectorXcd& psi);

  const ComplexMatrix& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }

 private:
  ComplexMatrix m_;
};

/// Tr_A of a 4x4 operator; returns the 2x2 operator on B.
Mat2c partial_trace_A(const Mat4c& m);
/// Tr_B of a 4x4 operator; returns the 2x2 operator on A.
Mat2c partial_trace_B(const Mat4c& m);

DensityMatrix partial_trace_A(const DensityMatrix& rho);
DensityMatrix partial_trace_B(const DensityMatrix& rho);

/// Tr rho^2.
double purity(const DensityMatrix& rho);
double purity(const ComplexMatrix& m);

/// -i[H, rho] + sum_k (L_k rho L_k^dag - 1/2 {L_k^dag L_k, rho}).
/// rho is taken as a plain matrix so the map can be applied to basis elements.
/// Throws std::invalid_argument if H is not Hermitian within kHermitianTol.
ComplexMatrix gksl_rhs(const ComplexMatrix& rho, const ComplexMatrix& hamiltonian,
                       std::span<const ComplexMatrix> jumps);

inline ComplexMatrix gksl_rhs(const DensityMatrix& rho, const ComplexMatrix& hamiltonian,
                              std::span<const ComplexMatrix> jumps) {
  return gksl_rhs(rho.matrix(), hamiltonian, jumps);
}

}  // namespace bloch2q
