#include "bloch2q/quantum_core.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <stdexcept>
#include <string>

namespace bloch2q {

Mat2c pauli(Pauli i) {
  Mat2c m;
  switch (i) {
    case Pauli::sigma1:
      m << 0.0, 1.0, 1.0, 0.0;
      break;
    case Pauli::sigma2:
      m << 0.0, -kI, kI, 0.0;
      break;
    case Pauli::sigma3:
      m << 1.0, 0.0, 0.0, -1.0;
      break;
  }
  return m;
}

Mat2c sigma_plus() { return pauli(Pauli::sigma1) + kI * pauli(Pauli::sigma2); }
Mat2c sigma_minus() { return pauli(Pauli::sigma1) - kI * pauli(Pauli::sigma2); }

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

Mat4c tensor(const Mat2c& a, const Mat2c& b) {
  Mat4c out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b - b * a;
}

double hermiticity_defect(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

bool is_hermitian(const ComplexMatrix& m, double tol) { return hermiticity_defect(m) <= tol; }

double min_eigenvalue(const ComplexMatrix& m) {
  const ComplexMatrix herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool is_density_matrix(const ComplexMatrix& m, double eig_tol) {
  if (m.rows() == 0 || m.rows() != m.cols()) return false;
  if (!is_hermitian(m)) return false;
  if (std::abs(m.trace() - 1.0) > kTraceTol) return false;
  return min_eigenvalue(m) >= eig_tol;
}

DensityMatrix::DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {
  if (m_.rows() == 0 || m_.rows() != m_.cols())
    throw std::invalid_argument("density matrix must be square and non-empty");
  if (!is_hermitian(m_))
    throw std::invalid_argument("density matrix is not Hermitian (defect " +
                                std::to_string(hermiticity_defect(m_)) + ")");
  if (std::abs(m_.trace() - 1.0) > kTraceTol)
    throw std::invalid_argument("density matrix trace differs from one");
  if (const double lo = min_eigenvalue(m_); lo < kEigenvalueTol)
    throw std::invalid_argument("density matrix has negative eigenvalue " + std::to_string(lo));
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  return DensityMatrix(ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& psi) {
  const double n = psi.norm();
  if (n == 0.0) throw std::invalid_argument("zero state vector");
  const Eigen::VectorXcd u = psi / n;
  return DensityMatrix(u * u.adjoint());
}

Mat2c partial_trace_A(const Mat4c& m) {
  Mat2c out = Mat2c::Zero();
  for (int a = 0; a < 2; ++a) out += m.block<2, 2>(2 * a, 2 * a);
  return out;
}

Mat2c partial_trace_B(const Mat4c& m) {
  Mat2c out;
  for (int a = 0; a < 2; ++a)
    for (int ap = 0; ap < 2; ++ap) out(a, ap) = m.block<2, 2>(2 * a, 2 * ap).trace();
  return out;
}

namespace {
Mat4c as_two_qubit(const DensityMatrix& rho) {
  if (rho.dim() != 4) throw std::invalid_argument("partial trace needs a 4x4 density matrix");
  return rho.matrix();
}
}  // namespace

DensityMatrix partial_trace_A(const DensityMatrix& rho) {
  return DensityMatrix(partial_trace_A(as_two_qubit(rho)));
}

DensityMatrix partial_trace_B(const DensityMatrix& rho) {
  return DensityMatrix(partial_trace_B(as_two_qubit(rho)));
}

double purity(const ComplexMatrix& m) { return (m * m).trace().real(); }
double purity(const DensityMatrix& rho) { return purity(rho.matrix()); }

ComplexMatrix gksl_rhs(const ComplexMatrix& rho, const ComplexMatrix& hamiltonian,
                       std::span<const ComplexMatrix> jumps) {
  if (!is_hermitian(hamiltonian))
    throw std::invalid_argument("Hamiltonian is not Hermitian (defect " +
                                std::to_string(hermiticity_defect(hamiltonian)) + ")");
  ComplexMatrix out = -kI * commutator(hamiltonian, rho);
  for (const auto& l : jumps) {
    const ComplexMatrix ldl = l.adjoint() * l;
    out += l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl);
  }
  return out;
}

}  // namespace bloch2q
