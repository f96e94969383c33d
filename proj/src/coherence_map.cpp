#include "bloch2q/coherence_map.hpp"

#include <stdexcept>

namespace bloch2q {

Vec9 kron3(const Vec3& a, const Vec3& b) {
  Vec9 out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[3 * i + j] = a[i] * b[j];
  return out;
}

const std::array<Mat4c, 16>& lambda_basis() {
  static const std::array<Mat4c, 16> basis = [] {
    std::array<Mat4c, 16> b;
    const Mat2c id = Mat2c::Identity();
    b[0] = Mat4c::Identity() / 2.0;
    for (int i = 0; i < 3; ++i) {
      const Mat2c si = pauli(kPaulis[i]);
      b[kIndexA + i] = tensor(si, id) / 2.0;
      b[kIndexB + i] = tensor(id, si) / 2.0;
      for (int j = 0; j < 3; ++j) b[kIndexAB + 3 * i + j] = tensor(si, pauli(kPaulis[j])) / 2.0;
    }
    return b;
  }();
  return basis;
}

BlochVector::BlochVector() : c_(Vec16::Zero()) { c_[0] = 0.5; }

BlochVector::BlochVector(const Vec3& vA, const Vec9& vAB, const Vec3& vB) : BlochVector() {
  c_.segment<3>(kIndexA) = vA;
  c_.segment<9>(kIndexAB) = vAB;
  c_.segment<3>(kIndexB) = vB;
}

BlochVector BlochVector::from_coordinates(const Vec16& coords) {
  if (coords[0] != 0.5)
    throw std::invalid_argument("Bloch vector must have c0 == 1/2");
  return BlochVector(coords);
}

BlochVector BlochVector::product(const Vec3& vA, const Vec3& vB) {
  return BlochVector(vA, 2.0 * kron3(vA, vB), vB);
}

std::optional<std::string> BlochVector::bound_violation(double tol) const {
  if (squared_norm() > 1.0 + tol) return "purity bound ||v||^2 <= 1 violated";
  if (vA().squaredNorm() > 0.25 + tol) return "reduced bound ||vA||^2 <= 1/4 violated";
  if (vB().squaredNorm() > 0.25 + tol) return "reduced bound ||vB||^2 <= 1/4 violated";
  return std::nullopt;
}

BlochVector to_coherence(const Mat4c& m) {
  const auto& basis = lambda_basis();
  Vec16 c;
  c[0] = 0.5;
  // Tr(m Lambda_i) for Hermitian inputs is real; the imaginary part is discarded.
  for (int i = 1; i < 16; ++i) c[i] = (m * basis[i]).trace().real();
  return BlochVector::from_coordinates(c);
}

BlochVector to_coherence(const DensityMatrix& rho) {
  if (rho.dim() != 4) throw std::invalid_argument("coherence map needs a 4x4 density matrix");
  return to_coherence(Mat4c(rho.matrix()));
}

Mat4c from_coherence(const BlochVector& v) {
  const auto& basis = lambda_basis();
  Mat4c m = Mat4c::Zero();
  const Vec16& c = v.coordinates();
  for (int i = 0; i < 16; ++i) m += c[i] * basis[i];
  return m;
}

bool is_physical(const BlochVector& v, double eig_tol) {
  return min_eigenvalue(from_coherence(v)) >= eig_tol;
}

Vec3 reduced_bloch_A(const BlochVector& v) { return v.vA(); }
Vec3 reduced_bloch_B(const BlochVector& v) { return v.vB(); }

double reduced_purity_A(const BlochVector& v) { return 0.5 + 2.0 * v.vA().squaredNorm(); }
double reduced_purity_B(const BlochVector& v) { return 0.5 + 2.0 * v.vB().squaredNorm(); }

double factorization_residual(const BlochVector& v) {
  return (v.vAB() - 2.0 * kron3(v.vA(), v.vB())).norm();
}

}  // namespace bloch2q
