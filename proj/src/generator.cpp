#include "bloch2q/generator.hpp"

#include <cmath>
#include <stdexcept>

namespace bloch2q {

namespace {

bool finite(double x) { return std::isfinite(x); }

void require_traceless_hermitian(const Mat2c& h, const char* what) {
  if (!is_hermitian(h)) throw std::invalid_argument(std::string(what) + " is not Hermitian");
  if (std::abs(h.trace()) > kHermitianTol)
    throw std::invalid_argument(std::string(what) + " is not traceless");
}

}  // namespace

void TwoQubitModel::validate() const {
  if (!finite(omega_a) || !finite(omega_b)) throw std::invalid_argument("non-finite frequency");
  if (!lambda.allFinite()) throw std::invalid_argument("non-finite coupling matrix");
  for (const auto& h : control_hams) require_traceless_hermitian(h, "control Hamiltonian");
  for (const auto& l : jumps_on_A)
    if (!l.allFinite()) throw std::invalid_argument("non-finite jump operator");
}

Mat2c TwoQubitModel::hamiltonian_A(const Vec3& u) const {
  Mat2c h = omega_a * pauli(Pauli::sigma3);
  for (int j = 0; j < 3; ++j) h += u[j] * control_hams[j];
  return h;
}

Mat2c TwoQubitModel::hamiltonian_B() const { return omega_b * pauli(Pauli::sigma3); }

Mat4c TwoQubitModel::interaction() const {
  Mat4c h = Mat4c::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (lambda(i, j) != 0.0) h += 0.5 * lambda(i, j) * tensor(pauli(kPaulis[i]), pauli(kPaulis[j]));
  return h;
}

Mat4c TwoQubitModel::hamiltonian(const Vec3& u) const {
  const Mat2c id = Mat2c::Identity();
  return tensor(hamiltonian_A(u), id) + interaction() + tensor(id, hamiltonian_B());
}

std::vector<ComplexMatrix> TwoQubitModel::jumps() const {
  std::vector<ComplexMatrix> out;
  out.reserve(jumps_on_A.size());
  for (const auto& l : jumps_on_A) out.emplace_back(tensor(l, Mat2c::Identity()));
  return out;
}

std::string_view to_string(Coupling c) {
  switch (c) {
    case Coupling::dispersive:
      return "dispersive";
    case Coupling::resonant:
      return "resonant";
    case Coupling::sigma3_sigma1:
      return "sigma3-sigma1";
  }
  return "?";
}

std::optional<Coupling> parse_coupling(std::string_view name) {
  if (name == "dispersive") return Coupling::dispersive;
  if (name == "resonant") return Coupling::resonant;
  if (name == "sigma3-sigma1") return Coupling::sigma3_sigma1;
  return std::nullopt;
}

Mat3 CouplingCase::lambda() const {
  Mat3 l = Mat3::Zero();
  switch (tag) {
    case Coupling::dispersive:
      l(2, 2) = g;
      break;
    case Coupling::resonant:
      l(0, 0) = g;
      l(1, 1) = g;
      break;
    case Coupling::sigma3_sigma1:
      l(2, 0) = g;
      break;
  }
  return l;
}

TwoQubitModel make_model(const CouplingCase& coupling, double omega_a, double omega_b,
                         std::vector<Mat2c> jumps_on_A) {
  TwoQubitModel m;
  m.omega_a = omega_a;
  m.omega_b = omega_b;
  m.lambda = coupling.lambda();
  m.jumps_on_A = std::move(jumps_on_A);
  return m;
}

bool has_coupling(const TwoQubitModel& model, Coupling tag) {
  Eigen::Index r = 0, c = 0;
  CouplingCase{tag, 1.0}.lambda().maxCoeff(&r, &c);
  return model.lambda == CouplingCase{tag, model.lambda(r, c)}.lambda();
}

const std::array<Mat3, 3>& t_matrices() {
  static const std::array<Mat3, 3> t = [] {
    std::array<Mat3, 3> out;
    out[0] << 0, 0, 0, 0, 0, -1, 0, 1, 0;
    out[1] << 0, 0, 1, 0, 0, 0, -1, 0, 0;
    out[2] << 0, -1, 0, 1, 0, 0, 0, 0, 0;
    return out;
  }();
  return t;
}

Vec3 pauli_coefficients(const Mat2c& h) {
  require_traceless_hermitian(h, "local Hamiltonian");
  Vec3 a;
  for (int j = 0; j < 3; ++j) a[j] = (pauli(kPaulis[j]) * h).trace().real();
  return a;
}

LocalDissipator local_dissipator(std::span<const Mat2c> jumps) {
  LocalDissipator out;
  if (jumps.empty()) return out;
  auto apply = [&](const Mat2c& x) {
    Mat2c r = Mat2c::Zero();
    for (const auto& l : jumps) {
      const Mat2c ldl = l.adjoint() * l;
      r += l * x * l.adjoint() - 0.5 * (ldl * x + x * ldl);
    }
    return r;
  };
  // Coordinates on the orthonormal one-qubit basis sigma_k / sqrt(2).
  for (int i = 0; i < 3; ++i) {
    const Mat2c image = apply(pauli(kPaulis[i]));
    for (int k = 0; k < 3; ++k) out.d_hat(k, i) = 0.5 * (pauli(kPaulis[k]) * image).trace().real();
  }
  const Mat2c image = apply(Mat2c::Identity());
  for (int k = 0; k < 3; ++k) out.v0[k] = 0.5 * (pauli(kPaulis[k]) * image).trace().real();
  return out;
}

Mat9 kron(const Mat3& a, const Mat3& b) {
  Mat9 out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.block<3, 3>(3 * i, 3 * j) = a(i, j) * b;
  return out;
}

GeneratorBlocks assemble_blocks(const TwoQubitModel& model, const Vec3& u) {
  model.validate();
  const auto& t = t_matrices();
  GeneratorBlocks b;

  const Vec3 alpha = pauli_coefficients(model.hamiltonian_A(u));
  const Vec3 beta = pauli_coefficients(model.hamiltonian_B());
  for (int j = 0; j < 3; ++j) {
    b.hA += alpha[j] * t[j];
    b.hB += beta[j] * t[j];
  }

  // H_It = sum_j T_j (x) (lambda_j1, lambda_j2, lambda_j3)
  // H_Ib = sum_j (lambda_1j, lambda_2j, lambda_3j) (x) T_j
  for (int j = 0; j < 3; ++j) {
    for (int m = 0; m < 3; ++m)
      for (int l = 0; l < 3; ++l) {
        b.H_It.col(3 * m + l) += model.lambda(j, l) * t[j].col(m);
        b.H_Ib.col(3 * m + l) += model.lambda(m, j) * t[j].col(l);
      }
  }
  b.H_Il = -b.H_It.transpose();
  b.H_Ir = -b.H_Ib.transpose();

  const LocalDissipator diss = local_dissipator(model.jumps_on_A);
  b.d_hat = diss.d_hat;
  b.v0 = diss.v0;
  return b;
}

Generator16::Generator16(const Mat16& m) : m_(m) {
  const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
  if (m_.row(0).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::logic_error("generator row 0 must vanish (trace preservation)");
}

Generator16 assemble_generator(const GeneratorBlocks& b) {
  Mat16 m = Mat16::Zero();
  const Mat3 id = Mat3::Identity();
  m.block<3, 1>(kIndexA, 0) = b.v0;
  m.block<3, 3>(kIndexA, kIndexA) = b.hA + b.d_hat;
  m.block<3, 9>(kIndexA, kIndexAB) = b.H_It;
  m.block<9, 3>(kIndexAB, kIndexA) = b.H_Il;
  m.block<9, 9>(kIndexAB, kIndexAB) = kron(b.hA, id) + kron(id, b.hB) + kron(b.d_hat, id);
  Mat9x3 v0_block = Mat9x3::Zero();
  for (int k = 0; k < 3; ++k) v0_block.block<3, 3>(3 * k, 0) = b.v0[k] * id;
  m.block<9, 3>(kIndexAB, kIndexB) = b.H_Ir + v0_block;
  m.block<3, 9>(kIndexB, kIndexAB) = b.H_Ib;
  m.block<3, 3>(kIndexB, kIndexB) = b.hB;
  return Generator16(m);
}

Generator16 numeric_generator(const TwoQubitModel& model, const Vec3& u) {
  model.validate();
  const auto& basis = lambda_basis();
  const ComplexMatrix h = model.hamiltonian(u);
  const std::vector<ComplexMatrix> jumps = model.jumps();
  Mat16 m;
  for (int j = 0; j < 16; ++j) {
    const ComplexMatrix image = gksl_rhs(ComplexMatrix(basis[j]), h, jumps);
    for (int k = 0; k < 16; ++k) m(k, j) = (basis[k] * image).trace().real();
  }
  return Generator16(m);
}

ControlAffineGenerator control_affine_generator(const TwoQubitModel& model) {
  ControlAffineGenerator g;
  g.drift = assemble_generator(assemble_blocks(model, Vec3::Zero())).matrix();
  for (int j = 0; j < 3; ++j)
    g.control[j] = assemble_generator(assemble_blocks(model, Vec3::Unit(j))).matrix() - g.drift;
  return g;
}

}  // namespace bloch2q
