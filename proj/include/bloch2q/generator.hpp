// generator.hpp: the two-qubit model and the 16x16 affine generator of its
// coherence-vector dynamics, built analytically from blocks and numerically
// from the GKSL map.

#pragma once

#include "bloch2q/coherence_map.hpp"
#include "bloch2q/quantum_core.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bloch2q {

using Mat3 = Eigen::Matrix3d;
using Mat3x9 = Eigen::Matrix<double, 3, 9>;
using Mat9x3 = Eigen::Matrix<double, 9, 3>;
using Mat9 = Eigen::Matrix<double, 9, 9>;
using Mat16 = Eigen::Matrix<double, 16, 16>;

/// Two qubits, A controlled and dissipative, B closed:
///   H(u) = (omega_a sigma3 + sum_j u_j control_hams[j]) (x) I
///          + 1/2 sum_ij lambda_ij sigma_i (x) sigma_j + I (x) omega_b sigma3
///   L_k  = jumps_on_A[k] (x) I
struct TwoQubitModel {
  double omega_a = 0.0;
  double omega_b = 0.0;
  std::array<Mat2c, 3> control_hams = {pauli(Pauli::sigma1), pauli(Pauli::sigma2),
                                       pauli(Pauli::sigma3)};
  Mat3 lambda = Mat3::Zero();
  std::vector<Mat2c> jumps_on_A;

  /// Throws std::invalid_argument if a control Hamiltonian is not Hermitian
  /// and traceless or a parameter is not finite.
  void validate() const;

  Mat2c hamiltonian_A(const Vec3& u) const;
  Mat2c hamiltonian_B() const;
  Mat4c interaction() const;
  Mat4c hamiltonian(const Vec3& u) const;
  std::vector<ComplexMatrix> jumps() const;
};

enum class Coupling { dispersive, resonant, sigma3_sigma1 };

std::string_view to_string(Coupling c);
std::optional<Coupling> parse_coupling(std::string_view name);

/// Named interaction with strength g (all three in the 1/2 sum lambda convention):
///   dispersive     lambda_33 = g              H_I = (g/2) sigma3 (x) sigma3
///   resonant       lambda_11 = lambda_22 = g  H_I = (g/2)(s1 (x) s1 + s2 (x) s2)
///   sigma3_sigma1  lambda_31 = g              H_I = (g/2) sigma3 (x) sigma1
struct CouplingCase {
  Coupling tag;
  double g;

  Mat3 lambda() const;
};

TwoQubitModel make_model(const CouplingCase& coupling, double omega_a, double omega_b,
                         std::vector<Mat2c> jumps_on_A = {});

/// True when model.lambda is exactly the pattern of `tag` for some g.
bool has_coupling(const TwoQubitModel& model, Coupling tag);

/// so(3) generators: T_j is the matrix of -i[sigma_j / 2, .] on span{sigma_1,2,3}.
const std::array<Mat3, 3>& t_matrices();

/// alpha with h = sum_j (alpha_j / 2) sigma_j, i.e. alpha_j = Tr(sigma_j h).
/// Throws std::invalid_argument unless h is Hermitian and traceless.
Vec3 pauli_coefficients(const Mat2c& h);

/// One-qubit dissipator sum_k (l rho l^dag - 1/2 {l^dag l, rho}) on the
/// sigma/2 coordinates: d/dt vA = v0 / 2 + d_hat vA.
struct LocalDissipator {
  Mat3 d_hat = Mat3::Zero();
  Vec3 v0 = Vec3::Zero();
};

LocalDissipator local_dissipator(std::span<const Mat2c> jumps);

struct GeneratorBlocks {
  Mat3 hA = Mat3::Zero();
  Mat3 hB = Mat3::Zero();
  Mat3x9 H_It = Mat3x9::Zero();  // vA rows, vAB columns
  Mat9x3 H_Il = Mat9x3::Zero();  // vAB rows, vA columns
  Mat9x3 H_Ir = Mat9x3::Zero();  // vAB rows, vB columns
  Mat3x9 H_Ib = Mat3x9::Zero();  // vB rows, vAB columns
  Mat3 d_hat = Mat3::Zero();
  Vec3 v0 = Vec3::Zero();
};

GeneratorBlocks assemble_blocks(const TwoQubitModel& model, const Vec3& u);

/// Affine generator acting on (c0, vA, vAB, vB); row 0 vanishes.
class Generator16 {
 public:
  /// Throws std::logic_error if row 0 is not zero within 1e-12 (relative).
  explicit Generator16(const Mat16& m);
  static Generator16 zero() { return Generator16(Mat16::Zero()); }

  const Mat16& matrix() const { return m_; }
  Vec16 apply(const Vec16& v) const { return m_ * v; }

 private:
  Mat16 m_;
};

/// Layout:
///   [ 0     0              0                              0            ]
///   [ v0    hA + d         H_It                           0            ]
///   [ 0     H_Il           hA(x)I + I(x)hB + d(x)I        H_Ir + v0(x)I ]
///   [ 0     0              H_Ib                           hB           ]
Generator16 assemble_generator(const GeneratorBlocks& blocks);

/// Column j = coordinates of gksl_rhs(Lambda_j); independent of the block formulas.
Generator16 numeric_generator(const TwoQubitModel& model, const Vec3& u);

/// G(u) = drift + sum_j u_j control[j]; exact since the model is affine in u.
struct ControlAffineGenerator {
  Mat16 drift;
  std::array<Mat16, 3> control;

  Mat16 at(const Vec3& u) const {
    return drift + u[0] * control[0] + u[1] * control[1] + u[2] * control[2];
  }
};

ControlAffineGenerator control_affine_generator(const TwoQubitModel& model);

/// Real Kronecker product helpers matching the vAB slot convention.
Mat9 kron(const Mat3& a, const Mat3& b);

}  // namespace bloch2q
