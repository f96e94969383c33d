// purity_analysis.hpp: conditions for keeping the reduced state of B pure.
//
// On states whose B-reduction is pure the coherence vector factorizes as
// (1/2, vA, 2 vA (x) vB, vB) with ||vB|| = 1/2.  Staying on that set to first
// order requires the w-vector
//     w = d/dt vAB - 2 (d/dt vA) (x) vB - 2 vA (x) (d/dt vB)
// to vanish.  Everything here is evaluated through the assembled generator;
// the closed forms are kept as independent cross-checks.

#pragma once

#include "bloch2q/dynamics.hpp"
#include "bloch2q/generator.hpp"

#include "json.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bloch2q {

using WVector = Vec9;
using Vec2 = Eigen::Vector2d;

inline constexpr double kPureTol = 1e-10;

/// vA in the A Bloch ball (||vA||^2 <= 1/4) and vB on the B sphere.
class FactorizedState {
 public:
  /// Throws std::invalid_argument outside the constraint set (tolerance 1e-10).
  FactorizedState(const Vec3& vA, const Vec3& vB);

  const Vec3& vA() const { return vA_; }
  const Vec3& vB() const { return vB_; }
  BlochVector embed() const { return BlochVector::product(vA_, vB_); }

 private:
  Vec3 vA_;
  Vec3 vB_;
};

/// vA uniform in the ball, vB uniform on the sphere.
FactorizedState random_factorized_state(std::mt19937_64& rng);

/// w at the embedded state under controls u, via the 16x16 generator.
WVector compute_w(const TwoQubitModel& model, const FactorizedState& s, const Vec3& u);

/// Closed forms of w for unit-independent couplings (only g enters).
///   dispersive: all nine components, including
///       w3 = -g vA2 (1 - 4 vB3^2),  w8 = g vB1 (1 - 4 vA3^2),  w7 = -g vB2 (1 - 4 vA3^2)
///   resonant: the nine-component expression with X = vA2 vB1 - vA1 vB2.
/// Throws std::invalid_argument for sigma3_sigma1.
WVector closed_form_w(const CouplingCase& coupling, const FactorizedState& s);

// ---------------------------------------------------------------------------
// Dispersive coupling: invariance of rho_A (x) (I +- sigma3)/2.

/// Coordinate indices of z2 = (vAB1, vAB2, vAB4, vAB5, vAB7, vAB8, vB1, vB2).
const std::array<int, 8>& dispersive_z2_indices();

struct StructuralCheck {
  /// Largest |G(r, c)| with r a z2 or vB3 row and c outside z2.
  double max_leak = 0.0;
  int row = -1;
  int col = -1;
  bool ok = true;
};

/// Checks drift and all three control generators of a dispersive model.
StructuralCheck dispersive_structure(const TwoQubitModel& model, double tol = 1e-14);

struct InvariantCheckReport {
  StructuralCheck structure;
  std::size_t runs = 0;
  double max_z2 = 0.0;
  double max_vB3_deviation = 0.0;
  std::size_t worst_run = 0;
  double worst_time = 0.0;
  std::vector<std::string> violations;
  bool ok = true;
};

inline constexpr double kInvariantTol = 1e-8;

/// Integrates every (start, law) pair and tracks ||z2(t)|| and | |vB3| - 1/2 |.
/// Starts must be rho_A (x) (I +- sigma3)/2; the model must be dispersive.
InvariantCheckReport dispersive_invariant_check(const TwoQubitModel& model,
                                                std::span<const BlochVector> starts,
                                                std::span<const ControlLaw> laws, double horizon,
                                                double step);

// ---------------------------------------------------------------------------
// Dissipation compatibility and the sigma3 (x) sigma1 protecting control.

struct Compatibility {
  double residual = 0.0;  // |v0_3 / 2 + target_vA3 * d_33|
  bool compatible = false;
};

inline constexpr double kCompatibilityTol = 1e-10;

Compatibility compatibility_condition(const TwoQubitModel& model, double target_vA3);

struct IncompatibleDissipation : std::domain_error {
  using std::domain_error::domain_error;
};

/// (u1, u2) keeping vA = (0, 0, +-1/2) fixed, u3 = 0.  Solved from the
/// assembled generator, so non-default control Hamiltonians are honoured.
/// With H_Aj = sigma_j it equals
///   u1 = (v0_2 + 2 vA3 d_23) / (4 vA3),  u2 = -(v0_1 + 2 vA3 d_13) / (4 vA3).
/// Throws std::invalid_argument on a bad state or coupling and
/// IncompatibleDissipation when v0_3/2 + vA3 d_33 != 0.
Vec2 protecting_control_sigma31(const TwoQubitModel& model, const FactorizedState& s);

/// Feedback law applying protecting_control_sigma31 at the pole selected by
/// the sign of the current vA3.
ControlLaw protecting_feedback_law(const TwoQubitModel& model);

/// Closed-form generator of vB on the protected manifold:
///   dispersive     (2 omega_b + 2 g vA3) T3
///   sigma3_sigma1  2 omega_b T3 + 2 g vA3 T1
/// Throws std::invalid_argument for resonant coupling.
Mat3 reduced_B_generator(const CouplingCase& coupling, double omega_b, double vA3);

/// hB + 2 H_Ib (vA (x) I3): the vB block of the generator on states
/// (1/2, vA, 2 vA (x) vB, vB), read off the assembled blocks.
Mat3 restricted_B_generator(const TwoQubitModel& model, const Vec3& vA);

/// sigma3 (x) sigma1 coupling, states rho_A (x) (I +- sigma1)/2: smallest
/// first-order drift ||(d vB2, d vB3, w)|| over the given constant controls
/// and A states.  Zero would mean the branch can be held.
struct BranchRejection {
  double min_rate = 0.0;
  Vec3 argmin_u = Vec3::Zero();
  Vec3 argmin_vA = Vec3::Zero();
};

BranchRejection sigma31_branch_rejection(const TwoQubitModel& model, double sign,
                                         std::span<const Vec3> controls,
                                         std::span<const Vec3> a_states);

// ---------------------------------------------------------------------------
// Resonant coupling: w = 0 forces a pure A state.

struct SweepOptions {
  double grid_step = 0.05;
  std::size_t random_samples = 10000;
  /// Random equatorial vB = (cos p, sin p, 0)/2, each combined with
  /// vA = s (-sin p, cos p, 0)/2 for s = -1, -0.95, ..., 1.  Only s = +-1 is pure.
  std::size_t branch_samples = 500;
  std::uint64_t seed = 12345;
  double w_tol = 1e-9;
  double branch_tol = 1e-6;
  double purity_gap = 1e-6;
};

struct SweepSample {
  Vec3 vA = Vec3::Zero();
  Vec3 vB = Vec3::Zero();
  double w_norm = 0.0;
};

struct ObstructionSweep {
  std::size_t points = 0;
  std::size_t zero_points = 0;
  /// Zero points by solution class: (vA2 vB1 = vA1 vB2 only, vA3 = vB3 only, both, neither).
  std::array<std::size_t, 4> branch_counts{};
  /// Largest 1/2 - ||vA|| among points with ||w|| <= w_tol.
  double worst_vA_deficit = 0.0;
  std::optional<SweepSample> worst_zero_point;
  /// Smallest ||w|| among points with ||vA|| < 1/2 - purity_gap.
  std::optional<SweepSample> min_w_mixed;
  bool ok = true;
};

enum class SolutionSet { empty, point, line, plane, space };
std::string_view to_string(SolutionSet s);

/// Affine solution set of v0/2 + d_hat vA = 0.
struct StationarySolutions {
  SolutionSet kind = SolutionSet::empty;
  Vec3 particular = Vec3::Zero();  // minimum-norm solution
  std::vector<Vec3> directions;    // null-space basis
  /// Whether some solution has ||vA|| = 1/2 (within 1e-9).
  bool reaches_pure = false;
  double residual = 0.0;
};

StationarySolutions stationary_A_solutions(const TwoQubitModel& model);

struct ResonantObstructionReport {
  ObstructionSweep sweep;
  StationarySolutions stationary;
};

/// Grid (vA on a cubic grid inside the ball, vB on an angular grid of the
/// sphere with arc spacing grid_step), random samples of the factorized set
/// and the branch family above.
/// Throws std::invalid_argument unless the model has resonant coupling.
ResonantObstructionReport resonant_obstruction_check(const TwoQubitModel& model,
                                                     const SweepOptions& options = {});

nlohmann::json to_json(const InvariantCheckReport& r);
nlohmann::json to_json(const ResonantObstructionReport& r);
nlohmann::json to_json(const PurificationReport& r);

}  // namespace bloch2q
