// dynamics.hpp: fixed-step integration of the controlled coherence-vector
// equation, purity derivatives and purification scans.

#pragma once

#include "bloch2q/coherence_map.hpp"
#include "bloch2q/generator.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bloch2q {

/// u(t) on the three control channels.  Piecewise-constant and sampled laws
/// are checked against the bound when built; feedback laws are saturated.
class ControlLaw {
 public:
  enum class Kind { piecewise_constant, sampled, state_feedback };
  using Feedback = std::function<Vec3(double t, const BlochVector& v)>;

  static ControlLaw constant(const Vec3& u, std::optional<double> bound = std::nullopt);
  /// values[i] holds on [breakpoints[i], breakpoints[i+1]); the last value holds
  /// afterwards.  breakpoints must start at 0 and increase strictly.
  static ControlLaw piecewise_constant(std::vector<double> breakpoints, std::vector<Vec3> values,
                                       std::optional<double> bound = std::nullopt);
  /// Linear interpolation between samples, clamped at both ends.
  static ControlLaw sampled(std::vector<double> times, std::vector<Vec3> values,
                            std::optional<double> bound = std::nullopt);
  static ControlLaw feedback(Feedback f, std::optional<double> bound = std::nullopt,
                             std::string label = "feedback");

  Kind kind() const { return kind_; }
  std::optional<double> bound() const { return bound_; }
  const std::string& label() const { return label_; }

  Vec3 evaluate(double t, const BlochVector& v) const;

  /// Piecewise-constant breakpoints moved to the nearest multiple of step.
  ControlLaw snapped_to_grid(double step) const;

 private:
  ControlLaw() = default;

  Kind kind_ = Kind::piecewise_constant;
  std::vector<double> times_;
  std::vector<Vec3> values_;
  Feedback feedback_;
  std::optional<double> bound_;
  std::string label_;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<BlochVector> states;
  std::vector<Vec3> controls;
  std::uint64_t model_hash = 0;
  double step = 0.0;

  /// Largest excess over the norm bounds seen at any step.
  double max_bound_excess = 0.0;
  /// Smallest eigenvalue of the recorded states (when eigenvalue checks ran).
  double min_eigenvalue = 1.0;
  /// Set when the run stopped on a physicality violation.
  std::optional<std::string> abort_reason;

  bool ok() const { return !abort_reason; }
  std::size_t size() const { return times.size(); }
};

struct IntegrateOptions {
  /// Record every n-th step (the final state is always recorded).
  int record_stride = 1;
  /// Violations beyond this abort the run.
  double abort_tolerance = 1e-6;
  /// Eigenvalue test on every n-th recorded state; 0 disables it.  The cheap
  /// norm-bound test runs on every step regardless.
  int eigen_check_every = 1;
};

/// Classical RK4 on d/dt v = G(u(t, v)) v with c0 pinned to 1/2.
/// Feedback laws see the stage state; piecewise-constant laws are snapped to
/// the step grid and held over each step.
Trajectory integrate(const TwoQubitModel& model, const BlochVector& v0, const ControlLaw& law,
                     double horizon, double step, const IntegrateOptions& options = {});

/// d/dt Tr rho_B^2 = 4 (<vB, hB vB> + <vB, H_Ib vAB>); independent of u.
double purity_derivative_B(const TwoQubitModel& model, const BlochVector& v);

/// Full coherence-vector velocity G(u) v.
Vec16 velocity(const TwoQubitModel& model, const BlochVector& v, const Vec3& u);

struct PurificationEntry {
  std::size_t law_index = 0;
  std::string law_label;
  double horizon = 0.0;
  double max_purity_B = 0.0;
  double time_of_max = 0.0;
  double margin = 0.0;  // 1 - max_purity_B
  bool aborted = false;
};

struct PurificationReport {
  std::vector<PurificationEntry> entries;
  double min_margin = 1.0;
  bool all_positive = true;
  static constexpr const char* kind = "numerical evidence";
};

inline constexpr double kInteriorPurityGap = 1e-6;

/// For every law, the largest Tr rho_B^2 reached on [0, T] for each T in
/// horizons.  Throws std::invalid_argument if v0 has full purity >= 1 - 1e-6.
PurificationReport purification_scan(const TwoQubitModel& model, const BlochVector& v0,
                                     std::span<const ControlLaw> laws,
                                     std::span<const double> horizons, double step);

/// `segments` equal-length pieces on [0, horizon] with values drawn
/// uniformly from [-bound, bound]^3 by a generator seeded with `seed`.
ControlLaw random_piecewise_constant(std::uint64_t seed, double horizon, int segments, double bound);

/// Default horizon 20 / max(|omega_a|, |omega_b|, |lambda|_max, 1).
double default_horizon(const TwoQubitModel& model);
inline constexpr double kDefaultStep = 1e-3;

}  // namespace bloch2q
