#include "bloch2q/dynamics.hpp"

#include "bloch2q/model_io.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

namespace bloch2q {

namespace {

void check_bound(const std::vector<Vec3>& values, const std::optional<double>& bound) {
  if (!bound) return;
  if (!(*bound >= 0.0)) throw std::invalid_argument("control bound must be non-negative");
  for (const auto& u : values)
    if (u.cwiseAbs().maxCoeff() > *bound)
      throw std::invalid_argument("control value exceeds the declared bound");
}

void check_times(const std::vector<double>& times, std::size_t n_values) {
  if (times.empty() || times.size() != n_values)
    throw std::invalid_argument("control law needs one time per value");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("control times must increase");
}

BlochVector pinned(const Vec16& c) {
  Vec16 x = c;
  x[0] = 0.5;
  return BlochVector::from_coordinates(x);
}

double bound_excess(const Vec16& c) {
  const double full = c.squaredNorm() - 1.0;
  const double a = c.segment<3>(kIndexA).squaredNorm() - 0.25;
  const double b = c.segment<3>(kIndexB).squaredNorm() - 0.25;
  return std::max({0.0, full, a, b});
}

std::string describe_time(const char* what, double t, double value) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s at t=%.17g (value %.3e)", what, t, value);
  return buf;
}

}  // namespace

ControlLaw ControlLaw::constant(const Vec3& u, std::optional<double> bound) {
  ControlLaw law = piecewise_constant({0.0}, {u}, bound);
  law.label_ = "constant";
  return law;
}

ControlLaw ControlLaw::piecewise_constant(std::vector<double> breakpoints, std::vector<Vec3> values,
                                          std::optional<double> bound) {
  check_times(breakpoints, values.size());
  if (breakpoints.front() != 0.0) throw std::invalid_argument("first breakpoint must be 0");
  check_bound(values, bound);
  ControlLaw law;
  law.kind_ = Kind::piecewise_constant;
  law.times_ = std::move(breakpoints);
  law.values_ = std::move(values);
  law.bound_ = bound;
  law.label_ = "piecewise-constant";
  return law;
}

ControlLaw ControlLaw::sampled(std::vector<double> times, std::vector<Vec3> values,
                               std::optional<double> bound) {
  check_times(times, values.size());
  check_bound(values, bound);
  ControlLaw law;
  law.kind_ = Kind::sampled;
  law.times_ = std::move(times);
  law.values_ = std::move(values);
  law.bound_ = bound;
  law.label_ = "sampled";
  return law;
}

ControlLaw ControlLaw::feedback(Feedback f, std::optional<double> bound, std::string label) {
  if (!f) throw std::invalid_argument("empty feedback callback");
  if (bound && !(*bound >= 0.0)) throw std::invalid_argument("control bound must be non-negative");
  ControlLaw law;
  law.kind_ = Kind::state_feedback;
  law.feedback_ = std::move(f);
  law.bound_ = bound;
  law.label_ = std::move(label);
  return law;
}

Vec3 ControlLaw::evaluate(double t, const BlochVector& v) const {
  switch (kind_) {
    case Kind::piecewise_constant: {
      const auto it = std::upper_bound(times_.begin(), times_.end(), t);
      const auto idx = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
      return values_[idx];
    }
    case Kind::sampled: {
      if (t <= times_.front()) return values_.front();
      if (t >= times_.back()) return values_.back();
      const auto it = std::upper_bound(times_.begin(), times_.end(), t);
      const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
      const std::size_t lo = hi - 1;
      const double s = (t - times_[lo]) / (times_[hi] - times_[lo]);
      return (1.0 - s) * values_[lo] + s * values_[hi];
    }
    case Kind::state_feedback: {
      Vec3 u = feedback_(t, v);
      if (bound_) u = u.cwiseMax(-*bound_).cwiseMin(*bound_);
      return u;
    }
  }
  return Vec3::Zero();
}

ControlLaw ControlLaw::snapped_to_grid(double step) const {
  if (kind_ != Kind::piecewise_constant) return *this;
  ControlLaw out = *this;
  out.times_.clear();
  out.values_.clear();
  for (std::size_t i = 0; i < times_.size(); ++i) {
    const double t = std::round(times_[i] / step) * step;
    // Breakpoints collapsing onto one grid point keep the later value.
    if (!out.times_.empty() && t <= out.times_.back()) {
      out.values_.back() = values_[i];
      continue;
    }
    out.times_.push_back(t);
    out.values_.push_back(values_[i]);
  }
  return out;
}

Vec16 velocity(const TwoQubitModel& model, const BlochVector& v, const Vec3& u) {
  return assemble_generator(assemble_blocks(model, u)).apply(v.coordinates());
}

double purity_derivative_B(const TwoQubitModel& model, const BlochVector& v) {
  const GeneratorBlocks b = assemble_blocks(model, Vec3::Zero());
  const Vec3 vB = v.vB();
  return 4.0 * (vB.dot(b.hB * vB) + vB.dot(b.H_Ib * v.vAB()));
}

Trajectory integrate(const TwoQubitModel& model, const BlochVector& v0, const ControlLaw& law,
                     double horizon, double step, const IntegrateOptions& options) {
  if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("step must be positive");
  if (!(horizon >= step) || !std::isfinite(horizon))
    throw std::invalid_argument("horizon must be at least one step");
  if (options.record_stride < 1) throw std::invalid_argument("record_stride must be >= 1");

  const ControlAffineGenerator gen = control_affine_generator(model);
  const ControlLaw run_law = law.snapped_to_grid(step);
  const bool held = run_law.kind() == ControlLaw::Kind::piecewise_constant;

  const long n_full = static_cast<long>(std::floor(horizon / step + 1e-9));
  double tail = horizon - static_cast<double>(n_full) * step;
  if (tail < 1e-9 * step) tail = 0.0;
  const long n_steps = n_full + (tail > 0.0 ? 1 : 0);

  Trajectory traj;
  traj.model_hash = model_hash(model);
  traj.step = step;
  const std::size_t expected = static_cast<std::size_t>(n_steps / options.record_stride + 2);
  traj.times.reserve(expected);
  traj.states.reserve(expected);
  traj.controls.reserve(expected);

  auto control_for_step = [&](double t, double h, const Vec16& x) {
    return held ? run_law.evaluate(t + 0.5 * h, pinned(x)) : run_law.evaluate(t, pinned(x));
  };

  std::size_t records = 0;
  auto record = [&](double t, const Vec16& x, double h_next) {
    traj.times.push_back(t);
    traj.states.push_back(pinned(x));
    traj.controls.push_back(control_for_step(t, h_next, x));
    if (options.eigen_check_every > 0 && records % options.eigen_check_every == 0) {
      const double lo = min_eigenvalue(from_coherence(traj.states.back()));
      traj.min_eigenvalue = std::min(traj.min_eigenvalue, lo);
      if (lo < -options.abort_tolerance && !traj.abort_reason)
        traj.abort_reason = describe_time("negative eigenvalue", t, lo);
    }
    ++records;
  };

  Vec16 v = v0.coordinates();
  traj.max_bound_excess = bound_excess(v);
  record(0.0, v, n_full > 0 ? step : tail);
  if (traj.abort_reason) return traj;

  for (long k = 0; k < n_steps; ++k) {
    const double t = static_cast<double>(k) * step;
    const double h = k < n_full ? step : tail;
    Vec16 k1, k2, k3, k4;
    if (held) {
      const Mat16 g = gen.at(control_for_step(t, h, v));
      k1 = g * v;
      k2 = g * (v + 0.5 * h * k1);
      k3 = g * (v + 0.5 * h * k2);
      k4 = g * (v + h * k3);
    } else {
      k1 = gen.at(run_law.evaluate(t, pinned(v))) * v;
      const Vec16 x2 = v + 0.5 * h * k1;
      k2 = gen.at(run_law.evaluate(t + 0.5 * h, pinned(x2))) * x2;
      const Vec16 x3 = v + 0.5 * h * k2;
      k3 = gen.at(run_law.evaluate(t + 0.5 * h, pinned(x3))) * x3;
      const Vec16 x4 = v + h * k3;
      k4 = gen.at(run_law.evaluate(t + h, pinned(x4))) * x4;
    }
    v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    v[0] = 0.5;

    const double t_next = k + 1 < n_steps || tail == 0.0 ? static_cast<double>(k + 1) * step : horizon;
    const double excess = bound_excess(v);
    traj.max_bound_excess = std::max(traj.max_bound_excess, excess);
    const bool last = k + 1 == n_steps;
    if (excess > options.abort_tolerance) {
      traj.abort_reason = describe_time("norm bound violated", t_next, excess);
      record(t_next, v, step);
      return traj;
    }
    if (last || (k + 1) % options.record_stride == 0) {
      record(t_next, v, k + 1 < n_full ? step : tail > 0.0 ? tail : step);
      if (traj.abort_reason) return traj;
    }
  }
  return traj;
}

PurificationReport purification_scan(const TwoQubitModel& model, const BlochVector& v0,
                                     std::span<const ControlLaw> laws,
                                     std::span<const double> horizons, double step) {
  if (v0.squared_norm() >= 1.0 - kInteriorPurityGap)
    throw std::invalid_argument("initial state is not interior: full purity >= 1 - 1e-6");
  if (horizons.empty()) throw std::invalid_argument("no horizons given");
  const double t_max = *std::max_element(horizons.begin(), horizons.end());

  std::vector<std::vector<PurificationEntry>> per_law(laws.size());
  detail::parallel_for(laws.size(), [&](std::size_t i) {
    IntegrateOptions opt;
    opt.eigen_check_every = 100;
    const Trajectory traj = integrate(model, v0, laws[i], t_max, step, opt);
    for (double T : horizons) {
      PurificationEntry e;
      e.law_index = i;
      e.law_label = laws[i].label();
      e.horizon = T;
      e.aborted = !traj.ok();
      for (std::size_t k = 0; k < traj.size() && traj.times[k] <= T + 1e-9 * step; ++k) {
        const double p = reduced_purity_B(traj.states[k]);
        if (p > e.max_purity_B) {
          e.max_purity_B = p;
          e.time_of_max = traj.times[k];
        }
      }
      e.margin = 1.0 - e.max_purity_B;
      per_law[i].push_back(e);
    }
  });

  PurificationReport report;
  for (auto& entries : per_law)
    for (auto& e : entries) {
      report.min_margin = std::min(report.min_margin, e.margin);
      if (!(e.margin > 0.0) || e.aborted) report.all_positive = false;
      report.entries.push_back(std::move(e));
    }
  return report;
}

ControlLaw random_piecewise_constant(std::uint64_t seed, double horizon, int segments, double bound) {
  if (segments < 1) throw std::invalid_argument("need at least one segment");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> times;
  std::vector<Vec3> values;
  for (int i = 0; i < segments; ++i) {
    times.push_back(horizon * i / segments);
    values.emplace_back(dist(rng), dist(rng), dist(rng));
  }
  ControlLaw law = ControlLaw::piecewise_constant(std::move(times), std::move(values), bound);
  return law;
}

double default_horizon(const TwoQubitModel& model) {
  const double scale = std::max({std::abs(model.omega_a), std::abs(model.omega_b),
                                 model.lambda.cwiseAbs().maxCoeff(), 1.0});
  return 20.0 / scale;
}

}  // namespace bloch2q
