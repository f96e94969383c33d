#include "bloch2q/purity_analysis.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace bloch2q {

namespace {

constexpr int kZ2[8] = {4, 5, 7, 8, 10, 11, 13, 14};

WVector w_from_generator(const Mat16& g, const Vec3& vA, const Vec3& vB) {
  const Vec16 d = g * BlochVector::product(vA, vB).coordinates();
  return d.segment<9>(kIndexAB) - 2.0 * kron3(d.segment<3>(kIndexA), vB) -
         2.0 * kron3(vA, d.segment<3>(kIndexB));
}

Vec2 solve_protecting(const ControlAffineGenerator& gen, const Vec3& vA, const Vec3& vB) {
  const Vec16 v = BlochVector::product(vA, vB).coordinates();
  const Eigen::Vector2d rhs = -(gen.drift * v).segment<2>(kIndexA);
  Eigen::Matrix2d m;
  m.col(0) = (gen.control[0] * v).segment<2>(kIndexA);
  m.col(1) = (gen.control[1] * v).segment<2>(kIndexA);
  if (std::abs(m.determinant()) < 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))
    throw std::domain_error("controls u1, u2 cannot act on vA1, vA2 at this pole");
  return m.partialPivLu().solve(rhs);
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

nlohmann::json vec_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

}  // namespace

FactorizedState::FactorizedState(const Vec3& vA, const Vec3& vB) : vA_(vA), vB_(vB) {
  if (vA.squaredNorm() > 0.25 + kPureTol)
    throw std::invalid_argument("factorized state needs ||vA||^2 <= 1/4");
  if (std::abs(vB.squaredNorm() - 0.25) > kPureTol)
    throw std::invalid_argument("factorized state needs ||vB||^2 = 1/4");
}

FactorizedState random_factorized_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> box(-0.5, 0.5);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec3 a;
  do a = Vec3(box(rng), box(rng), box(rng));
  while (a.squaredNorm() > 0.25);
  Vec3 b;
  do b = Vec3(normal(rng), normal(rng), normal(rng));
  while (b.norm() == 0.0);
  return {a, 0.5 * b.normalized()};
}

WVector compute_w(const TwoQubitModel& model, const FactorizedState& s, const Vec3& u) {
  const Mat16 g = assemble_generator(assemble_blocks(model, u)).matrix();
  return w_from_generator(g, s.vA(), s.vB());
}

WVector closed_form_w(const CouplingCase& coupling, const FactorizedState& s) {
  const double g = coupling.g;
  const double a1 = s.vA()[0], a2 = s.vA()[1], a3 = s.vA()[2];
  const double b1 = s.vB()[0], b2 = s.vB()[1], b3 = s.vB()[2];
  WVector w;
  switch (coupling.tag) {
    case Coupling::dispersive:
      w << 4 * g * (a1 * a3 * b2 + a2 * b1 * b3),
          -4 * g * (a1 * a3 * b1 - a2 * b2 * b3),
          -g * a2 * (1 - 4 * b3 * b3),
          -4 * g * (a1 * b1 * b3 - a2 * a3 * b2),
          -4 * g * (a1 * b2 * b3 + a2 * a3 * b1),
          g * a1 * (1 - 4 * b3 * b3),
          -g * b2 * (1 - 4 * a3 * a3),
          g * b1 * (1 - 4 * a3 * a3),
          0.0;
      return w;
    case Coupling::resonant: {
      const double x = a2 * b1 - a1 * b2;
      w << -4 * (a3 * b1 * b2 + a1 * a2 * b3),
          -(a3 * (-1 + 4 * b2 * b2) + b3 * (1 - 4 * a1 * a1)),
          4 * a1 * x + b2 * (1 - 4 * a3 * b3),
          a3 * (-1 + 4 * b1 * b1) + b3 * (1 - 4 * a2 * a2),
          4 * (a3 * b1 * b2 + a1 * a2 * b3),
          4 * a2 * x + b1 * (-1 + 4 * a3 * b3),
          -4 * b1 * x + a2 * (1 - 4 * a3 * b3),
          -4 * b2 * x + a1 * (-1 + 4 * a3 * b3),
          4 * x * (a3 - b3);
      return g * w;
    }
    case Coupling::sigma3_sigma1:
      break;
  }
  throw std::invalid_argument("no closed form of w for sigma3-sigma1 coupling");
}

const std::array<int, 8>& dispersive_z2_indices() {
  static const std::array<int, 8> idx = {4, 5, 7, 8, 10, 11, 13, 14};
  return idx;
}

StructuralCheck dispersive_structure(const TwoQubitModel& model, double tol) {
  const ControlAffineGenerator gen = control_affine_generator(model);
  StructuralCheck out;
  const bool in_z2[16] = {false, false, false, false, true, true, false, true,
                          true, false, true, true, false, true, true, false};
  auto scan = [&](const Mat16& g) {
    const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
    for (int r = 0; r < 16; ++r) {
      if (!in_z2[r] && r != 15) continue;
      for (int c = 0; c < 16; ++c) {
        if (r != 15 && in_z2[c]) continue;
        const double leak = std::abs(g(r, c)) / scale;
        if (leak > out.max_leak) {
          out.max_leak = leak;
          out.row = r;
          out.col = c;
        }
      }
    }
  };
  scan(gen.drift);
  for (const auto& c : gen.control) scan(c);
  out.ok = out.max_leak <= tol;
  return out;
}

InvariantCheckReport dispersive_invariant_check(const TwoQubitModel& model,
                                                std::span<const BlochVector> starts,
                                                std::span<const ControlLaw> laws, double horizon,
                                                double step) {
  if (!has_coupling(model, Coupling::dispersive))
    throw std::invalid_argument("dispersive_invariant_check needs a dispersive coupling");
  for (const auto& s : starts) {
    const Vec3 vB = s.vB();
    if (std::abs(vB[0]) > kPureTol || std::abs(vB[1]) > kPureTol ||
        std::abs(std::abs(vB[2]) - 0.5) > kPureTol || factorization_residual(s) > kPureTol)
      throw std::invalid_argument("start is not of the form rho_A (x) (I +- sigma3)/2");
  }

  InvariantCheckReport report;
  report.structure = dispersive_structure(model);
  if (!report.structure.ok)
    report.violations.push_back("generator couples z2 to other coordinates: entry (" +
                                std::to_string(report.structure.row) + "," +
                                std::to_string(report.structure.col) + ") = " +
                                fmt(report.structure.max_leak));

  struct RunResult {
    double max_z2 = 0.0;
    double max_dev = 0.0;
    double t_worst = 0.0;
    std::optional<std::string> abort;
  };
  const std::size_t n = starts.size() * laws.size();
  std::vector<RunResult> results(n);
  detail::parallel_for(n, [&](std::size_t i) {
    IntegrateOptions opt;
    opt.eigen_check_every = 200;
    const Trajectory traj = integrate(model, starts[i / laws.size()], laws[i % laws.size()],
                                      horizon, step, opt);
    RunResult& r = results[i];
    r.abort = traj.abort_reason;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const Vec16& c = traj.states[k].coordinates();
      double z2 = 0.0;
      for (int idx : kZ2) z2 += c[idx] * c[idx];
      z2 = std::sqrt(z2);
      const double dev = std::abs(std::abs(c[15]) - 0.5);
      if (std::max(z2, dev) > std::max(r.max_z2, r.max_dev)) r.t_worst = traj.times[k];
      r.max_z2 = std::max(r.max_z2, z2);
      r.max_dev = std::max(r.max_dev, dev);
    }
  });

  report.runs = n;
  double worst = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const RunResult& r = results[i];
    if (r.abort) report.violations.push_back("run " + std::to_string(i) + " aborted: " + *r.abort);
    report.max_z2 = std::max(report.max_z2, r.max_z2);
    report.max_vB3_deviation = std::max(report.max_vB3_deviation, r.max_dev);
    if (std::max(r.max_z2, r.max_dev) > worst) {
      worst = std::max(r.max_z2, r.max_dev);
      report.worst_run = i;
      report.worst_time = r.t_worst;
    }
    if ((r.max_z2 > kInvariantTol || r.max_dev > kInvariantTol) && report.violations.size() < 20)
      report.violations.push_back("run " + std::to_string(i) + " leaves the submanifold: ||z2|| = " +
                                  fmt(r.max_z2) + ", vB3 deviation = " + fmt(r.max_dev) +
                                  " near t = " + fmt(r.t_worst));
  }
  report.ok = report.violations.empty();
  return report;
}

Compatibility compatibility_condition(const TwoQubitModel& model, double target_vA3) {
  const LocalDissipator d = local_dissipator(model.jumps_on_A);
  Compatibility c;
  c.residual = std::abs(0.5 * d.v0[2] + target_vA3 * d.d_hat(2, 2));
  c.compatible = c.residual <= kCompatibilityTol;
  return c;
}

Vec2 protecting_control_sigma31(const TwoQubitModel& model, const FactorizedState& s) {
  if (!has_coupling(model, Coupling::sigma3_sigma1))
    throw std::invalid_argument("protecting control needs sigma3-sigma1 coupling");
  const Vec3& vA = s.vA();
  if (std::abs(vA[0]) > kPureTol || std::abs(vA[1]) > kPureTol ||
      std::abs(std::abs(vA[2]) - 0.5) > kPureTol)
    throw std::invalid_argument("protecting control needs vA = (0, 0, +-1/2)");
  if (const Compatibility c = compatibility_condition(model, vA[2]); !c.compatible)
    throw IncompatibleDissipation("dissipation violates v0_3/2 + vA3*d_33 = 0 at vA3 = " +
                                  fmt(vA[2]) + " (residual " + fmt(c.residual) + ")");
  return solve_protecting(control_affine_generator(model), vA, s.vB());
}

ControlLaw protecting_feedback_law(const TwoQubitModel& model) {
  if (!has_coupling(model, Coupling::sigma3_sigma1))
    throw std::invalid_argument("protecting control needs sigma3-sigma1 coupling");
  struct Pole {
    bool compatible;
    double residual;
  };
  const Compatibility up = compatibility_condition(model, 0.5);
  const Compatibility down = compatibility_condition(model, -0.5);
  const std::array<Pole, 2> poles = {Pole{down.compatible, down.residual},
                                     Pole{up.compatible, up.residual}};
  auto gen = std::make_shared<const ControlAffineGenerator>(control_affine_generator(model));
  return ControlLaw::feedback(
      [gen, poles](double, const BlochVector& v) -> Vec3 {
        const double a = v.vA()[2] >= 0.0 ? 0.5 : -0.5;
        const Pole& p = poles[a > 0 ? 1 : 0];
        if (!p.compatible)
          throw IncompatibleDissipation("dissipation violates v0_3/2 + vA3*d_33 = 0 at vA3 = " +
                                        fmt(a) + " (residual " + fmt(p.residual) + ")");
        Vec3 vB = v.vB();
        vB = vB.norm() > 0.0 ? Vec3(0.5 * vB.normalized()) : Vec3(0.0, 0.0, 0.5);
        const Vec2 u = solve_protecting(*gen, Vec3(0.0, 0.0, a), vB);
        return {u[0], u[1], 0.0};
      },
      std::nullopt, "feedback:protect-sigma31");
}

Mat3 reduced_B_generator(const CouplingCase& coupling, double omega_b, double vA3) {
  const auto& t = t_matrices();
  switch (coupling.tag) {
    case Coupling::dispersive:
      return (2.0 * omega_b + 2.0 * coupling.g * vA3) * t[2];
    case Coupling::sigma3_sigma1:
      return 2.0 * omega_b * t[2] + 2.0 * coupling.g * vA3 * t[0];
    case Coupling::resonant:
      break;
  }
  throw std::invalid_argument("resonant coupling has no protected B dynamics");
}

Mat3 restricted_B_generator(const TwoQubitModel& model, const Vec3& vA) {
  const GeneratorBlocks b = assemble_blocks(model, Vec3::Zero());
  Mat9x3 lift = Mat9x3::Zero();
  for (int k = 0; k < 3; ++k) lift.block<3, 3>(3 * k, 0) = vA[k] * Mat3::Identity();
  return b.hB + 2.0 * b.H_Ib * lift;
}

BranchRejection sigma31_branch_rejection(const TwoQubitModel& model, double sign,
                                         std::span<const Vec3> controls,
                                         std::span<const Vec3> a_states) {
  if (!has_coupling(model, Coupling::sigma3_sigma1))
    throw std::invalid_argument("branch rejection needs sigma3-sigma1 coupling");
  if (controls.empty() || a_states.empty()) throw std::invalid_argument("empty control or state grid");
  const ControlAffineGenerator gen = control_affine_generator(model);
  const Vec3 vB(sign >= 0.0 ? 0.5 : -0.5, 0.0, 0.0);
  BranchRejection out;
  out.min_rate = INFINITY;
  for (const auto& u : controls) {
    const Mat16 g = gen.at(u);
    for (const auto& vA : a_states) {
      const FactorizedState s(vA, vB);
      const Vec16 d = g * s.embed().coordinates();
      const WVector w = w_from_generator(g, vA, vB);
      const double rate = std::sqrt(d[kIndexB + 1] * d[kIndexB + 1] +
                                    d[kIndexB + 2] * d[kIndexB + 2] + w.squaredNorm());
      if (rate < out.min_rate) {
        out.min_rate = rate;
        out.argmin_u = u;
        out.argmin_vA = vA;
      }
    }
  }
  return out;
}

std::string_view to_string(SolutionSet s) {
  switch (s) {
    case SolutionSet::empty:
      return "empty";
    case SolutionSet::point:
      return "point";
    case SolutionSet::line:
      return "line";
    case SolutionSet::plane:
      return "plane";
    case SolutionSet::space:
      return "space";
  }
  return "?";
}

StationarySolutions stationary_A_solutions(const TwoQubitModel& model) {
  const LocalDissipator d = local_dissipator(model.jumps_on_A);
  const Vec3 rhs = -0.5 * d.v0;
  Eigen::JacobiSVD<Mat3> svd(d.d_hat, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double cutoff = 1e-12 * std::max(1.0, d.d_hat.cwiseAbs().maxCoeff());
  svd.setThreshold(cutoff);
  const int rank = static_cast<int>(svd.rank());

  StationarySolutions out;
  out.particular = svd.solve(rhs);
  out.residual = (d.d_hat * out.particular - rhs).norm();
  if (out.residual > 1e-9 * std::max(1.0, rhs.norm())) {
    out.kind = SolutionSet::empty;
    return out;
  }
  for (int k = rank; k < 3; ++k) out.directions.push_back(svd.matrixV().col(k));
  out.kind = static_cast<SolutionSet>(1 + (3 - rank));
  const double n = out.particular.norm();
  out.reaches_pure = out.kind == SolutionSet::point ? std::abs(n - 0.5) <= 1e-9 : n <= 0.5 + 1e-9;
  return out;
}

ResonantObstructionReport resonant_obstruction_check(const TwoQubitModel& model,
                                                     const SweepOptions& opt) {
  if (!has_coupling(model, Coupling::resonant) || model.lambda(0, 0) == 0.0)
    throw std::invalid_argument("resonant_obstruction_check needs a resonant coupling");
  if (!(opt.grid_step > 0.0)) throw std::invalid_argument("grid step must be positive");

  const Mat16 g = control_affine_generator(model).drift;

  const int n = std::max(1, static_cast<int>(std::lround(0.5 / opt.grid_step)));
  std::vector<Vec3> a_grid;
  for (int i = -n; i <= n; ++i)
    for (int j = -n; j <= n; ++j)
      for (int k = -n; k <= n; ++k)
        if (i * i + j * j + k * k <= n * n) a_grid.emplace_back(Vec3(i, j, k) / (2.0 * n));

  const double dtheta = opt.grid_step / 0.5;
  // Even ring count and multiples of four per ring keep the equator and the axes on the grid.
  const int n_theta = 2 * std::max(1, static_cast<int>(std::lround(std::numbers::pi / dtheta / 2)));
  std::vector<Vec3> b_grid = {Vec3(0, 0, 0.5), Vec3(0, 0, -0.5)};
  for (int i = 1; i < n_theta; ++i) {
    const double theta = std::numbers::pi * i / n_theta;
    const int n_phi =
        4 * std::max(1, static_cast<int>(std::ceil(std::numbers::pi * std::sin(theta) / dtheta / 2)));
    for (int j = 0; j < n_phi; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / n_phi;
      b_grid.emplace_back(0.5 * Vec3(std::sin(theta) * std::cos(phi),
                                     std::sin(theta) * std::sin(phi), std::cos(theta)));
    }
  }

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> box(-0.5, 0.5);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::pair<Vec3, Vec3>> random_points;
  random_points.reserve(opt.random_samples);
  while (random_points.size() < opt.random_samples) {
    Vec3 a(box(rng), box(rng), box(rng));
    if (a.squaredNorm() > 0.25) continue;
    Vec3 b(normal(rng), normal(rng), normal(rng));
    if (b.norm() == 0.0) continue;
    random_points.emplace_back(a, 0.5 * b.normalized());
  }

  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < opt.branch_samples; ++i) {
    const double p = angle(rng);
    const Vec3 b(0.5 * std::cos(p), 0.5 * std::sin(p), 0.0);
    for (int k = -20; k <= 20; ++k)
      random_points.emplace_back(Vec3(-b[1], b[0], 0.0) * (k / 20.0), b);
  }

  auto visit = [&](ObstructionSweep& acc, const Vec3& vA, const Vec3& vB) {
    ++acc.points;
    const double wn = w_from_generator(g, vA, vB).norm();
    const double a_norm = vA.norm();
    if (wn <= opt.w_tol) {
      ++acc.zero_points;
      const bool first = std::abs(vA[1] * vB[0] - vA[0] * vB[1]) <= opt.branch_tol;
      const bool second = std::abs(vA[2] - vB[2]) <= opt.branch_tol;
      ++acc.branch_counts[first && !second ? 0 : !first && second ? 1 : first ? 2 : 3];
      const double deficit = 0.5 - a_norm;
      if (!acc.worst_zero_point || deficit > acc.worst_vA_deficit) {
        acc.worst_vA_deficit = deficit;
        acc.worst_zero_point = SweepSample{vA, vB, wn};
      }
    }
    if (a_norm < 0.5 - opt.purity_gap && (!acc.min_w_mixed || wn < acc.min_w_mixed->w_norm))
      acc.min_w_mixed = SweepSample{vA, vB, wn};
  };

  // One accumulator per A grid point plus one for the random samples.
  std::vector<ObstructionSweep> partial(a_grid.size() + 1);
  detail::parallel_for(partial.size(), [&](std::size_t i) {
    if (i < a_grid.size()) {
      for (const auto& vB : b_grid) visit(partial[i], a_grid[i], vB);
    } else {
      for (const auto& [vA, vB] : random_points) visit(partial[i], vA, vB);
    }
  });

  ResonantObstructionReport report;
  ObstructionSweep& s = report.sweep;
  for (const auto& p : partial) {
    s.points += p.points;
    s.zero_points += p.zero_points;
    for (int k = 0; k < 4; ++k) s.branch_counts[k] += p.branch_counts[k];
    if (p.worst_zero_point && (!s.worst_zero_point || p.worst_vA_deficit > s.worst_vA_deficit)) {
      s.worst_vA_deficit = p.worst_vA_deficit;
      s.worst_zero_point = p.worst_zero_point;
    }
    if (p.min_w_mixed && (!s.min_w_mixed || p.min_w_mixed->w_norm < s.min_w_mixed->w_norm))
      s.min_w_mixed = p.min_w_mixed;
  }
  s.ok = s.worst_vA_deficit <= opt.purity_gap;
  report.stationary = stationary_A_solutions(model);
  return report;
}

nlohmann::json to_json(const InvariantCheckReport& r) {
  nlohmann::json j;
  j["structure"] = {{"max_leak", r.structure.max_leak},
                    {"row", r.structure.row},
                    {"col", r.structure.col},
                    {"ok", r.structure.ok}};
  j["runs"] = r.runs;
  j["max_z2"] = r.max_z2;
  j["max_vB3_deviation"] = r.max_vB3_deviation;
  j["worst_run"] = r.worst_run;
  j["worst_time"] = r.worst_time;
  j["violations"] = r.violations;
  j["ok"] = r.ok;
  return j;
}

nlohmann::json to_json(const ResonantObstructionReport& r) {
  auto sample = [](const std::optional<SweepSample>& s) -> nlohmann::json {
    if (!s) return nullptr;
    return {{"vA", vec_json(s->vA)}, {"vB", vec_json(s->vB)}, {"w_norm", s->w_norm}};
  };
  const ObstructionSweep& s = r.sweep;
  nlohmann::json j;
  j["sweep"] = {{"points", s.points},
                {"zero_points", s.zero_points},
                {"solution_classes",
                 {{"vA2*vB1 == vA1*vB2 only", s.branch_counts[0]},
                  {"vA3 == vB3 only", s.branch_counts[1]},
                  {"both", s.branch_counts[2]},
                  {"neither", s.branch_counts[3]}}},
                {"worst_vA_deficit", s.worst_vA_deficit},
                {"worst_zero_point", sample(s.worst_zero_point)},
                {"min_w_with_mixed_A", sample(s.min_w_mixed)},
                {"ok", s.ok}};
  nlohmann::json dirs = nlohmann::json::array();
  for (const auto& d : r.stationary.directions) dirs.push_back(vec_json(d));
  j["stationary_A"] = {{"solution_set", std::string(to_string(r.stationary.kind))},
                       {"particular", vec_json(r.stationary.particular)},
                       {"particular_norm", r.stationary.particular.norm()},
                       {"directions", dirs},
                       {"residual", r.stationary.residual},
                       {"reaches_pure_A", r.stationary.reaches_pure}};
  return j;
}

nlohmann::json to_json(const PurificationReport& r) {
  nlohmann::json j;
  j["kind"] = PurificationReport::kind;
  j["min_margin"] = r.min_margin;
  j["all_positive"] = r.all_positive;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : r.entries)
    j["entries"].push_back({{"law", e.law_index},
                            {"label", e.law_label},
                            {"horizon", e.horizon},
                            {"max_purity_B", e.max_purity_B},
                            {"time_of_max", e.time_of_max},
                            {"margin", e.margin},
                            {"aborted", e.aborted}});
  return j;
}

}  // namespace bloch2q
