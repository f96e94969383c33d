#include "bloch2q/cli.hpp"

#include "bloch2q/dynamics.hpp"
#include "bloch2q/model_io.hpp"
#include "bloch2q/purity_analysis.hpp"
#include "bloch2q/trajectory_io.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

namespace bloch2q {

using nlohmann::json;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Settings {
  std::string config;
  std::string model;
  std::string coupling;
  double g = 1.0;
  double omega_a = 1.0;
  double omega_b = 0.5;
  double damping = 0.0;
  double horizon = 0.0;
  double step = kDefaultStep;
  std::string u0 = "0,0,0";
  std::string control;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
  std::string init_a = "0,0,0";
  std::string init_b = "0,0,0";
  int stride = 1;
  double bound = 1.0;
  int segments = 20;
  int samples = 500;
  double grid_step = 0.05;
  int laws = 10;
  std::string horizons = "10,20,40";
};

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(std::string("cannot parse ") + what + " '" + text + "'");
    }
  }
  return out;
}

Vec3 parse_vec3(const std::string& text, const char* what) {
  const auto v = parse_list(text, what);
  if (v.size() != 3) throw ConfigError(std::string(what) + " needs three comma-separated numbers");
  return {v[0], v[1], v[2]};
}

// Values from the --config file fill in options not given on the command line.
template <class T>
void from_config(const json& cfg, CLI::App& app, const std::string& name, T& field) {
  const std::string key = name;
  std::string flag_key = key;
  for (auto& c : flag_key)
    if (c == '_') c = '-';
  if (!cfg.contains(key) && !cfg.contains(flag_key)) return;
  const CLI::Option* opt = app.get_option_no_throw("--" + flag_key);
  if (opt && opt->count() > 0) return;
  const json& v = cfg.contains(key) ? cfg[key] : cfg[flag_key];
  try {
    field = v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config entry '" + key + "' has the wrong type");
  }
}

void apply_config(Settings& s, CLI::App& app) {
  if (s.config.empty()) return;
  std::ifstream in(s.config);
  if (!in) throw ConfigError("cannot open config file " + s.config);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + s.config + ": " + e.what());
  }
  if (!cfg.is_object()) throw ConfigError("config file must hold a JSON object");
  from_config(cfg, app, "model", s.model);
  from_config(cfg, app, "case", s.coupling);
  from_config(cfg, app, "g", s.g);
  from_config(cfg, app, "omega_a", s.omega_a);
  from_config(cfg, app, "omega_b", s.omega_b);
  from_config(cfg, app, "damping", s.damping);
  from_config(cfg, app, "horizon", s.horizon);
  from_config(cfg, app, "step", s.step);
  from_config(cfg, app, "u0", s.u0);
  from_config(cfg, app, "control", s.control);
  from_config(cfg, app, "seed", s.seed);
  from_config(cfg, app, "out", s.out);
  from_config(cfg, app, "format", s.format);
  from_config(cfg, app, "init_a", s.init_a);
  from_config(cfg, app, "init_b", s.init_b);
  from_config(cfg, app, "stride", s.stride);
  from_config(cfg, app, "bound", s.bound);
  from_config(cfg, app, "segments", s.segments);
  from_config(cfg, app, "samples", s.samples);
  from_config(cfg, app, "grid_step", s.grid_step);
  from_config(cfg, app, "laws", s.laws);
  from_config(cfg, app, "horizons", s.horizons);
}

std::optional<Coupling> requested_case(const Settings& s) {
  if (s.coupling.empty()) return std::nullopt;
  const auto tag = parse_coupling(s.coupling);
  if (!tag) throw ConfigError("unknown case '" + s.coupling + "'");
  return tag;
}

TwoQubitModel resolve_model(const Settings& s) {
  const auto tag = requested_case(s);
  if (!s.model.empty()) {
    if (!std::filesystem::exists(s.model)) throw ConfigError("model file not found: " + s.model);
    TwoQubitModel m = load_model(s.model);
    if (tag && !has_coupling(m, *tag))
      throw ConfigError("model coupling does not match --case " + s.coupling);
    return m;
  }
  if (!tag) throw ConfigError("need --model or --case");
  if (!std::isfinite(s.g) || !std::isfinite(s.damping)) throw ConfigError("non-finite parameter");
  std::vector<Mat2c> jumps;
  if (s.damping != 0.0) jumps.push_back(s.damping * sigma_minus());
  return make_model({*tag, s.g}, s.omega_a, s.omega_b, std::move(jumps));
}

std::filesystem::path output_path(const Settings& s, const std::string& default_name) {
  if (!s.out.empty()) return s.out;
  const char* dir = std::getenv(kOutDirEnv);
  std::filesystem::path base = dir && *dir ? dir : ".";
  std::error_code ec;
  std::filesystem::create_directories(base, ec);
  return base / default_name;
}

BlochVector initial_state(const Settings& s) {
  const Vec3 a = parse_vec3(s.init_a, "--init-a");
  const Vec3 b = parse_vec3(s.init_b, "--init-b");
  if (a.squaredNorm() > 0.25 + 1e-12 || b.squaredNorm() > 0.25 + 1e-12)
    throw ConfigError("initial Bloch vectors must have norm <= 1/2");
  return BlochVector::product(a, b);
}

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(std::string(what) + " must be positive");
}

ControlLaw resolve_control(const Settings& s, const TwoQubitModel& model, double horizon) {
  const std::string& spec = s.control;
  if (spec.empty()) return ControlLaw::constant(parse_vec3(s.u0, "--u0"));
  if (spec.rfind("const:", 0) == 0) return ControlLaw::constant(parse_vec3(spec.substr(6), "--control const"));
  if (spec == "random-pwc" || spec.rfind("random-pwc:", 0) == 0) {
    int segments = s.segments;
    if (spec.size() > 10) {
      const auto v = parse_list(spec.substr(11), "--control random-pwc");
      if (v.size() != 1 || v[0] < 1) throw ConfigError("random-pwc:N needs a positive segment count");
      segments = static_cast<int>(v[0]);
    }
    require_positive(s.bound, "--bound");
    return random_piecewise_constant(s.seed, horizon, segments, s.bound);
  }
  if (spec == "feedback:protect-sigma31") {
    if (!has_coupling(model, Coupling::sigma3_sigma1))
      throw ConfigError("feedback:protect-sigma31 needs a sigma3-sigma1 model");
    return protecting_feedback_law(model);
  }
  throw ConfigError("unknown control spec '" + spec + "'");
}

json vec_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

int cmd_simulate(const Settings& s, std::ostream& out) {
  if (s.format != "csv" && s.format != "json") throw ConfigError("--format must be csv or json");
  if (s.stride < 1) throw ConfigError("--stride must be >= 1");
  const TwoQubitModel model = resolve_model(s);
  const double horizon = s.horizon > 0.0 ? s.horizon : default_horizon(model);
  require_positive(horizon, "--horizon");
  require_positive(s.step, "--step");
  const BlochVector v0 = initial_state(s);
  const ControlLaw law = resolve_control(s, model, horizon);

  IntegrateOptions opt;
  opt.record_stride = s.stride;
  const Trajectory traj = integrate(model, v0, law, horizon, s.step, opt);

  json meta = trajectory_metadata(traj);
  meta["command"] = "simulate";
  meta["model"] = model_to_json(model);
  meta["horizon"] = horizon;
  meta["control"] = s.control.empty() ? "const:" + s.u0 : s.control;
  meta["seed"] = s.seed;
  meta["init_a"] = s.init_a;
  meta["init_b"] = s.init_b;

  const auto path = output_path(s, "trajectory." + s.format);
  if (s.format == "csv") {
    write_file_atomic(path, trajectory_csv(traj));
    auto meta_path = path;
    meta_path += ".meta.json";
    write_file_atomic(meta_path, meta.dump(2) + "\n");
  } else {
    write_file_atomic(path, trajectory_json(traj, meta));
  }

  double pb_min = 1.0, pb_max = 0.0;
  for (const auto& v : traj.states) {
    pb_min = std::min(pb_min, reduced_purity_B(v));
    pb_max = std::max(pb_max, reduced_purity_B(v));
  }
  const BlochVector& last = traj.states.back();
  json summary = {{"output", path.string()},
                  {"records", traj.size()},
                  {"final_time", traj.times.back()},
                  {"final_purity", {{"full", last.squared_norm()},
                                    {"A", reduced_purity_A(last)},
                                    {"B", reduced_purity_B(last)}}},
                  {"purity_B_min", pb_min},
                  {"purity_B_max", pb_max},
                  {"aborted", !traj.ok()}};
  out << summary.dump(2) << "\n";
  if (!traj.ok()) throw NumericalFailure(*traj.abort_reason);
  return kExitOk;
}

json analyze_sigma31(const TwoQubitModel& model, const Settings& s, std::mt19937_64& rng,
                     double& residual) {
  json report;
  json poles = json::array();
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (double a : {-0.5, 0.5}) {
    const Compatibility c = compatibility_condition(model, a);
    json pole = {{"vA3", a}, {"compatibility_residual", c.residual}, {"compatible", c.compatible}};
    double max_w = 0.0, max_gen = 0.0;
    const Mat3 reduced = reduced_B_generator({Coupling::sigma3_sigma1, model.lambda(2, 0)},
                                             model.omega_b, a);
    max_gen = (reduced - restricted_B_generator(model, {0, 0, a})).cwiseAbs().maxCoeff();
    for (int i = 0; i < s.samples; ++i) {
      const FactorizedState r = random_factorized_state(rng);
      const FactorizedState st({0, 0, a}, r.vB());
      const Vec3 u = Vec3(coin(rng), coin(rng), coin(rng)) * 2.0 - Vec3::Ones();
      max_w = std::max(max_w, compute_w(model, st, u).cwiseAbs().maxCoeff());
    }
    pole["max_abs_w"] = max_w;
    pole["reduced_B_generator_residual"] = max_gen;
    if (c.compatible) {
      const Vec2 u = protecting_control_sigma31(model, FactorizedState({0, 0, a}, {0, 0, 0.5}));
      pole["protecting_control"] = vec_json(u);
    }
    residual = std::max({residual, max_w, max_gen});
    poles.push_back(pole);
  }
  report["poles"] = poles;

  std::vector<Vec3> controls, states;
  for (int i = -4; i <= 4; ++i)
    for (int j = -4; j <= 4; ++j)
      for (int k = -4; k <= 4; ++k) {
        controls.emplace_back(0.5 * i, 0.5 * j, 0.5 * k);
        if (i * i + j * j + k * k <= 16) states.emplace_back(Vec3(i, j, k) / 8.0);
      }
  json branches = json::array();
  for (double sign : {-1.0, 1.0}) {
    const BranchRejection b = sigma31_branch_rejection(model, sign, controls, states);
    branches.push_back({{"vB1", 0.5 * sign},
                        {"min_rate", b.min_rate},
                        {"argmin_u", vec_json(b.argmin_u)},
                        {"argmin_vA", vec_json(b.argmin_vA)}});
  }
  report["sigma1_branches"] = branches;
  return report;
}

int cmd_analyze_w(const Settings& s, std::ostream& out) {
  const auto tag = requested_case(s);
  if (!tag) throw ConfigError("analyze-w needs --case");
  if (s.samples < 1) throw ConfigError("--samples must be >= 1");
  require_positive(s.grid_step, "--grid-step");
  const TwoQubitModel model = resolve_model(s);
  const double g = model.lambda.cwiseAbs().maxCoeff();
  std::mt19937_64 rng(s.seed);

  json report = {{"case", std::string(to_string(*tag))}, {"g", g}, {"seed", s.seed},
                 {"samples", s.samples}, {"model", model_to_json(model)}};
  double residual = 0.0;
  if (*tag == Coupling::sigma3_sigma1) {
    report["sigma3_sigma1"] = analyze_sigma31(model, s, rng, residual);
  } else {
    Vec9 max_component = Vec9::Zero();
    for (int i = 0; i < s.samples; ++i) {
      const FactorizedState st = random_factorized_state(rng);
      const WVector w = compute_w(model, st, Vec3::Zero());
      residual = std::max(residual, (w - closed_form_w({*tag, g}, st)).cwiseAbs().maxCoeff());
      max_component = max_component.cwiseMax(w.cwiseAbs());
    }
    report["max_abs_w_component"] = vec_json(max_component);
    if (*tag == Coupling::dispersive) {
      Vec9 on_branch = Vec9::Zero();
      for (int i = 0; i < s.samples; ++i) {
        const FactorizedState r = random_factorized_state(rng);
        const FactorizedState st(r.vA(), {0, 0, i % 2 ? 0.5 : -0.5});
        on_branch = on_branch.cwiseMax(compute_w(model, st, Vec3::Zero()).cwiseAbs());
      }
      report["max_abs_w_component_on_vB_poles"] = vec_json(on_branch);
      const StructuralCheck sc = dispersive_structure(model);
      report["structure"] = {{"max_leak", sc.max_leak}, {"ok", sc.ok}};
    } else {
      SweepOptions opt;
      opt.grid_step = s.grid_step;
      opt.seed = s.seed;
      const ResonantObstructionReport r = resonant_obstruction_check(model, opt);
      report["obstruction"] = to_json(r);
      if (!r.sweep.ok) report["obstruction_failed"] = true;
    }
  }
  report["max_residual"] = residual;
  const bool ok = residual <= 1e-10 && !report.contains("obstruction_failed");
  report["ok"] = ok;

  const auto path = output_path(s, "analyze-w-" + std::string(to_string(*tag)) + ".json");
  write_file_atomic(path, report.dump(2) + "\n");
  out << report.dump(2) << "\n";
  if (!ok) throw NumericalFailure("oracle residual or obstruction check failed");
  return kExitOk;
}

int cmd_purification_scan(const Settings& s, std::ostream& out) {
  const TwoQubitModel model = resolve_model(s);
  const std::vector<double> horizons = parse_list(s.horizons, "--horizons");
  if (horizons.empty()) throw ConfigError("--horizons is empty");
  for (double h : horizons) require_positive(h, "each horizon");
  require_positive(s.step, "--step");
  require_positive(s.bound, "--bound");
  if (s.laws < 0 || s.segments < 1) throw ConfigError("--laws must be >= 0, --segments >= 1");
  const BlochVector v0 = initial_state(s);
  if (v0.squared_norm() >= 1.0 - kInteriorPurityGap)
    throw ConfigError("initial state lies on the boundary of the state set (full purity >= 1 - 1e-6)");

  const double t_max = *std::max_element(horizons.begin(), horizons.end());
  std::vector<ControlLaw> laws = {ControlLaw::constant(Vec3::Zero(), s.bound)};
  for (int i = 0; i < s.laws; ++i)
    laws.push_back(random_piecewise_constant(s.seed + static_cast<std::uint64_t>(i), t_max,
                                             s.segments, s.bound));
  const PurificationReport r = purification_scan(model, v0, laws, horizons, s.step);

  json report = to_json(r);
  report["seed"] = s.seed;
  report["bound"] = s.bound;
  report["segments"] = s.segments;
  report["step"] = s.step;
  report["model"] = model_to_json(model);
  report["note"] = "law 0 is u = 0; laws 1.. are random piecewise-constant with seeds seed + index - 1";
  const auto path = output_path(s, "purification-scan.json");
  write_file_atomic(path, report.dump(2) + "\n");
  out << json({{"output", path.string()},
               {"min_margin", r.min_margin},
               {"all_positive", r.all_positive},
               {"kind", PurificationReport::kind}})
             .dump(2)
      << "\n";
  if (!r.all_positive) throw NumericalFailure("a purification margin is not positive");
  return kExitOk;
}

void add_model_options(CLI::App& cmd, Settings& s) {
  cmd.add_option("--model", s.model, "model JSON file");
  cmd.add_option("--case", s.coupling, "coupling: dispersive | resonant | sigma3-sigma1");
  cmd.add_option("--g", s.g, "coupling strength for --case");
  cmd.add_option("--omega-a", s.omega_a, "qubit A frequency for --case");
  cmd.add_option("--omega-b", s.omega_b, "qubit B frequency for --case");
  cmd.add_option("--damping", s.damping, "jump operator c * sigma_minus on A for --case");
  cmd.add_option("--seed", s.seed, "random seed");
  cmd.add_option("--out", s.out, "output file");
  cmd.add_option("--config", s.config, "JSON file with defaults for any option");
}

void report_error(std::ostream& err, const char* kind, const std::string& message, int code) {
  err << json({{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}}).dump() << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Settings s;
  CLI::App app{"Two-qubit open-system simulator in the coherence-vector picture", "bloch2q"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "integrate one trajectory and write CSV or JSON");
  add_model_options(*sim, s);
  sim->add_option("--horizon", s.horizon, "final time (default 20 / max frequency scale)");
  sim->add_option("--step", s.step, "RK4 step");
  sim->add_option("--u0", s.u0, "constant control u1,u2,u3");
  sim->add_option("--control", s.control,
                  "const:a,b,c | random-pwc[:N] | feedback:protect-sigma31");
  sim->add_option("--format", s.format, "csv or json");
  sim->add_option("--init-a", s.init_a, "initial vA");
  sim->add_option("--init-b", s.init_b, "initial vB");
  sim->add_option("--stride", s.stride, "record every n-th step");
  sim->add_option("--bound", s.bound, "control bound for random laws");
  sim->add_option("--segments", s.segments, "pieces of a random law");

  auto* aw = app.add_subcommand("analyze-w", "check w against closed forms and run sweeps");
  add_model_options(*aw, s);
  aw->add_option("--samples", s.samples, "random factorized states");
  aw->add_option("--grid-step", s.grid_step, "grid spacing of the resonant sweep");

  auto* scan = app.add_subcommand("purification-scan", "margins 1 - max Tr rho_B^2 per law and horizon");
  add_model_options(*scan, s);
  scan->add_option("--horizons", s.horizons, "comma-separated horizons");
  scan->add_option("--step", s.step, "RK4 step");
  scan->add_option("--laws", s.laws, "random bounded laws besides u = 0");
  scan->add_option("--bound", s.bound, "control bound");
  scan->add_option("--segments", s.segments, "pieces per random law");
  scan->add_option("--init-a", s.init_a, "initial vA");
  scan->add_option("--init-b", s.init_b, "initial vB");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what(), kExitConfig);
    return kExitConfig;
  }

  try {
    if (sim->parsed()) {
      apply_config(s, *sim);
      return cmd_simulate(s, out);
    }
    if (aw->parsed()) {
      apply_config(s, *aw);
      return cmd_analyze_w(s, out);
    }
    apply_config(s, *scan);
    return cmd_purification_scan(s, out);
  } catch (const NumericalFailure& e) {
    report_error(err, "numerical", e.what(), kExitNumerical);
    return kExitNumerical;
  } catch (const ConfigError& e) {
    report_error(err, "config", e.what(), kExitConfig);
    return kExitConfig;
  } catch (const ModelFormatError& e) {
    report_error(err, "config", e.what(), kExitConfig);
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    report_error(err, "config", e.what(), kExitConfig);
    return kExitConfig;
  } catch (const IncompatibleDissipation& e) {
    report_error(err, "config", e.what(), kExitConfig);
    return kExitConfig;
  } catch (const std::exception& e) {
    report_error(err, "numerical", e.what(), kExitNumerical);
    return kExitNumerical;
  }
}

}  // namespace bloch2q
