#include "pstab/runner.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "pstab/auv.hpp"
#include "pstab/integrator.hpp"
#include "pstab/report.hpp"
#include "pstab/sampling.hpp"
#include "pstab/stability_toolkit.hpp"

namespace pstab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Context {
  const ExperimentConfig& cfg;
  ControlAffineSystem system;
  ReferenceCurve curve;
  ControllerParams params;
  std::vector<std::pair<double, double>> z_box;
  double t0;
  Vec z0;
};

Vec unit_vector(double u, double v) {
  const double zc = 2.0 * u - 1.0;
  const double r = std::sqrt(std::max(0.0, 1.0 - zc * zc));
  const double phi = 2.0 * std::numbers::pi * v;
  Vec d(3);
  d << r * std::cos(phi), r * std::sin(phi), zc;
  return d;
}

Vec state(const Vec& y, const Vec& z) {
  Vec x(y.size() + z.size());
  x << y, z;
  return x;
}

std::vector<Vec> contraction_conditions(const Context& c, double nu, std::size_t count,
                                        std::uint64_t seed) {
  const HaltonSequence seq(3, seed);
  const double lo = c.cfg.tube.p / nu;
  const double hi = c.cfg.tube.p + c.cfg.tube.delta;
  const Vec ys = c.curve(c.t0);
  std::vector<Vec> out;
  for (std::size_t i = 0; i < count; ++i) {
    const auto u = seq.point(i);
    const double r = lo + (hi - lo) * (1.0 - u[0]);
    out.push_back(state(ys + r * unit_vector(u[1], u[2]), c.z0));
  }
  return out;
}

std::vector<Vec> certification_grid(const Context& c, std::size_t count, std::uint64_t seed) {
  std::vector<Vec> out;
  const auto& split = c.system.split();
  if (c.cfg.simulation &&
      in_neighborhood(split, c.cfg.simulation->x0, c.t0, c.curve, c.cfg.tube)) {
    out.push_back(c.cfg.simulation->x0);
  }
  const HaltonSequence seq(3, seed + 1);
  const double radius = c.cfg.tube.p + c.cfg.tube.delta;
  const Vec ys = c.curve(c.t0);
  for (std::uint64_t i = 0; out.size() < count; ++i) {
    const auto u = seq.point(i);
    out.push_back(state(ys + radius * std::cbrt(u[0]) * unit_vector(u[1], u[2]), c.z0));
  }
  return out;
}

std::string csv(const Trajectory& tr) {
  std::ostringstream os;
  write_trajectory_csv(os, tr);
  return os.str();
}

std::string curve_csv(const ReferenceCurve& curve, const std::vector<double>& times) {
  std::ostringstream os;
  write_curve_csv(os, curve, times);
  return os.str();
}

bool non_increasing_above(const std::vector<double>& errors, double floor) {
  for (std::size_t i = 1; i < errors.size(); ++i) {
    if (errors[i - 1] <= floor) break;
    if (errors[i] > errors[i - 1]) return false;
  }
  return true;
}

}  // namespace

const char* to_string(Command c) {
  switch (c) {
    case Command::Simulate:
      return "simulate";
    case Command::Analyze:
      return "analyze";
    case Command::Certify:
      return "certify";
    case Command::Run:
      return "run";
  }
  return "unknown";
}

ordered_json error_json(const std::string& kind, const std::string& message,
                        const std::vector<Diagnostic>& diagnostics) {
  ordered_json d = ordered_json::array();
  for (const auto& x : diagnostics) d.push_back({{"field", x.field}, {"message", x.message}});
  return {{"error", {{"kind", kind}, {"message", message}, {"diagnostics", d}}}};
}

RunOutcome run_experiment(const ExperimentConfig& input, const RunOptions& options,
                          std::ostream& log) {
  ExperimentConfig cfg = input;
  if (options.seed) cfg.analysis.seed = *options.seed;
  const auto& an = cfg.analysis;

  const bool want_sim = options.command == Command::Simulate ||
                        (options.command == Command::Run && cfg.simulation.has_value());
  const bool analyses = options.command == Command::Analyze || options.command == Command::Run;
  const bool want_rank = analyses && an.rank_check.enabled;
  const bool want_bounds = analyses && an.bounds.enabled;
  const bool want_contraction = analyses && an.contraction.enabled;
  const bool want_constants = (analyses && an.constants.enabled) || want_bounds;
  const bool want_cert = options.command == Command::Certify ||
                         (options.command == Command::Run && an.certification.enabled);
  if (options.command == Command::Simulate && !cfg.simulation) {
    throw ConfigError(std::vector<Diagnostic>{{"simulation", "required by the simulate command"}});
  }

  Context c{cfg,
            auv::make_model({cfg.model.omega1_amplitude, cfg.model.omega1_frequency}),
            cfg.curve.build(),
            ControllerParams::make(cfg.controller.alpha, cfg.controller.epsilon,
                                   cfg.controller.sets, cfg.controller.kappa),
            an.constants.z_box.empty() ? auv::default_z_box() : an.constants.z_box,
            cfg.simulation ? cfg.simulation->t0 : 0.0,
            cfg.simulation ? Vec(cfg.simulation->x0.tail(3)) : Vec(Vec::Zero(3))};
  const int substeps = resolved_substeps(cfg);
  auto say = [&](const std::string& s) {
    if (!options.quiet) log << s << '\n';
  };

  RunOutcome out;
  ordered_json& rep = out.report;
  rep["schema_version"] = kReportSchemaVersion;
  rep["tool"] = "pstab";
  rep["command"] = to_string(options.command);
  rep["status"] = "ok";
  rep["config"] = to_json(cfg);
  rep["resolved"] = {{"kappa", c.params.kappa},
                     {"substeps", substeps},
                     {"seed", an.seed},
                     {"nu", an.bounds.nu},
                     {"lambda", nullptr},
                     {"z_box", c.z_box}};

  std::filesystem::create_directories(options.out_dir);

  std::optional<ProofConstants> constants;
  std::optional<EpsilonBounds> bounds;

  if (want_rank) {
    say("rank check: " + std::to_string(an.rank_check.samples) + " samples");
    const auto samples = sample_tube_region(c.curve, cfg.tube, c.z_box, an.constants.t_probe,
                                            an.rank_check.samples, an.seed);
    std::vector<Vec> xs;
    for (const auto& s : samples) xs.push_back(s.x);
    rep["rank_check"] = to_json(verify_rank_condition(c.system, c.params.sets, xs));
  }
  if (want_constants) {
    say("estimating constants: " + std::to_string(an.constants.samples) + " samples");
    constants = estimate_constants(c.system, c.curve, cfg.tube, c.params.sets, c.z_box,
                                   {an.constants.samples, an.constants.t_probe, an.seed});
    rep["constants"] = to_json(*constants);
  }
  if (want_bounds) {
    say("computing epsilon bounds");
    try {
      bounds = epsilon_bounds(*constants, cfg.tube, c.params, an.bounds.nu, an.bounds.lambda);
      rep["bounds"] = to_json(*bounds);
      rep["resolved"]["lambda"] = bounds->lambda;
    } catch (const GainInfeasibleError& e) {
      rep["bounds"] = {{"feasible", false},
                       {"message", e.what()},
                       {"minimal_alpha", e.minimal_alpha()}};
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::vector<Diagnostic>{{"analysis.bounds.lambda", e.what()}});
    }
  }
  if (want_contraction) {
    say("contraction check: " + std::to_string(an.contraction.count) + " initial conditions");
    ContractionOptions opt;
    opt.t0 = c.t0;
    opt.substeps = substeps;
    if (bounds) {
      opt.eps_bar = bounds->eps_bar;
      opt.lambda = bounds->lambda;
    }
    const auto ics = contraction_conditions(c, an.bounds.nu, an.contraction.count, an.seed);
    rep["contraction"] =
        to_json(contraction_check(c.system, c.curve, c.params, cfg.tube, an.bounds.nu, ics, opt));
  }

  if (want_sim) {
    say("simulating");
    SimulationConfig sc;
    sc.t0 = cfg.simulation->t0;
    sc.horizon = cfg.simulation->T;
    sc.x0 = cfg.simulation->x0;
    sc.substeps_per_interval = substeps;
    sc.record_stride = cfg.simulation->stride;
    const auto res = simulate(c.system, c.curve, c.params, sc, cfg.tube);
    const auto& tr = res.trajectory;

    double bound_floor = kInf;
    if (constants) {
      const auto at = intermediates_at(*constants, cfg.tube, c.params, c.params.epsilon);
      bound_floor = 2.0 * c.params.epsilon * (at.cy2 + constants->L_star);
    }
    const auto floor = select_residual_floor(bound_floor, tr.sample_times, tr.sample_errors);
    const auto fit = fit_decay_rate(tr.sample_times, tr.sample_errors, floor.value);

    const auto traj_path = options.out_dir / cfg.output.trajectory_csv;
    const auto curve_path = options.out_dir / cfg.output.curve_csv;
    write_file_atomic(traj_path, csv(tr));
    write_file_atomic(curve_path, curve_csv(c.curve, tr.times));
    out.files.push_back(traj_path);
    out.files.push_back(curve_path);

    ordered_json sim = {
        {"status", to_string(res.status)},
        {"diagnostic", res.diagnostic},
        {"event_time", res.event_time ? ordered_json(*res.event_time) : ordered_json(nullptr)},
        {"rows", tr.size()},
        {"samples", tr.sample_times.size()},
        {"final_time", tr.times.empty() ? 0.0 : tr.times.back()},
        {"initial_error", tr.sample_errors.empty() ? 0.0 : tr.sample_errors.front()},
        {"final_error", tr.errors.empty() ? 0.0 : tr.errors.back()},
        {"max_error", tr.errors.empty() ? 0.0 : *std::max_element(tr.errors.begin(), tr.errors.end())},
        {"residual_floor", {{"value", floor.value}, {"source", floor.source}}},
        {"non_increasing_above_floor", non_increasing_above(tr.sample_errors, floor.value)},
        {"rate_fit", to_json(fit)},
        {"partial", !res.ok()},
        {"outputs", {{"trajectory_csv", cfg.output.trajectory_csv},
                     {"curve_csv", cfg.output.curve_csv}}}};
    rep["simulation"] = sim;
    if (!res.ok()) {
      rep["status"] = "partial";
      out.exit_code = exit_code::kSimulation;
      say(std::string("simulation stopped: ") + to_string(res.status) + " (" + res.diagnostic + ")");
    }
  }

  if (want_cert) {
    const double horizon = an.certification.horizon > 0.0
                               ? an.certification.horizon
                               : (cfg.simulation ? cfg.simulation->T - cfg.simulation->t0 : 20.0);
    say("certifying " + std::to_string(an.certification.grid_size) + " initial conditions");
    CertificationOptions opt;
    opt.t0 = c.t0;
    opt.substeps = substeps;
    const auto grid = certification_grid(c, an.certification.grid_size, an.seed);
    auto cert = certify_set_stability(c.system, c.curve, c.params, cfg.tube, grid,
                                      an.certification.deltas, horizon, opt);
    ordered_json cj = to_json(cert);
    cj["horizon"] = horizon;
    rep["certification"] = cj;
  }

  const auto report_path = options.out_dir / cfg.output.report_json;
  write_file_atomic(report_path, rep.dump(2) + "\n");
  out.files.push_back(report_path);
  return out;
}

int run_from_file(const std::filesystem::path& config_path, const RunOptions& options,
                  std::ostream& log, std::ostream& err) {
  try {
    const auto cfg = load_config(config_path);
    const auto outcome = run_experiment(cfg, options, log);
    if (!options.quiet) {
      for (const auto& f : outcome.files) log << "wrote " << f.string() << '\n';
    }
    return outcome.exit_code;
  } catch (const ConfigError& e) {
    err << error_json("config", "invalid configuration", e.diagnostics()).dump() << '\n';
    return exit_code::kConfig;
  } catch (const std::exception& e) {
    err << error_json("runtime", e.what()).dump() << '\n';
    return exit_code::kFailure;
  }
}

}  // namespace pstab
