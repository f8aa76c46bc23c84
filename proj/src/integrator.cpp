#include "pstab/integrator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "pstab/errors.hpp"

namespace pstab {

namespace {

void write_number(std::ostream& os, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  os.write(buf, res.ptr - buf);
}

struct IntervalPlan {
  long full_intervals = 0;
  double remainder = 0.0;
};

IntervalPlan plan_intervals(double t0, double horizon, double eps) {
  IntervalPlan plan;
  const double span = horizon - t0;
  plan.full_intervals = static_cast<long>(std::floor(span / eps + 1e-9));
  plan.remainder = span - static_cast<double>(plan.full_intervals) * eps;
  if (plan.remainder <= 1e-9 * eps) plan.remainder = 0.0;
  return plan;
}

}  // namespace

const char* to_string(SimulationStatus status) {
  switch (status) {
    case SimulationStatus::Completed:
      return "completed";
    case SimulationStatus::SingularF:
      return "singular_F";
    case SimulationStatus::GuardExit:
      return "guard_exit";
    case SimulationStatus::NumericBlowup:
      return "numeric_blowup";
  }
  return "unknown";
}

int SimulationConfig::default_substeps(const ControllerParams& params) {
  return std::max(200, 40 * params.max_kappa());
}

void SimulationConfig::validate(const ControllerParams& params) const {
  if (!std::isfinite(t0) || !std::isfinite(horizon) || !(horizon > t0)) {
    throw std::invalid_argument("simulation horizon T must exceed t0");
  }
  if (record_stride < 1) throw std::invalid_argument("record_stride must be >= 1");
  if (substeps_per_interval < 40 * params.max_kappa() || substeps_per_interval < 1) {
    throw std::invalid_argument("substeps_per_interval must be >= 40 * kappa_max = " +
                                std::to_string(40 * params.max_kappa()));
  }
  if (!x0.allFinite()) throw std::invalid_argument("x0 must be finite");
}

Vec rk4_step(const OdeRhs& f, double t, const Vec& x, double h) {
  const Vec k1 = f(t, x);
  const Vec k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
  const Vec k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
  const Vec k4 = f(t + h, x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Vec rk4_integrate(const OdeRhs& f, double t0, const Vec& x0, double t1, int steps) {
  if (steps < 1) throw std::invalid_argument("rk4_integrate: steps must be >= 1");
  const double h = (t1 - t0) / steps;
  Vec x = x0;
  for (int i = 0; i < steps; ++i) x = rk4_step(f, t0 + i * h, x, h);
  return x;
}

namespace {

OdeRhs closed_loop_rhs(const ControlAffineSystem& sys, const SampledControl& ctl) {
  return [&sys, &ctl](double t, const Vec& x) {
    Vec u;
    ctl.eval(t, u);
    return sys.rhs(t, x, u);
  };
}

}  // namespace

Vec integrate_interval(const ControlAffineSystem& sys, const ReferenceCurve& curve,
                       const ControllerParams& params, double t0, const Vec& x0, int substeps) {
  sys.split().check(x0, "x0");
  const FactorizedF F(sys, params.sets, x0);
  const SampledControl ctl(amplitude(F, x0.head(sys.n1()), curve(t0), params.alpha), params, sys.m());
  return rk4_integrate(closed_loop_rhs(sys, ctl), t0, x0, t0 + params.epsilon, substeps);
}

SimulationResult simulate(const ControlAffineSystem& sys, const ReferenceCurve& curve,
                          const ControllerParams& params, const SimulationConfig& config,
                          const TubeSpec& tube) {
  params.validate();
  config.validate(params);
  tube.validate();
  const auto& split = sys.split();
  split.check(config.x0, "x0");
  if (curve.dim() != split.n1) throw DimensionError("reference curve dimension differs from n1");

  SimulationResult result;
  Trajectory& traj = result.trajectory;
  const double eps = params.epsilon;
  const double guard = tube.p + tube.delta_prime;
  const IntervalPlan plan = plan_intervals(config.t0, config.horizon, eps);
  const long intervals = plan.full_intervals + (plan.remainder > 0.0 ? 1 : 0);

  auto error_at = [&](double t, const Vec& x) { return (x.head(split.n1) - curve(t)).norm(); };
  auto record = [&](double t, const Vec& x, const Vec& u) {
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.controls.push_back(u);
    traj.errors.push_back(error_at(t, x));
  };
  auto abort = [&](SimulationStatus status, double t, std::string why) {
    result.status = status;
    result.event_time = t;
    result.diagnostic = std::move(why);
    return result;
  };

  Vec x = config.x0;
  long step_counter = 0;
  Vec u(sys.m());
  std::optional<SampledControl> last_control;

  for (long j = 0; j < intervals; ++j) {
    const double tj = config.t0 + eps * static_cast<double>(j);
    const bool partial = j == plan.full_intervals;
    const double span = partial ? plan.remainder : eps;
    const int steps =
        partial ? std::max(1, static_cast<int>(std::ceil(span / eps * config.substeps_per_interval - 1e-9)))
                : config.substeps_per_interval;
    const double h = span / steps;

    const Vec y_star = curve(tj);
    const double err = (x.head(split.n1) - y_star).norm();
    traj.sample_times.push_back(tj);
    traj.sample_errors.push_back(err);
    if (!sys.in_domain(x) || err > guard) {
      u.setZero();
      record(tj, x, u);
      return abort(SimulationStatus::GuardExit, tj, "state left the guard region at a sampling instant");
    }

    std::optional<FactorizedF> F;
    try {
      F.emplace(sys, params.sets, x);
    } catch (const SingularFError& e) {
      u.setZero();
      record(tj, x, u);
      return abort(SimulationStatus::SingularF, tj, e.what());
    }
    last_control.emplace(amplitude(*F, x.head(split.n1), y_star, params.alpha), params, sys.m());
    const OdeRhs f = closed_loop_rhs(sys, *last_control);

    for (int i = 0; i < steps; ++i) {
      const double t = tj + h * i;
      if (step_counter % config.record_stride == 0) {
        last_control->eval(t, u);
        record(t, x, u);
      }
      ++step_counter;
      x = rk4_step(f, t, x, h);
      const double t_next = i + 1 == steps ? tj + span : tj + h * (i + 1);
      if (!x.allFinite()) {
        return abort(SimulationStatus::NumericBlowup, t_next, "non-finite state");
      }
      if (!sys.in_domain(x) || error_at(t_next, x) > guard) {
        last_control->eval(t_next, u);
        record(t_next, x, u);
        return abort(SimulationStatus::GuardExit, t_next, "state left the guard region");
      }
    }
  }

  const double T = config.t0 + eps * static_cast<double>(plan.full_intervals) + plan.remainder;
  if (plan.remainder == 0.0) {
    traj.sample_times.push_back(T);
    traj.sample_errors.push_back(error_at(T, x));
  }
  if (last_control) {
    last_control->eval(T, u);
  } else {
    u.setZero();
  }
  record(T, x, u);
  return result;
}

ConvergenceReport step_convergence_check(const ControlAffineSystem& sys,
                                         const ReferenceCurve& curve,
                                         const ControllerParams& params,
                                         const SimulationConfig& config, double tolerance) {
  ConvergenceReport report;
  report.substeps = config.substeps_per_interval;
  const Vec coarse = integrate_interval(sys, curve, params, config.t0, config.x0, report.substeps);
  const Vec fine = integrate_interval(sys, curve, params, config.t0, config.x0, 2 * report.substeps);
  const double diff = (coarse - fine).norm();
  report.relative_difference = diff / std::max(1.0, fine.norm());
  report.richardson_error = diff / 15.0;
  report.passed = report.relative_difference <= tolerance;
  return report;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const Eigen::Index n = traj.states.empty() ? 0 : traj.states.front().size();
  const Eigen::Index m = traj.controls.empty() ? 0 : traj.controls.front().size();
  os << 't';
  for (Eigen::Index i = 1; i <= n; ++i) os << ",x" << i;
  for (Eigen::Index k = 1; k <= m; ++k) os << ",u" << k;
  os << ",err\n";
  for (std::size_t r = 0; r < traj.size(); ++r) {
    write_number(os, traj.times[r]);
    for (Eigen::Index i = 0; i < n; ++i) {
      os << ',';
      write_number(os, traj.states[r][i]);
    }
    for (Eigen::Index k = 0; k < m; ++k) {
      os << ',';
      write_number(os, traj.controls[r][k]);
    }
    os << ',';
    write_number(os, traj.errors[r]);
    os << '\n';
  }
}

void write_curve_csv(std::ostream& os, const ReferenceCurve& curve,
                     const std::vector<double>& times) {
  os << 't';
  for (int i = 1; i <= curve.dim(); ++i) os << ",ystar" << i;
  os << '\n';
  for (double t : times) {
    write_number(os, t);
    const Vec y = curve(t);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      os << ',';
      write_number(os, y[i]);
    }
    os << '\n';
  }
}

}  // namespace pstab
