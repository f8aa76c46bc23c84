#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pstab/linalg.hpp"
#include "pstab/oscillating_controller.hpp"
#include "pstab/system_model.hpp"

namespace pstab {

struct SimulationConfig {
  double t0 = 0.0;
  double horizon = 1.0;  // final time T
  Vec x0;
  int substeps_per_interval = 200;
  int record_stride = 1;

  /// max(200, 40 * kappa_max).
  static int default_substeps(const ControllerParams& params);
  /// Throws std::invalid_argument on a bad horizon, stride, or fewer than
  /// 40 * kappa_max substeps.
  void validate(const ControllerParams& params) const;
};

/// Sampled pi_eps-solution. `times/states/controls/errors` are the recorded
/// substeps; `sample_times/sample_errors` are the sampling instants t_j.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Vec> controls;
  std::vector<double> errors;
  std::vector<double> sample_times;
  std::vector<double> sample_errors;

  std::size_t size() const { return times.size(); }
};

enum class SimulationStatus { Completed, SingularF, GuardExit, NumericBlowup };

const char* to_string(SimulationStatus status);

struct SimulationResult {
  Trajectory trajectory;
  SimulationStatus status = SimulationStatus::Completed;
  std::string diagnostic;
  /// Time of the abort event, when the run did not complete.
  std::optional<double> event_time;

  bool ok() const { return status == SimulationStatus::Completed; }
};

/// Integrates the sample-and-hold closed loop: at t_j = t0 + j eps the state
/// and y*(t_j) are frozen into the control; within [t_j, t_j+1) the system is
/// integrated with fixed-step RK4. Leaving the guard ||y - y*|| <= p + delta'
/// or the system domain yields GuardExit; a singular F at a sampling instant
/// yields SingularF; a non-finite state yields NumericBlowup. The trajectory
/// recorded up to the event is kept.
SimulationResult simulate(const ControlAffineSystem& sys, const ReferenceCurve& curve,
                          const ControllerParams& params, const SimulationConfig& config,
                          const TubeSpec& tube);

/// State after one sampling interval starting at (config.t0, config.x0).
/// Throws SingularFError if F(x0) is singular.
Vec integrate_interval(const ControlAffineSystem& sys, const ReferenceCurve& curve,
                       const ControllerParams& params, double t0, const Vec& x0, int substeps);

using OdeRhs = std::function<Vec(double t, const Vec& x)>;

/// One classical RK4 step.
Vec rk4_step(const OdeRhs& f, double t, const Vec& x, double h);
/// `steps` equal RK4 steps from t0 to t1.
Vec rk4_integrate(const OdeRhs& f, double t0, const Vec& x0, double t1, int steps);

struct ConvergenceReport {
  int substeps = 0;
  double relative_difference = 0.0;  // |x_N - x_2N| / max(1, |x_2N|)
  double richardson_error = 0.0;     // |x_N - x_2N| / 15
  bool passed = false;
};

/// Integrates the first sampling interval with N and 2N substeps.
ConvergenceReport step_convergence_check(const ControlAffineSystem& sys,
                                         const ReferenceCurve& curve,
                                         const ControllerParams& params,
                                         const SimulationConfig& config,
                                         double tolerance = 1e-6);

/// Header `t,x1..xn,u1..um,err`, one row per recorded substep, 17 significant
/// digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
/// Header `t,ystar1..ystar_n1`.
void write_curve_csv(std::ostream& os, const ReferenceCurve& curve,
                     const std::vector<double>& times);

}  // namespace pstab
