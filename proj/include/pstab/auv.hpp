#pragma once

#include <array>
#include <utility>

#include "pstab/integrator.hpp"
#include "pstab/linalg.hpp"
#include "pstab/oscillating_controller.hpp"
#include "pstab/system_model.hpp"

namespace pstab::auv {

/// Pitch angles closer than this to +-pi/2 are treated as outside the domain.
inline constexpr double kPitchGuard = 1e-6;

/// Uncontrolled roll rate omega1(t) = amplitude * cos(frequency * t).
struct RollRate {
  double amplitude = 0.25;
  double frequency = 1.0;
};

/// Kinematic underwater vehicle: state (x1, x2, x3 | x4, x5, x6) = position |
/// Euler angles, controls (v, omega2, omega3), task variables y = position.
ControlAffineSystem make_model(RollRate roll = {});

/// |x5| < pi/2 - kPitchGuard.
bool in_domain(const Vec& x);

/// Closed-form I_{3x6}[f1, f2](x) and I_{3x6}[f1, f3](x). Throws DomainError
/// when |x5| >= pi/2 - kPitchGuard.
std::pair<Vec, Vec> analytic_brackets(const Vec& x);

/// S1 = {1}, S2 = {(1,2), (1,3)}.
IndexSets index_sets();

/// Sampling box for the free variables (Euler angles): one period in roll and
/// yaw, pitch restricted to |x5| <= max_pitch.
std::vector<std::pair<double, double>> default_z_box(double max_pitch = 1.4);

struct Scenario {
  ControlAffineSystem system;
  ReferenceCurve curve;
  ControllerParams params;
  SimulationConfig sim;
  TubeSpec tube;
  std::vector<std::pair<double, double>> z_box;
};

/// Helix y*(t) = (cos 0.2t, 0.2t, sin 0.2t), omega1 = 0.25 cos t, eps = 0.1,
/// alpha = 15, kappa = (1, 2), x0 = (0, 0, -1, pi/4, pi/4, pi/4), T = 20.
/// Tube p = 0.5, delta = 1, delta' = 1.5 so that x0 lies in B_delta(Y_0^p).
Scenario helix_scenario();

}  // namespace pstab::auv
