#include "pstab/auv.hpp"

#include <cmath>
#include <numbers>

#include "pstab/errors.hpp"

namespace pstab::auv {

namespace {

constexpr int kN = 6;

void check_state(const Vec& x) {
  if (x.size() != kN) throw DimensionError("AUV state must have 6 components");
}

}  // namespace

bool in_domain(const Vec& x) {
  return x.size() == kN && std::abs(x[4]) < std::numbers::pi / 2 - kPitchGuard;
}

ControlAffineSystem make_model(RollRate roll) {
  ControlAffineSystem::Definition def;
  def.name = "auv";
  def.split = StateSplit::make(3, 3);
  def.m = 3;

  def.drift = [roll](double t, const Vec& x) {
    check_state(x);
    Vec f = Vec::Zero(kN);
    f[3] = roll.amplitude * std::cos(roll.frequency * t);
    return f;
  };
  def.drift_jacobian = [](double, const Vec& x) {
    check_state(x);
    return Mat(Mat::Zero(kN, kN));
  };
  def.drift_time_derivative = [roll](double t, const Vec& x) {
    check_state(x);
    Vec f = Vec::Zero(kN);
    f[3] = -roll.amplitude * roll.frequency * std::sin(roll.frequency * t);
    return f;
  };

  // f1 = (g1, 0): surge direction in the world frame.
  def.fields.push_back([](const Vec& x) {
    check_state(x);
    const double c5 = std::cos(x[4]), s5 = std::sin(x[4]);
    const double c6 = std::cos(x[5]), s6 = std::sin(x[5]);
    Vec f = Vec::Zero(kN);
    f << c5 * c6, c5 * s6, -s5, 0.0, 0.0, 0.0;
    return f;
  });
  // f2 = (0, h2), f3 = (0, h3): Euler-angle rates for body rates omega2, omega3.
  def.fields.push_back([](const Vec& x) {
    check_state(x);
    const double c4 = std::cos(x[3]), s4 = std::sin(x[3]);
    const double c5 = std::cos(x[4]), t5 = std::tan(x[4]);
    Vec f(kN);
    f << 0.0, 0.0, 0.0, s4 * t5, c4, s4 / c5;
    return f;
  });
  def.fields.push_back([](const Vec& x) {
    check_state(x);
    const double c4 = std::cos(x[3]), s4 = std::sin(x[3]);
    const double c5 = std::cos(x[4]), t5 = std::tan(x[4]);
    Vec f(kN);
    f << 0.0, 0.0, 0.0, c4 * t5, -s4, c4 / c5;
    return f;
  });

  def.field_jacobians.push_back([](const Vec& x) {
    check_state(x);
    const double c5 = std::cos(x[4]), s5 = std::sin(x[4]);
    const double c6 = std::cos(x[5]), s6 = std::sin(x[5]);
    Mat J = Mat::Zero(kN, kN);
    J(0, 4) = -s5 * c6;
    J(1, 4) = -s5 * s6;
    J(2, 4) = -c5;
    J(0, 5) = -c5 * s6;
    J(1, 5) = c5 * c6;
    return J;
  });
  def.field_jacobians.push_back([](const Vec& x) {
    check_state(x);
    const double c4 = std::cos(x[3]), s4 = std::sin(x[3]);
    const double c5 = std::cos(x[4]), t5 = std::tan(x[4]);
    const double sec5 = 1.0 / c5;
    Mat J = Mat::Zero(kN, kN);
    J(3, 3) = c4 * t5;
    J(4, 3) = -s4;
    J(5, 3) = c4 * sec5;
    J(3, 4) = s4 * sec5 * sec5;
    J(5, 4) = s4 * sec5 * t5;
    return J;
  });
  def.field_jacobians.push_back([](const Vec& x) {
    check_state(x);
    const double c4 = std::cos(x[3]), s4 = std::sin(x[3]);
    const double c5 = std::cos(x[4]), t5 = std::tan(x[4]);
    const double sec5 = 1.0 / c5;
    Mat J = Mat::Zero(kN, kN);
    J(3, 3) = -s4 * t5;
    J(4, 3) = -c4;
    J(5, 3) = -s4 * sec5;
    J(3, 4) = c4 * sec5 * sec5;
    J(5, 4) = c4 * sec5 * t5;
    return J;
  });

  def.state_domain = [](const Vec& x) { return in_domain(x); };
  return ControlAffineSystem(std::move(def));
}

std::pair<Vec, Vec> analytic_brackets(const Vec& x) {
  check_state(x);
  if (!in_domain(x)) throw DomainError("pitch angle too close to +-pi/2", x);
  const double c4 = std::cos(x[3]), s4 = std::sin(x[3]);
  const double c5 = std::cos(x[4]), s5 = std::sin(x[4]);
  const double c6 = std::cos(x[5]), s6 = std::sin(x[5]);
  Vec b12(3), b13(3);
  b12 << c4 * s5 * c6 + s4 * s6, c4 * s5 * s6 - s4 * c6, c4 * c5;
  b13 << -s4 * s5 * c6 + c4 * s6, -s4 * s5 * s6 - c4 * c6, -s4 * c5;
  return {b12, b13};
}

IndexSets index_sets() { return IndexSets{{1}, {{1, 2}, {1, 3}}}; }

std::vector<std::pair<double, double>> default_z_box(double max_pitch) {
  constexpr double pi = std::numbers::pi;
  return {{-pi, pi}, {-max_pitch, max_pitch}, {-pi, pi}};
}

Scenario helix_scenario() {
  constexpr double pi = std::numbers::pi;
  auto params = ControllerParams::make(15.0, 0.1, index_sets(), {1, 2});
  SimulationConfig sim;
  sim.t0 = 0.0;
  sim.horizon = 20.0;
  sim.x0 = Vec(6);
  sim.x0 << 0.0, 0.0, -1.0, pi / 4, pi / 4, pi / 4;
  sim.substeps_per_interval = SimulationConfig::default_substeps(params);
  sim.record_stride = 1;
  return Scenario{make_model(RollRate{0.25, 1.0}),
                  ReferenceCurve::helix(Vec::Zero(3), 1.0, 0.2, 0.2),
                  std::move(params),
                  std::move(sim),
                  TubeSpec::make(0.5, 1.0, 1.5),
                  default_z_box()};
}

}  // namespace pstab::auv
