#include "pstab/oscillating_controller.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "pstab/errors.hpp"

namespace pstab {

namespace {

double sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

std::vector<int> default_kappa(const IndexSets& sets) {
  std::vector<int> kappa(sets.s2.size());
  for (std::size_t i = 0; i < kappa.size(); ++i) kappa[i] = static_cast<int>(i) + 1;
  return kappa;
}

ControllerParams ControllerParams::make(double alpha, double epsilon, IndexSets sets,
                                        std::vector<int> kappa) {
  ControllerParams p{alpha, epsilon, std::move(sets), std::move(kappa)};
  if (p.kappa.empty()) p.kappa = default_kappa(p.sets);
  p.validate();
  return p;
}

void ControllerParams::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (kappa.size() != sets.s2.size()) {
    throw std::invalid_argument("kappa needs one entry per S2 pair");
  }
  std::set<int> seen;
  for (int k : kappa) {
    if (k <= 0) throw std::invalid_argument("kappa values must be positive integers");
    if (!seen.insert(k).second) throw std::invalid_argument("kappa values must be pairwise distinct");
  }
}

int ControllerParams::max_kappa() const {
  return kappa.empty() ? 0 : *std::max_element(kappa.begin(), kappa.end());
}

Vec amplitude(const FactorizedF& F, const Vec& y, const Vec& y_star, double alpha) {
  if (y.size() != y_star.size()) throw DimensionError("amplitude: y and y* differ in length");
  return -alpha * F.solve(y - y_star);
}

Vec amplitude(const ControlAffineSystem& sys, const Vec& x, const Vec& y_star,
              const ControllerParams& params) {
  const FactorizedF F(sys, params.sets, x);
  return amplitude(F, x.head(sys.n1()), y_star, params.alpha);
}

SampledControl::SampledControl(Vec amplitudes, const ControllerParams& params, int m)
    : a_(std::move(amplitudes)), m_(m) {
  if (a_.size() != static_cast<Eigen::Index>(params.sets.size())) {
    throw DimensionError("amplitude vector must have |S1| + |S2| entries");
  }
  Eigen::Index idx = 0;
  for (int i : params.sets.s1) direct_.emplace_back(i - 1, a_[idx++]);
  const double root_eps = std::sqrt(params.epsilon);
  for (std::size_t j = 0; j < params.sets.s2.size(); ++j, ++idx) {
    const double a = a_[idx];
    const double kappa = params.kappa[j];
    const auto& [i1, i2] = params.sets.s2[j];
    oscillators_.push_back(Oscillator{
        i1 - 1, i2 - 1, 2.0 * std::sqrt(std::numbers::pi * kappa * std::abs(a)) / root_eps,
        sign(a), 2.0 * std::numbers::pi * kappa / params.epsilon});
  }
}

void SampledControl::eval(double t, Vec& u) const {
  u.setZero(m_);
  for (const auto& [k, v] : direct_) u[k] += v;
  for (const auto& o : oscillators_) {
    if (o.amplitude == 0.0) continue;
    const double phase = o.omega * t;
    u[o.cos_channel] += o.amplitude * std::cos(phase);
    u[o.sin_channel] += o.amplitude * o.sign * std::sin(phase);
  }
}

Vec SampledControl::operator()(double t) const {
  Vec u;
  eval(t, u);
  return u;
}

Vec control(const ControlAffineSystem& sys, double t, const Vec& x_frozen, const Vec& y_star_frozen,
            const ControllerParams& params) {
  return SampledControl(amplitude(sys, x_frozen, y_star_frozen, params), params, sys.m())(t);
}

ControlBoundCoefficients control_bound_coefficients(const ControllerParams& params, double mu,
                                                    double p_plus_delta, double epsilon) {
  ControlBoundCoefficients c;
  const double alpha = params.alpha;
  c.c1 = std::sqrt(static_cast<double>(params.sets.s1.size())) * alpha * mu;
  double kappa_sum = 0.0;
  for (int k : params.kappa) kappa_sum += std::pow(static_cast<double>(k), 2.0 / 3.0);
  c.c2 = 2.0 * std::sqrt(2.0 * alpha * std::numbers::pi * mu) * std::pow(kappa_sum, 0.75);
  c.cu = c.c1 * std::sqrt(epsilon * p_plus_delta) + c.c2;
  return c;
}

double control_magnitude_bound(const Vec& y0, const Vec& y_star0, const ControllerParams& params,
                               double mu, double p_plus_delta) {
  if (y0.size() != y_star0.size()) throw DimensionError("control bound: y0 and y0* differ in length");
  const auto c = control_bound_coefficients(params, mu, p_plus_delta);
  return c.cu * std::sqrt((y0 - y_star0).norm() / params.epsilon);
}

}  // namespace pstab
