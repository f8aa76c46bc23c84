#include "pstab/stability_toolkit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <Eigen/SVD>

#include "pstab/errors.hpp"
#include "pstab/parallel.hpp"
#include "pstab/sampling.hpp"

namespace pstab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQuotientStep = 1e-4;
constexpr int kSweepIterations = 50;
constexpr double kSweepTolerance = 1e-6;

double sign(double v) { return (v > 0.0) - (v < 0.0); }

// Maxima attained at a single sample, in the order of ProofConstants::named().
enum Slot {
  kMg, kMh, kMg0, kMh0, kLg, kLh, kLg0, kLh0, kLg20, kMg2, kMg20, kMg3, kMg30, kMu, kSlots
};

using SlotValues = std::array<double, kSlots>;

// Difference quotient |f(x') - f(x)| / |x' - x| with x' = x +- h d, taking
// whichever partner lies in the domain.
template <class Fn>
double quotient(const ControlAffineSystem& sys, const Fn& f, const Vec& x, const Vec& fx,
                const Vec& d) {
  const double h = kQuotientStep * std::max(1.0, x.norm());
  for (double s : {1.0, -1.0}) {
    const Vec xp = x + s * h * d;
    if (!sys.in_domain(xp)) continue;
    return (f(xp) - fx).norm() / h;
  }
  return 0.0;
}

Vec principal_direction(const Mat& J) {
  if (J.size() == 0 || J.isZero(0.0)) return Vec();
  Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeThinV);
  return svd.matrixV().col(0);
}

SlotValues evaluate_sample(const ControlAffineSystem& sys, const IndexSets& sets,
                           const RegionSample& s) {
  const int n1 = sys.n1();
  const int n2 = sys.n2();
  const int m = sys.m();
  const double t = s.t;
  const Vec& x = s.x;
  if (!sys.in_domain(x)) throw DomainError("sample point lies outside the system domain", x);

  SlotValues v{};
  auto raise = [&v](Slot slot, double value) {
    if (!std::isfinite(value)) value = kInf;
    v[slot] = std::max(v[slot], value);
  };

  // Lipschitz quotients of the y and z blocks of field k along d and along
  // the most stretched direction of each block.
  auto lipschitz = [&](int k, Slot gy, Slot hz) {
    const Vec fx = sys.field(k, t, x);
    auto f = [&](const Vec& p) { return sys.field(k, t, p); };
    const Mat J = sys.jacobian(k, t, x);
    auto block_quotient = [&](const Vec& d, bool y_block) {
      auto part = [&](const Vec& p) -> Vec { return y_block ? f(p).head(n1) : f(p).tail(n2); };
      const Vec fpart = y_block ? Vec(fx.head(n1)) : Vec(fx.tail(n2));
      return quotient(sys, part, x, fpart, d);
    };
    raise(gy, block_quotient(s.direction, true));
    raise(hz, block_quotient(s.direction, false));
    if (const Vec d = principal_direction(J.topRows(n1)); d.size() > 0) {
      raise(gy, block_quotient(d, true));
    }
    if (n2 > 0) {
      if (const Vec d = principal_direction(J.bottomRows(n2)); d.size() > 0) {
        raise(hz, block_quotient(d, false));
      }
    }
    return fx;
  };

  const Vec f0 = lipschitz(0, kLg0, kLh0);
  raise(kMg0, f0.head(n1).norm());
  raise(kMh0, f0.tail(n2).norm());
  for (int k = 1; k <= m; ++k) {
    const Vec fk = lipschitz(k, kLg, kLh);
    raise(kMg, fk.head(n1).norm());
    raise(kMh, fk.tail(n2).norm());
  }

  raise(kLg20, sys.drift_time_derivative(t, x).head(n1).norm());

  // L_{f_b} g_a = (J_a f_b).head(n1)
  auto lie = [&](int a, int b) { return directional_derivative(sys, a, b, t, x).head(n1).norm(); };
  raise(kMg20, lie(0, 0));
  for (int k = 1; k <= m; ++k) {
    raise(kMg20, lie(0, k));
    raise(kMg20, lie(k, 0));
    for (int k2 = 1; k2 <= m; ++k2) {
      raise(kMg2, lie(k, k2));
      raise(kMg30, second_directional_derivative(sys, 0, k2, k, t, x).norm());
      for (int k3 = 1; k3 <= m; ++k3) {
        raise(kMg3, second_directional_derivative(sys, k3, k2, k, t, x).norm());
      }
    }
  }

  raise(kMu, FactorizedF(sys, sets, x).inverse_norm());
  return v;
}

}  // namespace

std::vector<std::pair<std::string, const Estimate*>> ProofConstants::named() const {
  return {{"M_g", &M_g},     {"M_h", &M_h},     {"M_g0", &M_g0},   {"M_h0", &M_h0},
          {"L_g", &L_g},     {"L_h", &L_h},     {"L_g0", &L_g0},   {"L_h0", &L_h0},
          {"L_g20", &L_g20}, {"M_g2", &M_g2},   {"M_g20", &M_g20}, {"M_g3", &M_g3},
          {"M_g30", &M_g30}, {"mu", &mu}};
}

ProofConstants estimate_constants(const ControlAffineSystem& sys, const ReferenceCurve& curve,
                                  const TubeSpec& tube, const IndexSets& sets,
                                  const std::vector<std::pair<double, double>>& z_box,
                                  const ConstantsOptions& options) {
  if (options.sample_count < 100) {
    throw std::invalid_argument("estimate_constants: sample_count must be >= 100");
  }
  tube.validate();
  sets.validate(sys.m(), sys.n1());
  if (static_cast<int>(z_box.size()) != sys.n2()) {
    throw DimensionError("z_box must have one interval per z coordinate");
  }
  if (curve.dim() != sys.n1()) throw DimensionError("reference curve dimension differs from n1");

  const auto samples =
      sample_tube_region(curve, tube, z_box, options.t_probe, options.sample_count, options.seed);
  std::vector<SlotValues> values(samples.size());
  parallel_for(samples.size(),
               [&](std::size_t i) { values[i] = evaluate_sample(sys, sets, samples[i]); });

  ProofConstants out;
  out.L_star = curve.lipschitz();
  out.sample_count = samples.size();
  std::array<Estimate*, kSlots> slots = {&out.M_g,   &out.M_h,  &out.M_g0,  &out.M_h0, &out.L_g,
                                         &out.L_h,   &out.L_g0, &out.L_h0,  &out.L_g20,
                                         &out.M_g2,  &out.M_g20, &out.M_g3, &out.M_g30,
                                         &out.mu};
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (int k = 0; k < kSlots; ++k) slots[k]->update(values[i][k], samples[i].t, samples[i].x);
  }
  return out;
}

Intermediates intermediates_at(const ProofConstants& k, const TubeSpec& tube,
                               const ControllerParams& params, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("intermediates_at: epsilon must be positive");
  Intermediates c;
  c.epsilon = epsilon;
  const double pd = tube.p + tube.delta;
  const double se = std::sqrt(epsilon);
  const double spd = std::sqrt(pd);
  const double mu = k.mu.value;
  const double alpha = params.alpha;

  const auto u = control_bound_coefficients(params, mu, pd, epsilon);
  c.c1 = u.c1;
  c.c2 = u.c2;
  c.cu = u.cu;

  c.cg = k.L_g0.value * se + k.L_g.value * c.cu * spd;
  c.ch = k.L_h0.value * se + k.L_h.value * c.cu * spd;
  const double eh = std::exp(c.ch * se);
  const double E = std::exp(se * c.cg * (1.0 + se * c.ch * std::exp((c.cg + c.ch) * se)));
  c.cy1 = c.cu * (k.M_g.value + c.cg * eh * k.M_h.value * se) * E;
  c.cy2 = (k.M_g0.value + c.cg * eh * k.M_h0.value * se) * E;
  c.cz1 = eh * (k.M_h.value * c.cu + se * c.ch * c.cy1);
  c.cz2 = eh * (k.M_h0.value + se * c.ch * c.cy2);

  // sum over j1 of (sum_{(j2, j1) in S2} kappa^{-2/3})^{3/4}
  std::map<int, double> by_second;
  for (std::size_t i = 0; i < params.sets.s2.size(); ++i) {
    by_second[params.sets.s2[i].second] += std::pow(static_cast<double>(params.kappa[i]), -2.0 / 3.0);
  }
  double kappa_term = 0.0;
  for (const auto& [j1, inner] : by_second) kappa_term += std::pow(inner, 0.75);
  const double am = alpha * mu;
  const double Mg2 = k.M_g2.value;
  c.c_sigma = se * Mg2 * am * am * spd / 2.0 +
              2.0 * Mg2 * std::pow(am, 1.5) / std::sqrt(std::numbers::pi) * kappa_term;
  c.c_r0 = 0.5 * se * (se * k.L_g20.value + k.M_g20.value * (se + c.cu * spd));
  c.c_r1 = c.cu * c.cu * (k.M_g30.value * se + k.M_g3.value * c.cu * spd) / 6.0;
  c.q = c.c_sigma * spd + c.c_r1;
  return c;
}

double eps0_closed_form(double cy1, double cy2, double L_star, double p, double delta,
                        double delta_prime) {
  const double B = cy2 + L_star;
  const double C = cy1 * std::sqrt(p + delta);
  const double K = delta_prime - delta;
  const double denom = C + std::sqrt(C * C + 4.0 * B * K);
  if (denom == 0.0) return kInf;
  const double s = 2.0 * K / denom;
  return s * s;
}

double eps2_closed_form(double cy1, double cy2, double L_star, double p, double nu) {
  const double B = cy2 + L_star;
  const double C = cy1 * std::sqrt(p / nu);
  const double K = p * (nu - 1.0) / nu;
  const double denom = C + std::sqrt(C * C + 4.0 * B * K);
  if (denom == 0.0) return kInf;
  const double s = 2.0 * K / denom;
  return s * s;
}

double eps3_closed_form(double alpha, double lambda, double p, double nu, double L_star,
                        double M_g0, double q, double c_r0) {
  const double num = (alpha - lambda) * p - nu * (L_star + M_g0);
  const double den = p * q + nu * c_r0;
  if (num <= 0.0) return 0.0;
  if (den == 0.0) return kInf;
  const double r = num / den;
  return r * r;
}

namespace {

struct BoundsAt {
  Intermediates at;
  double eps0, eps1, eps2, eps3, bar;
};

BoundsAt bounds_at(const ProofConstants& k, const TubeSpec& tube, const ControllerParams& params,
                   double nu, double lambda, double epsilon) {
  BoundsAt b;
  b.at = intermediates_at(k, tube, params, epsilon);
  b.eps0 = eps0_closed_form(b.at.cy1, b.at.cy2, k.L_star, tube.p, tube.delta, tube.delta_prime);
  b.eps1 = 1.0 / params.alpha;
  b.eps2 = eps2_closed_form(b.at.cy1, b.at.cy2, k.L_star, tube.p, nu);
  b.eps3 = eps3_closed_form(params.alpha, lambda, tube.p, nu, k.L_star, k.M_g0.value, b.at.q,
                            b.at.c_r0);
  b.bar = std::min({b.eps0, b.eps1, b.eps3});
  if (std::isnan(b.bar)) b.bar = 0.0;
  return b;
}

}  // namespace

EpsilonBounds epsilon_bounds(const ProofConstants& constants, const TubeSpec& tube,
                             const ControllerParams& params, double nu,
                             std::optional<double> lambda) {
  tube.validate();
  if (!(nu > 1.0)) throw std::invalid_argument("nu must exceed 1");
  if (!(params.alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  EpsilonBounds out;
  out.nu = nu;
  out.minimal_alpha = nu * (constants.L_star + constants.M_g0.value) / tube.p;
  if (!(params.alpha > out.minimal_alpha)) {
    throw GainInfeasibleError(params.alpha, out.minimal_alpha);
  }
  const double span = params.alpha - out.minimal_alpha;
  out.lambda = lambda.value_or(span / 2.0);
  if (!(out.lambda > 0.0 && out.lambda < span)) {
    throw std::invalid_argument("lambda must lie in (0, alpha - nu (L* + M_g0) / p)");
  }

  auto G = [&](double e) { return bounds_at(constants, tube, params, nu, out.lambda, e); };

  double upper = 1.0 / params.alpha;
  double prev = upper;
  double cur = G(prev).bar;
  out.method = "sweep";
  for (out.iterations = 1; out.iterations < kSweepIterations; ++out.iterations) {
    if (cur > 0.0 && std::abs(cur - prev) <= kSweepTolerance * std::max(cur, prev)) {
      out.converged = true;
      break;
    }
    if (!(cur > 0.0) || !std::isfinite(cur)) break;
    prev = cur;
    cur = G(prev).bar;
  }
  if (out.converged) {
    upper = std::max(prev, cur);
  } else {
    // G is non-increasing; bracket its fixed point between lo (G(lo) >= lo)
    // and hi (G(hi) <= hi) and bisect in log space.
    out.method = "bisection";
    double hi = 1.0 / params.alpha;
    double lo = hi;
    while (G(lo).bar < lo && lo > 1e-300) lo *= 1e-3;
    if (G(lo).bar >= lo) {
      while (hi / lo > 1.0 + 1e-12) {
        const double mid = std::sqrt(lo * hi);
        if (mid <= lo || mid >= hi) break;
        if (G(mid).bar >= mid) {
          lo = mid;
        } else {
          hi = mid;
        }
        ++out.iterations;
      }
      out.converged = true;
    }
    upper = hi;
  }

  const BoundsAt b = G(upper);
  out.at = b.at;
  out.eps0 = b.eps0;
  out.eps1 = b.eps1;
  out.eps2 = b.eps2;
  out.eps3 = b.eps3;
  out.eps_bar = b.bar;
  out.eps_bar_with_eps2 = std::min(b.bar, b.eps2);

  const double e = out.eps_bar;
  out.gamma1_sqrt = std::exp(e * out.lambda / 2.0) * b.at.cy1 * std::sqrt(e);
  out.gamma1_linear = std::exp(e * out.lambda);
  out.gamma2 = b.at.cy2 + constants.L_star;
  out.operating_epsilon = params.epsilon;
  out.operating_epsilon_certified = params.epsilon <= out.eps_bar;
  return out;
}

Vec sigma1(const ControlAffineSystem& sys, const IndexSets& sets, const std::vector<int>& kappa,
           const Vec& x0, const Vec& y_star0, double epsilon, double alpha) {
  const auto params = ControllerParams::make(alpha, epsilon, sets, kappa);
  const Vec a = amplitude(sys, x0, y_star0, params);
  const int n1 = sys.n1();
  const std::size_t n_s1 = sets.s1.size();

  Vec out = Vec::Zero(n1);
  for (std::size_t i = 0; i < n_s1; ++i) {
    for (std::size_t j = 0; j < n_s1; ++j) {
      const int k1 = sets.s1[i];
      const int k2 = sets.s1[j];
      out += 0.5 * epsilon * epsilon * a[i] * a[j] *
             directional_derivative(sys, k1, k2, 0.0, x0).head(n1);
    }
  }

  // Constant channel k1 against the sine channel k2 of each S2 pair (j, k2).
  const double scale = std::pow(epsilon, 1.5) / std::sqrt(std::numbers::pi);
  for (std::size_t i = 0; i < n_s1; ++i) {
    const int k1 = sets.s1[i];
    if (a[i] == 0.0) continue;
    for (std::size_t p = 0; p < sets.s2.size(); ++p) {
      const int k2 = sets.s2[p].second;
      const double ap = a[n_s1 + p];
      if (ap == 0.0 || k2 == k1) continue;
      const double w = std::sqrt(std::abs(ap) / kappa[p]) * sign(ap);
      out -= scale * a[i] * w * projected_bracket(sys, k1, k2, x0);
    }
  }
  return out;
}

ContractionReport contraction_check(const ControlAffineSystem& sys, const ReferenceCurve& curve,
                                    const ControllerParams& params, const TubeSpec& tube,
                                    double nu, const std::vector<Vec>& initial_conditions,
                                    const ContractionOptions& options) {
  params.validate();
  tube.validate();
  if (!(nu > 1.0)) throw std::invalid_argument("nu must exceed 1");
  const auto& split = sys.split();
  const double t0 = options.t0;
  for (const Vec& x0 : initial_conditions) {
    split.check(x0, "initial condition");
    const double e0 = tracking_error(split, x0, t0, curve);
    if (!(e0 > tube.p / nu && e0 <= tube.p + tube.delta)) {
      throw std::invalid_argument(
          "contraction_check: initial conditions must satisfy p/nu < |y0 - y*(t0)| <= p + delta");
    }
  }
  const int substeps =
      options.substeps > 0 ? options.substeps : SimulationConfig::default_substeps(params);

  ContractionReport r;
  r.count = initial_conditions.size();
  r.factors.resize(r.count);
  std::vector<double> e0s(r.count);
  parallel_for(r.count, [&](std::size_t i) {
    const Vec& x0 = initial_conditions[i];
    const Vec x1 = integrate_interval(sys, curve, params, t0, x0, substeps);
    e0s[i] = tracking_error(split, x0, t0, curve);
    r.factors[i] = tracking_error(split, x1, t0 + params.epsilon, curve) / e0s[i];
  });

  std::size_t certified = 0;
  for (std::size_t i = 0; i < r.count; ++i) {
    if (r.factors[i] <= 1.0) ++r.non_expanding;
    if (options.lambda && r.factors[i] <= 1.0 - params.epsilon * *options.lambda) ++certified;
  }
  if (options.lambda) r.meets_certified_rate = certified;
  if (r.count > 0) {
    r.pass_fraction = static_cast<double>(r.non_expanding) / static_cast<double>(r.count);
    const auto [mn, mx] = std::minmax_element(r.factors.begin(), r.factors.end());
    r.min_factor = *mn;
    r.max_factor = *mx;
    r.mean_factor = std::accumulate(r.factors.begin(), r.factors.end(), 0.0) / r.count;
  }
  r.epsilon_above_certified_bound = options.eps_bar && params.epsilon > *options.eps_bar;
  return r;
}

RateFit fit_decay_rate(const std::vector<double>& times, const std::vector<double>& errors,
                       double floor) {
  if (times.size() != errors.size()) throw DimensionError("fit_decay_rate: length mismatch");
  RateFit fit;
  fit.floor = floor;
  std::size_t n = 0;
  while (n < errors.size() && errors[n] > floor && errors[n] > 0.0) ++n;
  fit.points = n;
  if (n < 3) return fit;

  double mt = 0.0, ml = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mt += times[i];
    ml += std::log(errors[i]);
  }
  mt /= n;
  ml /= n;
  double stt = 0.0, stl = 0.0, sll = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dt = times[i] - mt;
    const double dl = std::log(errors[i]) - ml;
    stt += dt * dt;
    stl += dt * dl;
    sll += dl * dl;
  }
  if (stt == 0.0) return fit;
  const double slope = stl / stt;
  fit.rate = -slope;
  fit.intercept = ml - slope * mt;
  fit.r_squared = sll > 0.0 ? (stl * stl) / (stt * sll) : 1.0;
  fit.valid = true;
  return fit;
}

double empirical_residual_floor(const std::vector<double>& times,
                                const std::vector<double>& errors) {
  if (times.size() != errors.size()) {
    throw DimensionError("empirical_residual_floor: length mismatch");
  }
  if (times.empty()) return 0.0;
  const double cut = times.front() + 0.75 * (times.back() - times.front());
  std::vector<double> tail;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] >= cut) tail.push_back(errors[i]);
  }
  std::sort(tail.begin(), tail.end());
  const std::size_t h = tail.size() / 2;
  const double median = tail.size() % 2 == 1 ? tail[h] : 0.5 * (tail[h - 1] + tail[h]);
  return 2.0 * median;
}

ResidualFloor select_residual_floor(double bound_floor, const std::vector<double>& times,
                                    const std::vector<double>& errors) {
  if (std::isfinite(bound_floor) && bound_floor >= 0.0 && !errors.empty() &&
      bound_floor < errors.front()) {
    return {bound_floor, "bound"};
  }
  return {empirical_residual_floor(times, errors), "empirical"};
}

CertificationReport certify_set_stability(const ControlAffineSystem& sys,
                                          const ReferenceCurve& curve,
                                          const ControllerParams& params, const TubeSpec& tube,
                                          const std::vector<Vec>& grid,
                                          const std::vector<double>& deltas, double horizon,
                                          const CertificationOptions& options) {
  params.validate();
  tube.validate();
  if (!(horizon > 0.0)) throw std::invalid_argument("certify_set_stability: horizon must be positive");
  const auto& split = sys.split();
  for (const Vec& x0 : grid) {
    split.check(x0, "grid point");
    if (!in_neighborhood(split, x0, options.t0, curve, tube)) {
      throw std::invalid_argument("certify_set_stability: grid points must lie in B_delta(Y_t0^p)");
    }
  }
  for (double d : deltas) {
    if (!(d >= 0.0)) throw std::invalid_argument("certify_set_stability: Delta must be >= 0");
  }

  std::vector<SimulationResult> runs(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    SimulationConfig cfg;
    cfg.t0 = options.t0;
    cfg.horizon = options.t0 + horizon;
    cfg.x0 = grid[i];
    cfg.substeps_per_interval =
        options.substeps > 0 ? options.substeps : SimulationConfig::default_substeps(params);
    cfg.record_stride = options.record_stride;
    runs[i] = simulate(sys, curve, params, cfg, tube);
  });

  CertificationReport report;
  report.floor_source = options.floor ? "given" : "empirical";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& run = runs[i];
    TrajectoryOutcome o;
    o.x0 = grid[i];
    o.status = run.status;
    o.diagnostic = run.diagnostic;
    if (!run.ok()) ++report.failures;
    const auto& tr = run.trajectory;
    const double floor =
        options.floor ? *options.floor : empirical_residual_floor(tr.sample_times, tr.sample_errors);
    report.floor = std::max(report.floor, floor);
    o.fit = fit_decay_rate(tr.sample_times, tr.sample_errors, floor);
    if (run.ok() && o.fit.valid) {
      report.min_rate = std::min(report.min_rate.value_or(kInf), o.fit.rate);
      report.min_r_squared = std::min(report.min_r_squared.value_or(kInf), o.fit.r_squared);
    }
    report.trajectories.push_back(std::move(o));
  }

  for (double Delta : deltas) {
    DeltaResult d;
    d.Delta = Delta;
    d.stable = report.failures == 0;
    std::optional<double> t1 = 0.0;
    for (const auto& run : runs) {
      const auto& tr = run.trajectory;
      if (!run.ok()) {
        t1.reset();
        continue;
      }
      std::optional<std::size_t> last_outside;
      for (std::size_t r = 0; r < tr.size(); ++r) {
        if (std::max(0.0, tr.errors[r] - tube.p) > Delta) {
          d.stable = false;
          last_outside = r;
        }
      }
      if (!t1) continue;
      if (!last_outside) continue;
      if (*last_outside + 1 >= tr.size()) {
        t1.reset();
      } else {
        t1 = std::max(*t1, tr.times[*last_outside + 1] - options.t0);
      }
    }
    d.attraction_time = t1;
    report.deltas.push_back(d);
  }
  return report;
}

double ultimate_bound(const Intermediates& at, double lambda, double L_star, double y0_err,
                      double t) {
  const double e = at.epsilon;
  const double g = std::exp(e * lambda / 2.0);
  const double gamma1 = g * std::sqrt(y0_err) * (at.cy1 * std::sqrt(e) + g * std::sqrt(y0_err));
  const double gamma2 = at.cy2 + L_star;
  if (!std::isfinite(gamma1) || !std::isfinite(gamma2)) return std::numeric_limits<double>::infinity();
  return gamma1 * std::exp(-lambda * t / 2.0) + e * gamma2;
}

}  // namespace pstab
