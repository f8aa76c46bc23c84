// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "pstab/auv.hpp"
#include "pstab/config.hpp"
#include "pstab/runner.hpp"
#include "pstab/sampling.hpp"
#include "pstab/stability_toolkit.hpp"

using namespace pstab;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double time_limit, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (time_limit > 0 && secs > time_limit) {
    o.pass = false;
    o.detail += "; runtime over " + std::to_string(time_limit) + " s";
  }
  if (!o.pass) ++failures;
  std::printf("%s %2d %-28s %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

/// AUV state from a point of [0,1)^6: y in [-2,2]^3, roll and yaw in [-pi,pi), |pitch| <= max_pitch.
Vec auv_point(const std::vector<double>& u, double max_pitch = 1.4) {
  Vec x(6);
  x << 4 * u[0] - 2, 4 * u[1] - 2, 4 * u[2] - 2, 2 * kPi * u[3] - kPi,
      max_pitch * (2 * u[4] - 1), 2 * kPi * u[5] - kPi;
  return x;
}

Vec unit_from(double a, double b) {
  // uniform direction on the sphere from two uniforms
  const double z = 2 * a - 1, phi = 2 * kPi * b, r = std::sqrt(1 - z * z);
  Vec d(3);
  d << r * std::cos(phi), r * std::sin(phi), z;
  return d;
}

/// Initial conditions with |y0 - y*(t0)| in (r_lo, r_hi] and z in the default box.
std::vector<Vec> annulus_ics(const ReferenceCurve& curve, double r_lo, double r_hi, int count,
                             std::uint64_t seed) {
  const HaltonSequence h(6, seed);
  std::vector<Vec> out;
  for (int i = 0; i < count; ++i) {
    const auto u = h.point(i);
    Vec x = auv_point(u);
    const double r = r_lo + (r_hi - r_lo) * (1.0 - u[0]);  // in (r_lo, r_hi]
    x.head(3) = curve(0.0) + r * unit_from(u[1], u[2]);
    out.push_back(x);
  }
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Reference closed forms for the y-components of the vehicle brackets.
std::pair<Vec, Vec> reference_brackets(const Vec& x) {
  const double c4 = std::cos(x[3]), s4 = std::sin(x[3]);
  const double c5 = std::cos(x[4]), s5 = std::sin(x[4]);
  const double c6 = std::cos(x[5]), s6 = std::sin(x[5]);
  Vec b12(3), b13(3);
  b12 << c4 * s5 * c6 + s4 * s6, c4 * s5 * s6 - s4 * c6, c4 * c5;
  b13 << -s4 * s5 * c6 + c4 * s6, s4 * s5 * s6 - c4 * c6, -s4 * c5;
  return {b12, b13};
}

}  // namespace

int main() {
  const auto sc = auv::helix_scenario();
  const auto& sys = sc.system;
  const auto sets = auv::index_sets();

  criterion(1, "determinant identity", 5.0, [&] {
    const HaltonSequence h(6, 1);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const Vec x = auv_point(h.point(i));
      worst = std::max(worst, std::abs(oracle::det(assemble_F(sys, sets, x)) - 1.0));
    }
    return Outcome{worst <= 1e-9, fmt("max |det F - 1| = %.3g over 10^4 points (tol 1e-9)", worst)};
  });

  criterion(2, "bracket oracle", 5.0, [&] {
    oracle::Gen gen(2);
    double worst12 = 0.0, worst13 = 0.0, worst_fd = 0.0;
    for (int i = 0; i < 200; ++i) {
      const Vec x = gen.auv_state(1.4);
      const auto [b12, b13] = reference_brackets(x);
      const Vec n12 = projected_bracket(sys, 1, 2, x), n13 = projected_bracket(sys, 1, 3, x);
      worst12 = std::max(worst12, (n12 - b12).cwiseAbs().maxCoeff());
      worst13 = std::max(worst13, (n13 - b13).cwiseAbs().maxCoeff());
      // finite-difference brackets of the raw fields, independent of the Jacobians
      auto f = [&](int k) { return [k, &sys](const Vec& p) { return sys.field(k, 0.0, p); }; };
      worst_fd = std::max(worst_fd, (oracle::fd_bracket(f(1), f(2), x).head(3) - n12).cwiseAbs().maxCoeff());
      worst_fd = std::max(worst_fd, (oracle::fd_bracket(f(1), f(3), x).head(3) - n13).cwiseAbs().maxCoeff());
    }
    const bool pass = worst12 <= 1e-6 && worst13 <= 1e-6 && worst_fd <= 1e-6;
    return Outcome{pass, fmt("max-abs deviation from reference formulas: [f1,f2] %.3g, [f1,f3] %.3g (tol 1e-6)",
                             worst12, worst13) +
                             fmt("; numeric vs finite differences %.3g", worst_fd)};
  });

  criterion(3, "helix scenario", 60.0, [&] {
    const auto run = simulate(sys, sc.curve, sc.params, sc.sim, sc.tube);
    if (!run.ok()) return Outcome{false, std::string("simulation stopped: ") + run.diagnostic};
    auto fine_cfg = sc.sim;
    fine_cfg.substeps_per_interval *= 4;
    fine_cfg.record_stride = 4;
    const auto ref = simulate(sys, sc.curve, sc.params, fine_cfg, sc.tube);
    const auto& tr = run.trajectory;
    const double e20 = tr.sample_errors.back();
    const double e20_ref = ref.trajectory.sample_errors.back();

    // residual floor 2 eps gamma2 with the coefficients at the operating epsilon
    ConstantsOptions co;
    co.sample_count = 1000;
    const auto k = estimate_constants(sys, sc.curve, sc.tube, sets, sc.z_box, co);
    const auto at = intermediates_at(k, sc.tube, sc.params, sc.params.epsilon);
    const double bound_floor = 2 * sc.params.epsilon * (at.cy2 + k.L_star);
    const auto floor = select_residual_floor(bound_floor, tr.sample_times, tr.sample_errors);

    std::size_t violations = 0, checked = 0;
    for (std::size_t j = 0; j + 1 < tr.sample_errors.size(); ++j) {
      if (tr.sample_errors[j] <= floor.value) continue;
      ++checked;
      if (tr.sample_errors[j + 1] > tr.sample_errors[j]) ++violations;
    }
    const double limit = 0.1 * std::sqrt(2.0);
    const bool pass = e20 < limit && std::abs(e20 - e20_ref) < 1e-3 * limit && violations == 0;
    return Outcome{pass, fmt("e(20) = %.4g (limit %.4g, 4x-substep reference %.4g)", e20, limit, e20_ref) +
                             fmt("; floor %.4g", floor.value) + " (" + floor.source +
                             ", bound 2 eps gamma2 = " + fmt("%.3g", bound_floor) + ")" +
                             fmt("; %g increases over %g instants above the floor", violations, checked)};
  });

  criterion(4, "per-step contraction", 60.0, [&] {
    const auto tube = TubeSpec::make(0.5, 0.25, 1.0);
    const auto params = ControllerParams::make(15.0, 0.01, sets, {1, 2});
    const auto ics = annulus_ics(sc.curve, tube.p / 2.0, tube.p + tube.delta, 50, 4);
    const auto r = contraction_check(sys, sc.curve, params, tube, 2.0, ics);
    return Outcome{r.non_expanding == 50,
                   fmt("%g/50 non-expanding, max factor %.4f", r.non_expanding, r.max_factor)};
  });

  criterion(5, "tube invariance", 60.0, [&] {
    const auto tube = TubeSpec::make(0.5, 0.25, 1.0);
    const auto params = ControllerParams::make(15.0, 0.01, sets, {1, 2});
    const auto ics = annulus_ics(sc.curve, 0.0, tube.p / 2.0, 20, 5);
    double worst = 0.0;
    std::size_t bad = 0;
    std::vector<SimulationResult> runs(ics.size());
    for (std::size_t i = 0; i < ics.size(); ++i) {
      SimulationConfig cfg;
      cfg.horizon = 10.0;
      cfg.x0 = ics[i];
      cfg.substeps_per_interval = SimulationConfig::default_substeps(params);
      cfg.record_stride = 1;
      const auto run = simulate(sys, sc.curve, params, cfg, tube);
      if (!run.ok()) ++bad;
      for (double e : run.trajectory.errors) worst = std::max(worst, e);
    }
    return Outcome{bad == 0 && worst <= tube.p,
                   fmt("max error %.4f over [0, 10] (p = 0.5), %g failed runs", worst, bad)};
  });

  criterion(6, "control bound", 0, [&] {
    const HaltonSequence h(9, 6);
    std::size_t bad = 0;
    double worst_ratio = 0.0;
    const double pd = sc.tube.p + sc.tube.delta;
    for (int i = 0; i < 100; ++i) {
      const auto u = h.point(i);
      const Vec x0 = auv_point(u);
      const Vec ys = x0.head(3) + pd * (1.0 - u[6]) * unit_from(u[7], u[8]);
      const FactorizedF F(sys, sets, x0);
      const double mu = F.inverse_norm();
      const SampledControl ctl(amplitude(F, x0.head(3), ys, sc.params.alpha), sc.params, 3);
      const double bound = control_magnitude_bound(x0.head(3), ys, sc.params, mu, pd);
      double mx = 0.0;
      for (int j = 0; j <= 20000; ++j) mx = std::max(mx, ctl(sc.params.epsilon * j / 20000).cwiseAbs().sum());
      worst_ratio = std::max(worst_ratio, mx / bound);
      if (mx > bound * (1 + 1e-9)) ++bad;
    }
    return Outcome{bad == 0, fmt("%g/100 violations, max ratio %.4f", bad, worst_ratio)};
  });

  criterion(7, "sigma1 bound and scaling", 0, [&] {
    const HaltonSequence h(9, 7);
    std::size_t bad = 0, bad_ratio = 0;
    double worst = 0.0, rmin = 1e9, rmax = 0.0;
    const double pd = sc.tube.p + sc.tube.delta;
    for (int i = 0; i < 100; ++i) {
      const auto u = h.point(i);
      const Vec x0 = auv_point(u);
      const double e0 = pd * (1.0 - u[6]);
      const Vec ys = x0.head(3) + e0 * unit_from(u[7], u[8]);
      // constants at x0: M_g2 from finite differences, mu from the singular values of F
      ProofConstants k;
      for (int k1 = 1; k1 <= 3; ++k1) {
        const Mat J = oracle::fd_jacobian([&](const Vec& p) { return sys.field(k1, 0, p); }, x0);
        for (int k2 = 1; k2 <= 3; ++k2) {
          k.M_g2.value = std::max(k.M_g2.value, Vec(J * sys.field(k2, 0, x0)).head(3).norm() * (1 + 1e-6));
        }
      }
      k.mu.value = 1.0 / oracle::singular_values(assemble_F(sys, sets, x0)).front();
      for (double eps : {0.1, 0.05, 0.01}) {
        const auto params = ControllerParams::make(sc.params.alpha, eps, sets, {1, 2});
        const double c_sigma = intermediates_at(k, sc.tube, params, eps).c_sigma;
        const double s = sigma1(sys, sets, params.kappa, x0, ys, eps, params.alpha).norm();
        const double b = c_sigma * std::pow(eps, 1.5) * std::pow(e0, 1.5);
        worst = std::max(worst, s / b);
        if (s > b) ++bad;
      }
      const double r = sigma1(sys, sets, {1, 2}, x0, ys, 0.01, sc.params.alpha).norm() /
                       sigma1(sys, sets, {1, 2}, x0, ys, 0.0025, sc.params.alpha).norm();
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
      if (std::abs(r / 8.0 - 1.0) > 0.2) ++bad_ratio;
    }
    return Outcome{bad == 0 && bad_ratio == 0,
                   fmt("%g/300 bound violations (max |sigma1|/bound %.3f)", bad, worst) +
                       fmt("; ratio sigma1(0.01)/sigma1(0.0025) in [%.3f, %.3f], expected 8 +- 20%%", rmin, rmax)};
  });

  criterion(8, "epsilon bound formulas", 0, [&] {
    oracle::Gen gen(8);
    double worst = 0.0;
    bool eps1_exact = true;
    for (int i = 0; i < 50; ++i) {
      const double cy1 = gen.uniform(0, 50), cy2 = gen.uniform(0, 5), L = gen.uniform(0, 1);
      const double p = gen.uniform(0.1, 2), d = gen.uniform(0.01, 1), dp = d + gen.uniform(0.01, 1);
      const double nu = gen.uniform(1.1, 4);
      auto root = [](const std::function<double(double)>& f) {
        double hi = 1e-12;
        while (f(hi) < 0) hi *= 2;
        return oracle::bisect(f, 0.0, hi);
      };
      const double r0 = root([&](double e) { return cy1 * std::sqrt(e * (p + d)) + e * (cy2 + L) - (dp - d); });
      const double r2 = root([&](double e) { return cy1 * std::sqrt(e * p / nu) + e * (cy2 + L) - p * (nu - 1) / nu; });
      worst = std::max(worst, std::abs(eps0_closed_form(cy1, cy2, L, p, d, dp) - r0) / r0);
      worst = std::max(worst, std::abs(eps2_closed_form(cy1, cy2, L, p, nu) - r2) / r2);

      ProofConstants k;
      k.mu.value = 1.0;
      k.L_star = L * 0.1;
      const double alpha = gen.uniform(5, 30);
      const auto b = epsilon_bounds(k, TubeSpec::make(p, d, dp), ControllerParams::make(alpha, 0.01, sets), 2.0);
      eps1_exact = eps1_exact && b.eps1 == 1.0 / alpha;
    }
    return Outcome{worst <= 1e-10 && eps1_exact,
                   fmt("max relative deviation from bisection %.3g (tol 1e-10)", worst) +
                       (eps1_exact ? "; eps1 = 1/alpha exactly" : "; eps1 != 1/alpha")};
  });

  criterion(9, "integrator order", 0, [&] {
    const OdeRhs f = [](double, const Vec& x) { return Vec(-2.0 * x); };
    auto err = [&](int n) { return std::abs(rk4_integrate(f, 0.0, Vec::Ones(1), 1.0, n)[0] - std::exp(-2.0)); };
    const double order = std::log2(err(20) / err(40));
    auto cfg = sc.sim;
    cfg.substeps_per_interval = 400;
    const auto rc = step_convergence_check(sys, sc.curve, sc.params, cfg);
    const bool pass = order >= 3.7 && order <= 4.3 && rc.richardson_error <= 1e-6;
    return Outcome{pass, fmt("order %.3f (range [3.7, 4.3]); Richardson estimate %.3g at 400 vs 800 substeps (tol 1e-6)",
                             order, rc.richardson_error)};
  });

  criterion(10, "certification output", 0, [&] {
    const auto cfg = load_config(fs::path(PSTAB_SOURCE_DIR) / "configs" / "auv_helix.json");
    const fs::path base = fs::temp_directory_path() / "pstab_acceptance";
    std::vector<std::string> reports, csvs;
    nlohmann::ordered_json report;
    for (const char* run : {"a", "b"}) {
      RunOptions o;
      o.out_dir = base / run;
      o.quiet = true;
      fs::remove_all(o.out_dir);
      std::ostringstream log;
      report = run_experiment(cfg, o, log).report;
      reports.push_back(slurp(o.out_dir / "report.json"));
      csvs.push_back(slurp(o.out_dir / "trajectory.csv"));
    }
    const bool identical = reports[0] == reports[1] && csvs[0] == csvs[1];
    const auto schema = nlohmann::json::parse(slurp(fs::path(PSTAB_SOURCE_DIR) / "schemas" / "report.schema.json"));
    std::vector<std::string> errors;
    oracle::validate_schema(schema, nlohmann::json::parse(reports[0]), "$", errors);
    const auto& fit = report["simulation"]["rate_fit"];
    const bool fit_ok = fit["valid"].get<bool>() && fit["rate"].get<double>() > 0 &&
                        fit["r_squared"].get<double>() >= 0.9;
    const bool pass = fit_ok && errors.empty() && identical;
    return Outcome{pass, fmt("rate %.4f, R^2 %.4f over %g samples", fit["rate"].get<double>(),
                             fit["r_squared"].get<double>(), fit["points"].get<double>()) +
                             (errors.empty() ? "; schema valid" : "; schema: " + errors.front()) +
                             (identical ? "; repeated run byte-identical" : "; repeated run differs")};
  });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
