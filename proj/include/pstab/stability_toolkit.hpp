#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pstab/integrator.hpp"
#include "pstab/lie_calculus.hpp"
#include "pstab/linalg.hpp"
#include "pstab/oscillating_controller.hpp"
#include "pstab/system_model.hpp"

namespace pstab {

// ---------------------------------------------------------------------------
// Constant estimation

/// A sampled supremum together with the point where it was attained.
struct Estimate {
  double value = 0.0;
  double t = 0.0;
  Vec x;

  void update(double v, double at_t, const Vec& at_x) {
    if (v > value || x.size() == 0) {
      value = v;
      t = at_t;
      x = at_x;
    }
  }
};

/// Bounds on the working region D' = {|y - y*(t)| <= p + delta'} x z_box.
/// Notation follows the stability proof: M_* are sup-norms, L_* Lipschitz
/// constants, g/h the y/z blocks of the control fields, g0/h0 of the drift.
struct ProofConstants {
  Estimate M_g, M_h, M_g0, M_h0;
  Estimate L_g, L_h, L_g0, L_h0;
  Estimate L_g20;  // sup |d g0 / dt|
  Estimate M_g2;   // sup |L_{f_k2} g_k1|
  Estimate M_g20;  // sup of |L_{f0} g0|, |L_{f_k} g0|, |L_{f0} g_k|
  Estimate M_g3;   // sup |L_{f_k3} L_{f_k2} g_k1|
  Estimate M_g30;  // sup |L_{f0} L_{f_k2} g_k1|
  Estimate mu;     // sup |F^{-1}|
  double L_star = 0.0;
  std::size_t sample_count = 0;

  /// (name, estimate) pairs in a fixed order, for reporting.
  std::vector<std::pair<std::string, const Estimate*>> named() const;
};

struct ConstantsOptions {
  std::size_t sample_count = 2000;
  double t_probe = 20.0;
  std::uint64_t seed = 1;
};

/// Sampling-based estimate of every constant. Sup-norms are maxima over the
/// samples; Lipschitz constants are maxima of difference quotients over
/// pairs formed from each sample and a nearby partner (along a quasi-random
/// direction and along the direction of largest stretch). Evaluation errors
/// propagate with the offending point.
ProofConstants estimate_constants(const ControlAffineSystem& sys, const ReferenceCurve& curve,
                                  const TubeSpec& tube, const IndexSets& sets,
                                  const std::vector<std::pair<double, double>>& z_box,
                                  const ConstantsOptions& options = {});

// ---------------------------------------------------------------------------
// Admissible epsilon

/// The epsilon-dependent coefficients of the one-interval estimates.
struct Intermediates {
  double epsilon = 0.0;
  double c1 = 0.0, c2 = 0.0, cu = 0.0;
  double cg = 0.0, ch = 0.0;
  double cy1 = 0.0, cy2 = 0.0, cz1 = 0.0, cz2 = 0.0;
  double c_sigma = 0.0, c_r0 = 0.0, c_r1 = 0.0, q = 0.0;
};

/// Coefficients at a given epsilon.
Intermediates intermediates_at(const ProofConstants& k, const TubeSpec& tube,
                               const ControllerParams& params, double epsilon);

/// Positive root of  cy1 sqrt(eps (p + delta)) + eps (cy2 + L*) = delta' - delta.
double eps0_closed_form(double cy1, double cy2, double L_star, double p, double delta,
                        double delta_prime);
/// Positive root of  cy1 sqrt(eps p / nu) + eps (cy2 + L*) = p (nu - 1) / nu.
double eps2_closed_form(double cy1, double cy2, double L_star, double p, double nu);
/// ((alpha - lambda) p - nu (L* + M_g0))^2 / (p q + nu c_r0)^2.
double eps3_closed_form(double alpha, double lambda, double p, double nu, double L_star,
                        double M_g0, double q, double c_r0);

struct EpsilonBounds {
  double eps0 = 0.0, eps1 = 0.0, eps2 = 0.0, eps3 = 0.0;
  /// min(eps0, eps1, eps3).
  double eps_bar = 0.0;
  /// min(eps_bar, eps2): additionally guarantees tube invariance.
  double eps_bar_with_eps2 = 0.0;
  double nu = 2.0;
  double lambda = 0.0;
  double minimal_alpha = 0.0;  // nu (L* + M_g0) / p
  /// Coefficients at the epsilon the bounds were evaluated with.
  Intermediates at;
  /// gamma1(e0) = gamma1_sqrt * sqrt(e0) + gamma1_linear * e0.
  double gamma1_sqrt = 0.0;
  double gamma1_linear = 0.0;
  double gamma2 = 0.0;
  /// "sweep" or "bisection".
  std::string method;
  int iterations = 0;
  bool converged = false;
  double operating_epsilon = 0.0;
  bool operating_epsilon_certified = false;
};

/// Closed-form bounds with the epsilon-dependent coefficients resolved by a
/// fixed-point sweep from eps = 1/alpha (falling back to bisection on the
/// fixed-point equation if the sweep does not settle in 50 iterations). The
/// reported coefficients are those of the larger final iterate.
///
/// Throws GainInfeasibleError when alpha <= nu (L* + M_g0) / p, and
/// std::invalid_argument for nu <= 1 or lambda outside (0, alpha - nu (L* + M_g0) / p).
/// lambda defaults to the midpoint of that interval.
EpsilonBounds epsilon_bounds(const ProofConstants& constants, const TubeSpec& tube,
                             const ControllerParams& params, double nu = 2.0,
                             std::optional<double> lambda = std::nullopt);

// ---------------------------------------------------------------------------
// Averaging term

/// Closed form of the leading remainder sigma1 in the expansion of y(eps)
/// around y0 - eps alpha (y0 - y0*):
///   eps^2/2 sum_{k1,k2 in S1} L_{f_k2} g_k1 a_k1 a_k2
///   - eps^{3/2}/sqrt(pi) sum_{k1 in S1} a_k1 sum_{k2} I[f_k1, f_k2]
///       sum_{j:(j,k2) in S2} sqrt(|a_{j k2}| / kappa_{j k2}) sign(a_{j k2}).
/// Evaluated at x0 with amplitudes a(x0, y0*). The iterated integrals are
/// taken with the outer control at s1 and the inner one at s2.
Vec sigma1(const ControlAffineSystem& sys, const IndexSets& sets, const std::vector<int>& kappa,
           const Vec& x0, const Vec& y_star0, double epsilon, double alpha);

// ---------------------------------------------------------------------------
// Empirical checks

struct ContractionReport {
  std::size_t count = 0;
  std::size_t non_expanding = 0;  // |e(eps)| <= |e0|
  double pass_fraction = 0.0;
  std::vector<double> factors;    // |e(eps)| / |e0|
  double min_factor = 0.0, max_factor = 0.0, mean_factor = 0.0;
  /// Cases meeting the certified rate |e(eps)| <= (1 - eps lambda) |e0|, when
  /// a lambda was supplied.
  std::optional<std::size_t> meets_certified_rate;
  bool epsilon_above_certified_bound = false;
};

struct ContractionOptions {
  double t0 = 0.0;
  int substeps = 0;  // 0: SimulationConfig::default_substeps
  std::optional<double> eps_bar;
  std::optional<double> lambda;
};

/// Simulates one sampling interval from each initial condition. Every initial
/// condition must satisfy p/nu < |y0 - y*(t0)| <= p + delta
/// (std::invalid_argument otherwise).
ContractionReport contraction_check(const ControlAffineSystem& sys, const ReferenceCurve& curve,
                                    const ControllerParams& params, const TubeSpec& tube,
                                    double nu, const std::vector<Vec>& initial_conditions,
                                    const ContractionOptions& options = {});

struct RateFit {
  double rate = 0.0;         // lambda_hat: |e| ~ C exp(-rate t)
  double intercept = 0.0;    // ln C
  double r_squared = 0.0;
  std::size_t points = 0;
  double floor = 0.0;
  bool valid = false;        // at least 3 points above the floor
};

/// Least-squares fit of ln |e(t_j)| over the leading run of sampling instants
/// whose error exceeds `floor`.
RateFit fit_decay_rate(const std::vector<double>& times, const std::vector<double>& errors,
                       double floor);

/// Twice the median sampled error over the final quarter of the horizon.
double empirical_residual_floor(const std::vector<double>& times,
                                const std::vector<double>& errors);

struct ResidualFloor {
  double value = 0.0;
  std::string source;  // "bound" or "empirical"
};

/// The bound-based floor 2 eps gamma2 when it is finite and below the initial
/// error; otherwise the empirical floor of the sampled errors.
ResidualFloor select_residual_floor(double bound_floor, const std::vector<double>& times,
                                    const std::vector<double>& errors);

struct DeltaResult {
  double Delta = 0.0;
  bool stable = false;
  /// Smallest t1 (relative to t0) after which every trajectory stays in
  /// B_Delta(Y_t^p) for the rest of the horizon.
  std::optional<double> attraction_time;
};

struct TrajectoryOutcome {
  Vec x0;
  SimulationStatus status = SimulationStatus::Completed;
  std::string diagnostic;
  RateFit fit;
};

struct CertificationReport {
  std::vector<DeltaResult> deltas;
  std::vector<TrajectoryOutcome> trajectories;
  std::size_t failures = 0;
  double floor = 0.0;
  std::string floor_source;  // "given" or "empirical"
  /// Worst case over trajectories with a valid fit.
  std::optional<double> min_rate;
  std::optional<double> min_r_squared;
};

struct CertificationOptions {
  double t0 = 0.0;
  int substeps = 0;  // 0: default
  int record_stride = 1;
  /// Residual floor for the rate fit; empirical per trajectory when absent.
  std::optional<double> floor;
};

/// Simulates every grid point over [t0, t0 + horizon] and evaluates stability
/// and attraction for each Delta plus an exponential rate fit. Grid points
/// must lie in B_delta(Y_t0^p) (std::invalid_argument otherwise); simulation
/// failures are reported, not thrown.
CertificationReport certify_set_stability(const ControlAffineSystem& sys,
                                          const ReferenceCurve& curve,
                                          const ControllerParams& params, const TubeSpec& tube,
                                          const std::vector<Vec>& grid,
                                          const std::vector<double>& deltas, double horizon,
                                          const CertificationOptions& options = {});

/// gamma1(e0) exp(-lambda t / 2) + eps gamma2 with
/// gamma1(e0) = e^{eps lambda/2} sqrt(e0) (cy1 sqrt(eps) + e^{eps lambda/2} sqrt(e0)) and
/// gamma2 = cy2 + L*.
double ultimate_bound(const Intermediates& at, double lambda, double L_star, double y0_err,
                      double t);

}  // namespace pstab
