#pragma once

#include <vector>

#include "pstab/lie_calculus.hpp"
#include "pstab/linalg.hpp"
#include "pstab/system_model.hpp"

namespace pstab {

/// Gains of the oscillating feedback. `kappa[i]` is the integer frequency of
/// the i-th S2 pair.
struct ControllerParams {
  double alpha = 1.0;
  double epsilon = 0.1;
  IndexSets sets;
  std::vector<int> kappa;

  /// Validates and fills `kappa` with 1, 2, 3, ... when it is empty.
  static ControllerParams make(double alpha, double epsilon, IndexSets sets,
                               std::vector<int> kappa = {});
  void validate() const;
  int max_kappa() const;
};

std::vector<int> default_kappa(const IndexSets& sets);

/// a(x, y*) = -alpha F(x)^{-1} (y - y*), ordered as ((a_i)_{S1}, (a_pair)_{S2}).
Vec amplitude(const FactorizedF& F, const Vec& y, const Vec& y_star, double alpha);
Vec amplitude(const ControlAffineSystem& sys, const Vec& x, const Vec& y_star,
              const ControllerParams& params);

/// Control law with its state arguments frozen: only the explicit time
/// dependence of the trigonometric terms remains.
class SampledControl {
 public:
  SampledControl(Vec amplitudes, const ControllerParams& params, int m);

  /// u(t) written into `u` (length m).
  void eval(double t, Vec& u) const;
  Vec operator()(double t) const;
  const Vec& amplitudes() const { return a_; }

 private:
  struct Oscillator {
    int cos_channel;  // 0-based
    int sin_channel;  // 0-based
    double amplitude;
    double sign;
    double omega;
  };

  Vec a_;
  int m_;
  std::vector<std::pair<int, double>> direct_;  // (0-based channel, value)
  std::vector<Oscillator> oscillators_;
};

/// u^eps(t, x_frozen, y*_frozen). Throws SingularFError when F(x_frozen) is
/// singular.
Vec control(const ControlAffineSystem& sys, double t, const Vec& x_frozen,
            const Vec& y_star_frozen, const ControllerParams& params);

/// Coefficients of the bound  max_{[0,eps]} sum_k |u_k| <= c_u sqrt(|y0 - y0*| / eps):
///   c1 = sqrt(|S1|) alpha mu
///   c2 = 2 sqrt(2 alpha pi mu) (sum kappa^{2/3})^{3/4}
///   c_u = c1 sqrt(eps (p + delta)) + c2
struct ControlBoundCoefficients {
  double c1 = 0.0;
  double c2 = 0.0;
  double cu = 0.0;
};

ControlBoundCoefficients control_bound_coefficients(const ControllerParams& params, double mu,
                                                    double p_plus_delta, double epsilon);
inline ControlBoundCoefficients control_bound_coefficients(const ControllerParams& params,
                                                           double mu, double p_plus_delta) {
  return control_bound_coefficients(params, mu, p_plus_delta, params.epsilon);
}

/// c_u sqrt(|y0 - y0*| / eps). Valid when mu >= sup |F^{-1}| and
/// |y0 - y0*| <= p + delta.
double control_magnitude_bound(const Vec& y0, const Vec& y_star0, const ControllerParams& params,
                               double mu, double p_plus_delta);

}  // namespace pstab
