#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pstab/linalg.hpp"

namespace pstab {

/// Partition of the state x = (y, z): y holds the n1 task variables to be
/// stabilized, z the n2 free variables.
struct StateSplit {
  int n1 = 1;
  int n2 = 0;

  static StateSplit make(int n1, int n2);

  int n() const { return n1 + n2; }
  auto y(const Vec& x) const { return x.head(n1); }
  auto z(const Vec& x) const { return x.tail(n2); }
  /// Throws DimensionError unless x has length n.
  void check(const Vec& x, const char* what = "state") const;
};

/// Admissible region D_y for the task variables: all of R^n1, an axis-aligned
/// box, or a closed ball.
class DomainY {
 public:
  enum class Shape { Unbounded, Box, Ball };

  static DomainY unbounded(int n1);
  static DomainY box(Vec lower, Vec upper);
  static DomainY ball(Vec center, double radius);

  Shape shape() const { return shape_; }
  int dim() const { return dim_; }
  const Vec& lower() const { return a_; }
  const Vec& upper() const { return b_; }
  const Vec& center() const { return a_; }
  double radius() const { return radius_; }

  bool contains(const Vec& y) const;
  /// True iff the closed ball B_r(c) is a subset of the domain.
  bool contains_ball(const Vec& c, double r) const;

 private:
  Shape shape_ = Shape::Unbounded;
  int dim_ = 0;
  Vec a_;
  Vec b_;
  double radius_ = 0.0;
};

using DriftFn = std::function<Vec(double t, const Vec& x)>;
using FieldFn = std::function<Vec(const Vec& x)>;
using DriftJacobianFn = std::function<Mat(double t, const Vec& x)>;
using FieldJacobianFn = std::function<Mat(const Vec& x)>;
/// Second derivatives of a field: n matrices, entry r is the Hessian of the
/// r-th component.
using FieldHessianFn = std::function<std::vector<Mat>(const Vec& x)>;
using StatePredicate = std::function<bool(const Vec& x)>;

/// Control-affine system  x' = f0(t, x) + sum_k f_k(x) u_k  with the state
/// split into (y, z).
///
/// Field index 0 denotes the drift f0; indices 1..m are the control fields.
/// Missing derivative callbacks fall back to central finite differences with
/// step 1e-5 * max(1, |x|) (time derivative: 1e-5 * max(1, |t|)).
class ControlAffineSystem {
 public:
  struct Definition {
    std::string name;
    StateSplit split;
    int m = 1;
    DriftFn drift;
    std::vector<FieldFn> fields;
    /// Optional analytic derivatives.
    DriftJacobianFn drift_jacobian;
    DriftFn drift_time_derivative;
    std::vector<FieldJacobianFn> field_jacobians;
    std::vector<FieldHessianFn> field_hessians;
    /// D_y; defaults to R^n1.
    std::optional<DomainY> domain_y;
    /// Extra restriction on the full state (e.g. a singular Euler angle).
    StatePredicate state_domain;
  };

  explicit ControlAffineSystem(Definition def);

  const std::string& name() const { return def_.name; }
  const StateSplit& split() const { return def_.split; }
  int n() const { return def_.split.n(); }
  int n1() const { return def_.split.n1; }
  int n2() const { return def_.split.n2; }
  int m() const { return def_.m; }
  const DomainY& domain_y() const { return *def_.domain_y; }

  /// f_k(t, x); k = 0 is the drift.
  Vec field(int k, double t, const Vec& x) const;
  Vec drift(double t, const Vec& x) const { return field(0, t, x); }
  /// n x n state Jacobian of f_k.
  Mat jacobian(int k, double t, const Vec& x) const;
  /// Partial time derivative of the drift.
  Vec drift_time_derivative(double t, const Vec& x) const;
  /// Component Hessians of control field k, when supplied analytically.
  std::optional<std::vector<Mat>> hessians(int k, const Vec& x) const;
  bool has_analytic_jacobian(int k) const;

  /// f0(t, x) + sum_k u_k f_k(x).
  Vec rhs(double t, const Vec& x, const Vec& u) const;

  /// x lies in D = D_y x R^n2 and satisfies the optional state predicate.
  bool in_domain(const Vec& x) const;

 private:
  void check_index(int k) const;
  Mat finite_difference_jacobian(int k, double t, const Vec& x) const;

  Definition def_;
};

/// Reference curve y*(t) in R^n1 with a certified Lipschitz constant L*.
class ReferenceCurve {
 public:
  enum class Kind { Constant, Line, Circle, Helix, Tabulated };

  static ReferenceCurve constant(Vec point);
  /// origin + t * velocity.
  static ReferenceCurve line(Vec origin, Vec velocity);
  /// center + radius * (cos wt, sin wt, 0, ...); needs n1 >= 2.
  static ReferenceCurve circle(Vec center, double radius, double omega);
  /// center + (radius cos wt, rise * t, radius sin wt); needs n1 = 3.
  static ReferenceCurve helix(Vec center, double radius, double omega, double rise);
  /// Piecewise-linear interpolation of (times, points), held constant outside
  /// the table. L* is the largest segment slope.
  static ReferenceCurve tabulated(std::vector<double> times, std::vector<Vec> points);

  Vec operator()(double t) const { return eval_(t); }
  Vec eval(double t) const { return eval_(t); }
  double lipschitz() const { return lipschitz_; }
  int dim() const { return dim_; }
  Kind kind() const { return kind_; }

 private:
  ReferenceCurve(Kind kind, int dim, double lipschitz, std::function<Vec(double)> eval);

  Kind kind_;
  int dim_;
  double lipschitz_;
  std::function<Vec(double)> eval_;
};

/// Tube Y_t^p of radius p around y*(t) with the margins delta < delta' used
/// for initial conditions and for the working region.
struct TubeSpec {
  double p = 0.0;
  double delta = 0.0;
  double delta_prime = 0.0;

  static TubeSpec make(double p, double delta, double delta_prime);
  void validate() const;
};

/// ||y - y*(t)||.
double tracking_error(const StateSplit& split, const Vec& x, double t,
                      const ReferenceCurve& curve);

/// max(0, ||y - y*(t)|| - p): distance from x to the closed tube.
double tube_distance(const StateSplit& split, const Vec& x, double t,
                     const ReferenceCurve& curve, const TubeSpec& tube);

/// x in B_delta(Y_t^p), i.e. ||y - y*(t)|| <= p + delta.
bool in_neighborhood(const StateSplit& split, const Vec& x, double t,
                     const ReferenceCurve& curve, const TubeSpec& tube);

/// First grid time at which B_{p + delta'}(y*(t)) is not contained in D_y, if
/// any.
std::optional<double> first_tube_domain_violation(const DomainY& domain,
                                                  const ReferenceCurve& curve,
                                                  const TubeSpec& tube,
                                                  const std::vector<double>& times);

}  // namespace pstab
