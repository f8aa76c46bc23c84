#include "pstab/system_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pstab/errors.hpp"

namespace pstab {

namespace {

constexpr double kJacobianStep = 1e-5;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

void require_dim(const Vec& v, Eigen::Index n, const char* what) {
  if (v.size() != n) {
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(n) +
                         ", got " + std::to_string(v.size()));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// StateSplit

StateSplit StateSplit::make(int n1, int n2) {
  require(n1 >= 1, "StateSplit: n1 must be >= 1");
  require(n2 >= 0, "StateSplit: n2 must be >= 0");
  return StateSplit{n1, n2};
}

void StateSplit::check(const Vec& x, const char* what) const { require_dim(x, n(), what); }

// ---------------------------------------------------------------------------
// DomainY

DomainY DomainY::unbounded(int n1) {
  DomainY d;
  d.shape_ = Shape::Unbounded;
  d.dim_ = n1;
  return d;
}

DomainY DomainY::box(Vec lower, Vec upper) {
  require(lower.size() == upper.size() && lower.size() > 0, "DomainY::box: bad bounds");
  require((lower.array() < upper.array()).all(), "DomainY::box: lower must be < upper");
  DomainY d;
  d.shape_ = Shape::Box;
  d.dim_ = static_cast<int>(lower.size());
  d.a_ = std::move(lower);
  d.b_ = std::move(upper);
  return d;
}

DomainY DomainY::ball(Vec center, double radius) {
  require(center.size() > 0 && radius > 0.0, "DomainY::ball: bad ball");
  DomainY d;
  d.shape_ = Shape::Ball;
  d.dim_ = static_cast<int>(center.size());
  d.a_ = std::move(center);
  d.radius_ = radius;
  return d;
}

bool DomainY::contains(const Vec& y) const {
  require_dim(y, dim_, "DomainY::contains");
  switch (shape_) {
    case Shape::Unbounded:
      return true;
    case Shape::Box:
      return (y.array() >= a_.array()).all() && (y.array() <= b_.array()).all();
    case Shape::Ball:
      return (y - a_).norm() <= radius_;
  }
  return false;
}

bool DomainY::contains_ball(const Vec& c, double r) const {
  require_dim(c, dim_, "DomainY::contains_ball");
  switch (shape_) {
    case Shape::Unbounded:
      return true;
    case Shape::Box:
      return ((c.array() - r) >= a_.array()).all() && ((c.array() + r) <= b_.array()).all();
    case Shape::Ball:
      return (c - a_).norm() + r <= radius_;
  }
  return false;
}

// ---------------------------------------------------------------------------
// ControlAffineSystem

ControlAffineSystem::ControlAffineSystem(Definition def) : def_(std::move(def)) {
  const int n = def_.split.n();
  require(def_.split.n1 >= 1 && def_.split.n2 >= 0, "ControlAffineSystem: bad split");
  require(def_.m >= 1 && def_.m < n, "ControlAffineSystem: need 1 <= m < n");
  require(static_cast<bool>(def_.drift), "ControlAffineSystem: drift is required");
  require(static_cast<int>(def_.fields.size()) == def_.m,
          "ControlAffineSystem: expected m control fields");
  for (const auto& f : def_.fields) require(static_cast<bool>(f), "ControlAffineSystem: empty field");
  require(def_.field_jacobians.empty() || static_cast<int>(def_.field_jacobians.size()) == def_.m,
          "ControlAffineSystem: field_jacobians must be empty or have m entries");
  require(def_.field_hessians.empty() || static_cast<int>(def_.field_hessians.size()) == def_.m,
          "ControlAffineSystem: field_hessians must be empty or have m entries");
  if (!def_.domain_y) def_.domain_y = DomainY::unbounded(def_.split.n1);
  require(def_.domain_y->dim() == def_.split.n1, "ControlAffineSystem: D_y has wrong dimension");
}

void ControlAffineSystem::check_index(int k) const {
  if (k < 0 || k > def_.m) {
    throw std::out_of_range("field index " + std::to_string(k) + " outside 0.." +
                            std::to_string(def_.m));
  }
}

Vec ControlAffineSystem::field(int k, double t, const Vec& x) const {
  check_index(k);
  def_.split.check(x);
  Vec v = k == 0 ? def_.drift(t, x) : def_.fields[k - 1](x);
  require_dim(v, n(), "vector field value");
  return v;
}

bool ControlAffineSystem::has_analytic_jacobian(int k) const {
  check_index(k);
  if (k == 0) return static_cast<bool>(def_.drift_jacobian);
  return !def_.field_jacobians.empty() && static_cast<bool>(def_.field_jacobians[k - 1]);
}

Mat ControlAffineSystem::jacobian(int k, double t, const Vec& x) const {
  check_index(k);
  def_.split.check(x);
  if (!has_analytic_jacobian(k)) return finite_difference_jacobian(k, t, x);
  Mat J = k == 0 ? def_.drift_jacobian(t, x) : def_.field_jacobians[k - 1](x);
  if (J.rows() != n() || J.cols() != n()) throw DimensionError("Jacobian must be n x n");
  return J;
}

Mat ControlAffineSystem::finite_difference_jacobian(int k, double t, const Vec& x) const {
  const double h = kJacobianStep * std::max(1.0, x.norm());
  Mat J(n(), n());
  Vec xp = x;
  Vec xm = x;
  for (int i = 0; i < n(); ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    if (!in_domain(xp) || !in_domain(xm)) {
      throw DomainError("finite-difference step leaves the domain", x);
    }
    J.col(i) = (field(k, t, xp) - field(k, t, xm)) / (2.0 * h);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return J;
}

Vec ControlAffineSystem::drift_time_derivative(double t, const Vec& x) const {
  def_.split.check(x);
  if (def_.drift_time_derivative) {
    Vec v = def_.drift_time_derivative(t, x);
    require_dim(v, n(), "drift time derivative");
    return v;
  }
  const double h = kJacobianStep * std::max(1.0, std::abs(t));
  return (def_.drift(t + h, x) - def_.drift(t - h, x)) / (2.0 * h);
}

std::optional<std::vector<Mat>> ControlAffineSystem::hessians(int k, const Vec& x) const {
  check_index(k);
  if (k == 0 || def_.field_hessians.empty() || !def_.field_hessians[k - 1]) return std::nullopt;
  auto H = def_.field_hessians[k - 1](x);
  if (static_cast<int>(H.size()) != n()) throw DimensionError("expected n component Hessians");
  return H;
}

Vec ControlAffineSystem::rhs(double t, const Vec& x, const Vec& u) const {
  require_dim(u, def_.m, "control");
  Vec dx = field(0, t, x);
  for (int k = 1; k <= def_.m; ++k) {
    if (u[k - 1] != 0.0) dx.noalias() += u[k - 1] * def_.fields[k - 1](x);
  }
  return dx;
}

bool ControlAffineSystem::in_domain(const Vec& x) const {
  if (x.size() != n()) return false;
  if (!def_.domain_y->contains(x.head(def_.split.n1))) return false;
  return !def_.state_domain || def_.state_domain(x);
}

// ---------------------------------------------------------------------------
// ReferenceCurve

ReferenceCurve::ReferenceCurve(Kind kind, int dim, double lipschitz,
                               std::function<Vec(double)> eval)
    : kind_(kind), dim_(dim), lipschitz_(lipschitz), eval_(std::move(eval)) {}

ReferenceCurve ReferenceCurve::constant(Vec point) {
  require(point.size() > 0, "ReferenceCurve::constant: empty point");
  const int dim = static_cast<int>(point.size());
  return ReferenceCurve(Kind::Constant, dim, 0.0, [p = std::move(point)](double) { return p; });
}

ReferenceCurve ReferenceCurve::line(Vec origin, Vec velocity) {
  require(origin.size() > 0 && origin.size() == velocity.size(),
          "ReferenceCurve::line: origin/velocity size mismatch");
  const int dim = static_cast<int>(origin.size());
  const double L = velocity.norm();
  return ReferenceCurve(Kind::Line, dim, L, [o = std::move(origin), v = std::move(velocity)](double t) {
    return Vec(o + t * v);
  });
}

ReferenceCurve ReferenceCurve::circle(Vec center, double radius, double omega) {
  require(center.size() >= 2, "ReferenceCurve::circle: needs n1 >= 2");
  require(radius >= 0.0, "ReferenceCurve::circle: negative radius");
  const int dim = static_cast<int>(center.size());
  return ReferenceCurve(Kind::Circle, dim, radius * std::abs(omega),
                        [c = std::move(center), radius, omega](double t) {
                          Vec y = c;
                          y[0] += radius * std::cos(omega * t);
                          y[1] += radius * std::sin(omega * t);
                          return y;
                        });
}

ReferenceCurve ReferenceCurve::helix(Vec center, double radius, double omega, double rise) {
  require(center.size() == 3, "ReferenceCurve::helix: needs n1 = 3");
  require(radius >= 0.0, "ReferenceCurve::helix: negative radius");
  const double L = std::hypot(radius * omega, rise);
  return ReferenceCurve(Kind::Helix, 3, L, [c = std::move(center), radius, omega, rise](double t) {
    Vec y = c;
    y[0] += radius * std::cos(omega * t);
    y[1] += rise * t;
    y[2] += radius * std::sin(omega * t);
    return y;
  });
}

ReferenceCurve ReferenceCurve::tabulated(std::vector<double> times, std::vector<Vec> points) {
  require(!times.empty() && times.size() == points.size(),
          "ReferenceCurve::tabulated: need matching non-empty times/points");
  const auto dim = points.front().size();
  require(dim > 0, "ReferenceCurve::tabulated: empty points");
  double L = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    require(points[i].size() == dim, "ReferenceCurve::tabulated: inconsistent point sizes");
    require(std::isfinite(times[i]) && points[i].allFinite(),
            "ReferenceCurve::tabulated: non-finite entry");
    if (i > 0) {
      require(times[i] > times[i - 1], "ReferenceCurve::tabulated: times must increase strictly");
      L = std::max(L, (points[i] - points[i - 1]).norm() / (times[i] - times[i - 1]));
    }
  }
  auto eval = [ts = std::move(times), ps = std::move(points)](double t) -> Vec {
    if (t <= ts.front()) return ps.front();
    if (t >= ts.back()) return ps.back();
    const auto hi = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - ts[lo]) / (ts[hi] - ts[lo]);
    return (1.0 - w) * ps[lo] + w * ps[hi];
  };
  return ReferenceCurve(Kind::Tabulated, static_cast<int>(dim), L, std::move(eval));
}

// ---------------------------------------------------------------------------
// Tubes

TubeSpec TubeSpec::make(double p, double delta, double delta_prime) {
  TubeSpec tube{p, delta, delta_prime};
  tube.validate();
  return tube;
}

void TubeSpec::validate() const {
  require(p > 0.0, "TubeSpec: p must be positive");
  require(delta > 0.0, "TubeSpec: delta must be positive");
  require(delta < delta_prime, "TubeSpec: need delta < delta_prime");
}

double tracking_error(const StateSplit& split, const Vec& x, double t, const ReferenceCurve& curve) {
  split.check(x);
  if (curve.dim() != split.n1) throw DimensionError("reference curve dimension differs from n1");
  return (x.head(split.n1) - curve(t)).norm();
}

double tube_distance(const StateSplit& split, const Vec& x, double t, const ReferenceCurve& curve,
                     const TubeSpec& tube) {
  return std::max(0.0, tracking_error(split, x, t, curve) - tube.p);
}

bool in_neighborhood(const StateSplit& split, const Vec& x, double t, const ReferenceCurve& curve,
                     const TubeSpec& tube) {
  return tracking_error(split, x, t, curve) <= tube.p + tube.delta;
}

std::optional<double> first_tube_domain_violation(const DomainY& domain,
                                                  const ReferenceCurve& curve,
                                                  const TubeSpec& tube,
                                                  const std::vector<double>& times) {
  const double r = tube.p + tube.delta_prime;
  for (double t : times) {
    if (!domain.contains_ball(curve(t), r)) return t;
  }
  return std::nullopt;
}

}  // namespace pstab
