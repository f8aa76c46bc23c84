#include "pstab/lie_calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>

#include <Eigen/SVD>

#include "pstab/errors.hpp"

namespace pstab {

namespace {

constexpr double kSecondDerivativeStep = 1e-4;

}  // namespace

void IndexSets::validate(int m, int n1) const {
  auto in_range = [m](int k) { return k >= 1 && k <= m; };
  std::set<int> seen1;
  for (int k : s1) {
    if (!in_range(k)) throw std::invalid_argument("S1 index " + std::to_string(k) + " out of range");
    if (!seen1.insert(k).second) throw std::invalid_argument("S1 has duplicate index " + std::to_string(k));
  }
  std::set<std::pair<int, int>> seen2;
  for (const auto& [a, b] : s2) {
    if (!in_range(a) || !in_range(b)) throw std::invalid_argument("S2 pair index out of range");
    if (a == b) throw std::invalid_argument("S2 pair with equal indices has a zero bracket");
    if (!seen2.insert({a, b}).second) throw std::invalid_argument("S2 has duplicate pair");
  }
  if (static_cast<int>(size()) != n1) {
    throw std::invalid_argument("|S1| + |S2| = " + std::to_string(size()) + " but n1 = " +
                                std::to_string(n1));
  }
}

Vec directional_derivative(const ControlAffineSystem& sys, int f, int g, double t, const Vec& x) {
  return sys.jacobian(f, t, x) * sys.field(g, t, x);
}

Vec lie_bracket(const ControlAffineSystem& sys, int k1, int k2, const Vec& x, double t) {
  if (k1 == k2) {
    sys.split().check(x);
    return Vec::Zero(sys.n());
  }
  return directional_derivative(sys, k2, k1, t, x) - directional_derivative(sys, k1, k2, t, x);
}

Vec projected_bracket(const ControlAffineSystem& sys, int k1, int k2, const Vec& x, double t) {
  return lie_bracket(sys, k1, k2, x, t).head(sys.n1());
}

Vec second_directional_derivative(const ControlAffineSystem& sys, int a, int b, int c, double t,
                                  const Vec& x) {
  const int n1 = sys.n1();
  const Vec fa = sys.field(a, t, x);
  if (auto H = sys.hessians(c, x)) {
    // d/dx (J_c f_b) f_a = D^2 f_c (f_b, f_a) + J_c J_b f_a
    const Vec fb = sys.field(b, t, x);
    Vec out = sys.jacobian(c, t, x).topRows(n1) * (sys.jacobian(b, t, x) * fa);
    for (int r = 0; r < n1; ++r) out[r] += fb.dot((*H)[r] * fa);
    return out;
  }
  const double speed = fa.norm();
  if (speed == 0.0) return Vec::Zero(n1);
  const double h = kSecondDerivativeStep * std::max(1.0, x.norm());
  const Vec dir = fa / speed;
  const Vec xp = x + h * dir;
  const Vec xm = x - h * dir;
  if (!sys.in_domain(xp) || !sys.in_domain(xm)) {
    throw DomainError("finite-difference step for a second derivative leaves the domain", x);
  }
  auto inner = [&](const Vec& p) -> Vec {
    return directional_derivative(sys, c, b, t, p).head(n1);
  };
  return speed * (inner(xp) - inner(xm)) / (2.0 * h);
}

BracketTable::BracketTable(const ControlAffineSystem& sys, IndexSets sets)
    : sys_(&sys), sets_(std::move(sets)) {}

Vec BracketTable::bracket(std::size_t i, const Vec& x) const {
  const auto& [a, b] = pair(i);
  return lie_bracket(*sys_, a, b, x);
}

Vec BracketTable::projected(std::size_t i, const Vec& x) const {
  return bracket(i, x).head(sys_->n1());
}

Mat assemble_F(const ControlAffineSystem& sys, const IndexSets& sets, const Vec& x) {
  const int n1 = sys.n1();
  if (static_cast<int>(sets.size()) != n1) {
    throw DimensionError("index sets must provide n1 columns");
  }
  Mat F(n1, n1);
  Eigen::Index col = 0;
  for (int i : sets.s1) F.col(col++) = sys.field(i, 0.0, x).head(n1);
  for (const auto& [a, b] : sets.s2) F.col(col++) = projected_bracket(sys, a, b, x);
  return F;
}

FactorizedF::FactorizedF(Mat F, const Vec& x) : F_(std::move(F)) {
  if (F_.rows() != F_.cols()) throw DimensionError("F must be square");
  lu_.compute(F_);
  const auto diag = lu_.matrixLU().diagonal();
  const bool zero_pivot = (diag.array() == 0.0).any() || !diag.allFinite();
  const double rcond = zero_pivot ? 0.0 : lu_.rcond();
  condition_ = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (zero_pivot || !(condition_ <= kMaxCondition)) throw SingularFError(x, condition_);
}

FactorizedF::FactorizedF(const ControlAffineSystem& sys, const IndexSets& sets, const Vec& x)
    : FactorizedF(assemble_F(sys, sets, x), x) {}

Vec FactorizedF::solve(const Vec& rhs) const {
  if (rhs.size() != F_.rows()) throw DimensionError("solve_F: rhs must have length n1");
  Vec v = lu_.solve(rhs);
  const Vec r = rhs - F_ * v;
  if (r.norm() > 1e-12 * (1.0 + rhs.norm())) v += lu_.solve(r);
  return v;
}

double FactorizedF::inverse_norm() const {
  Eigen::JacobiSVD<Mat> svd(F_);
  const double smin = svd.singularValues().minCoeff();
  return smin > 0.0 ? 1.0 / smin : std::numeric_limits<double>::infinity();
}

Vec solve_F(const ControlAffineSystem& sys, const IndexSets& sets, const Vec& x, const Vec& rhs) {
  return FactorizedF(sys, sets, x).solve(rhs);
}

RankReport verify_rank_condition(const ControlAffineSystem& sys, const IndexSets& sets,
                                 const std::vector<Vec>& samples, double relative_tol) {
  if (samples.empty()) throw std::invalid_argument("verify_rank_condition: no samples");
  RankReport report;
  report.sample_count = samples.size();
  report.relative_tol = relative_tol;
  report.min_singular_value = std::numeric_limits<double>::infinity();
  for (const Vec& x : samples) {
    Eigen::JacobiSVD<Mat> svd(assemble_F(sys, sets, x));
    const auto& s = svd.singularValues();
    const double smin = s.minCoeff();
    const double threshold = relative_tol * s.maxCoeff();
    if (!(smin > threshold)) ++report.failures;
    if (smin < report.min_singular_value || report.worst_point.size() == 0) {
      report.min_singular_value = smin;
      report.worst_point = x;
      report.threshold_at_worst = threshold;
    }
  }
  report.passed = report.failures == 0;
  return report;
}

}  // namespace pstab
