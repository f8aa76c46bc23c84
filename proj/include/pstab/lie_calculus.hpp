#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/LU>

#include "pstab/linalg.hpp"
#include "pstab/system_model.hpp"

namespace pstab {

/// Control indices (1-based, as in f_1..f_m) whose fields and pairwise
/// brackets make up the columns of F(x). Order fixes the column order of F
/// and the component order of the amplitude vector.
struct IndexSets {
  std::vector<int> s1;
  std::vector<std::pair<int, int>> s2;

  std::size_t size() const { return s1.size() + s2.size(); }
  /// Throws std::invalid_argument on duplicates, out-of-range indices, or
  /// |S1| + |S2| != n1.
  void validate(int m, int n1) const;
};

/// L_g f (t, x) = (d f / d x)(t, x) g(t, x) for fields f = f_f, g = f_g
/// (index 0 is the drift).
Vec directional_derivative(const ControlAffineSystem& sys, int f, int g, double t, const Vec& x);

/// [f_k1, f_k2](x) = L_{f_k1} f_k2 - L_{f_k2} f_k1.
Vec lie_bracket(const ControlAffineSystem& sys, int k1, int k2, const Vec& x, double t = 0.0);

/// First n1 components of the bracket, I_{n1 x n}[f_k1, f_k2](x).
Vec projected_bracket(const ControlAffineSystem& sys, int k1, int k2, const Vec& x,
                      double t = 0.0);

/// L_{f_a} L_{f_b} g_c (t, x) in R^n1. Uses analytic Hessians when the
/// system supplies them, otherwise a central difference of L_{f_b} g_c along
/// f_a with relative step 1e-4.
Vec second_directional_derivative(const ControlAffineSystem& sys, int a, int b, int c, double t,
                                  const Vec& x);

/// Brackets for the S2 pairs of an index set.
class BracketTable {
 public:
  BracketTable(const ControlAffineSystem& sys, IndexSets sets);

  std::size_t size() const { return sets_.s2.size(); }
  const std::pair<int, int>& pair(std::size_t i) const { return sets_.s2.at(i); }
  Vec bracket(std::size_t i, const Vec& x) const;
  Vec projected(std::size_t i, const Vec& x) const;

 private:
  const ControlAffineSystem* sys_;
  IndexSets sets_;
};

/// F(x) = ((g_i)_{i in S1}, (I_{n1 x n}[f_i1, f_i2])_{(i1,i2) in S2}).
Mat assemble_F(const ControlAffineSystem& sys, const IndexSets& sets, const Vec& x);

/// LU factorization of F at one point, reused for every solve while the
/// state is frozen.
class FactorizedF {
 public:
  static constexpr double kMaxCondition = 1e12;

  /// Throws SingularFError when a pivot vanishes or the condition estimate
  /// exceeds kMaxCondition.
  FactorizedF(Mat F, const Vec& x);
  FactorizedF(const ControlAffineSystem& sys, const IndexSets& sets, const Vec& x);

  /// v with F v = rhs; one step of iterative refinement keeps the residual
  /// below 1e-10 (1 + |rhs|).
  Vec solve(const Vec& rhs) const;
  const Mat& matrix() const { return F_; }
  double condition_estimate() const { return condition_; }
  /// Spectral norm of F^{-1}, i.e. 1 / sigma_min(F).
  double inverse_norm() const;

 private:
  Mat F_;
  Eigen::PartialPivLU<Mat> lu_;
  double condition_ = 0.0;
};

Vec solve_F(const ControlAffineSystem& sys, const IndexSets& sets, const Vec& x, const Vec& rhs);

struct RankReport {
  std::size_t sample_count = 0;
  double min_singular_value = 0.0;
  Vec worst_point;
  double relative_tol = 0.0;
  /// relative_tol * |F| at the worst point.
  double threshold_at_worst = 0.0;
  /// Number of samples where sigma_min <= relative_tol * |F|.
  std::size_t failures = 0;
  bool passed = false;
};

/// Checks sigma_min(F(x)) > relative_tol * |F(x)|_2 at every sample.
/// Throws std::invalid_argument for an empty sample list.
RankReport verify_rank_condition(const ControlAffineSystem& sys, const IndexSets& sets,
                                 const std::vector<Vec>& samples, double relative_tol = 1e-6);

}  // namespace pstab
