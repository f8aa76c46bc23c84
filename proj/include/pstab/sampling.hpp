#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pstab/linalg.hpp"
#include "pstab/system_model.hpp"

namespace pstab {

/// Halton low-discrepancy sequence with a seeded Cranley-Patterson shift.
/// Point i is a pure function of (i, dim, seed), so the first N points of a
/// longer run are exactly the points of a shorter one.
class HaltonSequence {
 public:
  HaltonSequence(int dim, std::uint64_t seed);

  int dim() const { return static_cast<int>(shift_.size()); }
  /// Point i in [0, 1)^dim.
  std::vector<double> point(std::uint64_t i) const;

 private:
  std::vector<double> shift_;
};

struct RegionSample {
  double t = 0.0;
  Vec x;
  /// Unit direction in R^n used to pair this sample for difference quotients.
  Vec direction;
};

/// Quasi-random samples of (t, x) with t in [0, t_probe], y in the closed
/// ball of radius p + delta' around y*(t), and z in `z_box`.
std::vector<RegionSample> sample_tube_region(const ReferenceCurve& curve, const TubeSpec& tube,
                                             const std::vector<std::pair<double, double>>& z_box,
                                             double t_probe, std::size_t count,
                                             std::uint64_t seed);

}  // namespace pstab
