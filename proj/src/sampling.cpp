#include "pstab/sampling.hpp"

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>

namespace pstab {

namespace {

constexpr std::array<int, 40> kPrimes = {2,   3,   5,   7,   11,  13,  17,  19,  23,  29,
                                         31,  37,  41,  43,  47,  53,  59,  61,  67,  71,
                                         73,  79,  83,  89,  97,  101, 103, 107, 109, 113,
                                         127, 131, 137, 139, 149, 151, 157, 163, 167, 173};

double radical_inverse(std::uint64_t i, int base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

// Maps the cube [-1, 1]^d onto the unit ball along rays, keeping the
// infinity-norm as the radius.
Vec cube_to_ball(const Vec& v) {
  const double n2 = v.norm();
  if (n2 == 0.0) return v;
  return v * (v.lpNorm<Eigen::Infinity>() / n2);
}

}  // namespace

HaltonSequence::HaltonSequence(int dim, std::uint64_t seed) {
  if (dim < 1 || dim > static_cast<int>(kPrimes.size())) {
    throw std::invalid_argument("HaltonSequence: dimension must be in 1..40");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  shift_.resize(dim);
  for (auto& s : shift_) s = unif(rng);
}

std::vector<double> HaltonSequence::point(std::uint64_t i) const {
  std::vector<double> p(shift_.size());
  for (std::size_t d = 0; d < p.size(); ++d) {
    // index i + 1 skips the all-zero first Halton point
    const double v = radical_inverse(i + 1, kPrimes[d]) + shift_[d];
    p[d] = v - std::floor(v);
  }
  return p;
}

std::vector<RegionSample> sample_tube_region(const ReferenceCurve& curve, const TubeSpec& tube,
                                             const std::vector<std::pair<double, double>>& z_box,
                                             double t_probe, std::size_t count,
                                             std::uint64_t seed) {
  const int n1 = curve.dim();
  const int n2 = static_cast<int>(z_box.size());
  const int n = n1 + n2;
  for (const auto& [lo, hi] : z_box) {
    if (!(lo <= hi)) throw std::invalid_argument("z_box: each interval needs lo <= hi");
  }
  if (!(t_probe >= 0.0)) throw std::invalid_argument("t_probe must be non-negative");
  const double radius = tube.p + tube.delta_prime;
  const HaltonSequence seq(1 + 2 * n, seed);

  std::vector<RegionSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto u = seq.point(i);
    RegionSample s;
    s.t = t_probe * u[0];
    Vec cube(n1);
    for (int d = 0; d < n1; ++d) cube[d] = 2.0 * u[1 + d] - 1.0;
    s.x.resize(n);
    s.x.head(n1) = curve(s.t) + radius * cube_to_ball(cube);
    for (int d = 0; d < n2; ++d) {
      const auto& [lo, hi] = z_box[d];
      s.x[n1 + d] = lo + (hi - lo) * u[1 + n1 + d];
    }
    s.direction.resize(n);
    for (int d = 0; d < n; ++d) s.direction[d] = 2.0 * u[1 + n + d] - 1.0;
    const double len = s.direction.norm();
    if (len > 0.0) {
      s.direction /= len;
    } else {
      s.direction = Vec::Unit(n, 0);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace pstab
