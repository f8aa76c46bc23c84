#include "pstab/report.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace pstab {

namespace {

ordered_json num(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

template <class T>
ordered_json opt(const std::optional<T>& v) {
  if (!v) return nullptr;
  if constexpr (std::is_floating_point_v<T>) {
    return num(*v);
  } else {
    return *v;
  }
}

}  // namespace

ordered_json to_json(const Vec& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

ordered_json to_json(const RankReport& r) {
  return {{"sample_count", r.sample_count},
          {"min_singular_value", num(r.min_singular_value)},
          {"worst_point", to_json(r.worst_point)},
          {"relative_tol", r.relative_tol},
          {"threshold_at_worst", num(r.threshold_at_worst)},
          {"failures", r.failures},
          {"passed", r.passed}};
}

ordered_json to_json(const ProofConstants& k) {
  ordered_json values;
  for (const auto& [name, e] : k.named()) {
    values[name] = {{"value", num(e->value)}, {"argmax", {{"t", e->t}, {"x", to_json(e->x)}}}};
  }
  return {{"sample_count", k.sample_count}, {"L_star", num(k.L_star)}, {"values", values}};
}

ordered_json to_json(const Intermediates& c) {
  return {{"epsilon", num(c.epsilon)}, {"c1", num(c.c1)},   {"c2", num(c.c2)},
          {"c_u", num(c.cu)},          {"c_g", num(c.cg)},  {"c_h", num(c.ch)},
          {"c_y1", num(c.cy1)},        {"c_y2", num(c.cy2)}, {"c_z1", num(c.cz1)},
          {"c_z2", num(c.cz2)},        {"c_sigma", num(c.c_sigma)},
          {"c_r0", num(c.c_r0)},       {"c_r1", num(c.c_r1)}, {"q", num(c.q)}};
}

ordered_json to_json(const EpsilonBounds& b) {
  return {{"feasible", true},
          {"eps0", num(b.eps0)},
          {"eps1", num(b.eps1)},
          {"eps2", num(b.eps2)},
          {"eps3", num(b.eps3)},
          {"eps_bar", num(b.eps_bar)},
          {"eps_bar_with_eps2", num(b.eps_bar_with_eps2)},
          {"nu", b.nu},
          {"lambda", num(b.lambda)},
          {"minimal_alpha", num(b.minimal_alpha)},
          {"intermediates", to_json(b.at)},
          {"gamma1", {{"sqrt_coefficient", num(b.gamma1_sqrt)},
                      {"linear_coefficient", num(b.gamma1_linear)}}},
          {"gamma2", num(b.gamma2)},
          {"method", b.method},
          {"iterations", b.iterations},
          {"converged", b.converged},
          {"operating_epsilon", num(b.operating_epsilon)},
          {"operating_epsilon_certified", b.operating_epsilon_certified},
          {"notes",
           {"c2 sums kappa^(2/3) while c_sigma sums kappa^(-2/3); both are evaluated as stated"}}};
}

ordered_json to_json(const ContractionReport& r) {
  ordered_json factors = ordered_json::array();
  for (double f : r.factors) factors.push_back(num(f));
  return {{"count", r.count},
          {"non_expanding", r.non_expanding},
          {"pass_fraction", num(r.pass_fraction)},
          {"min_factor", num(r.min_factor)},
          {"max_factor", num(r.max_factor)},
          {"mean_factor", num(r.mean_factor)},
          {"meets_certified_rate", opt(r.meets_certified_rate)},
          {"epsilon_above_certified_bound", r.epsilon_above_certified_bound},
          {"factors", factors}};
}

ordered_json to_json(const RateFit& f) {
  return {{"valid", f.valid},
          {"rate", num(f.rate)},
          {"intercept", num(f.intercept)},
          {"r_squared", num(f.r_squared)},
          {"points", f.points},
          {"floor", num(f.floor)}};
}

ordered_json to_json(const CertificationReport& r) {
  ordered_json deltas = ordered_json::array();
  for (const auto& d : r.deltas) {
    deltas.push_back(
        {{"Delta", d.Delta}, {"stable", d.stable}, {"attraction_time", opt(d.attraction_time)}});
  }
  ordered_json trajectories = ordered_json::array();
  for (const auto& t : r.trajectories) {
    trajectories.push_back({{"x0", to_json(t.x0)},
                            {"status", to_string(t.status)},
                            {"diagnostic", t.diagnostic},
                            {"fit", to_json(t.fit)}});
  }
  return {{"deltas", deltas},
          {"failures", r.failures},
          {"floor", num(r.floor)},
          {"floor_source", r.floor_source},
          {"min_rate", opt(r.min_rate)},
          {"min_r_squared", opt(r.min_r_squared)},
          {"trajectories", trajectories}};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename onto '" + path.string() + "': " + ec.message());
  }
}

}  // namespace pstab
