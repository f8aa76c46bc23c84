#include "pstab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <set>
#include <sstream>

#include "pstab/auv.hpp"
#include "pstab/errors.hpp"
#include "pstab/oscillating_controller.hpp"

namespace pstab {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

class Reader {
 public:
  std::vector<Diagnostic> diagnostics;

  void fail(const std::string& field, const std::string& message) {
    diagnostics.push_back({field, message});
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  /// Object at `key`, or nullptr (with a diagnostic when required or mistyped).
  const json* object(const json& parent, const std::string& path, const std::string& key,
                     bool required, std::initializer_list<const char*> allowed) {
    const std::string field = join(path, key);
    auto it = parent.find(key);
    if (it == parent.end()) {
      if (required) fail(field, "missing required section");
      return nullptr;
    }
    if (!it->is_object()) {
      fail(field, "must be an object");
      return nullptr;
    }
    check_keys(*it, field, allowed);
    return &*it;
  }

  void check_keys(const json& obj, const std::string& path,
                  std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      const bool known = std::any_of(allowed.begin(), allowed.end(),
                                     [&](const char* a) { return it.key() == a; });
      if (!known) fail(join(path, it.key()), "unknown key");
    }
  }

  std::optional<double> number(const json& obj, const std::string& path, const std::string& key,
                               bool required) {
    const std::string field = join(path, key);
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) fail(field, "missing required value");
      return std::nullopt;
    }
    if (!it->is_number()) {
      fail(field, "must be a number");
      return std::nullopt;
    }
    const double v = it->get<double>();
    if (!std::isfinite(v)) {
      fail(field, "must be finite");
      return std::nullopt;
    }
    return v;
  }

  void number_into(double& out, const json& obj, const std::string& path, const std::string& key,
                   bool required = false) {
    if (auto v = number(obj, path, key, required)) out = *v;
  }

  std::optional<long long> integer(const json& obj, const std::string& path,
                                   const std::string& key, bool required = false) {
    const std::string field = join(path, key);
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) fail(field, "missing required value");
      return std::nullopt;
    }
    if (!it->is_number_integer()) {
      fail(field, "must be an integer");
      return std::nullopt;
    }
    return it->get<long long>();
  }

  std::optional<bool> boolean(const json& obj, const std::string& path, const std::string& key) {
    auto it = obj.find(key);
    if (it == obj.end()) return std::nullopt;
    if (!it->is_boolean()) {
      fail(join(path, key), "must be a boolean");
      return std::nullopt;
    }
    return it->get<bool>();
  }

  std::optional<std::string> string(const json& obj, const std::string& path,
                                    const std::string& key, bool required = false) {
    const std::string field = join(path, key);
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) fail(field, "missing required value");
      return std::nullopt;
    }
    if (!it->is_string()) {
      fail(field, "must be a string");
      return std::nullopt;
    }
    return it->get<std::string>();
  }

  std::optional<Vec> vector(const json& v, const std::string& field) {
    if (!v.is_array()) {
      fail(field, "must be an array of numbers");
      return std::nullopt;
    }
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
        fail(field + "[" + std::to_string(i) + "]", "must be a finite number");
        return std::nullopt;
      }
      out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    }
    return out;
  }

  std::optional<Vec> vector(const json& obj, const std::string& path, const std::string& key,
                            bool required) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) fail(join(path, key), "missing required value");
      return std::nullopt;
    }
    return vector(*it, join(path, key));
  }
};

Vec fixed3(std::optional<Vec> v, Reader& r, const std::string& field, Vec fallback) {
  if (!v) return fallback;
  if (v->size() != 3) {
    r.fail(field, "must have 3 components");
    return fallback;
  }
  return *v;
}

void parse_curve(Reader& r, const json& root, ExperimentConfig& c) {
  const json* cj = r.object(root, "", "curve", true,
                            {"kind", "point", "origin", "velocity", "center", "radius", "omega",
                             "rise", "times", "points"});
  if (!cj) return;
  CurveConfig& cv = c.curve;
  auto kind = r.string(*cj, "curve", "kind", true);
  if (!kind) return;
  cv.kind = *kind;
  const Vec zero = Vec::Zero(3);
  auto allow_only = [&](std::initializer_list<const char*> keys) {
    for (auto it = cj->begin(); it != cj->end(); ++it) {
      if (it.key() == "kind") continue;
      const bool ok =
          std::any_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; });
      if (!ok) r.fail("curve." + it.key(), "not used by curve kind '" + cv.kind + "'");
    }
  };
  if (cv.kind == "constant") {
    allow_only({"point"});
    cv.point = fixed3(r.vector(*cj, "curve", "point", true), r, "curve.point", zero);
  } else if (cv.kind == "line") {
    allow_only({"origin", "velocity"});
    cv.origin = fixed3(r.vector(*cj, "curve", "origin", true), r, "curve.origin", zero);
    cv.velocity = fixed3(r.vector(*cj, "curve", "velocity", true), r, "curve.velocity", zero);
  } else if (cv.kind == "circle" || cv.kind == "helix") {
    const bool helix = cv.kind == "helix";
    if (helix) {
      allow_only({"center", "radius", "omega", "rise"});
    } else {
      allow_only({"center", "radius", "omega"});
    }
    cv.center = fixed3(r.vector(*cj, "curve", "center", false), r, "curve.center", zero);
    r.number_into(cv.radius, *cj, "curve", "radius", true);
    r.number_into(cv.omega, *cj, "curve", "omega", true);
    if (helix) r.number_into(cv.rise, *cj, "curve", "rise", true);
    if (!(cv.radius > 0.0)) r.fail("curve.radius", "must be positive");
  } else if (cv.kind == "tabulated") {
    allow_only({"times", "points"});
    auto times = r.vector(*cj, "curve", "times", true);
    auto it = cj->find("points");
    if (it == cj->end()) {
      r.fail("curve.points", "missing required value");
    } else if (!it->is_array()) {
      r.fail("curve.points", "must be an array of 3-vectors");
    } else {
      for (std::size_t i = 0; i < it->size(); ++i) {
        const std::string f = "curve.points[" + std::to_string(i) + "]";
        cv.points.push_back(fixed3(r.vector((*it)[i], f), r, f, zero));
      }
    }
    if (times) {
      cv.times.assign(times->data(), times->data() + times->size());
      if (cv.times.empty()) r.fail("curve.times", "must not be empty");
      if (!std::is_sorted(cv.times.begin(), cv.times.end()) ||
          std::adjacent_find(cv.times.begin(), cv.times.end()) != cv.times.end()) {
        r.fail("curve.times", "must be strictly increasing");
      }
      if (cv.times.size() != cv.points.size()) {
        r.fail("curve.points", "must have one point per entry of curve.times");
      }
    }
  } else {
    r.fail("curve.kind", "must be one of constant, line, circle, helix, tabulated");
  }
}

void parse_controller(Reader& r, const json& root, ExperimentConfig& c) {
  const json* cj =
      r.object(root, "", "controller", true, {"alpha", "epsilon", "S1", "S2", "kappa"});
  if (!cj) return;
  auto& ctl = c.controller;
  r.number_into(ctl.alpha, *cj, "controller", "alpha", true);
  r.number_into(ctl.epsilon, *cj, "controller", "epsilon", true);
  if (!(ctl.alpha > 0.0)) r.fail("controller.alpha", "must be positive");
  if (!(ctl.epsilon > 0.0)) r.fail("controller.epsilon", "must be positive");

  ctl.sets = auv::index_sets();
  if (auto it = cj->find("S1"); it != cj->end()) {
    ctl.sets.s1.clear();
    if (!it->is_array()) {
      r.fail("controller.S1", "must be an array of integers");
    } else {
      for (const auto& v : *it) {
        if (!v.is_number_integer()) {
          r.fail("controller.S1", "must be an array of integers");
          break;
        }
        ctl.sets.s1.push_back(v.get<int>());
      }
    }
  }
  if (auto it = cj->find("S2"); it != cj->end()) {
    ctl.sets.s2.clear();
    bool ok = it->is_array();
    if (ok) {
      for (const auto& v : *it) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() ||
            !v[1].is_number_integer()) {
          ok = false;
          break;
        }
        ctl.sets.s2.emplace_back(v[0].get<int>(), v[1].get<int>());
      }
    }
    if (!ok) r.fail("controller.S2", "must be an array of integer pairs");
  }
  try {
    ctl.sets.validate(3, 3);
  } catch (const std::invalid_argument& e) {
    r.fail("controller.S1/S2", e.what());
  }

  if (auto it = cj->find("kappa"); it != cj->end()) {
    bool ok = it->is_array();
    if (ok) {
      for (const auto& v : *it) {
        if (!v.is_number_integer()) {
          ok = false;
          break;
        }
        ctl.kappa.push_back(v.get<int>());
      }
    }
    if (!ok) {
      r.fail("controller.kappa", "must be an array of integers");
      ctl.kappa.clear();
    } else {
      std::set<int> seen;
      if (ctl.kappa.size() != ctl.sets.s2.size()) {
        r.fail("controller.kappa", "needs one entry per S2 pair");
      }
      for (int k : ctl.kappa) {
        if (k <= 0) r.fail("controller.kappa", "entries must be positive");
        if (!seen.insert(k).second) r.fail("controller.kappa", "entries must be pairwise distinct");
      }
    }
  }
}

void parse_simulation(Reader& r, const json& root, ExperimentConfig& c) {
  const json* sj =
      r.object(root, "", "simulation", false, {"t0", "T", "x0", "substeps", "stride"});
  if (!sj) return;
  ExperimentConfig::Simulation s;
  r.number_into(s.t0, *sj, "simulation", "t0");
  r.number_into(s.T, *sj, "simulation", "T", true);
  if (!(s.T > s.t0)) r.fail("simulation.T", "must exceed simulation.t0");
  if (auto x0 = r.vector(*sj, "simulation", "x0", true)) {
    if (x0->size() != 6) {
      r.fail("simulation.x0", "must have 6 components");
    } else if (!auv::in_domain(*x0)) {
      r.fail("simulation.x0", "pitch x5 must satisfy |x5| < pi/2");
    } else {
      s.x0 = *x0;
    }
  }
  if (auto v = r.integer(*sj, "simulation", "substeps")) {
    const int kmax = c.controller.kappa.empty()
                         ? static_cast<int>(c.controller.sets.s2.size())
                         : *std::max_element(c.controller.kappa.begin(), c.controller.kappa.end());
    if (*v < 40LL * kmax || *v < 1) {
      r.fail("simulation.substeps", "must be >= 40 * kappa_max = " + std::to_string(40 * kmax));
    } else {
      s.substeps = static_cast<int>(*v);
    }
  }
  if (auto v = r.integer(*sj, "simulation", "stride")) {
    if (*v < 1) {
      r.fail("simulation.stride", "must be >= 1");
    } else {
      s.stride = static_cast<int>(*v);
    }
  }
  c.simulation = s;
}

void parse_tube(Reader& r, const json& root, ExperimentConfig& c) {
  const json* tj = r.object(root, "", "tube", true, {"p", "delta", "delta_prime"});
  if (!tj) return;
  r.number_into(c.tube.p, *tj, "tube", "p", true);
  r.number_into(c.tube.delta, *tj, "tube", "delta", true);
  r.number_into(c.tube.delta_prime, *tj, "tube", "delta_prime", true);
  if (!(c.tube.p > 0.0)) r.fail("tube.p", "must be positive");
  if (!(c.tube.delta > 0.0)) r.fail("tube.delta", "must be positive");
  if (!(c.tube.delta < c.tube.delta_prime)) {
    r.fail("tube.delta", "must be less than tube.delta_prime");
  }
}

template <class T>
void count_into(T& out, Reader& r, const json& obj, const std::string& path,
                const std::string& key, long long minimum) {
  if (auto v = r.integer(obj, path, key)) {
    if (*v < minimum) {
      r.fail(path + "." + key, "must be >= " + std::to_string(minimum));
    } else {
      out = static_cast<T>(*v);
    }
  }
}

void parse_analysis(Reader& r, const json& root, ExperimentConfig& c) {
  const json* aj = r.object(root, "", "analysis", false,
                            {"seed", "rank_check", "constants", "bounds", "contraction",
                             "certification"});
  if (!aj) return;
  auto& a = c.analysis;
  if (auto v = r.integer(*aj, "analysis", "seed")) {
    if (*v < 0) {
      r.fail("analysis.seed", "must be non-negative");
    } else {
      a.seed = static_cast<std::uint64_t>(*v);
    }
  }
  if (const json* j = r.object(*aj, "analysis", "rank_check", false, {"enabled", "samples"})) {
    a.rank_check.enabled = r.boolean(*j, "analysis.rank_check", "enabled").value_or(true);
    count_into(a.rank_check.samples, r, *j, "analysis.rank_check", "samples", 1);
  }
  if (const json* j = r.object(*aj, "analysis", "constants", false,
                               {"enabled", "samples", "t_probe", "z_box"})) {
    const std::string path = "analysis.constants";
    a.constants.enabled = r.boolean(*j, path, "enabled").value_or(true);
    count_into(a.constants.samples, r, *j, path, "samples", 100);
    r.number_into(a.constants.t_probe, *j, path, "t_probe");
    if (!(a.constants.t_probe >= 0.0)) r.fail(path + ".t_probe", "must be non-negative");
    if (auto it = j->find("z_box"); it != j->end()) {
      bool ok = it->is_array() && it->size() == 3;
      if (ok) {
        for (const auto& iv : *it) {
          if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number() ||
              !(iv[0].get<double>() <= iv[1].get<double>())) {
            ok = false;
            break;
          }
          a.constants.z_box.emplace_back(iv[0].get<double>(), iv[1].get<double>());
        }
      }
      if (ok) {
        const auto& pitch = a.constants.z_box[1];
        if (!(std::max(std::abs(pitch.first), std::abs(pitch.second)) <
              std::numbers::pi / 2 - auv::kPitchGuard)) {
          r.fail(path + ".z_box", "pitch interval must stay inside |x5| < pi/2");
        }
      } else {
        r.fail(path + ".z_box", "must be three [lo, hi] intervals with lo <= hi");
        a.constants.z_box.clear();
      }
    }
  }
  if (const json* j = r.object(*aj, "analysis", "bounds", false, {"enabled", "nu", "lambda"})) {
    a.bounds.enabled = r.boolean(*j, "analysis.bounds", "enabled").value_or(true);
    r.number_into(a.bounds.nu, *j, "analysis.bounds", "nu");
    if (!(a.bounds.nu > 1.0)) r.fail("analysis.bounds.nu", "must exceed 1");
    if (auto v = r.number(*j, "analysis.bounds", "lambda", false)) {
      if (!(*v > 0.0)) r.fail("analysis.bounds.lambda", "must be positive");
      a.bounds.lambda = *v;
    }
  }
  if (const json* j = r.object(*aj, "analysis", "contraction", false, {"enabled", "count"})) {
    a.contraction.enabled = r.boolean(*j, "analysis.contraction", "enabled").value_or(true);
    count_into(a.contraction.count, r, *j, "analysis.contraction", "count", 1);
  }
  if (const json* j = r.object(*aj, "analysis", "certification", false,
                               {"enabled", "deltas", "grid_size", "horizon"})) {
    const std::string path = "analysis.certification";
    a.certification.enabled = r.boolean(*j, path, "enabled").value_or(true);
    if (auto d = r.vector(*j, path, "deltas", false)) {
      a.certification.deltas.assign(d->data(), d->data() + d->size());
      if (a.certification.deltas.empty()) r.fail(path + ".deltas", "must not be empty");
      for (double v : a.certification.deltas) {
        if (!(v >= 0.0)) r.fail(path + ".deltas", "entries must be non-negative");
      }
    }
    count_into(a.certification.grid_size, r, *j, path, "grid_size", 1);
    r.number_into(a.certification.horizon, *j, path, "horizon");
    if (!(a.certification.horizon >= 0.0)) r.fail(path + ".horizon", "must be non-negative");
  }
}

void parse_output(Reader& r, const json& root, ExperimentConfig& c) {
  const json* oj =
      r.object(root, "", "output", false, {"trajectory_csv", "curve_csv", "report_json"});
  if (!oj) return;
  auto file = [&](std::string& out, const char* key) {
    if (auto v = r.string(*oj, "output", key)) {
      const std::filesystem::path p(*v);
      if (v->empty() || p.is_absolute() || p.has_parent_path()) {
        r.fail(std::string("output.") + key, "must be a plain file name");
      } else {
        out = *v;
      }
    }
  };
  file(c.output.trajectory_csv, "trajectory_csv");
  file(c.output.curve_csv, "curve_csv");
  file(c.output.report_json, "report_json");
}

ordered_json vec_json(const Vec& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

ReferenceCurve CurveConfig::build() const {
  if (kind == "constant") return ReferenceCurve::constant(point);
  if (kind == "line") return ReferenceCurve::line(origin, velocity);
  if (kind == "circle") return ReferenceCurve::circle(center, radius, omega);
  if (kind == "helix") return ReferenceCurve::helix(center, radius, omega, rise);
  if (kind == "tabulated") return ReferenceCurve::tabulated(times, points);
  throw std::invalid_argument("unknown curve kind '" + kind + "'");
}

ExperimentConfig parse_config(const json& root) {
  Reader r;
  ExperimentConfig c;
  if (!root.is_object()) {
    r.fail("", "configuration must be a JSON object");
    throw ConfigError(std::move(r.diagnostics));
  }
  r.check_keys(root, "",
               {"schema_version", "model", "curve", "controller", "simulation", "tube",
                "analysis", "output"});
  if (auto v = r.integer(root, "", "schema_version", true)) {
    if (*v != kConfigSchemaVersion) {
      r.fail("schema_version", "unsupported version (expected " +
                                   std::to_string(kConfigSchemaVersion) + ")");
    }
  }
  if (const json* mj = r.object(root, "", "model", true, {"name", "omega1"})) {
    if (auto name = r.string(*mj, "model", "name", true)) {
      c.model.name = *name;
      if (*name != "auv") r.fail("model.name", "unknown model (available: auv)");
    }
    if (const json* wj = r.object(*mj, "model", "omega1", false, {"amplitude", "frequency"})) {
      r.number_into(c.model.omega1_amplitude, *wj, "model.omega1", "amplitude");
      r.number_into(c.model.omega1_frequency, *wj, "model.omega1", "frequency");
    }
  }
  parse_curve(r, root, c);
  parse_controller(r, root, c);
  parse_simulation(r, root, c);
  parse_tube(r, root, c);
  parse_analysis(r, root, c);
  parse_output(r, root, c);
  if (c.analysis.certification.enabled && !c.simulation && c.analysis.certification.horizon == 0.0) {
    // Horizon falls back to 20 when there is no simulation block.
    c.analysis.certification.horizon = 20.0;
  }
  if (!r.diagnostics.empty()) throw ConfigError(std::move(r.diagnostics));
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(std::vector<Diagnostic>{{"", "cannot open configuration file '" + path.string() + "'"}});
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::vector<Diagnostic>{{"", std::string("invalid JSON: ") + e.what()}});
  }
  return parse_config(j);
}

std::vector<int> resolved_kappa(const ExperimentConfig& c) {
  return c.controller.kappa.empty() ? default_kappa(c.controller.sets) : c.controller.kappa;
}

int resolved_substeps(const ExperimentConfig& c) {
  if (c.simulation && c.simulation->substeps > 0) return c.simulation->substeps;
  const auto kappa = resolved_kappa(c);
  const int kmax = kappa.empty() ? 0 : *std::max_element(kappa.begin(), kappa.end());
  return std::max(200, 40 * kmax);
}

ordered_json to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["schema_version"] = c.schema_version;
  j["model"] = {{"name", c.model.name},
                {"omega1",
                 {{"amplitude", c.model.omega1_amplitude},
                  {"frequency", c.model.omega1_frequency}}}};

  ordered_json cv;
  cv["kind"] = c.curve.kind;
  if (c.curve.kind == "constant") {
    cv["point"] = vec_json(c.curve.point);
  } else if (c.curve.kind == "line") {
    cv["origin"] = vec_json(c.curve.origin);
    cv["velocity"] = vec_json(c.curve.velocity);
  } else if (c.curve.kind == "circle" || c.curve.kind == "helix") {
    cv["center"] = vec_json(c.curve.center);
    cv["radius"] = c.curve.radius;
    cv["omega"] = c.curve.omega;
    if (c.curve.kind == "helix") cv["rise"] = c.curve.rise;
  } else if (c.curve.kind == "tabulated") {
    cv["times"] = c.curve.times;
    ordered_json pts = ordered_json::array();
    for (const Vec& p : c.curve.points) pts.push_back(vec_json(p));
    cv["points"] = pts;
  }
  j["curve"] = cv;

  ordered_json s2 = ordered_json::array();
  for (const auto& [a, b] : c.controller.sets.s2) s2.push_back({a, b});
  j["controller"] = {{"alpha", c.controller.alpha},
                     {"epsilon", c.controller.epsilon},
                     {"S1", c.controller.sets.s1},
                     {"S2", s2},
                     {"kappa", resolved_kappa(c)}};

  if (c.simulation) {
    j["simulation"] = {{"t0", c.simulation->t0},
                       {"T", c.simulation->T},
                       {"x0", vec_json(c.simulation->x0)},
                       {"substeps", resolved_substeps(c)},
                       {"stride", c.simulation->stride}};
  }
  j["tube"] = {{"p", c.tube.p}, {"delta", c.tube.delta}, {"delta_prime", c.tube.delta_prime}};

  const auto& a = c.analysis;
  ordered_json z_box = ordered_json::array();
  for (const auto& [lo, hi] : a.constants.z_box) z_box.push_back({lo, hi});
  ordered_json bounds = {{"enabled", a.bounds.enabled}, {"nu", a.bounds.nu}};
  if (a.bounds.lambda) bounds["lambda"] = *a.bounds.lambda;
  ordered_json constants = {{"enabled", a.constants.enabled},
                            {"samples", a.constants.samples},
                            {"t_probe", a.constants.t_probe}};
  if (!a.constants.z_box.empty()) constants["z_box"] = z_box;
  j["analysis"] = {
      {"seed", a.seed},
      {"rank_check", {{"enabled", a.rank_check.enabled}, {"samples", a.rank_check.samples}}},
      {"constants", constants},
      {"bounds", bounds},
      {"contraction", {{"enabled", a.contraction.enabled}, {"count", a.contraction.count}}},
      {"certification",
       {{"enabled", a.certification.enabled},
        {"deltas", a.certification.deltas},
        {"grid_size", a.certification.grid_size},
        {"horizon", a.certification.horizon}}}};
  j["output"] = {{"trajectory_csv", c.output.trajectory_csv},
                 {"curve_csv", c.output.curve_csv},
                 {"report_json", c.output.report_json}};
  return j;
}

}  // namespace pstab
