#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pstab/lie_calculus.hpp"
#include "pstab/linalg.hpp"
#include "pstab/system_model.hpp"

namespace pstab {

inline constexpr int kConfigSchemaVersion = 1;

struct CurveConfig {
  /// constant | line | circle | helix | tabulated
  std::string kind = "helix";
  Vec point;     // constant
  Vec origin;    // line
  Vec velocity;  // line
  Vec center;    // circle, helix
  double radius = 1.0;
  double omega = 0.0;
  double rise = 0.0;
  std::vector<double> times;  // tabulated
  std::vector<Vec> points;    // tabulated

  ReferenceCurve build() const;
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;

  struct Model {
    std::string name = "auv";
    double omega1_amplitude = 0.25;
    double omega1_frequency = 1.0;
  } model;

  CurveConfig curve;

  struct Controller {
    double alpha = 15.0;
    double epsilon = 0.1;
    IndexSets sets;
    std::vector<int> kappa;  // empty: 1, 2, ...
  } controller;

  struct Simulation {
    double t0 = 0.0;
    double T = 20.0;
    Vec x0;
    int substeps = 0;  // 0: max(200, 40 kappa_max)
    int stride = 1;
  };
  std::optional<Simulation> simulation;

  TubeSpec tube;

  struct Analysis {
    std::uint64_t seed = 1;
    struct Rank {
      bool enabled = false;
      std::size_t samples = 1000;
    } rank_check;
    struct Constants {
      bool enabled = false;
      std::size_t samples = 2000;
      double t_probe = 20.0;
      std::vector<std::pair<double, double>> z_box;  // empty: model default
    } constants;
    struct Bounds {
      bool enabled = false;
      double nu = 2.0;
      std::optional<double> lambda;
    } bounds;
    struct Contraction {
      bool enabled = false;
      std::size_t count = 50;
    } contraction;
    struct Certification {
      bool enabled = false;
      std::vector<double> deltas = {0.05, 0.1, 0.5};
      std::size_t grid_size = 8;
      double horizon = 0.0;  // 0: T - t0 of the simulation block, else 20
    } certification;
  } analysis;

  struct Output {
    std::string trajectory_csv = "trajectory.csv";
    std::string curve_csv = "curve.csv";
    std::string report_json = "report.json";
  } output;
};

/// Parses and validates a configuration. Unknown keys, wrong types, and
/// out-of-range values are collected and thrown together as a ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Fully resolved form (defaults filled in); parse_config(to_json(c)) == c.
nlohmann::ordered_json to_json(const ExperimentConfig& c);

/// Effective kappa and substep count.
std::vector<int> resolved_kappa(const ExperimentConfig& c);
int resolved_substeps(const ExperimentConfig& c);

}  // namespace pstab
