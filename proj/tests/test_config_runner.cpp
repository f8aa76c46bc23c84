#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "pstab/config.hpp"
#include "pstab/errors.hpp"
#include "pstab/runner.hpp"

using namespace pstab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json small_config() {
  return json::parse(R"({
    "schema_version": 1,
    "model": {"name": "auv"},
    "curve": {"kind": "helix", "radius": 1.0, "omega": 0.2, "rise": 0.2},
    "controller": {"alpha": 15, "epsilon": 0.1},
    "simulation": {"T": 2.0, "x0": [0, 0, -1, 0.7853981633974483, 0.7853981633974483, 0.7853981633974483], "stride": 10},
    "tube": {"p": 0.5, "delta": 1.0, "delta_prime": 1.5},
    "analysis": {
      "seed": 3,
      "rank_check": {"samples": 100},
      "constants": {"samples": 100},
      "bounds": {},
      "contraction": {"count": 3},
      "certification": {"grid_size": 2, "horizon": 1.0}
    }
  })");
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("pstab_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

fs::path write_config(const fs::path& dir, const json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> diagnostic_fields(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    std::vector<std::string> out;
    for (const auto& d : e.diagnostics()) out.push_back(d.field);
    return out;
  }
  return {};
}

bool mentions(const std::vector<std::string>& fields, const std::string& f) {
  return std::find(fields.begin(), fields.end(), f) != fields.end();
}

}  // namespace

TEST(Config, ParsesShippedConfigs) {
  for (const char* name : {"auv_helix.json", "auv_analysis_only.json"}) {
    const auto c = load_config(fs::path(PSTAB_SOURCE_DIR) / "configs" / name);
    EXPECT_EQ(c.model.name, "auv");
    EXPECT_DOUBLE_EQ(c.controller.alpha, 15.0);
  }
}

TEST(Config, RejectsUnknownKeys) {
  auto j = small_config();
  j["controller"]["gain"] = 3;
  EXPECT_TRUE(mentions(diagnostic_fields(j), "controller.gain"));
  j = small_config();
  j["extra"] = 1;
  EXPECT_FALSE(diagnostic_fields(j).empty());
  j = small_config();
  j["curve"]["point"] = {0, 0, 0};  // not used by a helix
  EXPECT_FALSE(diagnostic_fields(j).empty());
}

TEST(Config, CollectsEveryBadField) {
  auto j = small_config();
  j["controller"]["alpha"] = -1;
  j["tube"]["delta"] = 2.0;
  j["simulation"]["stride"] = 0;
  const auto fields = diagnostic_fields(j);
  EXPECT_GE(fields.size(), 3u);
  EXPECT_TRUE(mentions(fields, "tube.delta"));
}

TEST(Config, RoundTripsThroughResolvedJson) {
  const auto c = parse_config(small_config());
  const auto echoed = to_json(c);
  const auto again = to_json(parse_config(json::parse(echoed.dump())));
  EXPECT_EQ(echoed.dump(), again.dump());
  EXPECT_EQ(echoed["controller"]["kappa"], json({1, 2}));
  EXPECT_EQ(echoed["simulation"]["substeps"], 200);
  EXPECT_EQ(resolved_substeps(c), 200);
}

TEST(Config, MissingFileAndBadJson) {
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
  const auto d = fresh_dir("badjson");
  std::ofstream(d / "c.json") << "{ not json";
  EXPECT_THROW(load_config(d / "c.json"), ConfigError);
}

TEST(Runner, DeltaNotBelowDeltaPrimeExitsWithConfigError) {
  const auto d = fresh_dir("delta");
  auto j = small_config();
  j["tube"]["delta"] = 1.5;
  std::ostringstream log, err;
  RunOptions o;
  o.out_dir = d / "out";
  o.quiet = true;
  EXPECT_EQ(run_from_file(write_config(d, j), o, log, err), exit_code::kConfig);
  const auto e = json::parse(err.str());
  EXPECT_EQ(e["error"]["kind"], "config");
  bool named = false;
  for (const auto& diag : e["error"]["diagnostics"]) named = named || diag["field"] == "tube.delta";
  EXPECT_TRUE(named) << err.str();
  EXPECT_FALSE(fs::exists(d / "out" / "report.json"));
}

TEST(Runner, AnalysisOnlyWritesNoCsv) {
  const auto d = fresh_dir("analysis_only");
  auto j = small_config();
  j.erase("simulation");
  j["analysis"].erase("certification");
  RunOptions o;
  o.out_dir = d;
  o.quiet = true;
  std::ostringstream log, err;
  ASSERT_EQ(run_from_file(write_config(d, j), o, log, err), exit_code::kOk) << err.str();
  EXPECT_TRUE(fs::exists(d / "report.json"));
  EXPECT_FALSE(fs::exists(d / "trajectory.csv"));
  EXPECT_FALSE(fs::exists(d / "curve.csv"));
}

TEST(Runner, SimulateRequiresSimulationBlock) {
  auto j = small_config();
  j.erase("simulation");
  RunOptions o;
  o.command = Command::Simulate;
  o.out_dir = fresh_dir("simreq");
  std::ostringstream log;
  EXPECT_THROW(run_experiment(parse_config(j), o, log), ConfigError);
}

TEST(Runner, ReportMatchesSchemaAndEchoesConfig) {
  const auto d = fresh_dir("schema");
  RunOptions o;
  o.out_dir = d;
  o.quiet = true;
  std::ostringstream log;
  const auto cfg = parse_config(small_config());
  const auto out = run_experiment(cfg, o, log);
  EXPECT_EQ(out.exit_code, exit_code::kOk);
  const json report = json::parse(slurp(d / "report.json"));
  const json schema = json::parse(slurp(fs::path(PSTAB_SOURCE_DIR) / "schemas" / "report.schema.json"));
  std::vector<std::string> errors;
  oracle::validate_schema(schema, report, "$", errors);
  EXPECT_TRUE(errors.empty()) << errors.front();
  for (const char* key : {"rank_check", "constants", "bounds", "contraction", "simulation", "certification"}) {
    EXPECT_TRUE(report.contains(key)) << key;
  }
  EXPECT_EQ(to_json(parse_config(report["config"])).dump(), to_json(cfg).dump());
  // the CSV rows match the report
  std::ifstream csv(d / "trajectory.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "t,x1,x2,x3,x4,x5,x6,u1,u2,u3,err");
  std::size_t rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  EXPECT_EQ(rows, report["simulation"]["rows"].get<std::size_t>());
}

TEST(Runner, SameSeedGivesByteIdenticalOutputs) {
  const auto cfg = parse_config(small_config());
  std::vector<std::string> reports, csvs;
  for (const char* name : {"det_a", "det_b"}) {
    RunOptions o;
    o.out_dir = fresh_dir(name);
    o.quiet = true;
    std::ostringstream log;
    run_experiment(cfg, o, log);
    reports.push_back(slurp(o.out_dir / "report.json"));
    csvs.push_back(slurp(o.out_dir / "trajectory.csv"));
  }
  EXPECT_EQ(reports[0], reports[1]);
  EXPECT_EQ(csvs[0], csvs[1]);

  RunOptions o;
  o.out_dir = fresh_dir("det_c");
  o.quiet = true;
  o.seed = 99;
  std::ostringstream log;
  const auto other = run_experiment(cfg, o, log);
  EXPECT_EQ(other.report["resolved"]["seed"], 99);
  EXPECT_NE(other.report["constants"].dump(), json::parse(reports[0])["constants"].dump());
}

TEST(Runner, GuardExitFlagsPartialOutputs) {
  const auto d = fresh_dir("guard");
  auto j = small_config();
  j["tube"] = {{"p", 0.5}, {"delta", 1.0}, {"delta_prime", 1.01}};
  j.erase("analysis");
  RunOptions o;
  o.out_dir = d;
  o.quiet = true;
  std::ostringstream log, err;
  EXPECT_EQ(run_from_file(write_config(d, j), o, log, err), exit_code::kSimulation);
  const json report = json::parse(slurp(d / "report.json"));
  EXPECT_EQ(report["status"], "partial");
  EXPECT_EQ(report["simulation"]["status"], "guard_exit");
  EXPECT_TRUE(report["simulation"]["partial"].get<bool>());
  EXPECT_TRUE(fs::exists(d / "trajectory.csv"));
}

TEST(Runner, ErrorJsonShape) {
  const auto e = error_json("config", "bad", {{"tube.delta", "too large"}});
  EXPECT_EQ(e.dump(),
            R"({"error":{"kind":"config","message":"bad","diagnostics":[{"field":"tube.delta","message":"too large"}]}})");
}
