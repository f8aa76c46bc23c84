#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pstab/config.hpp"
#include "pstab/errors.hpp"

namespace pstab {

enum class Command { Simulate, Analyze, Certify, Run };

const char* to_string(Command c);

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kConfig = 2;
inline constexpr int kSimulation = 3;
}  // namespace exit_code

struct RunOptions {
  Command command = Command::Run;
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides analysis.seed
  bool quiet = false;
};

struct RunOutcome {
  int exit_code = exit_code::kOk;
  nlohmann::ordered_json report;
  std::vector<std::filesystem::path> files;
};

/// Executes the sections selected by the command:
///   simulate: simulation only (requires a simulation block)
///   analyze: enabled rank/constants/bounds/contraction analyses
///   certify: set-stability certification
///   run: simulation (if configured) plus every enabled analysis
/// Writes CSV files only when a simulation ran, and always the report. A
/// failed simulation yields exit code 3 with the partial outputs flagged.
/// Throws ConfigError for configurations the command cannot use.
RunOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options,
                          std::ostream& log);

/// {"error": {"kind": ..., "message": ..., "diagnostics": [...]}}.
nlohmann::ordered_json error_json(const std::string& kind, const std::string& message,
                                  const std::vector<Diagnostic>& diagnostics = {});

/// Loads the config, runs it, and maps failures to exit codes; error JSON
/// goes to `err`, progress to `log` unless quiet.
int run_from_file(const std::filesystem::path& config_path, const RunOptions& options,
                  std::ostream& log, std::ostream& err);

}  // namespace pstab
