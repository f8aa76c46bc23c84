#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pstab/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Sampled oscillating-feedback tracking: simulation and stability analysis"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir = ".";
  long long seed = -1;
  bool quiet = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "Experiment configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out-dir", out_dir, "Directory for CSV and report outputs");
    sub->add_option("--seed", seed, "Override analysis.seed")->check(CLI::NonNegativeNumber);
    sub->add_flag("--quiet", quiet, "Suppress progress messages");
  };

  struct Entry {
    const char* name;
    const char* help;
    pstab::Command command;
  };
  const Entry entries[] = {
      {"simulate", "Simulate the sampled closed loop and write CSV trajectories",
       pstab::Command::Simulate},
      {"analyze", "Rank check, constant estimation, epsilon bounds, contraction check",
       pstab::Command::Analyze},
      {"certify", "Set-stability certification over a grid of initial conditions",
       pstab::Command::Certify},
      {"run", "Simulation plus every analysis enabled in the configuration",
       pstab::Command::Run},
  };
  pstab::Command command = pstab::Command::Run;
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(e.name, e.help);
    add_common(sub);
    sub->callback([&command, c = e.command] { command = c; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << pstab::error_json("usage", e.what()).dump() << '\n';
    return pstab::exit_code::kConfig;
  }

  pstab::RunOptions options;
  options.command = command;
  options.out_dir = out_dir;
  if (seed >= 0) options.seed = static_cast<std::uint64_t>(seed);
  options.quiet = quiet;
  return pstab::run_from_file(config, options, std::clog, std::cerr);
}
