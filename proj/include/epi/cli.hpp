#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace epi::cli {

/// Outcome of one command: exit 0 on success, 1 on configuration or data
/// errors, 2 when the fit did not converge (R-hat above 1.05).
struct CommandResult {
  std::string command;
  int exit_code = 0;
  std::vector<std::filesystem::path> artifacts;
  std::string summary;
  std::vector<std::string> warnings;
  nlohmann::json details = nlohmann::json::object();

  /// Single-line machine-readable form printed on standard output.
  nlohmann::json to_json() const;
};

/// Command-line values that override the configuration file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> chains;
  std::optional<std::size_t> draws;
  std::optional<std::size_t> warmup;
};

inline constexpr double kRhatWarn = 1.01;
inline constexpr double kRhatFail = 1.05;

/// Ingest, fit, diagnose and summarise. Writes draws.csv, data.csv, fit.json,
/// the summary files and manifest.json into `out` (or the configured output_dir).
CommandResult cmd_fit(const std::filesystem::path& config_path, const Overrides& overrides,
                      const std::filesystem::path& out = {});

/// Simulated binned counts at the configuration's "simulation" truth, plus a
/// fit configuration pointing at them.
CommandResult cmd_simulate(const std::filesystem::path& config_path, const Overrides& overrides,
                           const std::filesystem::path& out);

/// Posterior predictive forecast from a fit directory; `horizon_weeks` must be positive.
CommandResult cmd_forecast(const std::filesystem::path& fit_dir, double horizon_weeks,
                           std::optional<std::uint64_t> seed,
                           const std::filesystem::path& out = {});

/// Recomputes summaries from a fit directory's draws; writes to fit_dir/summary by default.
CommandResult cmd_summarize(const std::filesystem::path& fit_dir,
                            const std::filesystem::path& out = {});

/// Simulation study; the config file is optional. Worker count comes from EPI_WORKERS.
CommandResult cmd_sim_study(const std::filesystem::path& config_path, const Overrides& overrides,
                            bool full_scale, const std::filesystem::path& out);

/// Parses arguments, runs the command, prints the JSON result line and returns the exit code.
int run(int argc, char** argv);

}  // namespace epi::cli
