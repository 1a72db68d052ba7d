#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "epi/analysis.hpp"
#include "epi/draws.hpp"
#include "epi/params.hpp"
#include "epi/priors.hpp"
#include "epi/sampler.hpp"
#include "epi/surveillance.hpp"

namespace epi::dataio {

inline constexpr int kSchemaVersion = 1;

/// Input or configuration problem; the message names the file, row or key path.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Date = std::chrono::sys_days;

/// Parses YYYY-MM-DD; throws DataError mentioning `where` on failure.
Date parse_date(const std::string& text, const std::string& where = "date");
std::string format_date(Date d);

enum class TestResult { Negative, Positive };

struct LineListRecord {
  std::string person_id;
  Date specimen_date;
  TestResult result = TestResult::Negative;
  std::optional<Date> death_date;
  std::size_t row = 0;  // 1-based data row in the source file, 0 if synthetic
};

/// Inclusive calendar window.
struct Period {
  Date start;
  Date end;
  std::size_t days() const { return static_cast<std::size_t>((end - start).count() + 1); }
};

struct DailyCounts {
  Date start;
  std::vector<std::int64_t> tests;
  std::vector<std::int64_t> cases;
  std::vector<std::int64_t> deaths;

  std::size_t size() const { return tests.size(); }
};

/// Columns id,date,result,death_date (death_date may be empty; result is
/// positive/negative). Malformed rows throw DataError naming the row.
std::vector<LineListRecord> read_line_list(const std::filesystem::path& path);

/// Per-person first-positive rule: tests up to and including a person's first
/// positive are counted, that positive is the person's single case, and every
/// later test of that person is dropped. Exact duplicate rows count once.
/// Deaths are tabulated by death date, once per person.
DailyCounts dedup_and_tabulate(const std::vector<LineListRecord>& records, const Period& period);

/// Columns date,tests,cases,deaths with consecutive dates.
DailyCounts read_daily_counts(const std::filesystem::path& path);

/// Consecutive non-overlapping sums; throws DataError if the length is not a multiple of width.
std::vector<std::int64_t> bin_series(const std::vector<std::int64_t>& daily, std::size_t width);
surveillance::SurveillanceSeries bin_counts(const DailyCounts& daily, std::size_t width_days);

/// Columns bin,tests,cases,deaths.
surveillance::SurveillanceSeries read_binned_counts(const std::filesystem::path& path,
                                                    double bin_width_weeks);
std::string binned_counts_csv(const surveillance::SurveillanceSeries& series);

enum class DataFormat { LineList, Daily, Binned };

struct RunConfig {
  int schema_version = kSchemaVersion;
  Period period;
  std::size_t bin_days = 3;
  ModelConstants constants;
  priors::PriorSpec priors;
  mcmc::SamplerConfig sampler;
  DataFormat data_format = DataFormat::Binned;
  std::filesystem::path data_path;
  std::filesystem::path output_dir;
  double forecast_weeks = 4.0;
  std::uint64_t forecast_seed = 1;
  nlohmann::json source;  // the parsed document, for hashing and the manifest

  std::size_t bins() const { return period.days() / bin_days; }
};

/// Reads and validates a JSON run configuration; relative paths resolve against
/// the config file's directory. Errors name the key path.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);

/// Loads the configured data source and bins it to the configured window.
surveillance::SurveillanceSeries load_series(const RunConfig& config);

nlohmann::json prior_spec_to_json(const priors::PriorSpec& spec);
priors::PriorSpec prior_spec_from_json(const nlohmann::json& doc, const std::string& key_path);

std::string sha256_hex(const std::string& bytes);
/// SHA-256 of the canonical (sorted-key, compact) serialisation.
std::string canonical_hash(const nlohmann::json& doc);

/// Writes via a temporary file in the same directory and renames into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// Draws table: one row per retained draw, parameters at full precision,
/// followed by lp, chain, divergent, tree_depth, step_size, n_leapfrog, accept_stat.
std::string draws_csv(const PosteriorDraws& draws);
PosteriorDraws read_draws_csv(const std::filesystem::path& path);

std::string summary_csv(const analysis::SummaryTable& table);

struct OutputBundle {
  std::map<std::string, std::string> files;  // relative name -> content
  nlohmann::json manifest;
};

/// Writes every file atomically, then manifest.json last; returns the written paths.
std::vector<std::filesystem::path> write_outputs(const std::filesystem::path& dir,
                                                 const OutputBundle& bundle);

/// Shortest round-trip decimal form (%.17g).
std::string format_double(double v);

}  // namespace epi::dataio
