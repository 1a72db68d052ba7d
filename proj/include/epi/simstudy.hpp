#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "epi/dataio.hpp"
#include "epi/params.hpp"
#include "epi/posterior.hpp"
#include "epi/sampler.hpp"
#include "epi/surveillance.hpp"

namespace epi::simstudy {

/// Synthetic tests-per-bin curve: a logistic rise from about 1.5k to 9k tests per
/// three-day bin centred mid-window, then a plateau. Multiplied by `scale`.
std::vector<std::int64_t> default_test_schedule(std::size_t bins, double scale = 1.0);

/// Solves the ODE at `truth`, then draws cases (beta-binomial) and deaths
/// (negative binomial) per bin. Tests are copied through.
surveillance::SurveillanceSeries simulate_dataset(const ParamVector& truth,
                                                  std::span<const std::int64_t> tests,
                                                  std::uint64_t seed,
                                                  const ModelConstants& constants = {});
surveillance::SurveillanceSeries simulate_dataset(const ParamVector& truth,
                                                  std::span<const std::int64_t> tests, Rng& rng,
                                                  const ModelConstants& constants = {});

std::string model_name(CaseModel m);

struct SimStudyConfig {
  std::size_t n_datasets = 100;
  ParamVector truth = simulation_truth();
  std::size_t train_bins = 12;    // the 36-day fitting window
  std::size_t holdout_bins = 10;  // four weeks of three-day bins
  std::vector<std::int64_t> tests;  // train + holdout bins; default schedule when empty
  std::vector<CaseModel> models = {CaseModel::TestAware, CaseModel::NoTests};
  std::uint64_t seed = 20200414;
  mcmc::SamplerConfig sampler = desk_sampler();
  std::size_t workers = 1;
  ModelConstants constants;
  std::function<void(const std::string&)> progress;

  /// Two chains of 2000 iterations, half warmup.
  static mcmc::SamplerConfig desk_sampler();
  /// The paper's protocol: 1000 datasets, four chains, 8000 draws with 4000 warmup.
  static SimStudyConfig full_scale();
  void validate() const;
};

/// Reported scale of a parameter: overdispersions enter as 1/sqrt(.).
std::string reported_name(const std::string& name);
double reported_value(const std::string& name, double value);

struct FitRecord {
  std::size_t dataset = 0;
  CaseModel model = CaseModel::TestAware;
  bool ok = false;
  std::string error;
  std::vector<std::string> parameters;  // reported names, in layout order
  std::vector<double> truth;
  std::vector<double> median;
  std::vector<double> lo;  // 2.5% quantile
  std::vector<double> hi;  // 97.5% quantile
  double max_rhat = 0.0;
  std::size_t divergences = 0;
  std::size_t train_covered = 0;
  std::size_t train_total = 0;
  std::size_t holdout_covered = 0;
  std::size_t holdout_total = 0;
};

struct MetricRow {
  std::string parameter;
  CaseModel model = CaseModel::TestAware;
  double truth = 0.0;
  double median_rel_abs_diff = 0.0;
  double median_rel_ci_width = 0.0;
  double coverage_pct = 0.0;
  std::size_t n = 0;
};

struct StudyResult {
  std::vector<FitRecord> fits;  // dataset-major, then model order
  std::vector<MetricRow> metrics;

  const MetricRow& metric(const std::string& parameter, CaseModel model) const;
  std::size_t failures(CaseModel model) const;
  /// Pooled share of held-out (or training) death bins inside the 95% predictive interval.
  double holdout_coverage(CaseModel model) const;
  double train_coverage(CaseModel model) const;
};

/// Fits one dataset with one model; never throws (failures are recorded).
FitRecord fit_dataset(const surveillance::SurveillanceSeries& full, std::size_t dataset,
                      CaseModel model, const SimStudyConfig& config, std::uint64_t fit_seed);

std::vector<MetricRow> compute_metrics(const std::vector<FitRecord>& fits,
                                       const std::vector<CaseModel>& models);

StudyResult run_study(const SimStudyConfig& config);

/// CSV tables and SVG box plots for a finished study.
dataio::OutputBundle study_outputs(const StudyResult& result, const SimStudyConfig& config);

}  // namespace epi::simstudy
