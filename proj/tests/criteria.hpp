#pragma once

// Acceptance checks shared by the unit tests and the acceptance runner.

#include <filesystem>
#include <string>

#include "epi/draws.hpp"
#include "epi/simstudy.hpp"

namespace criteria {

struct Result {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;

  std::string line() const;
};

std::filesystem::path fixture_dir();

/// Fixture series (tests, cases, deaths over twelve three-day bins).
epi::surveillance::SurveillanceSeries fixture_series();

Result ode_accuracy();
Result gradient_fidelity();
Result distribution_oracles();
Result prior_reproduction();
Result sampler_calibration();

/// Runs simulate, fit and forecast twice under `work_dir` and compares every
/// artifact byte for byte. The first run's fit directory is left at work_dir/a/fit.
Result end_to_end_determinism(const std::filesystem::path& work_dir);

/// Posterior-as-prior identity on the draws of `fit_dir`, and evidence for R_e > 1
/// on a supercritical simulated dataset fitted under `work_dir`.
Result bayes_factor_sanity(const std::filesystem::path& fit_dir,
                           const std::filesystem::path& work_dir);

/// Desk-scale study settings used by the acceptance run.
epi::simstudy::SimStudyConfig acceptance_study_config();

Result parameter_recovery(const epi::simstudy::StudyResult& study);
Result error_profile(const epi::simstudy::StudyResult& study);
Result predictive_coverage(const epi::simstudy::StudyResult& study);

}  // namespace criteria
