// Acceptance runner: one PASS/FAIL line per criterion.
//   acceptance fast  --work DIR   criteria 1-5, 8, 9
//   acceptance study --work DIR   criteria 6, 7, 10 (desk-scale simulation study)

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "criteria.hpp"
#include "epi/dataio.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  std::string mode = "all";
  fs::path work = fs::temp_directory_path() / "epi_acceptance";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--work" && i + 1 < argc) {
      work = argv[++i];
    } else if (a == "fast" || a == "study" || a == "all") {
      mode = a;
    } else {
      std::cerr << "usage: acceptance [fast|study|all] [--work DIR]\n";
      return 64;
    }
  }
  fs::create_directories(work);

  std::vector<criteria::Result> results;
  auto report = [&](criteria::Result r) {
    std::cout << r.line() << std::endl;
    results.push_back(std::move(r));
  };

  if (mode != "study") {
    report(criteria::ode_accuracy());
    report(criteria::gradient_fidelity());
    report(criteria::distribution_oracles());
    report(criteria::prior_reproduction());
    report(criteria::sampler_calibration());
    report(criteria::end_to_end_determinism(work / "pipeline"));
    report(criteria::bayes_factor_sanity(work / "pipeline" / "a" / "fit", work / "bayes_factor"));
  }
  if (mode != "fast") {
    auto config = criteria::acceptance_study_config();
    if (const char* w = std::getenv("EPI_WORKERS")) config.workers = std::max(1L, std::strtol(w, nullptr, 10));
    config.progress = [](const std::string& msg) { std::cerr << msg << '\n'; };
    const auto study = epi::simstudy::run_study(config);
    epi::dataio::write_outputs(work / "study", epi::simstudy::study_outputs(study, config));
    report(criteria::parameter_recovery(study));
    report(criteria::error_profile(study));
    report(criteria::predictive_coverage(study));
  }

  std::size_t failed = 0;
  for (const auto& r : results) failed += r.pass ? 0u : 1u;
  std::cout << results.size() - failed << "/" << results.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
