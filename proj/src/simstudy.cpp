#include "epi/simstudy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "epi/analysis.hpp"
#include "epi/diagnostics.hpp"
#include "epi/random.hpp"
#include "epi/svg.hpp"

namespace epi::simstudy {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string na_or(double v) { return std::isfinite(v) ? dataio::format_double(v) : "NA"; }

std::vector<std::int64_t> schedule_for(const SimStudyConfig& config) {
  if (!config.tests.empty()) return config.tests;
  return default_test_schedule(config.train_bins + config.holdout_bins);
}

surveillance::SurveillanceSeries head(const surveillance::SurveillanceSeries& s, std::size_t bins) {
  surveillance::SurveillanceSeries out;
  out.bin_width = s.bin_width;
  out.tests.assign(s.tests.begin(), s.tests.begin() + static_cast<std::ptrdiff_t>(bins));
  out.cases.assign(s.cases.begin(), s.cases.begin() + static_cast<std::ptrdiff_t>(bins));
  out.deaths.assign(s.deaths.begin(), s.deaths.begin() + static_cast<std::ptrdiff_t>(bins));
  return out;
}

/// Parameters compared against the truth: all thirteen for the test-aware
/// model, the ten shared ones for the no-tests model.
std::size_t compared_params(CaseModel m) { return m == CaseModel::TestAware ? kNumParams : 10; }

}  // namespace

std::vector<std::int64_t> default_test_schedule(std::size_t bins, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("default_test_schedule: scale must be positive");
  std::vector<std::int64_t> out(bins);
  for (std::size_t l = 0; l < bins; ++l) {
    const double x = (static_cast<double>(l) - 6.0) / 1.8;
    const double per_bin = 1500.0 + 7500.0 / (1.0 + std::exp(-x));
    out[l] = static_cast<std::int64_t>(std::llround(scale * per_bin));
  }
  return out;
}

surveillance::SurveillanceSeries simulate_dataset(const ParamVector& truth,
                                                  std::span<const std::int64_t> tests,
                                                  Rng& rng, const ModelConstants& constants) {
  const auto theta = truth.to_array();
  const std::size_t bins = tests.size();
  if (bins == 0) throw std::invalid_argument("simulate_dataset: empty test schedule");
  const auto grid = uniform_grid(0.0, constants.bin_width, bins);
  const auto traj =
      solve(init_params_of(theta), rate_params_of(theta, constants.delta), grid);
  const auto dN_case = surveillance::increments(traj, kNIeIp, bins);
  const auto dN_death = surveillance::increments(traj, kNIpD, bins);

  surveillance::SurveillanceSeries s;
  s.bin_width = constants.bin_width;
  s.tests.assign(tests.begin(), tests.end());
  s.cases.resize(bins);
  s.deaths.resize(bins);
  for (std::size_t l = 0; l < bins; ++l) {
    if (tests[l] < 0) throw std::invalid_argument("simulate_dataset: negative test count");
    const double mu = surveillance::mean_positivity(dN_case[l], truth.alpha0, truth.alpha1);
    s.cases[l] = draw_beta_binomial(rng, tests[l], mu, truth.kappa);
    s.deaths[l] = draw_negative_binomial(rng, truth.rho * constants.pop_size * dN_death[l], truth.phi);
  }
  return s;
}

surveillance::SurveillanceSeries simulate_dataset(const ParamVector& truth,
                                                  std::span<const std::int64_t> tests,
                                                  std::uint64_t seed,
                                                  const ModelConstants& constants) {
  Rng rng = make_stream(seed, 0);
  return simulate_dataset(truth, tests, rng, constants);
}

std::string model_name(CaseModel m) {
  return m == CaseModel::TestAware ? "test_aware" : "no_tests";
}

mcmc::SamplerConfig SimStudyConfig::desk_sampler() {
  mcmc::SamplerConfig s;
  s.n_chains = 2;
  s.n_draws = 4000;
  s.n_warmup = 2000;
  s.parallel_chains = false;
  return s;
}

SimStudyConfig SimStudyConfig::full_scale() {
  SimStudyConfig c;
  c.n_datasets = 1000;
  c.sampler.n_chains = 4;
  c.sampler.n_draws = 8000;
  c.sampler.n_warmup = 4000;
  return c;
}

void SimStudyConfig::validate() const {
  if (n_datasets == 0) throw std::invalid_argument("sim study: n_datasets must be positive");
  if (train_bins == 0) throw std::invalid_argument("sim study: train_bins must be positive");
  if (models.empty()) throw std::invalid_argument("sim study: no models selected");
  if (workers == 0) throw std::invalid_argument("sim study: workers must be positive");
  if (!tests.empty() && tests.size() != train_bins + holdout_bins) {
    throw std::invalid_argument("sim study: test schedule must cover train_bins + holdout_bins");
  }
  sampler.validate();
}

std::string reported_name(const std::string& name) {
  if (name == "phi" || name == "kappa" || name == "phi_c") return "inv_sqrt_" + name;
  return name;
}

double reported_value(const std::string& name, double value) {
  if (name == "phi" || name == "kappa" || name == "phi_c") return 1.0 / std::sqrt(value);
  return value;
}

FitRecord fit_dataset(const surveillance::SurveillanceSeries& full, std::size_t dataset,
                      CaseModel model, const SimStudyConfig& config, std::uint64_t fit_seed) {
  FitRecord rec;
  rec.dataset = dataset;
  rec.model = model;
  const auto truth = config.truth.to_array();
  const std::size_t n_cmp = compared_params(model);
  try {
    const auto train = head(full, config.train_bins);
    auto spec = model == CaseModel::TestAware ? priors::default_prior_spec()
                                              : priors::no_tests_prior_spec();
    const Posterior post(train, spec, config.constants, model);
    auto sampler = config.sampler;
    sampler.seed = fit_seed;
    sampler.progress = false;
    const auto result = mcmc::sample(post.target(), sampler);
    const auto& draws = result.draws;

    for (std::size_t j = 0; j < draws.n_params(); ++j) {
      const auto& name = draws.names[j];
      auto col = draws.column(j);
      for (double& v : col) v = reported_value(name, v);
      std::sort(col.begin(), col.end());
      rec.parameters.push_back(reported_name(name));
      rec.truth.push_back(j < n_cmp ? reported_value(name, truth[j])
                                    : std::numeric_limits<double>::quiet_NaN());
      rec.median.push_back(analysis::quantile_sorted(col, 0.5));
      rec.lo.push_back(analysis::quantile_sorted(col, 0.025));
      rec.hi.push_back(analysis::quantile_sorted(col, 0.975));
    }
    try {
      rec.max_rhat = mcmc::diagnostics(draws).max_rhat();
    } catch (const std::exception&) {
      rec.max_rhat = std::numeric_limits<double>::quiet_NaN();
    }
    for (char d : draws.divergent) rec.divergences += d ? 1u : 0u;

    analysis::ForecastOptions fo;
    fo.train_bins = config.train_bins;
    fo.horizon_bins = config.holdout_bins;
    fo.seed = splitmix(fit_seed ^ 0xf0cafULL);
    if (config.holdout_bins > 0) {
      const auto fc = analysis::forecast(draws, config.constants, fo);
      const std::size_t total = std::min(fc.bins(), full.size());
      std::vector<double> col(fc.n_draws);
      for (std::size_t l = 0; l < total; ++l) {
        for (std::size_t d = 0; d < fc.n_draws; ++d) col[d] = static_cast<double>(fc.death(d, l));
        std::sort(col.begin(), col.end());
        const double lo = analysis::quantile_sorted(col, 0.025);
        const double hi = analysis::quantile_sorted(col, 0.975);
        const auto y = static_cast<double>(full.deaths[l]);
        const bool inside = y >= lo && y <= hi;
        if (l < config.train_bins) {
          ++rec.train_total;
          rec.train_covered += inside ? 1u : 0u;
        } else {
          ++rec.holdout_total;
          rec.holdout_covered += inside ? 1u : 0u;
        }
      }
    }
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  return rec;
}

std::vector<MetricRow> compute_metrics(const std::vector<FitRecord>& fits,
                                       const std::vector<CaseModel>& models) {
  std::vector<MetricRow> rows;
  for (CaseModel m : models) {
    const FitRecord* first = nullptr;
    for (const auto& f : fits) {
      if (f.model == m && f.ok) {
        first = &f;
        break;
      }
    }
    if (first == nullptr) continue;
    for (std::size_t j = 0; j < first->parameters.size(); ++j) {
      if (!std::isfinite(first->truth[j])) continue;
      const double truth = first->truth[j];
      std::vector<double> rad, rcw;
      std::size_t covered = 0;
      for (const auto& f : fits) {
        if (f.model != m || !f.ok) continue;
        rad.push_back(std::abs(f.median[j] - truth) / std::abs(truth));
        rcw.push_back((f.hi[j] - f.lo[j]) / std::abs(truth));
        covered += (f.lo[j] <= truth && truth <= f.hi[j]) ? 1u : 0u;
      }
      MetricRow r;
      r.parameter = first->parameters[j];
      r.model = m;
      r.truth = truth;
      r.n = rad.size();
      r.median_rel_abs_diff = analysis::quantile(rad, 0.5);
      r.median_rel_ci_width = analysis::quantile(rcw, 0.5);
      r.coverage_pct = 100.0 * static_cast<double>(covered) / static_cast<double>(r.n);
      rows.push_back(r);
    }
  }
  return rows;
}

const MetricRow& StudyResult::metric(const std::string& parameter, CaseModel model) const {
  for (const auto& r : metrics) {
    if (r.parameter == parameter && r.model == model) return r;
  }
  throw std::out_of_range("sim study: no metric for " + parameter + " (" + model_name(model) + ")");
}

std::size_t StudyResult::failures(CaseModel model) const {
  std::size_t n = 0;
  for (const auto& f : fits) n += (f.model == model && !f.ok) ? 1u : 0u;
  return n;
}

double StudyResult::holdout_coverage(CaseModel model) const {
  std::size_t covered = 0, total = 0;
  for (const auto& f : fits) {
    if (f.model != model || !f.ok) continue;
    covered += f.holdout_covered;
    total += f.holdout_total;
  }
  return total == 0 ? std::numeric_limits<double>::quiet_NaN()
                    : static_cast<double>(covered) / static_cast<double>(total);
}

double StudyResult::train_coverage(CaseModel model) const {
  std::size_t covered = 0, total = 0;
  for (const auto& f : fits) {
    if (f.model != model || !f.ok) continue;
    covered += f.train_covered;
    total += f.train_total;
  }
  return total == 0 ? std::numeric_limits<double>::quiet_NaN()
                    : static_cast<double>(covered) / static_cast<double>(total);
}

StudyResult run_study(const SimStudyConfig& config) {
  config.validate();
  const auto tests = schedule_for(config);
  const std::size_t n_models = config.models.size();
  const std::size_t n_tasks = config.n_datasets * n_models;

  std::vector<surveillance::SurveillanceSeries> data(config.n_datasets);
  for (std::size_t d = 0; d < config.n_datasets; ++d) {
    Rng rng = make_stream(config.seed, d);
    data[d] = simulate_dataset(config.truth, tests, rng, config.constants);
  }

  StudyResult result;
  result.fits.resize(n_tasks);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t task = next.fetch_add(1);
      if (task >= n_tasks) return;
      const std::size_t d = task / n_models;
      const CaseModel m = config.models[task % n_models];
      const std::uint64_t fit_seed =
          splitmix(config.seed ^ splitmix(static_cast<std::uint64_t>(task) + 1));
      result.fits[task] = fit_dataset(data[d], d, m, config, fit_seed);
      const std::size_t finished = done.fetch_add(1) + 1;
      if (config.progress) {
        std::ostringstream os;
        os << "sim-study: " << finished << "/" << n_tasks << " fits (dataset " << d << ", "
           << model_name(m) << (result.fits[task].ok ? "" : ", failed") << ")";
        const std::lock_guard<std::mutex> lock(progress_mutex);
        config.progress(os.str());
      }
    }
  };

  const std::size_t n_workers = std::min(config.workers, n_tasks);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  result.metrics = compute_metrics(result.fits, config.models);
  return result;
}

dataio::OutputBundle study_outputs(const StudyResult& result, const SimStudyConfig& config) {
  dataio::OutputBundle bundle;

  // Summary table: one row per parameter, metric columns per model.
  std::vector<std::string> params;
  for (const auto& r : result.metrics) {
    if (std::find(params.begin(), params.end(), r.parameter) == params.end()) {
      params.push_back(r.parameter);
    }
  }
  std::ostringstream table;
  table << "parameter,truth";
  for (CaseModel m : config.models) {
    const auto n = model_name(m);
    table << ',' << n << "_rel_abs_diff," << n << "_rel_ci_width," << n << "_coverage_pct";
  }
  table << '\n';
  for (const auto& p : params) {
    double truth = std::numeric_limits<double>::quiet_NaN();
    std::ostringstream cells;
    for (CaseModel m : config.models) {
      const MetricRow* row = nullptr;
      for (const auto& r : result.metrics) {
        if (r.parameter == p && r.model == m) row = &r;
      }
      if (row == nullptr) {
        cells << ",NA,NA,NA";
        continue;
      }
      truth = row->truth;
      cells << ',' << na_or(row->median_rel_abs_diff) << ',' << na_or(row->median_rel_ci_width)
            << ',' << na_or(row->coverage_pct);
    }
    table << p << ',' << na_or(truth) << cells.str() << '\n';
  }
  bundle.files["metrics.csv"] = table.str();

  std::ostringstream fits;
  fits << "dataset,model,ok,parameter,truth,median,q2.5,q97.5,max_rhat,divergences\n";
  for (const auto& f : result.fits) {
    if (!f.ok) {
      fits << f.dataset << ',' << model_name(f.model) << ",0,NA,NA,NA,NA,NA,NA,NA\n";
      continue;
    }
    for (std::size_t j = 0; j < f.parameters.size(); ++j) {
      fits << f.dataset << ',' << model_name(f.model) << ",1," << f.parameters[j] << ','
           << na_or(f.truth[j]) << ',' << na_or(f.median[j]) << ',' << na_or(f.lo[j]) << ','
           << na_or(f.hi[j]) << ',' << na_or(f.max_rhat) << ',' << f.divergences << '\n';
    }
  }
  bundle.files["fits.csv"] = fits.str();

  std::ostringstream pred;
  pred << "model,fits,failures,train_death_coverage,holdout_death_coverage\n";
  for (CaseModel m : config.models) {
    std::size_t n = 0;
    for (const auto& f : result.fits) n += f.model == m ? 1u : 0u;
    pred << model_name(m) << ',' << n << ',' << result.failures(m) << ','
         << na_or(result.train_coverage(m)) << ',' << na_or(result.holdout_coverage(m)) << '\n';
  }
  bundle.files["predictive.csv"] = pred.str();

  for (CaseModel m : config.models) {
    std::vector<svg::BoxGroup> rad, rcw;
    const FitRecord* first = nullptr;
    for (const auto& f : result.fits) {
      if (f.model == m && f.ok) {
        first = &f;
        break;
      }
    }
    if (first == nullptr) continue;
    for (std::size_t j = 0; j < first->parameters.size(); ++j) {
      if (!std::isfinite(first->truth[j])) continue;
      svg::BoxGroup a{first->parameters[j], {}}, w{first->parameters[j], {}};
      const double truth = first->truth[j];
      for (const auto& f : result.fits) {
        if (f.model != m || !f.ok) continue;
        a.values.push_back(std::abs(f.median[j] - truth) / std::abs(truth));
        w.values.push_back((f.hi[j] - f.lo[j]) / std::abs(truth));
      }
      rad.push_back(std::move(a));
      rcw.push_back(std::move(w));
    }
    const auto n = model_name(m);
    bundle.files["rel_abs_diff_" + n + ".svg"] =
        svg::box_plot("Relative absolute difference (" + n + ")", "|median - truth| / truth", rad);
    bundle.files["rel_ci_width_" + n + ".svg"] =
        svg::box_plot("Relative 95% interval width (" + n + ")", "width / truth", rcw);
  }

  nlohmann::json manifest;
  manifest["kind"] = "sim-study";
  manifest["n_datasets"] = config.n_datasets;
  manifest["train_bins"] = config.train_bins;
  manifest["holdout_bins"] = config.holdout_bins;
  manifest["seed"] = config.seed;
  manifest["tests"] = schedule_for(config);
  manifest["sampler"] = {{"chains", config.sampler.n_chains},
                         {"draws", config.sampler.n_draws},
                         {"warmup", config.sampler.n_warmup},
                         {"target_accept", config.sampler.target_accept},
                         {"max_tree_depth", config.sampler.max_tree_depth}};
  nlohmann::json models = nlohmann::json::array();
  for (CaseModel m : config.models) {
    models.push_back({{"model", model_name(m)}, {"failures", result.failures(m)}});
  }
  manifest["models"] = models;
  bundle.manifest = manifest;
  return bundle;
}

}  // namespace epi::simstudy
