#include "epi/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "epi/analysis.hpp"
#include "epi/dataio.hpp"
#include "epi/diagnostics.hpp"
#include "epi/params.hpp"
#include "epi/posterior.hpp"
#include "epi/priors.hpp"
#include "epi/sampler.hpp"
#include "epi/simstudy.hpp"
#include "epi/svg.hpp"

namespace epi::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kBayesFactorSeed = 20200519;
constexpr std::size_t kBayesFactorPriorDraws = 100000;

void apply(const Overrides& o, mcmc::SamplerConfig& s) {
  if (o.seed) s.seed = *o.seed;
  if (o.chains) s.n_chains = *o.chains;
  if (o.draws) s.n_draws = *o.draws;
  if (o.warmup) s.n_warmup = *o.warmup;
}

void check_sampler(const mcmc::SamplerConfig& s) {
  if (s.n_chains < 2) {
    throw dataio::DataError("sampler: chains must be at least 2 (convergence diagnostics compare chains)");
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw dataio::DataError(std::string("sampler: ") + e.what());
  }
}

/// Fixed quantities of a finished fit, stored as fit.json next to the draws.
struct FitMeta {
  ModelConstants constants;
  priors::PriorSpec priors;
  std::size_t bins = 0;
  std::uint64_t forecast_seed = 1;
  double forecast_weeks = 4.0;
};

json meta_to_json(const FitMeta& m, const dataio::RunConfig& cfg) {
  json j;
  j["schema_version"] = dataio::kSchemaVersion;
  j["case_model"] = "test_aware";
  j["population_size"] = m.constants.pop_size;
  j["delta"] = m.constants.delta;
  j["bin_days"] = cfg.bin_days;
  j["bin_width_weeks"] = m.constants.bin_width;
  j["bins"] = m.bins;
  j["period"] = {{"start", dataio::format_date(cfg.period.start)},
                 {"end", dataio::format_date(cfg.period.end)}};
  j["priors"] = dataio::prior_spec_to_json(m.priors);
  j["sampler"] = {{"chains", cfg.sampler.n_chains},
                  {"draws", cfg.sampler.n_draws},
                  {"warmup", cfg.sampler.n_warmup},
                  {"target_accept", cfg.sampler.target_accept},
                  {"max_tree_depth", cfg.sampler.max_tree_depth},
                  {"seed", cfg.sampler.seed}};
  j["forecast"] = {{"horizon_weeks", m.forecast_weeks}, {"seed", m.forecast_seed}};
  j["config_sha256"] = dataio::canonical_hash(cfg.source);
  return j;
}

FitMeta read_meta(const fs::path& fit_dir) {
  const fs::path p = fit_dir / "fit.json";
  if (!fs::exists(p)) throw dataio::DataError("missing fit artifact: " + p.string());
  json j;
  try {
    j = json::parse(dataio::read_file(p));
  } catch (const json::exception& e) {
    throw dataio::DataError(p.string() + ": " + e.what());
  }
  FitMeta m;
  try {
    if (j.at("schema_version").get<int>() != dataio::kSchemaVersion) {
      throw dataio::DataError(p.string() + ": unsupported schema_version");
    }
    m.constants.pop_size = j.at("population_size").get<double>();
    m.constants.delta = j.at("delta").get<double>();
    m.constants.bin_width = j.at("bin_width_weeks").get<double>();
    m.bins = j.at("bins").get<std::size_t>();
    m.priors = dataio::prior_spec_from_json(j.at("priors"), "priors");
    m.forecast_seed = j.at("forecast").at("seed").get<std::uint64_t>();
    m.forecast_weeks = j.at("forecast").at("horizon_weeks").get<double>();
  } catch (const json::exception& e) {
    throw dataio::DataError(p.string() + ": " + e.what());
  }
  return m;
}

struct FitDir {
  FitMeta meta;
  PosteriorDraws draws;
  surveillance::SurveillanceSeries data;
};

FitDir read_fit_dir(const fs::path& dir) {
  FitDir f;
  f.meta = read_meta(dir);
  for (const char* name : {"draws.csv", "data.csv"}) {
    if (!fs::exists(dir / name)) throw dataio::DataError("missing fit artifact: " + (dir / name).string());
  }
  f.draws = dataio::read_draws_csv(dir / "draws.csv");
  f.data = dataio::read_binned_counts(dir / "data.csv", f.meta.constants.bin_width);
  if (f.data.size() != f.meta.bins) {
    throw dataio::DataError((dir / "data.csv").string() + ": bin count differs from fit.json");
  }
  return f;
}

std::string table_csv(const std::vector<const analysis::SummaryTable*>& tables) {
  std::string out;
  bool first = true;
  for (const auto* t : tables) {
    auto csv = dataio::summary_csv(*t);
    if (!first) csv.erase(0, csv.find('\n') + 1);
    out += csv;
    first = false;
  }
  return out;
}

/// Summary files of a fit, shared by fit and summarize.
void add_summaries(const FitDir& fit, dataio::OutputBundle& bundle, CommandResult& result) {
  const auto& draws = fit.draws;
  const auto& constants = fit.meta.constants;

  auto params = analysis::parameter_summary(draws);
  const double t_end = static_cast<double>(fit.meta.bins) * constants.bin_width;
  double observed_cases = 0.0;
  for (auto c : fit.data.cases) observed_cases += static_cast<double>(c);
  if (observed_cases > 0.0) {
    params.rows.push_back(analysis::summarize(
        "underreporting_factor", t_end,
        analysis::underreporting_factor(draws, observed_cases, t_end, constants)));
  }
  bundle.files["summary.csv"] = dataio::summary_csv(params);

  const auto diag = mcmc::diagnostics(draws);
  std::ostringstream dcsv;
  dcsv << "parameter,rhat,ess\n";
  for (const auto& p : diag.parameters) {
    dcsv << p.name << ',' << (p.degenerate ? "NA" : dataio::format_double(p.rhat)) << ','
         << (p.degenerate ? "NA" : dataio::format_double(p.ess)) << '\n';
  }
  bundle.files["diagnostics.csv"] = dcsv.str();

  const auto latent = analysis::latent_summaries(draws, fit.meta.bins, constants);
  bundle.files["latent.csv"] = table_csv({&latent.cumulative_deaths, &latent.cumulative_incidence,
                                          &latent.prevalence, &latent.effective_R});
  bundle.files["effective_R.svg"] =
      svg::band_plot("Effective reproduction number", "weeks", "R_e", latent.effective_R);
  bundle.files["prevalence.svg"] =
      svg::band_plot("Infectious prevalence", "weeks", "people", latent.prevalence);
  bundle.files["cumulative_incidence.svg"] =
      svg::band_plot("Cumulative infections", "weeks", "people", latent.cumulative_incidence);
  bundle.files["cumulative_deaths.svg"] =
      svg::band_plot("Cumulative deaths", "weeks", "people", latent.cumulative_deaths);

  const auto bf = analysis::bayes_factor_Re_gt_1(draws, fit.meta.priors, t_end, constants,
                                                 kBayesFactorPriorDraws, kBayesFactorSeed);
  json bfj = {{"quantity", "R_e > 1"},
              {"time_weeks", t_end},
              {"bayes_factor", bf.value},
              {"posterior_fraction", bf.posterior_fraction},
              {"prior_fraction", bf.prior_fraction},
              {"lower_bound", bf.lower_bound},
              {"upper_bound", bf.upper_bound},
              {"text", bf.text()}};
  bundle.files["bayes_factor.json"] = bfj.dump(2) + "\n";

  std::size_t divergences = 0;
  for (char d : draws.divergent) divergences += d ? 1u : 0u;
  const double max_rhat = diag.max_rhat();
  result.details["max_rhat"] = max_rhat;
  result.details["min_ess"] = diag.min_ess();
  result.details["divergences"] = divergences;
  result.details["bayes_factor_Re_gt_1"] = bf.text();
  if (divergences > 0) {
    result.warnings.push_back(std::to_string(divergences) + " divergent transitions");
  }
  if (!(max_rhat <= kRhatFail)) {
    result.exit_code = 2;
    result.warnings.push_back("max R-hat " + dataio::format_double(max_rhat) + " exceeds " +
                              dataio::format_double(kRhatFail) + ": chains did not converge");
  } else if (max_rhat > kRhatWarn) {
    result.warnings.push_back("max R-hat " + dataio::format_double(max_rhat) + " exceeds " +
                              dataio::format_double(kRhatWarn));
  }
}

void record(CommandResult& result, const std::vector<fs::path>& written) {
  result.artifacts.insert(result.artifacts.end(), written.begin(), written.end());
}

fs::path require_out(const fs::path& out, const char* command) {
  if (out.empty()) throw dataio::DataError(std::string(command) + ": --out is required");
  return out;
}

std::optional<CaseModel> case_model_from_name(const std::string& s) {
  if (s == "test_aware") return CaseModel::TestAware;
  if (s == "no_tests") return CaseModel::NoTests;
  return std::nullopt;
}

simstudy::SimStudyConfig sim_config_from_json(const json& doc, simstudy::SimStudyConfig c) {
  if (!doc.is_object()) throw dataio::DataError("sim-study config: top level must be an object");
  auto count = [&](const json& obj, const char* key, const std::string& path, std::size_t& dst) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw dataio::DataError("sim-study config: '" + path + key + "' must be a non-negative integer");
    }
    dst = v.get<std::size_t>();
  };
  if (doc.contains("schema_version") && doc.at("schema_version") != dataio::kSchemaVersion) {
    throw dataio::DataError("sim-study config: 'schema_version' must be " +
                            std::to_string(dataio::kSchemaVersion));
  }
  count(doc, "n_datasets", "", c.n_datasets);
  count(doc, "train_bins", "", c.train_bins);
  count(doc, "holdout_bins", "", c.holdout_bins);
  if (doc.contains("seed")) c.seed = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("population_size")) c.constants.pop_size = doc.at("population_size").get<double>();
  if (doc.contains("delta")) c.constants.delta = doc.at("delta").get<double>();
  if (doc.contains("tests")) {
    const auto& t = doc.at("tests");
    if (!t.is_array()) throw dataio::DataError("sim-study config: 'tests' must be an array");
    c.tests.clear();
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (!t[i].is_number_integer() || t[i].get<long long>() < 0) {
        throw dataio::DataError("sim-study config: 'tests[" + std::to_string(i) +
                                "]' must be a non-negative integer");
      }
      c.tests.push_back(t[i].get<std::int64_t>());
    }
  }
  if (doc.contains("models")) {
    c.models.clear();
    for (const auto& m : doc.at("models")) {
      const auto model = case_model_from_name(m.get<std::string>());
      if (!model) throw dataio::DataError("sim-study config: 'models' entries must be test_aware or no_tests");
      c.models.push_back(*model);
    }
  }
  if (doc.contains("truth")) {
    auto theta = c.truth.to_array();
    for (const auto& [name, value] : doc.at("truth").items()) {
      std::size_t j = 0;
      while (j < kNumParams && kParamNames[j] != name) ++j;
      if (j == kNumParams) throw dataio::DataError("sim-study config: 'truth." + name + "' is not a model parameter");
      theta[j] = value.get<double>();
    }
    c.truth = ParamVector::from_array(theta);
  }
  if (doc.contains("sampler")) {
    const auto& s = doc.at("sampler");
    count(s, "chains", "sampler.", c.sampler.n_chains);
    count(s, "draws", "sampler.", c.sampler.n_draws);
    count(s, "warmup", "sampler.", c.sampler.n_warmup);
    if (s.contains("target_accept")) c.sampler.target_accept = s.at("target_accept").get<double>();
    if (s.contains("max_tree_depth")) c.sampler.max_tree_depth = s.at("max_tree_depth").get<int>();
  }
  return c;
}

std::size_t workers_from_env() {
  const char* v = std::getenv("EPI_WORKERS");
  if (v == nullptr || *v == '\0') return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) throw dataio::DataError("EPI_WORKERS must be a positive integer");
  return static_cast<std::size_t>(n);
}

}  // namespace

json CommandResult::to_json() const {
  json j;
  j["command"] = command;
  j["exit_code"] = exit_code;
  json paths = json::array();
  for (const auto& p : artifacts) paths.push_back(p.string());
  j["artifacts"] = paths;
  j["summary"] = summary;
  j["warnings"] = warnings;
  j["details"] = details;
  return j;
}

CommandResult cmd_fit(const fs::path& config_path, const Overrides& overrides, const fs::path& out) {
  CommandResult result;
  result.command = "fit";
  auto cfg = dataio::load_config(config_path);
  apply(overrides, cfg.sampler);
  check_sampler(cfg.sampler);
  const fs::path dir = out.empty() ? cfg.output_dir : out;
  if (dir.empty()) throw dataio::DataError("fit: no output directory (set --out or output_dir)");

  const auto series = dataio::load_series(cfg);
  const Posterior post(series, cfg.priors, cfg.constants, CaseModel::TestAware);
  auto sampler = cfg.sampler;
  sampler.progress = true;
  std::cerr << "fit: " << series.size() << " bins, " << sampler.n_chains << " chains\n";
  const auto sampled = mcmc::sample(post.target(), sampler);

  FitDir fit;
  fit.meta.constants = cfg.constants;
  fit.meta.priors = cfg.priors;
  fit.meta.bins = series.size();
  fit.meta.forecast_seed = cfg.forecast_seed;
  fit.meta.forecast_weeks = cfg.forecast_weeks;
  fit.draws = sampled.draws;
  fit.data = series;

  dataio::OutputBundle bundle;
  bundle.files["draws.csv"] = dataio::draws_csv(fit.draws);
  bundle.files["data.csv"] = dataio::binned_counts_csv(series);
  bundle.files["fit.json"] = meta_to_json(fit.meta, cfg).dump(2) + "\n";
  add_summaries(fit, bundle, result);
  if (post.floor_events() > 0) {
    result.warnings.push_back(std::to_string(post.floor_events()) +
                              " incidence values clamped at the positivity floor");
  }
  bundle.manifest = {{"kind", "fit"}, {"config_sha256", dataio::canonical_hash(cfg.source)}};
  record(result, dataio::write_outputs(dir, bundle));
  result.details["draws"] = fit.draws.size();
  std::ostringstream s;
  s << "fit " << series.size() << " bins with " << fit.draws.n_chains << " chains x "
    << fit.draws.draws_per_chain << " draws; max R-hat "
    << dataio::format_double(result.details["max_rhat"].get<double>());
  result.summary = s.str();
  return result;
}

CommandResult cmd_summarize(const fs::path& fit_dir, const fs::path& out) {
  CommandResult result;
  result.command = "summarize";
  const auto fit = read_fit_dir(fit_dir);
  dataio::OutputBundle bundle;
  add_summaries(fit, bundle, result);
  bundle.manifest = {{"kind", "summary"},
                     {"draws_sha256", dataio::sha256_hex(dataio::read_file(fit_dir / "draws.csv"))}};
  record(result, dataio::write_outputs(out.empty() ? fit_dir / "summary" : out, bundle));
  result.summary = "summarized " + std::to_string(fit.draws.size()) + " draws";
  return result;
}

CommandResult cmd_forecast(const fs::path& fit_dir, double horizon_weeks,
                           std::optional<std::uint64_t> seed, const fs::path& out) {
  CommandResult result;
  result.command = "forecast";
  if (!(horizon_weeks > 0.0) || !std::isfinite(horizon_weeks)) {
    throw dataio::DataError("forecast: --horizon must be a positive number of weeks");
  }
  const auto fit = read_fit_dir(fit_dir);
  const auto& constants = fit.meta.constants;

  analysis::ForecastOptions fo;
  fo.train_bins = fit.meta.bins;
  fo.horizon_bins = analysis::horizon_bins_for_weeks(horizon_weeks, constants.bin_width);
  fo.seed = seed.value_or(fit.meta.forecast_seed);
  const auto fc = analysis::forecast(fit.draws, constants, fo);
  result.warnings.insert(result.warnings.end(), fc.warnings.begin(), fc.warnings.end());

  dataio::OutputBundle bundle;
  bundle.files["forecast_deaths.csv"] = dataio::summary_csv(fc.death_summary);
  if (!fc.positivity.empty()) {
    bundle.files["forecast_positivity.csv"] = dataio::summary_csv(fc.positivity_summary);
  }
  std::ostringstream draws_csv;
  draws_csv << "draw,bin,time_weeks,deaths\n";
  for (std::size_t d = 0; d < fc.n_draws; ++d) {
    for (std::size_t l = 0; l < fc.bins(); ++l) {
      draws_csv << d << ',' << l << ',' << dataio::format_double(fc.bin_end[l]) << ','
                << fc.death(d, l) << '\n';
    }
  }
  bundle.files["forecast_draws.csv"] = draws_csv.str();
  std::vector<svg::Point> observed;
  for (std::size_t l = 0; l < fit.data.size(); ++l) {
    observed.push_back({fc.bin_end[l], static_cast<double>(fit.data.deaths[l])});
  }
  bundle.files["forecast_deaths.svg"] =
      svg::band_plot("Reported deaths per bin", "weeks", "deaths", fc.death_summary, observed);
  bundle.manifest = {{"kind", "forecast"},
                     {"horizon_weeks", horizon_weeks},
                     {"horizon_bins", fo.horizon_bins},
                     {"seed", fo.seed},
                     {"draws_sha256", dataio::sha256_hex(dataio::read_file(fit_dir / "draws.csv"))}};
  record(result, dataio::write_outputs(out.empty() ? fit_dir / "forecast" : out, bundle));
  result.details["horizon_bins"] = fo.horizon_bins;
  result.summary = "forecast " + std::to_string(fo.horizon_bins) + " bins from " +
                   std::to_string(fc.n_draws) + " draws";
  return result;
}

CommandResult cmd_simulate(const fs::path& config_path, const Overrides& overrides,
                           const fs::path& out) {
  CommandResult result;
  result.command = "simulate";
  const fs::path dir = require_out(out, "simulate");
  const auto cfg = dataio::load_config(config_path);
  const std::size_t bins = cfg.bins();

  auto theta = simulation_truth().to_array();
  std::vector<std::int64_t> tests = simstudy::default_test_schedule(bins);
  std::uint64_t seed = 1;
  if (cfg.source.contains("simulation")) {
    const auto& sim = cfg.source.at("simulation");
    if (sim.contains("truth")) {
      for (const auto& [name, value] : sim.at("truth").items()) {
        std::size_t j = 0;
        while (j < kNumParams && kParamNames[j] != name) ++j;
        if (j == kNumParams) throw dataio::DataError("config: 'simulation.truth." + name + "' is not a model parameter");
        if (!value.is_number()) throw dataio::DataError("config: 'simulation.truth." + name + "' must be a number");
        theta[j] = value.get<double>();
      }
    }
    if (sim.contains("tests")) {
      tests.clear();
      for (const auto& v : sim.at("tests")) {
        if (!v.is_number_integer() || v.get<long long>() < 0) {
          throw dataio::DataError("config: 'simulation.tests' entries must be non-negative integers");
        }
        tests.push_back(v.get<std::int64_t>());
      }
      if (tests.size() != bins) {
        throw dataio::DataError("config: 'simulation.tests' has " + std::to_string(tests.size()) +
                                " entries, the period has " + std::to_string(bins) + " bins");
      }
    }
    if (sim.contains("seed")) seed = sim.at("seed").get<std::uint64_t>();
  }
  if (overrides.seed) seed = *overrides.seed;
  const auto truth = ParamVector::from_array(theta);
  if (!priors::in_support(theta, priors::default_prior_spec())) {
    throw dataio::DataError("config: 'simulation.truth' lies outside the parameter support");
  }
  const auto series = simstudy::simulate_dataset(truth, tests, seed, cfg.constants);

  json fit_cfg = cfg.source;
  fit_cfg["data"] = {{"format", "binned"}, {"path", "data.csv"}};
  fit_cfg.erase("output_dir");
  dataio::OutputBundle bundle;
  bundle.files["data.csv"] = dataio::binned_counts_csv(series);
  bundle.files["config.json"] = fit_cfg.dump(2) + "\n";
  bundle.manifest = {{"kind", "simulate"}, {"seed", seed}, {"config_sha256", dataio::canonical_hash(cfg.source)}};
  record(result, dataio::write_outputs(dir, bundle));
  result.summary = "simulated " + std::to_string(bins) + " bins with seed " + std::to_string(seed);
  return result;
}

CommandResult cmd_sim_study(const fs::path& config_path, const Overrides& overrides,
                            bool full_scale, const fs::path& out) {
  CommandResult result;
  result.command = "sim-study";
  const fs::path dir = require_out(out, "sim-study");
  auto config = full_scale ? simstudy::SimStudyConfig::full_scale() : simstudy::SimStudyConfig{};
  if (!config_path.empty()) {
    json doc;
    try {
      doc = json::parse(dataio::read_file(config_path));
    } catch (const json::exception& e) {
      throw dataio::DataError(config_path.string() + ": " + e.what());
    }
    try {
      config = sim_config_from_json(doc, config);
    } catch (const json::exception& e) {
      throw dataio::DataError(config_path.string() + ": " + e.what());
    }
  }
  if (overrides.seed) config.seed = *overrides.seed;
  apply(Overrides{std::nullopt, overrides.chains, overrides.draws, overrides.warmup}, config.sampler);
  config.sampler.parallel_chains = false;
  check_sampler(config.sampler);
  config.workers = workers_from_env();
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw dataio::DataError(e.what());
  }
  config.progress = [](const std::string& msg) { std::cerr << msg << '\n'; };

  const auto study = simstudy::run_study(config);
  const auto bundle = simstudy::study_outputs(study, config);
  record(result, dataio::write_outputs(dir, bundle));
  std::size_t failures = 0;
  for (CaseModel m : config.models) {
    failures += study.failures(m);
    result.details[simstudy::model_name(m)] = {
        {"failures", study.failures(m)},
        {"holdout_death_coverage", study.holdout_coverage(m)}};
    for (const auto& r : study.metrics) {
      if (r.model == m && r.parameter == "R0") {
        result.details[simstudy::model_name(m)]["R0_coverage_pct"] = r.coverage_pct;
        result.details[simstudy::model_name(m)]["R0_rel_abs_diff"] = r.median_rel_abs_diff;
      }
    }
  }
  if (failures > 0) result.warnings.push_back(std::to_string(failures) + " fits failed and were excluded");
  result.summary = "fitted " + std::to_string(config.n_datasets) + " datasets with " +
                   std::to_string(config.models.size()) + " models";
  return result;
}

int run(int argc, char** argv) {
  CLI::App app{"Bayesian SEIR inference from tests, cases and deaths"};
  app.require_subcommand(1);

  fs::path config, out, fit_dir;
  Overrides ov;
  std::uint64_t seed = 0;
  std::size_t chains = 0, draws = 0, warmup = 0;
  double horizon = 4.0;
  bool full_scale = false;

  auto add_sampler_flags = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--chains", chains, "number of chains");
    cmd->add_option("--draws", draws, "total iterations across chains, warmup included");
    cmd->add_option("--warmup", warmup, "total warmup iterations across chains");
  };

  auto* fit = app.add_subcommand("fit", "fit the model to surveillance data");
  fit->add_option("--config", config, "run configuration (JSON)")->required();
  fit->add_option("--out", out, "output directory");
  add_sampler_flags(fit);

  auto* simulate = app.add_subcommand("simulate", "simulate binned counts from known parameters");
  simulate->add_option("--config", config, "run configuration (JSON)")->required();
  simulate->add_option("--out", out, "output directory")->required();
  simulate->add_option("--seed", seed, "random seed");

  auto* forecast = app.add_subcommand("forecast", "posterior predictive forecast from a fit");
  forecast->add_option("fit_dir", fit_dir, "fit output directory")->required();
  forecast->add_option("--horizon", horizon, "horizon in weeks");
  forecast->add_option("--out", out, "output directory");
  forecast->add_option("--seed", seed, "random seed");

  auto* summarize = app.add_subcommand("summarize", "recompute summaries from a fit");
  summarize->add_option("fit_dir", fit_dir, "fit output directory")->required();
  summarize->add_option("--out", out, "output directory");

  auto* study = app.add_subcommand("sim-study", "simulation study of parameter recovery");
  study->add_option("--config", config, "study configuration (JSON)");
  study->add_option("--out", out, "output directory")->required();
  study->add_flag("--full-scale", full_scale, "1000 datasets, 4 chains of 2000 iterations");
  add_sampler_flags(study);

  CommandResult result;
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    result.command = "parse";
    result.exit_code = 1;
    result.summary = e.what();
    std::cout << result.to_json().dump() << std::endl;
    return 1;
  }

  auto given = [](CLI::App* cmd, const char* name) {
    return cmd->get_option_no_throw(name) != nullptr && cmd->count(name) > 0;
  };
  CLI::App* cmd = app.get_subcommands().front();
  if (given(cmd, "--seed")) ov.seed = seed;
  if (given(cmd, "--chains")) ov.chains = chains;
  if (given(cmd, "--draws")) ov.draws = draws;
  if (given(cmd, "--warmup")) ov.warmup = warmup;
  const std::optional<std::uint64_t> seed_opt = ov.seed;

  try {
    if (cmd == fit) {
      result = cmd_fit(config, ov, out);
    } else if (cmd == simulate) {
      result = cmd_simulate(config, ov, out);
    } else if (cmd == forecast) {
      result = cmd_forecast(fit_dir, horizon, seed_opt, out);
    } else if (cmd == summarize) {
      result = cmd_summarize(fit_dir, out);
    } else {
      result = cmd_sim_study(config, ov, full_scale, out);
    }
  } catch (const std::exception& e) {
    result.command = cmd->get_name();
    result.exit_code = 1;
    result.artifacts.clear();
    result.summary = std::string("error: ") + e.what();
  }
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  if (result.exit_code == 1) std::cerr << result.summary << '\n';
  std::cout << result.to_json().dump() << std::endl;
  return result.exit_code;
}

}  // namespace epi::cli
