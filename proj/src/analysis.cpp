#include "epi/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "epi/math.hpp"
#include "epi/surveillance.hpp"

namespace epi::analysis {

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile: no values");
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double quantile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, p);
}

SummaryRow summarize(std::string label, double time, std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("summarize: no values for " + label);
  std::sort(values.begin(), values.end());
  SummaryRow r;
  r.label = std::move(label);
  r.time = time;
  r.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  r.median = quantile_sorted(values, 0.5);
  r.i50 = {quantile_sorted(values, 0.25), quantile_sorted(values, 0.75)};
  r.i80 = {quantile_sorted(values, 0.10), quantile_sorted(values, 0.90)};
  r.i95 = {quantile_sorted(values, 0.025), quantile_sorted(values, 0.975)};
  return r;
}

SummaryTable parameter_summary(const PosteriorDraws& draws) {
  SummaryTable t;
  for (std::size_t j = 0; j < draws.n_params(); ++j) {
    t.rows.push_back(summarize(draws.names[j], 0.0, draws.column(j)));
  }
  return t;
}

std::vector<Trajectory> solve_draws(const PosteriorDraws& draws, std::span<const double> grid,
                                    const ModelConstants& constants) {
  std::vector<Trajectory> out;
  out.reserve(draws.size());
  for (std::size_t d = 0; d < draws.size(); ++d) {
    const auto theta = draws.row(d);
    out.push_back(solve(init_params_of(theta), rate_params_of(theta, constants.delta), grid));
  }
  return out;
}

namespace {

std::vector<double> grid_to(double t) {
  if (t < 0.0) throw std::out_of_range("time before the start of the fitting window");
  if (t == 0.0) return {0.0};
  return {0.0, t};
}

}  // namespace

std::vector<double> effective_R(const PosteriorDraws& draws, double t,
                                const ModelConstants& constants) {
  const auto grid = grid_to(t);
  std::vector<double> out(draws.size());
  for (std::size_t d = 0; d < draws.size(); ++d) {
    const auto theta = draws.row(d);
    const auto traj = solve(init_params_of(theta), rate_params_of(theta, constants.delta), grid);
    out[d] = traj.value(traj.size() - 1, kS) * theta[kR0];
  }
  return out;
}

std::string BayesFactor::text() const {
  std::ostringstream os;
  os.precision(4);
  if (lower_bound) os << "> ";
  if (upper_bound) os << "< ";
  os << value;
  return os.str();
}

BayesFactor bayes_factor(double q, std::size_t n_posterior, double p0, std::size_t n_prior) {
  if (n_posterior == 0 || n_prior == 0) throw std::invalid_argument("bayes_factor: no draws");
  if (p0 <= 0.0 || p0 >= 1.0) {
    // Odds under the reference cannot be formed; apply the same 1/n correction.
    p0 = std::clamp(p0, 1.0 / static_cast<double>(n_prior), 1.0 - 1.0 / static_cast<double>(n_prior));
  }
  BayesFactor bf;
  bf.posterior_fraction = q;
  bf.prior_fraction = p0;
  double qe = q;
  const double inv_n = 1.0 / static_cast<double>(n_posterior);
  if (q >= 1.0) {
    qe = 1.0 - inv_n;
    bf.lower_bound = true;
  } else if (q <= 0.0) {
    qe = inv_n;
    bf.upper_bound = true;
  }
  bf.value = (qe / (1.0 - qe)) / (p0 / (1.0 - p0));
  return bf;
}

double prior_fraction_Re_gt_1(const priors::PriorSpec& spec, double t,
                              const ModelConstants& constants, std::size_t n_draws,
                              std::uint64_t seed) {
  if (n_draws == 0) throw std::invalid_argument("prior_fraction_Re_gt_1: no draws requested");
  const auto grid = grid_to(t);
  Rng rng = make_stream(seed, 0);
  std::size_t above = 0;
  for (std::size_t i = 0; i < n_draws; ++i) {
    const auto theta = priors::sample_prior(spec, rng);
    const auto traj = solve(init_params_of(theta), rate_params_of(theta, constants.delta), grid);
    if (traj.value(traj.size() - 1, kS) * theta[kR0] > 1.0) ++above;
  }
  return static_cast<double>(above) / static_cast<double>(n_draws);
}

namespace {

double fraction_above_one(std::span<const double> values) {
  const auto above = std::count_if(values.begin(), values.end(), [](double v) { return v > 1.0; });
  return static_cast<double>(above) / static_cast<double>(values.size());
}

}  // namespace

BayesFactor bayes_factor_Re_gt_1(const PosteriorDraws& draws, const priors::PriorSpec& spec,
                                 double t, const ModelConstants& constants,
                                 std::size_t n_prior_draws, std::uint64_t seed) {
  const auto re = effective_R(draws, t, constants);
  const double p0 = prior_fraction_Re_gt_1(spec, t, constants, n_prior_draws, seed);
  return bayes_factor(fraction_above_one(re), re.size(), p0, n_prior_draws);
}

BayesFactor bayes_factor_Re_gt_1(const PosteriorDraws& draws, const PosteriorDraws& reference,
                                 double t, const ModelConstants& constants) {
  const auto re = effective_R(draws, t, constants);
  const auto re_ref = effective_R(reference, t, constants);
  return bayes_factor(fraction_above_one(re), re.size(), fraction_above_one(re_ref), re_ref.size());
}

std::vector<double> underreporting_factor(const PosteriorDraws& draws,
                                          double observed_cumulative_cases, double t,
                                          const ModelConstants& constants) {
  if (!(observed_cumulative_cases > 0.0)) {
    throw std::invalid_argument("underreporting_factor: no observed cases");
  }
  const auto grid = grid_to(t);
  std::vector<double> out(draws.size());
  for (std::size_t d = 0; d < draws.size(); ++d) {
    const auto theta = draws.row(d);
    const auto traj = solve(init_params_of(theta), rate_params_of(theta, constants.delta), grid);
    out[d] = constants.pop_size * traj.value(traj.size() - 1, kNSE) / observed_cumulative_cases;
  }
  return out;
}

std::vector<double> percent_change(std::span<const double> a, std::span<const double> b, Rng* rng) {
  if (a.empty() || b.empty()) throw std::invalid_argument("percent_change: empty draw set");
  const std::size_t n = std::min(a.size(), b.size());
  std::vector<std::size_t> ia(a.size()), ib(b.size());
  std::iota(ia.begin(), ia.end(), 0);
  std::iota(ib.begin(), ib.end(), 0);
  if (rng != nullptr) {
    std::shuffle(ia.begin(), ia.end(), *rng);
    std::shuffle(ib.begin(), ib.end(), *rng);
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = 100.0 * (b[ib[i]] - a[ia[i]]) / a[ia[i]];
  return out;
}

std::vector<double> percent_change_Re(const PosteriorDraws& period_a, double t_a,
                                      const PosteriorDraws& period_b, double t_b,
                                      const ModelConstants& constants, std::uint64_t seed) {
  const auto ra = effective_R(period_a, t_a, constants);
  const auto rb = effective_R(period_b, t_b, constants);
  Rng rng = make_stream(seed, 0);
  return percent_change(ra, rb, &rng);
}

std::size_t horizon_bins_for_weeks(double weeks, double bin_width) {
  if (!(weeks > 0.0)) throw std::invalid_argument("forecast horizon must be positive");
  return static_cast<std::size_t>(std::ceil(weeks / bin_width - 1e-9));
}

Forecast forecast(const PosteriorDraws& draws, const ModelConstants& constants,
                  const ForecastOptions& options) {
  if (options.horizon_bins == 0) throw std::invalid_argument("forecast: horizon must be at least one bin");
  if (draws.size() == 0) throw std::invalid_argument("forecast: no posterior draws");
  if (!options.future_tests.empty() && options.future_tests.size() != options.horizon_bins) {
    throw std::invalid_argument("forecast: future test counts must cover every horizon bin");
  }
  const bool test_aware = draws.n_params() == kNumParams;
  if (!test_aware && draws.n_params() != kNumNoTestsParams) {
    throw std::invalid_argument("forecast: unrecognised parameter layout");
  }

  Forecast f;
  const std::size_t bins = options.train_bins + options.horizon_bins;
  const auto grid = uniform_grid(0.0, constants.bin_width, bins);
  f.bin_end.assign(grid.begin() + 1, grid.end());
  f.train_bins = options.train_bins;
  f.n_draws = draws.size();
  if (static_cast<double>(options.horizon_bins) * constants.bin_width > 26.0) {
    f.warnings.push_back("forecast horizon exceeds 26 weeks; long extrapolations of a fixed-R0 model are numerically and epidemiologically unreliable");
  }

  f.deaths.resize(draws.size() * bins);
  if (test_aware) f.positivity.resize(draws.size() * bins);
  const bool with_cases = test_aware && !options.future_tests.empty();
  if (with_cases) f.cases.resize(draws.size() * options.horizon_bins);

  for (std::size_t d = 0; d < draws.size(); ++d) {
    const auto theta = draws.row(d);
    const auto traj = solve(init_params_of(theta), rate_params_of(theta, constants.delta), grid);
    const auto dN_death = surveillance::increments(traj, kNIpD, bins);
    const auto dN_case = surveillance::increments(traj, kNIeIp, bins);
    Rng rng = make_stream(options.seed, d);
    for (std::size_t l = 0; l < bins; ++l) {
      const double mean = theta[kDeathDetection] * constants.pop_size * std::max(dN_death[l], 0.0);
      f.deaths[d * bins + l] = draw_negative_binomial(rng, mean, theta[kDeathOverdispersion]);
      if (!test_aware) continue;
      const double mu = surveillance::mean_positivity(dN_case[l], theta[kAlpha0], theta[kAlpha1]);
      const double kappa = theta[kKappa];
      f.positivity[d * bins + l] = draw_beta(rng, kappa * mu, kappa * (1.0 - mu));
      if (with_cases && l >= options.train_bins) {
        const std::size_t h = l - options.train_bins;
        f.cases[d * options.horizon_bins + h] =
            draw_beta_binomial(rng, options.future_tests[h], mu, kappa);
      }
    }
  }

  for (std::size_t l = 0; l < bins; ++l) {
    std::vector<double> deaths(draws.size());
    for (std::size_t d = 0; d < draws.size(); ++d) deaths[d] = static_cast<double>(f.deaths[d * bins + l]);
    f.death_summary.rows.push_back(summarize("deaths", f.bin_end[l], std::move(deaths)));
    if (!test_aware) continue;
    std::vector<double> pos(draws.size());
    for (std::size_t d = 0; d < draws.size(); ++d) pos[d] = f.positivity[d * bins + l];
    f.positivity_summary.rows.push_back(summarize("positivity", f.bin_end[l], std::move(pos)));
  }
  return f;
}

LatentSummaries latent_summaries(const PosteriorDraws& draws, std::size_t bins,
                                 const ModelConstants& constants) {
  const auto grid = uniform_grid(0.0, constants.bin_width, bins);
  const auto trajs = solve_draws(draws, grid, constants);
  const auto r0 = draws.column(kR0);
  LatentSummaries out;
  const double n = constants.pop_size;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> deaths(trajs.size()), incidence(trajs.size()), prevalence(trajs.size()),
        re(trajs.size());
    for (std::size_t d = 0; d < trajs.size(); ++d) {
      const auto& tr = trajs[d];
      deaths[d] = n * tr.value(i, kNIpD);
      incidence[d] = n * tr.value(i, kNSE);
      prevalence[d] = n * (tr.value(i, kIe) + tr.value(i, kIp));
      re[d] = tr.value(i, kS) * r0[d];
    }
    out.cumulative_deaths.rows.push_back(summarize("cumulative_deaths", grid[i], std::move(deaths)));
    out.cumulative_incidence.rows.push_back(
        summarize("cumulative_incidence", grid[i], std::move(incidence)));
    out.prevalence.rows.push_back(summarize("prevalence", grid[i], std::move(prevalence)));
    out.effective_R.rows.push_back(summarize("effective_R", grid[i], std::move(re)));
  }
  return out;
}

}  // namespace epi::analysis
