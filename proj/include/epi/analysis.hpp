#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "epi/draws.hpp"
#include "epi/model.hpp"
#include "epi/params.hpp"
#include "epi/priors.hpp"
#include "epi/random.hpp"

namespace epi::analysis {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Posterior median and central 50/80/95% intervals of one quantity.
struct SummaryRow {
  std::string label;
  double time = 0.0;  // weeks from t0; 0 for time-free quantities
  double mean = 0.0;
  double median = 0.0;
  Interval i50;
  Interval i80;
  Interval i95;
};

struct SummaryTable {
  std::vector<SummaryRow> rows;
};

/// Linear-interpolation quantile of sorted values, p in [0, 1].
double quantile_sorted(std::span<const double> sorted, double p);
double quantile(std::vector<double> values, double p);

SummaryRow summarize(std::string label, double time, std::vector<double> values);
SummaryTable parameter_summary(const PosteriorDraws& draws);

/// Solves the ODE for every draw on `grid` (weeks from t0).
std::vector<Trajectory> solve_draws(const PosteriorDraws& draws, std::span<const double> grid,
                                    const ModelConstants& constants);

/// Per-draw S(t) R0. Throws std::out_of_range when t < 0.
std::vector<double> effective_R(const PosteriorDraws& draws, double t,
                                const ModelConstants& constants);

struct BayesFactor {
  double value = 1.0;
  double posterior_fraction = 0.5;  // q
  double prior_fraction = 0.5;      // p0
  bool lower_bound = false;         // true: BF > value (q was 1)
  bool upper_bound = false;         // true: BF < value (q was 0)
  std::string text() const;
};

/// Odds ratio [q/(1-q)] / [p0/(1-p0)]. When q is 0 or 1 the estimate is replaced
/// by q = 1/n or 1 - 1/n and flagged as a bound.
BayesFactor bayes_factor(double q, std::size_t n_posterior, double p0, std::size_t n_prior);

/// Fraction of prior draws with R_e(t) > 1.
double prior_fraction_Re_gt_1(const priors::PriorSpec& spec, double t,
                              const ModelConstants& constants, std::size_t n_draws,
                              std::uint64_t seed);

BayesFactor bayes_factor_Re_gt_1(const PosteriorDraws& draws, const priors::PriorSpec& spec,
                                 double t, const ModelConstants& constants,
                                 std::size_t n_prior_draws = 100000, std::uint64_t seed = 1);

/// As above with the reference distribution given by draws instead of a prior.
BayesFactor bayes_factor_Re_gt_1(const PosteriorDraws& draws, const PosteriorDraws& reference,
                                 double t, const ModelConstants& constants);

/// Per-draw N N_SE(t) / observed cumulative cases.
std::vector<double> underreporting_factor(const PosteriorDraws& draws,
                                          double observed_cumulative_cases, double t,
                                          const ModelConstants& constants);

/// 100 (b - a) / a over pairs. With `rng` the pairs are random (both sides
/// permuted, min(|a|, |b|) pairs); without, a[i] is paired with b[i].
std::vector<double> percent_change(std::span<const double> a, std::span<const double> b,
                                   Rng* rng = nullptr);

/// Percent change of R_e between two independently fitted periods, each at its own time.
std::vector<double> percent_change_Re(const PosteriorDraws& period_a, double t_a,
                                      const PosteriorDraws& period_b, double t_b,
                                      const ModelConstants& constants, std::uint64_t seed);

struct ForecastOptions {
  std::size_t train_bins = 0;    // observed bins before the forecast starts
  std::size_t horizon_bins = 10;
  std::uint64_t seed = 1;
  std::vector<std::int64_t> future_tests;  // optional; enables reported-case draws
};

/// Predictive draws over train_bins + horizon_bins bins, row-major by draw.
struct Forecast {
  std::vector<double> bin_end;  // weeks from t0
  std::size_t train_bins = 0;
  std::size_t n_draws = 0;
  std::vector<std::int64_t> deaths;
  std::vector<double> positivity;  // empty for models without a positivity layer
  std::vector<std::int64_t> cases;  // horizon bins only; empty unless future tests given
  SummaryTable death_summary;
  SummaryTable positivity_summary;
  std::vector<std::string> warnings;

  std::size_t bins() const { return bin_end.size(); }
  std::int64_t death(std::size_t draw, std::size_t bin) const { return deaths[draw * bins() + bin]; }
};

/// Number of bins needed to cover `weeks` at the given bin width.
std::size_t horizon_bins_for_weeks(double weeks, double bin_width);

Forecast forecast(const PosteriorDraws& draws, const ModelConstants& constants,
                  const ForecastOptions& options);

struct LatentSummaries {
  SummaryTable cumulative_deaths;     // N N_IpD(t)
  SummaryTable cumulative_incidence;  // N N_SE(t)
  SummaryTable prevalence;            // N (Ie(t) + Ip(t))
  SummaryTable effective_R;
};

/// Pointwise summaries on the bin grid t0..t_bins.
LatentSummaries latent_summaries(const PosteriorDraws& draws, std::size_t bins,
                                 const ModelConstants& constants);

}  // namespace epi::analysis
