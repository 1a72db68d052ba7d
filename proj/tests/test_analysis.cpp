#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "epi/analysis.hpp"
#include "epi/model.hpp"
#include "epi/priors.hpp"

using namespace epi;
using namespace epi::analysis;

namespace {

/// Two chains of prior draws (or copies of the truth when `fixed`).
PosteriorDraws make_draws(std::size_t per_chain, bool fixed, std::uint64_t seed = 1) {
  const auto spec = priors::default_prior_spec();
  PosteriorDraws d;
  d.names = spec.names();
  d.n_chains = 2;
  d.draws_per_chain = per_chain;
  Rng rng = make_stream(seed, 0);
  for (int c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < per_chain; ++i) {
      const auto theta = fixed ? [] {
        const auto a = simulation_truth().to_array();
        return std::vector<double>(a.begin(), a.end());
      }()
                               : priors::sample_prior(spec, rng);
      d.append(theta, c, 0.0, false, 3, 0.1, 7, 0.9);
    }
  }
  return d;
}

}  // namespace

TEST_CASE("quantiles interpolate linearly") {
  const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
  CHECK(quantile_sorted(x, 0.0) == 1.0);
  CHECK(quantile_sorted(x, 1.0) == 4.0);
  CHECK(quantile_sorted(x, 0.5) == 2.5);
  CHECK(quantile_sorted(x, 0.25) == doctest::Approx(1.75));
  CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 0.5) == 2.5);
}

TEST_CASE("summary rows nest their intervals") {
  std::vector<double> v;
  for (int i = 0; i <= 1000; ++i) v.push_back(i);
  const auto r = summarize("x", 1.0, v);
  CHECK(r.median == 500.0);
  CHECK(r.mean == 500.0);
  CHECK(r.i95.lo == 25.0);
  CHECK(r.i95.hi == 975.0);
  CHECK(r.i50.lo == 250.0);
  CHECK(r.i80.hi == 900.0);
}

TEST_CASE("Bayes factor is the posterior-to-prior odds ratio") {
  const auto bf = bayes_factor(0.8, 1000, 0.5, 1000);
  CHECK(bf.value == doctest::Approx(4.0));
  CHECK_FALSE(bf.lower_bound);
  const auto hi = bayes_factor(1.0, 1000, 0.5, 1000);
  CHECK(hi.lower_bound);
  CHECK(hi.value == doctest::Approx(999.0));
  CHECK(hi.text() == "> 999");
  const auto lo = bayes_factor(0.0, 1000, 0.5, 1000);
  CHECK(lo.upper_bound);
  CHECK(lo.value == doctest::Approx(1.0 / 999.0));
}

TEST_CASE("Bayes factor of a distribution against itself is one") {
  const auto d = make_draws(200, false);
  const ModelConstants c;
  const auto bf = bayes_factor_Re_gt_1(d, d, 12.0 * c.bin_width, c);
  CHECK(bf.value == doctest::Approx(1.0));
}

TEST_CASE("prior fraction of R_e > 1 is reproducible") {
  const auto spec = priors::default_prior_spec();
  const ModelConstants c;
  const double a = prior_fraction_Re_gt_1(spec, 2.0, c, 20000, 3);
  const double b = prior_fraction_Re_gt_1(spec, 2.0, c, 20000, 3);
  CHECK(a == b);
  CHECK(a > 0.1);
  CHECK(a < 0.6);
}

TEST_CASE("effective R is S(t) R0 and undefined before t0") {
  const auto d = make_draws(100, true);
  const ModelConstants c;
  const auto re0 = effective_R(d, 0.0, c);
  CHECK(re0[0] == doctest::Approx(simulation_truth().S0 * simulation_truth().R0));
  const auto re1 = effective_R(d, 3.0, c);
  CHECK(re1[0] < re0[0]);
  CHECK_THROWS_AS(effective_R(d, -0.1, c), std::out_of_range);
}

TEST_CASE("underreporting factor") {
  const auto d = make_draws(100, true);
  const ModelConstants c;
  const double t = 12.0 * c.bin_width;
  const auto theta = simulation_truth().to_array();
  const std::vector<double> grid = {0.0, t};
  const auto tr = solve(init_params_of(theta), rate_params_of(theta, c.delta), grid);
  const auto u = underreporting_factor(d, 1000.0, t, c);
  CHECK(u[0] == doctest::Approx(c.pop_size * tr.value(1, kNSE) / 1000.0));
}

TEST_CASE("percent change pairs draws") {
  const std::vector<double> a = {1.0, 2.0}, b = {2.0, 3.0};
  const auto p = percent_change(a, b);
  CHECK(p[0] == doctest::Approx(100.0));
  CHECK(p[1] == doctest::Approx(50.0));
  Rng rng = make_stream(2, 0);
  const auto q = percent_change(a, b, &rng);
  CHECK(q.size() == 2);
}

TEST_CASE("forecast horizon arithmetic") {
  CHECK(horizon_bins_for_weeks(4.0, 3.0 / 7.0) == 10);
  CHECK(horizon_bins_for_weeks(6.0 / 7.0, 3.0 / 7.0) == 2);
  CHECK_THROWS_AS(horizon_bins_for_weeks(0.0, 3.0 / 7.0), std::invalid_argument);
}

TEST_CASE("forecast draws") {
  const auto d = make_draws(100, true);
  const ModelConstants c;
  ForecastOptions o;
  o.train_bins = 12;
  o.horizon_bins = 10;
  o.seed = 4;
  const auto f = forecast(d, c, o);
  CHECK(f.bins() == 22);
  CHECK(f.n_draws == 200);
  CHECK(f.death_summary.rows.size() == 22);
  CHECK(f.positivity_summary.rows.size() == 22);
  CHECK(f.cases.empty());
  CHECK(f.warnings.empty());
  const auto g = forecast(d, c, o);
  CHECK(f.deaths == g.deaths);

  // Predictive mean of deaths in the first bin is rho N dN_IpD.
  const auto theta = simulation_truth().to_array();
  const std::vector<double> grid = {0.0, c.bin_width};
  const auto tr = solve(init_params_of(theta), rate_params_of(theta, c.delta), grid);
  const double expected = theta[kDeathDetection] * c.pop_size * tr.value(1, kNIpD);
  CHECK(f.death_summary.rows[0].mean == doctest::Approx(expected).epsilon(0.15));

  o.future_tests = std::vector<std::int64_t>(10, 5000);
  const auto h = forecast(d, c, o);
  CHECK(h.cases.size() == 200 * 10);
  o.future_tests.resize(3);
  CHECK_THROWS_AS(forecast(d, c, o), std::invalid_argument);

  o.future_tests.clear();
  o.horizon_bins = 0;
  CHECK_THROWS_AS(forecast(d, c, o), std::invalid_argument);
  o.horizon_bins = horizon_bins_for_weeks(30.0, c.bin_width);
  CHECK_FALSE(forecast(d, c, o).warnings.empty());
}

TEST_CASE("latent summaries on the bin grid") {
  const auto d = make_draws(100, true);
  const ModelConstants c;
  const auto s = latent_summaries(d, 12, c);
  CHECK(s.cumulative_deaths.rows.size() == 13);
  CHECK(s.effective_R.rows.size() == 13);
  CHECK(s.prevalence.rows[0].median == doctest::Approx(c.pop_size * (1.0 - simulation_truth().S0) *
                                                       simulation_truth().I_tilde0));
  for (std::size_t i = 1; i < 13; ++i) {
    CHECK(s.cumulative_incidence.rows[i].median >= s.cumulative_incidence.rows[i - 1].median);
  }
}
