#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "criteria.hpp"
#include "epi/math.hpp"
#include "epi/model.hpp"
#include "epi/surveillance.hpp"
#include "oracles.hpp"

using namespace epi;
using namespace epi::surveillance;

TEST_CASE("log-pmfs match brute-force oracles and moments match closed forms") {
  const auto r = criteria::distribution_oracles();
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("NB2 pmf sums to one and has the stated mean") {
  double total = 0.0, mean = 0.0;
  for (std::int64_t y = 0; y < 2000; ++y) {
    const double p = std::exp(nb2_log_pmf(y, 12.0, 2.5));
    total += p;
    mean += static_cast<double>(y) * p;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(mean == doctest::Approx(12.0).epsilon(1e-8));
}

TEST_CASE("NB2 with zero mean") {
  CHECK(nb2_log_pmf(0, 0.0, 3.0) == 0.0);
  CHECK(nb2_log_pmf(2, 0.0, 3.0) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("beta-binomial pmf sums to one") {
  double total = 0.0;
  for (std::int64_t y = 0; y <= 300; ++y) total += std::exp(beta_binomial_log_pmf(y, 300, 0.07, 45.0));
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("log-pmf partial derivatives match finite differences") {
  for (double mean : {0.7, 15.0}) {
    for (double phi : {0.3, 8.0, 500.0}) {
      const auto g = nb2_log_pmf_grad(9, mean, phi);
      CHECK(g.value == doctest::Approx(nb2_log_pmf(9, mean, phi)));
      const double hm = 1e-6 * mean, hp = 1e-6 * phi;
      const double fd_m = (nb2_log_pmf(9, mean + hm, phi) - nb2_log_pmf(9, mean - hm, phi)) / (2 * hm);
      const double fd_p = (nb2_log_pmf(9, mean, phi + hp) - nb2_log_pmf(9, mean, phi - hp)) / (2 * hp);
      CHECK(g.d_first == doctest::Approx(fd_m).epsilon(1e-5));
      CHECK(g.d_second == doctest::Approx(fd_p).epsilon(1e-4).scale(1e-8));
    }
  }
  for (double mu : {0.01, 0.3}) {
    for (double kappa : {2.0, 700.0}) {
      const auto g = beta_binomial_log_pmf_grad(40, 900, mu, kappa);
      const double hm = 1e-7 * mu, hk = 1e-6 * kappa;
      const double fd_m =
          (beta_binomial_log_pmf(40, 900, mu + hm, kappa) - beta_binomial_log_pmf(40, 900, mu - hm, kappa)) /
          (2 * hm);
      const double fd_k =
          (beta_binomial_log_pmf(40, 900, mu, kappa + hk) - beta_binomial_log_pmf(40, 900, mu, kappa - hk)) /
          (2 * hk);
      CHECK(g.d_first == doctest::Approx(fd_m).epsilon(1e-5));
      CHECK(g.d_second == doctest::Approx(fd_k).epsilon(1e-4).scale(1e-8));
    }
  }
}

TEST_CASE("positivity variance formula") {
  CHECK(positivity_fraction_variance(1, 0.2, 5.0) == doctest::Approx(0.16));
  CHECK(positivity_fraction_variance(100, 0.2, 1e12) == doctest::Approx(0.0016));
  CHECK(positivity_fraction_variance(100, 0.2, 9.0) == doctest::Approx(0.0016 * (1.0 + 99.0 / 10.0)));
}

TEST_CASE("mean positivity is logistic in the log-odds of incidence") {
  const double dN = 2e-4;
  CHECK(mean_positivity(dN, 3.87, 0.83) == doctest::Approx(inv_logit(3.87 + 0.83 * logit(dN))));
  std::size_t events = 0;
  const double floored = mean_positivity(0.0, 3.87, 0.83, {1e-12, &events});
  CHECK(events == 1);
  CHECK(floored == doctest::Approx(inv_logit(3.87 + 0.83 * logit(1e-12))));
}

TEST_CASE("series validation") {
  SurveillanceSeries s;
  s.tests = {10, 20};
  s.cases = {1, 2};
  s.deaths = {0, 1};
  CHECK_NOTHROW(s.validate());
  s.cases = {11, 2};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.cases = {1};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("likelihood gradient matches finite differences on the fixture") {
  const auto data = criteria::fixture_series();
  const auto grid = uniform_grid(0.0, data.bin_width, data.size());
  const auto theta = simulation_truth().to_array();
  auto loglik = [&](std::span<const double> th) {
    const auto tr = solve(init_params_of(th), rate_params_of(th, 0.8), grid);
    return log_likelihood(data, tr, observation_params_of(th, 3.18e6));
  };
  const auto tr = solve_with_sensitivities(init_params_of(theta), rate_params_of(theta, 0.8), grid,
                                           kAllOdeParams);
  std::array<double, kNumParams> g{};
  const double ll = log_likelihood_and_gradient(data, tr, observation_params_of(theta, 3.18e6), g);
  CHECK(ll == doctest::Approx(loglik(theta)));
  std::vector<double> x(theta.begin(), theta.end());
  const auto fd = oracle::fd_gradient(loglik, x, 1e-5);
  for (std::size_t j = 0; j < kNumParams; ++j) {
    INFO("parameter " << j);
    CHECK(std::abs(g[j] - fd[j]) <= 1e-5 * std::abs(fd[j]) + 1e-5);
  }
}

TEST_CASE("grid must hold every bin endpoint") {
  const auto data = criteria::fixture_series();
  const auto theta = simulation_truth().to_array();
  const auto short_grid = uniform_grid(0.0, data.bin_width, data.size() - 1);
  const auto tr = solve(init_params_of(theta), rate_params_of(theta, 0.8), short_grid);
  CHECK_THROWS_AS(check_alignment(data, tr), std::invalid_argument);
}
