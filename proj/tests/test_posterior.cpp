#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "criteria.hpp"
#include "epi/posterior.hpp"
#include "epi/priors.hpp"
#include "epi/random.hpp"
#include "oracles.hpp"

using namespace epi;

TEST_CASE("log-posterior gradient matches finite differences at prior points") {
  const auto r = criteria::gradient_fidelity();
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("unconstrained density equals constrained density plus log Jacobian") {
  const auto data = criteria::fixture_series();
  for (CaseModel model : {CaseModel::TestAware, CaseModel::NoTests}) {
    const auto spec = model == CaseModel::TestAware ? priors::default_prior_spec()
                                                    : priors::no_tests_prior_spec();
    const Posterior post(data, spec, {}, model);
    Rng rng = make_stream(17, static_cast<std::uint64_t>(model));
    for (int i = 0; i < 20; ++i) {
      const auto theta = priors::sample_prior(spec, rng);
      const auto z = priors::to_unconstrained(theta, spec);
      const auto c = priors::from_unconstrained(z, spec);
      std::vector<double> g(z.size());
      const double lz = post.log_density(z, g);
      const double lt = post.log_density_constrained(c.theta);
      if (!std::isfinite(lt)) continue;
      CHECK(lz == doctest::Approx(lt + c.log_jacobian).epsilon(1e-12));
    }
  }
}

TEST_CASE("constrained likelihood gradient matches finite differences") {
  const Posterior post(criteria::fixture_series(), priors::default_prior_spec());
  const auto theta = simulation_truth().to_array();
  std::vector<double> g(kNumParams);
  const double ll = post.log_likelihood_gradient(theta, g);
  CHECK(ll == doctest::Approx(post.log_likelihood(theta)));
  std::vector<double> x(theta.begin(), theta.end());
  const auto fd = oracle::fd_gradient([&](std::span<const double> t) { return post.log_likelihood(t); },
                                      x, 1e-5);
  for (std::size_t j = 0; j < kNumParams; ++j) {
    CHECK(std::abs(g[j] - fd[j]) <= 1e-5 * std::abs(fd[j]) + 1e-5);
  }
}

TEST_CASE("diagnose names the offending parameter") {
  const Posterior post(criteria::fixture_series(), priors::default_prior_spec());
  auto z = priors::to_unconstrained(simulation_truth().to_array(), post.prior_spec());
  z[kKappa] = 800.0;  // exp overflows
  std::vector<double> g(z.size());
  CHECK_FALSE(std::isfinite(post.log_density(z, g)));
  CHECK(post.diagnose(z).find("kappa") != std::string::npos);
}

TEST_CASE("constructor validation") {
  auto data = criteria::fixture_series();
  CHECK_THROWS_AS(Posterior(data, priors::no_tests_prior_spec(), {}, CaseModel::TestAware),
                  std::invalid_argument);
  ModelConstants weekly;
  weekly.bin_width = 1.0;
  CHECK_THROWS_AS(Posterior(data, priors::default_prior_spec(), weekly), std::invalid_argument);
  data.cases[0] = data.tests[0] + 1;
  CHECK_THROWS_AS(Posterior(data, priors::default_prior_spec()), std::invalid_argument);
}

TEST_CASE("outside the support the density is -inf") {
  const Posterior post(criteria::fixture_series(), priors::default_prior_spec());
  auto theta = simulation_truth().to_array();
  theta[kIfr] = 1.5;
  CHECK(post.log_density_constrained(theta) == -std::numeric_limits<double>::infinity());
  CHECK(post.log_likelihood(theta) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("no-tests case log-pmf") {
  using simstudy::no_tests_case_log_pmf;
  CHECK(no_tests_case_log_pmf(0, 0.0, 0.11, 4.0, 3.18e6) == 0.0);
  // Same form as the death model with (rho_c, phi_c, dN_IeIp) substituted.
  surveillance::ObservationParams obs;
  obs.rho = 0.11;
  obs.phi = 4.0;
  obs.pop_size = 3.18e6;
  CHECK(no_tests_case_log_pmf(230, 6e-4, 0.11, 4.0, 3.18e6) ==
        surveillance::death_log_pmf(230, 6e-4, obs));
  // Prior median case detection rate at a simulated bin.
  const double mean = 0.11 * 3.18e6 * 6e-4;
  CHECK(std::abs(no_tests_case_log_pmf(230, 6e-4, 0.11, 4.0, 3.18e6) -
                 oracle::nb2_log_pmf(230, mean, 4.0)) < 1e-10);
  CHECK_THROWS_AS(no_tests_case_log_pmf(3, -1e-3, 0.11, 4.0, 3.18e6), std::domain_error);
}

TEST_CASE("target exposes names and constrains draws") {
  const Posterior post(criteria::fixture_series(), priors::no_tests_prior_spec(), {}, CaseModel::NoTests);
  const auto t = post.target();
  REQUIRE(t.dimension() == kNumNoTestsParams);
  CHECK(t.names[kCaseDetection] == "rho_c");
  Rng rng = make_stream(1, 1);
  const auto z = t.initial_point(rng);
  const auto theta = t.constrain(z);
  CHECK(priors::in_support(theta, post.prior_spec()));
}
