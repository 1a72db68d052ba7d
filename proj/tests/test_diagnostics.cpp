#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "epi/diagnostics.hpp"
#include "epi/random.hpp"

using namespace epi;
using namespace epi::mcmc;

namespace {

ChainSet ar1_chains(std::size_t chains, std::size_t n, double phi, std::uint64_t seed,
                    double shift = 0.0) {
  ChainSet out(chains);
  for (std::size_t c = 0; c < chains; ++c) {
    Rng rng = make_stream(seed, c);
    double x = draw_normal(rng) / std::sqrt(1.0 - phi * phi);
    for (std::size_t i = 0; i < n; ++i) {
      x = phi * x + draw_normal(rng);
      out[c].push_back(x + (c == 0 ? shift : 0.0));
    }
  }
  return out;
}

PosteriorDraws draws_of(const ChainSet& chains) {
  PosteriorDraws d;
  d.names = {"x"};
  d.n_chains = chains.size();
  d.draws_per_chain = chains[0].size();
  for (std::size_t c = 0; c < chains.size(); ++c) {
    for (double v : chains[c]) {
      const double row[1] = {v};
      d.append(row, static_cast<int>(c), 0.0, false, 1, 0.1, 1, 1.0);
    }
  }
  return d;
}

}  // namespace

TEST_CASE("independent draws: R-hat near one and ESS near the draw count") {
  const auto chains = ar1_chains(4, 2000, 0.0, 1);
  CHECK(split_rhat(chains) < 1.01);
  const double ess = effective_sample_size(chains);
  CHECK(ess == doctest::Approx(8000.0).epsilon(0.15));
}

TEST_CASE("AR(1) ESS matches the analytic factor") {
  const double phi = 0.9;
  const auto chains = ar1_chains(4, 20000, phi, 2);
  const double expected = 80000.0 * (1.0 - phi) / (1.0 + phi);
  CHECK(effective_sample_size_raw(chains) == doctest::Approx(expected).epsilon(0.2));
  CHECK(effective_sample_size(chains) == doctest::Approx(expected).epsilon(0.2));
}

TEST_CASE("a displaced chain inflates R-hat") {
  const auto chains = ar1_chains(4, 1000, 0.5, 3, 2.0);
  CHECK(split_rhat(chains) > 1.1);
}

TEST_CASE("a trending chain is caught by splitting") {
  ChainSet chains(2);
  Rng rng = make_stream(4, 0);
  for (std::size_t i = 0; i < 1000; ++i) {
    chains[0].push_back(static_cast<double>(i) / 200.0 + draw_normal(rng));
    chains[1].push_back(static_cast<double>(1000 - i) / 200.0 + draw_normal(rng));
  }
  CHECK(split_rhat(chains) > 1.1);
}

TEST_CASE("constant draws are degenerate") {
  const ChainSet chains(2, std::vector<double>(200, 1.5));
  CHECK(std::isnan(split_rhat(chains)));
  const auto d = diagnostics(draws_of(chains));
  CHECK(d.parameters[0].degenerate);
}

TEST_CASE("diagnostics summary over draws") {
  auto chains = ar1_chains(2, 500, 0.3, 5);
  const auto d = diagnostics(draws_of(chains));
  REQUIRE(d.parameters.size() == 1);
  CHECK(d.max_rhat() == doctest::Approx(d.parameters[0].rhat));
  CHECK(d.min_ess() == doctest::Approx(d.parameters[0].ess));
  CHECK(d.divergences == 0);
}

TEST_CASE("diagnostics need two chains of at least 100 draws") {
  CHECK_THROWS(diagnostics(draws_of(ar1_chains(1, 500, 0.0, 6))));
  CHECK_THROWS(diagnostics(draws_of(ar1_chains(2, 50, 0.0, 7))));
}
