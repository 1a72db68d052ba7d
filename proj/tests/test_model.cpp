#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "criteria.hpp"
#include "epi/model.hpp"
#include "epi/params.hpp"
#include "oracles.hpp"

using namespace epi;

namespace {

Trajectory solve_theta(std::span<const double> theta, std::span<const double> grid) {
  return solve(init_params_of(theta), rate_params_of(theta, 0.8), grid);
}

}  // namespace

TEST_CASE("RK4 matches the reference integrator at the simulation truth") {
  const auto r = criteria::ode_accuracy();
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("RK4 matches the reference integrator away from the truth") {
  std::array<double, 8> theta = {0.95, 0.6, 0.3, 2.5, 0.5, 0.7, 1.4, 0.02};
  const auto grid = uniform_grid(0.0, 3.0 / 7.0, 12);
  const auto tr = solve_theta(theta, grid);
  const auto ref = oracle::reference_solution(theta, 0.8, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t k = 0; k < kStateSize; ++k) {
      CHECK(std::abs(tr.value(i, static_cast<StateIndex>(k)) - ref[i][k]) < 1e-6);
    }
  }
}

TEST_CASE("beta and R0 are inverse maps") {
  const auto p = make_rate_params(1.7, 0.9, 1.1, 0.8, 0.01, 0.8);
  CHECK(p.beta == doctest::Approx(1.7 / (1.1 + 0.8 * 0.8)));
  CHECK(R0_from_beta(p) == doctest::Approx(1.7));
  CHECK(beta_from_R0(1.7, p) == doctest::Approx(p.beta));
  CHECK_THROWS_AS(make_rate_params(1.0, 0.0, 1.0, 1.0, 0.01, 0.8), std::invalid_argument);
}

TEST_CASE("initial state splits the infected fraction") {
  const auto x = initial_state({0.9, 0.7, 0.4});
  CHECK(x.S == doctest::Approx(0.9));
  CHECK(x.E == doctest::Approx(0.03));
  CHECK(x.Ie == doctest::Approx(0.028));
  CHECK(x.Ip == doctest::Approx(0.042));
  CHECK(x.S + x.E + x.Ie + x.Ip + x.R + x.D == doctest::Approx(1.0));
  CHECK_THROWS_AS(initial_state({1.2, 0.5, 0.5}), std::invalid_argument);
  CHECK_NOTHROW(initial_state({1.0, 0.0, 1.0}));
}

TEST_CASE("disease-free state is an equilibrium") {
  const std::array<double, 8> theta = {1.0, 0.5, 0.5, 3.0, 1.0, 1.0, 1.0, 0.01};
  const auto grid = uniform_grid(0.0, 1.0, 5);
  const auto tr = solve_theta(theta, grid);
  CHECK(tr.value(5, kS) == 1.0);
  CHECK(tr.value(5, kNSE) == 0.0);
}

TEST_CASE("cumulative transitions close the compartment balance") {
  const auto theta = simulation_truth().to_array();
  const auto grid = uniform_grid(0.0, 3.0 / 7.0, 12);
  const auto tr = solve_theta(theta, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(tr.value(0, kS) - tr.value(i, kS) == doctest::Approx(tr.value(i, kNSE)).epsilon(1e-9));
    CHECK(tr.value(i, kD) == doctest::Approx(tr.value(i, kNIpD)).epsilon(1e-9));
    CHECK(tr.value(i, kR) == doctest::Approx(tr.value(i, kNIpR)).epsilon(1e-9));
  }
}

TEST_CASE("forward sensitivities match finite differences") {
  const auto base = simulation_truth().to_array();
  const std::array<double, 8> theta = {base[0], base[1], base[2], base[3],
                                       base[4], base[5], base[6], base[7]};
  const auto grid = uniform_grid(0.0, 3.0 / 7.0, 12);
  const auto tr = solve_with_sensitivities(init_params_of(theta), rate_params_of(theta, 0.8), grid,
                                           kAllOdeParams);
  for (std::size_t j = 0; j < 8; ++j) {
    const double h = 1e-6 * std::max(1e-3, std::abs(theta[j]));
    auto up = theta, down = theta;
    up[j] += h;
    down[j] -= h;
    const auto tu = solve_theta(up, grid);
    const auto td = solve_theta(down, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (std::size_t k = 0; k < kStateSize; ++k) {
        const auto c = static_cast<StateIndex>(k);
        const double fd = (tu.value(i, c) - td.value(i, c)) / (2.0 * h);
        CHECK(std::abs(tr.sensitivity(i, j, c) - fd) <= 1e-5 * std::abs(fd) + 1e-8);
      }
    }
  }
}

TEST_CASE("uniform grid endpoints") {
  const auto g = uniform_grid(0.0, 3.0 / 7.0, 12);
  REQUIRE(g.size() == 13);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == doctest::Approx(36.0 / 7.0));
}
