#pragma once

// Reference computations that do not share code paths with the library.

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace oracle {

using State = std::array<double, 11>;

/// Model state on `grid` from an adaptive Cash-Karp integrator at tight
/// tolerance. theta holds S0, I_tilde0, Ie_tilde0, R0, 1/gamma, 1/nu_e, 1/nu_p, eta.
std::vector<State> reference_solution(std::span<const double> theta, double delta,
                                      std::span<const double> grid);

/// NB2 log-pmf from the product form of the pmf in extended precision.
double nb2_log_pmf(std::int64_t y, double mean, double phi);

/// Beta-binomial log-pmf from rising-factorial products in extended precision.
double beta_binomial_log_pmf(std::int64_t y, std::int64_t n, double mu, double kappa);

/// Beta-binomial pmf as C(n, y) B(y + a, n - y + b) / B(a, b) with Boost's beta
/// function; only for small n.
double beta_binomial_pmf_small(std::int64_t y, std::int64_t n, double mu, double kappa);

/// Central finite-difference gradient with one Richardson extrapolation step.
std::vector<double> fd_gradient(const std::function<double(std::span<const double>)>& f,
                                std::span<const double> x, double h = 1e-4);

/// Asymptotic two-sided p-value of the one-sample Kolmogorov-Smirnov statistic.
double ks_pvalue(double d, std::size_t n);

/// Kolmogorov-Smirnov statistic of `sample` against the continuous CDF `cdf`.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

}  // namespace oracle
