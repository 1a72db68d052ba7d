#include "oracles.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <boost/numeric/odeint.hpp>

namespace oracle {

namespace odeint = boost::numeric::odeint;

std::vector<State> reference_solution(std::span<const double> theta, double delta,
                                      std::span<const double> grid) {
  const double S0 = theta[0], It = theta[1], Iet = theta[2], R0 = theta[3];
  const double gamma = 1.0 / theta[4], nu_e = 1.0 / theta[5], nu_p = 1.0 / theta[6];
  const double eta = theta[7];
  const double beta = R0 / (1.0 / nu_e + delta / nu_p);

  // S E Ie Ip R D, then cumulative S->E, E->Ie, Ie->Ip, Ip->R, Ip->D.
  auto rhs = [&](const State& x, State& dx, double) {
    const double se = beta * x[0] * (x[2] + delta * x[3]);
    const double ei = gamma * x[1];
    const double ii = nu_e * x[2];
    const double ir = (1.0 - eta) * nu_p * x[3];
    const double id = eta * nu_p * x[3];
    dx = {-se, se - ei, ei - ii, ii - ir - id, ir, id, se, ei, ii, ir, id};
  };

  State x{};
  x[0] = S0;
  x[1] = (1.0 - It) * (1.0 - S0);
  x[2] = Iet * It * (1.0 - S0);
  x[3] = (1.0 - Iet) * It * (1.0 - S0);

  std::vector<State> out;
  out.push_back(x);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    auto stepper = odeint::make_controlled(1e-13, 1e-13, odeint::runge_kutta_cash_karp54<State>());
    odeint::integrate_adaptive(stepper, rhs, x, grid[i - 1], grid[i], 1e-4);
    out.push_back(x);
  }
  return out;
}

double nb2_log_pmf(std::int64_t y, double mean, double phi) {
  // pmf = prod_{k<y} (phi + k) / (k + 1) * p^phi * (1 - p)^y with p = phi / (phi + mean)
  long double log_coef = 0.0L;
  for (std::int64_t k = 0; k < y; ++k) {
    log_coef += std::log((static_cast<long double>(phi) + k) / (k + 1));
  }
  // p and 1 - p formed separately so neither loses digits to cancellation.
  const long double f = phi, m = mean;
  const long double log_p = -std::log1p(m / f);
  const long double log_q = std::log(m / (f + m));
  return static_cast<double>(log_coef + f * log_p + y * log_q);
}

double beta_binomial_log_pmf(std::int64_t y, std::int64_t n, double mu, double kappa) {
  // C(n, y) prod_{k<y} (a + k) prod_{k<n-y} (b + k) / prod_{k<n} (a + b + k)
  const long double a = static_cast<long double>(kappa) * mu;
  const long double b = static_cast<long double>(kappa) * (1.0 - mu);
  long double s = 0.0L;
  for (std::int64_t k = 0; k < y; ++k) s += std::log(static_cast<long double>(n - k) / (k + 1));
  for (std::int64_t k = 0; k < y; ++k) s += std::log(a + k);
  for (std::int64_t k = 0; k < n - y; ++k) s += std::log(b + k);
  for (std::int64_t k = 0; k < n; ++k) s -= std::log(a + b + k);
  return static_cast<double>(s);
}

double beta_binomial_pmf_small(std::int64_t y, std::int64_t n, double mu, double kappa) {
  const double a = kappa * mu, b = kappa * (1.0 - mu);
  const double choose =
      boost::math::binomial_coefficient<double>(static_cast<unsigned>(n), static_cast<unsigned>(y));
  return choose * boost::math::beta(y + a, n - y + b) / boost::math::beta(a, b);
}

std::vector<double> fd_gradient(const std::function<double(std::span<const double>)>& f,
                                std::span<const double> x, double h) {
  std::vector<double> g(x.size());
  std::vector<double> y(x.begin(), x.end());
  auto central = [&](std::size_t i, double step) {
    y[i] = x[i] + step;
    const double up = f(y);
    y[i] = x[i] - step;
    const double down = f(y);
    y[i] = x[i];
    return (up - down) / (2.0 * step);
  };
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x[i]));
    const double d1 = central(i, step);
    const double d2 = central(i, step / 2.0);
    g[i] = (4.0 * d2 - d1) / 3.0;
  }
  return g;
}

double ks_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double F = cdf(sample[i]);
    d = std::max({d, F - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - F});
  }
  return d;
}

}  // namespace oracle
