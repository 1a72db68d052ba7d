#include "epi/surveillance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "epi/math.hpp"

namespace epi::surveillance {

void SurveillanceSeries::validate() const {
  if (tests.size() != cases.size() || cases.size() != deaths.size()) {
    throw std::invalid_argument("surveillance series: tests, cases and deaths differ in length");
  }
  if (!(bin_width > 0.0)) throw std::invalid_argument("surveillance series: bin width must be positive");
  for (std::size_t l = 0; l < deaths.size(); ++l) {
    if (tests[l] < 0 || cases[l] < 0 || deaths[l] < 0) {
      throw std::invalid_argument("surveillance series: negative count in interval " +
                                  std::to_string(l + 1));
    }
    if (cases[l] > tests[l]) {
      throw std::invalid_argument("surveillance series: cases exceed tests in interval " +
                                  std::to_string(l + 1));
    }
  }
}

ObservationParams observation_params_of(std::span<const double> theta, double pop_size) {
  return {theta[kDeathDetection], theta[kDeathOverdispersion], theta[kAlpha0], theta[kAlpha1],
          theta[kKappa], pop_size};
}

double nb2_log_pmf(std::int64_t count, double mean, double phi) {
  if (count < 0) throw std::domain_error("nb2_log_pmf: negative count");
  if (mean < 0.0) throw std::domain_error("nb2_log_pmf: negative mean");
  if (mean == 0.0) return count == 0 ? 0.0 : kNegInf;
  const auto m = static_cast<double>(count);
  return log_rising_scaled(phi, count, phi + mean) - std::lgamma(m + 1.0) -
         phi * std::log1p(mean / phi) + m * std::log(mean);
}

LogPmfGrad nb2_log_pmf_grad(std::int64_t count, double mean, double phi) {
  LogPmfGrad out;
  out.value = nb2_log_pmf(count, mean, phi);
  const auto m = static_cast<double>(count);
  out.d_first = (mean > 0.0 ? m / mean : 0.0) - (m + phi) / (phi + mean);
  out.d_second = digamma_rising(phi, count) - std::log1p(mean / phi) + (mean - m) / (phi + mean);
  return out;
}

double beta_binomial_log_pmf(std::int64_t successes, std::int64_t trials, double mu, double kappa) {
  if (successes < 0 || trials < 0) throw std::domain_error("beta_binomial_log_pmf: negative count");
  if (successes > trials) throw std::domain_error("beta_binomial_log_pmf: cases exceed tests");
  if (trials == 0) return 0.0;
  const double a = kappa * mu;
  const double b = kappa * (1.0 - mu);
  return log_choose(trials, successes) + log_rising(a, successes) +
         log_rising(b, trials - successes) - log_rising(kappa, trials);
}

LogPmfGrad beta_binomial_log_pmf_grad(std::int64_t successes, std::int64_t trials, double mu,
                                      double kappa) {
  LogPmfGrad out;
  out.value = beta_binomial_log_pmf(successes, trials, mu, kappa);
  if (trials == 0) return out;
  const double a = kappa * mu;
  const double b = kappa * (1.0 - mu);
  const double da = digamma_rising(a, successes);
  const double db = digamma_rising(b, trials - successes);
  const double dk = digamma_rising(kappa, trials);
  out.d_first = kappa * (da - db);
  out.d_second = mu * da + (1.0 - mu) * db - dk;
  return out;
}

double death_log_pmf(std::int64_t deaths, double delta_N_IpD, const ObservationParams& obs) {
  if (delta_N_IpD < 0.0) {
    throw std::domain_error("death_log_pmf: negative death increment (integrator misuse)");
  }
  return nb2_log_pmf(deaths, obs.rho * obs.pop_size * delta_N_IpD, obs.phi);
}

namespace {

struct Positivity {
  double mu = 0.0;
  double logit_incidence = 0.0;
  bool clamped = false;
};

Positivity positivity(double dN, double alpha0, double alpha1, const PositivityFloor& floor) {
  Positivity out;
  double x = dN;
  if (x <= floor.floor) {
    x = floor.floor;
    out.clamped = true;
  } else if (x >= 1.0 - floor.floor) {
    x = 1.0 - floor.floor;
    out.clamped = true;
  }
  if (out.clamped && floor.floor_events != nullptr) ++*floor.floor_events;
  out.logit_incidence = logit(x);
  out.mu = inv_logit(alpha0 + alpha1 * out.logit_incidence);
  return out;
}

}  // namespace

double mean_positivity(double delta_N_IeIp, double alpha0, double alpha1, PositivityFloor floor) {
  return positivity(delta_N_IeIp, alpha0, alpha1, floor).mu;
}

double case_log_pmf(std::int64_t cases, std::int64_t tests, double mu_C, double kappa) {
  return beta_binomial_log_pmf(cases, tests, mu_C, kappa);
}

double positivity_fraction_variance(std::int64_t tests, double mu_C, double kappa) {
  const auto t = static_cast<double>(tests);
  return mu_C * (1.0 - mu_C) / t * (1.0 + (t - 1.0) / (kappa + 1.0));
}

void check_alignment(const SurveillanceSeries& data, const Trajectory& traj) {
  const std::size_t bins = data.size();
  if (traj.size() < bins + 1) {
    throw std::invalid_argument("log_likelihood: trajectory grid shorter than the bin series");
  }
  const double t0 = traj.times()[0];
  for (std::size_t l = 0; l <= bins; ++l) {
    const double expected = t0 + data.bin_width * static_cast<double>(l);
    if (std::abs(traj.times()[l] - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
      throw std::invalid_argument("log_likelihood: trajectory grid misaligned with bin endpoint " +
                                  std::to_string(l));
    }
  }
}

std::vector<double> increments(const Trajectory& traj, StateIndex component, std::size_t bins) {
  if (traj.size() < bins + 1) throw std::invalid_argument("increments: trajectory too short");
  std::vector<double> out(bins);
  for (std::size_t l = 0; l < bins; ++l) {
    out[l] = traj.value(l + 1, component) - traj.value(l, component);
  }
  return out;
}

double death_log_likelihood(const SurveillanceSeries& data, const Trajectory& traj,
                            const ObservationParams& obs) {
  check_alignment(data, traj);
  const auto dN = increments(traj, kNIpD, data.size());
  double total = 0.0;
  for (std::size_t l = 0; l < data.size(); ++l) total += death_log_pmf(data.deaths[l], dN[l], obs);
  return total;
}

double case_log_likelihood(const SurveillanceSeries& data, const Trajectory& traj,
                           const ObservationParams& obs, LikelihoodDiagnostics* diag) {
  check_alignment(data, traj);
  const auto dN = increments(traj, kNIeIp, data.size());
  std::size_t floors = 0;
  double total = 0.0;
  for (std::size_t l = 0; l < data.size(); ++l) {
    const double mu = mean_positivity(dN[l], obs.alpha0, obs.alpha1, {1e-12, &floors});
    total += case_log_pmf(data.cases[l], data.tests[l], mu, obs.kappa);
  }
  if (diag != nullptr) diag->positivity_floor_events += floors;
  return total;
}

double log_likelihood(const SurveillanceSeries& data, const Trajectory& traj,
                      const ObservationParams& obs, LikelihoodDiagnostics* diag) {
  return death_log_likelihood(data, traj, obs) + case_log_likelihood(data, traj, obs, diag);
}

void accumulate_ode_gradient(const Trajectory& traj, StateIndex component,
                             std::span<const double> dll_dincrement,
                             std::span<double> grad_ode_params) {
  for (std::size_t k = 0; k < kNumOdeParams; ++k) {
    const std::size_t slot = traj.slot_of(static_cast<OdeParam>(k));
    if (slot == traj.sensitivity_params().size()) {
      throw std::invalid_argument("log_likelihood_gradient: trajectory lacks sensitivities");
    }
    double g = 0.0;
    for (std::size_t l = 0; l < dll_dincrement.size(); ++l) {
      const double ds = traj.sensitivity(l + 1, slot, component) - traj.sensitivity(l, slot, component);
      g += dll_dincrement[l] * ds;
    }
    grad_ode_params[k] += g;
  }
}

double log_likelihood_and_gradient(const SurveillanceSeries& data, const Trajectory& traj,
                                   const ObservationParams& obs, std::span<double> grad,
                                   LikelihoodDiagnostics* diag) {
  check_alignment(data, traj);
  const std::size_t bins = data.size();
  std::fill(grad.begin(), grad.end(), 0.0);
  double total = 0.0;

  const auto dN_death = increments(traj, kNIpD, bins);
  std::vector<double> dll_death(bins);
  const double scale = obs.rho * obs.pop_size;
  for (std::size_t l = 0; l < bins; ++l) {
    if (dN_death[l] < 0.0) {
      throw std::domain_error("log_likelihood_gradient: negative death increment");
    }
    const auto g = nb2_log_pmf_grad(data.deaths[l], scale * dN_death[l], obs.phi);
    total += g.value;
    grad[kDeathDetection] += g.d_first * obs.pop_size * dN_death[l];
    grad[kDeathOverdispersion] += g.d_second;
    dll_death[l] = g.d_first * scale;
  }

  const auto dN_case = increments(traj, kNIeIp, bins);
  std::vector<double> dll_case(bins);
  std::size_t floors = 0;
  for (std::size_t l = 0; l < bins; ++l) {
    const auto pos = positivity(dN_case[l], obs.alpha0, obs.alpha1, {1e-12, &floors});
    const auto g = beta_binomial_log_pmf_grad(data.cases[l], data.tests[l], pos.mu, obs.kappa);
    total += g.value;
    const double dmu_dlin = pos.mu * (1.0 - pos.mu);
    grad[kAlpha0] += g.d_first * dmu_dlin;
    grad[kAlpha1] += g.d_first * dmu_dlin * pos.logit_incidence;
    grad[kKappa] += g.d_second;
    dll_case[l] = pos.clamped ? 0.0
                              : g.d_first * dmu_dlin * obs.alpha1 / (dN_case[l] * (1.0 - dN_case[l]));
  }
  if (diag != nullptr) diag->positivity_floor_events += floors;

  auto ode_grad = grad.first(kNumOdeParams);
  accumulate_ode_gradient(traj, kNIpD, dll_death, ode_grad);
  accumulate_ode_gradient(traj, kNIeIp, dll_case, ode_grad);
  return total;
}

std::array<double, kNumParams> log_likelihood_gradient(const SurveillanceSeries& data,
                                                       const Trajectory& traj,
                                                       const ObservationParams& obs,
                                                       LikelihoodDiagnostics* diag) {
  std::array<double, kNumParams> grad{};
  log_likelihood_and_gradient(data, traj, obs, grad, diag);
  return grad;
}

}  // namespace epi::surveillance
