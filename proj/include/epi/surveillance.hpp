#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "epi/model.hpp"
#include "epi/params.hpp"

namespace epi::surveillance {

/// Binned counts over L consecutive intervals of `bin_width` weeks.
struct SurveillanceSeries {
  double bin_width = 3.0 / 7.0;
  std::vector<std::int64_t> tests;
  std::vector<std::int64_t> cases;
  std::vector<std::int64_t> deaths;

  std::size_t size() const { return deaths.size(); }
  /// Throws std::invalid_argument when lengths differ, counts are negative or cases exceed tests.
  void validate() const;
};

struct ObservationParams {
  double rho = 0.0;     // mean death detection probability
  double phi = 0.0;     // death overdispersion
  double alpha0 = 0.0;  // positivity log-odds intercept
  double alpha1 = 0.0;  // positivity log-odds slope
  double kappa = 0.0;   // positivity overdispersion
  double pop_size = 3.18e6;
};

ObservationParams observation_params_of(std::span<const double> theta, double pop_size);

/// Value of a log-pmf with its partial derivatives in the two distribution parameters.
struct LogPmfGrad {
  double value = 0.0;
  double d_first = 0.0;   // d/d mean
  double d_second = 0.0;  // d/d overdispersion
};

/// NB2 log-pmf: mean `mean`, variance mean (1 + mean / phi).
double nb2_log_pmf(std::int64_t count, double mean, double phi);
LogPmfGrad nb2_log_pmf_grad(std::int64_t count, double mean, double phi);

/// Beta-binomial log-pmf with shapes (kappa mu, kappa (1 - mu)).
double beta_binomial_log_pmf(std::int64_t successes, std::int64_t trials, double mu, double kappa);
LogPmfGrad beta_binomial_log_pmf_grad(std::int64_t successes, std::int64_t trials, double mu,
                                      double kappa);

double death_log_pmf(std::int64_t deaths, double delta_N_IpD, const ObservationParams& obs);

/// Incidence values at or below `floor` are clamped before the logit; each clamp
/// increments `floor_events` when given.
struct PositivityFloor {
  double floor = 1e-12;
  std::size_t* floor_events = nullptr;
};

double mean_positivity(double delta_N_IeIp, double alpha0, double alpha1,
                       PositivityFloor floor = {});

double case_log_pmf(std::int64_t cases, std::int64_t tests, double mu_C, double kappa);

/// Variance of Y/T under the beta-binomial case model.
double positivity_fraction_variance(std::int64_t tests, double mu_C, double kappa);

/// Per-bin increments N(t_l) - N(t_{l-1}) of one cumulative component.
std::vector<double> increments(const Trajectory& traj, StateIndex component, std::size_t bins);

/// Throws std::invalid_argument unless the trajectory grid holds every bin endpoint.
void check_alignment(const SurveillanceSeries& data, const Trajectory& traj);

struct LikelihoodDiagnostics {
  std::size_t positivity_floor_events = 0;
};

double death_log_likelihood(const SurveillanceSeries& data, const Trajectory& traj,
                            const ObservationParams& obs);
double case_log_likelihood(const SurveillanceSeries& data, const Trajectory& traj,
                           const ObservationParams& obs, LikelihoodDiagnostics* diag = nullptr);
double log_likelihood(const SurveillanceSeries& data, const Trajectory& traj,
                      const ObservationParams& obs, LikelihoodDiagnostics* diag = nullptr);

/// Exact gradient of log_likelihood over the thirteen model parameters. The
/// trajectory must carry sensitivities for all eight ODE parameters.
std::array<double, kNumParams> log_likelihood_gradient(const SurveillanceSeries& data,
                                                       const Trajectory& traj,
                                                       const ObservationParams& obs,
                                                       LikelihoodDiagnostics* diag = nullptr);

/// log_likelihood and its gradient in one pass; writes the gradient into `grad`
/// (length kNumParams) and returns the log-likelihood.
double log_likelihood_and_gradient(const SurveillanceSeries& data, const Trajectory& traj,
                                   const ObservationParams& obs, std::span<double> grad,
                                   LikelihoodDiagnostics* diag = nullptr);

/// Chain-rule helper shared by model variants: given d(loglik)/d(increment) of a
/// cumulative component per bin, accumulates the gradient over ODE parameters.
void accumulate_ode_gradient(const Trajectory& traj, StateIndex component,
                             std::span<const double> dll_dincrement,
                             std::span<double> grad_ode_params);

}  // namespace epi::surveillance
