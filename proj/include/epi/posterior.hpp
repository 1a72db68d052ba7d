#pragma once

#include <atomic>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "epi/params.hpp"
#include "epi/priors.hpp"
#include "epi/sampler.hpp"
#include "epi/surveillance.hpp"

namespace epi {

/// How case counts enter the likelihood.
enum class CaseModel {
  TestAware,  // beta-binomial positivity given test volume
  NoTests,    // negative binomial on cases, ignoring test volume
};

/// Log posterior of one fitting window. Parameter layout is the thirteen-entry
/// vector for TestAware and the twelve-entry variant for NoTests.
class Posterior {
 public:
  Posterior(surveillance::SurveillanceSeries data, priors::PriorSpec priors,
            ModelConstants constants = {}, CaseModel model = CaseModel::TestAware);

  std::size_t dimension() const { return priors_.size(); }
  CaseModel case_model() const { return model_; }
  const priors::PriorSpec& prior_spec() const { return priors_; }
  const surveillance::SurveillanceSeries& data() const { return data_; }
  const ModelConstants& constants() const { return constants_; }

  /// Log-likelihood at constrained theta; -inf where the model cannot be evaluated.
  double log_likelihood(std::span<const double> theta) const;
  /// Writes the gradient over theta and returns the log-likelihood.
  double log_likelihood_gradient(std::span<const double> theta, std::span<double> grad) const;

  /// Unnormalised log posterior density of theta (no Jacobian).
  double log_density_constrained(std::span<const double> theta) const;
  /// Log density of z = to_unconstrained(theta), Jacobian included; writes the gradient.
  double log_density(std::span<const double> z, std::span<double> grad) const;

  /// Explanation of why log_density(z) is not finite, naming the parameter when possible.
  std::string diagnose(std::span<const double> z) const;

  mcmc::Target target() const;

  /// Number of incidence values clamped at the positivity floor so far.
  std::size_t floor_events() const { return floor_events_->load(); }

 private:
  double evaluate(std::span<const double> theta, std::span<double> grad) const;

  surveillance::SurveillanceSeries data_;
  priors::PriorSpec priors_;
  ModelConstants constants_;
  CaseModel model_;
  std::vector<double> grid_;
  std::shared_ptr<std::atomic<std::size_t>> floor_events_;
};

namespace simstudy {

/// Negative-binomial case log-pmf with mean rho_c N dN, the no-tests case model.
double no_tests_case_log_pmf(std::int64_t cases, double delta_N_IeIp, double rho_c, double phi_c,
                             double pop_size);

}  // namespace simstudy

}  // namespace epi
