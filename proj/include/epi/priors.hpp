#pragma once

#include <span>
#include <string>
#include <vector>

#include "epi/draws.hpp"
#include "epi/params.hpp"
#include "epi/random.hpp"

namespace epi::priors {

enum class Family {
  Beta,                // Beta(a, b)
  LogNormal,           // log x ~ Normal(a, b)
  TruncatedNormal,     // Normal(a, b) truncated to x > 0
  ExponentialInvSqrt,  // 1/sqrt(x) ~ Exponential(rate a)
  Flat,                // improper, constant on the support
};

enum class Support { UnitInterval, Positive };

struct Prior {
  Family family = Family::Flat;
  double a = 0.0;
  double b = 0.0;

  double log_density(double x) const;
  double d_log_density(double x) const;
  double sample(Rng& rng) const;
  /// Throws std::invalid_argument if the hyperparameters are invalid for the family.
  void validate() const;

  static Prior beta(double a, double b) { return {Family::Beta, a, b}; }
  static Prior log_normal(double mu, double sigma) { return {Family::LogNormal, mu, sigma}; }
  static Prior truncated_normal(double mu, double sigma) { return {Family::TruncatedNormal, mu, sigma}; }
  static Prior exponential_inv_sqrt(double rate) { return {Family::ExponentialInvSqrt, rate, 0.0}; }
  static Prior flat() { return {Family::Flat, 0.0, 0.0}; }
};

std::string family_name(Family f);
Family family_from_name(const std::string& name);

struct ParameterPrior {
  std::string name;
  Support support = Support::Positive;
  Prior prior;
};

/// One prior per free parameter, in parameter-vector order.
struct PriorSpec {
  std::vector<ParameterPrior> entries;

  std::size_t size() const { return entries.size(); }
  std::size_t index_of(const std::string& name) const;
  std::vector<std::string> names() const;
  void set(const std::string& name, const Prior& prior);
  void validate() const;
};

/// Initial-fit priors of the test-aware model.
PriorSpec default_prior_spec();
/// Priors of the comparison model whose case counts ignore test volume.
PriorSpec no_tests_prior_spec();

bool in_support(std::span<const double> theta, const PriorSpec& spec);

/// Sum of independent log-densities; -inf outside the support.
double log_prior(std::span<const double> theta, const PriorSpec& spec);
double log_prior(const ParamVector& theta, const PriorSpec& spec);
/// Writes d log_prior / d theta into `grad` and returns log_prior.
double log_prior_gradient(std::span<const double> theta, const PriorSpec& spec,
                          std::span<double> grad);

std::vector<double> sample_prior(const PriorSpec& spec, Rng& rng);

/// Unconstrained starting point: a prior draw, or uniform on (-2, 2) for flat entries.
std::vector<double> initial_point(const PriorSpec& spec, Rng& rng);

std::vector<double> to_unconstrained(std::span<const double> theta, const PriorSpec& spec);

struct Constrained {
  std::vector<double> theta;
  double log_jacobian = 0.0;        // log |det d theta / d z|
  std::vector<double> dtheta_dz;    // diagonal of the Jacobian
  std::vector<double> dlogjac_dz;   // gradient of log_jacobian
};
Constrained from_unconstrained(std::span<const double> z, const PriorSpec& spec);

struct BetaHyper {
  double alpha = 1.0;
  double beta = 1.0;
};

/// Beta(alpha, beta) with the given mean and variance.
BetaHyper beta_method_of_moments(double mean, double variance);

struct InitialStatePriors {
  BetaHyper S0;
  BetaHyper I_tilde0;
  BetaHyper Ie_tilde0;
};

/// Moment-matched Beta priors for the next fitting window's initial-state
/// fractions, from each draw's at-risk compartments at `at_time` (weeks from t0).
InitialStatePriors propagate_initial_priors(const PosteriorDraws& draws, double at_time,
                                            const ModelConstants& constants);

/// Replaces the three initial-state priors in `spec` by propagated ones.
void apply_initial_priors(PriorSpec& spec, const InitialStatePriors& priors);

}  // namespace epi::priors
