#include "epi/posterior.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "epi/math.hpp"

namespace epi {

namespace simstudy {

double no_tests_case_log_pmf(std::int64_t cases, double delta_N_IeIp, double rho_c, double phi_c,
                             double pop_size) {
  if (delta_N_IeIp < 0.0) {
    throw std::domain_error("no_tests_case_log_pmf: negative case increment (integrator misuse)");
  }
  return surveillance::nb2_log_pmf(cases, rho_c * pop_size * delta_N_IeIp, phi_c);
}

}  // namespace simstudy

namespace {

std::size_t expected_dimension(CaseModel m) {
  return m == CaseModel::TestAware ? kNumParams : kNumNoTestsParams;
}

// Deaths and cases under the no-tests model, both negative binomial.
double no_tests_loglik(const surveillance::SurveillanceSeries& data, const Trajectory& traj,
                       std::span<const double> theta, double pop_size, std::span<double> grad) {
  surveillance::check_alignment(data, traj);
  const std::size_t bins = data.size();
  const bool want_grad = !grad.empty();
  if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);

  const double rho = theta[kDeathDetection];
  const double phi = theta[kDeathOverdispersion];
  const double rho_c = theta[kCaseDetection];
  const double phi_c = theta[kCaseOverdispersion];

  const auto dN_death = surveillance::increments(traj, kNIpD, bins);
  const auto dN_case = surveillance::increments(traj, kNIeIp, bins);
  std::vector<double> dll_death(bins), dll_case(bins);
  double total = 0.0;
  for (std::size_t l = 0; l < bins; ++l) {
    if (dN_death[l] < 0.0 || dN_case[l] < 0.0) {
      throw std::domain_error("log_likelihood: negative increment");
    }
    const auto gd = surveillance::nb2_log_pmf_grad(data.deaths[l], rho * pop_size * dN_death[l], phi);
    const auto gc =
        surveillance::nb2_log_pmf_grad(data.cases[l], rho_c * pop_size * dN_case[l], phi_c);
    total += gd.value + gc.value;
    if (!want_grad) continue;
    grad[kDeathDetection] += gd.d_first * pop_size * dN_death[l];
    grad[kDeathOverdispersion] += gd.d_second;
    grad[kCaseDetection] += gc.d_first * pop_size * dN_case[l];
    grad[kCaseOverdispersion] += gc.d_second;
    dll_death[l] = gd.d_first * rho * pop_size;
    dll_case[l] = gc.d_first * rho_c * pop_size;
  }
  if (want_grad) {
    auto ode_grad = grad.first(kNumOdeParams);
    surveillance::accumulate_ode_gradient(traj, kNIpD, dll_death, ode_grad);
    surveillance::accumulate_ode_gradient(traj, kNIeIp, dll_case, ode_grad);
  }
  return total;
}

}  // namespace

Posterior::Posterior(surveillance::SurveillanceSeries data, priors::PriorSpec priors,
                     ModelConstants constants, CaseModel model)
    : data_(std::move(data)),
      priors_(std::move(priors)),
      constants_(constants),
      model_(model),
      floor_events_(std::make_shared<std::atomic<std::size_t>>(0)) {
  data_.validate();
  priors_.validate();
  if (priors_.size() != expected_dimension(model_)) {
    throw std::invalid_argument("posterior: prior spec has " + std::to_string(priors_.size()) +
                                " entries, model needs " +
                                std::to_string(expected_dimension(model_)));
  }
  if (!(constants_.pop_size > 0.0)) throw std::invalid_argument("posterior: population size must be positive");
  if (std::abs(data_.bin_width - constants_.bin_width) > 1e-12) {
    throw std::invalid_argument("posterior: data bin width differs from the configured bin width");
  }
  grid_ = uniform_grid(0.0, data_.bin_width, data_.size());
}

double Posterior::evaluate(std::span<const double> theta, std::span<double> grad) const {
  const bool want_grad = !grad.empty();
  const auto init = init_params_of(theta);
  const auto rates = rate_params_of(theta, constants_.delta);
  const Trajectory traj = want_grad ? solve_with_sensitivities(init, rates, grid_, kAllOdeParams)
                                    : solve(init, rates, grid_);
  if (model_ == CaseModel::NoTests) {
    return no_tests_loglik(data_, traj, theta, constants_.pop_size, grad);
  }
  const auto obs = surveillance::observation_params_of(theta, constants_.pop_size);
  surveillance::LikelihoodDiagnostics diag;
  double ll;
  if (want_grad) {
    ll = surveillance::log_likelihood_and_gradient(data_, traj, obs, grad, &diag);
  } else {
    ll = surveillance::log_likelihood(data_, traj, obs, &diag);
  }
  if (diag.positivity_floor_events > 0) *floor_events_ += diag.positivity_floor_events;
  return ll;
}

double Posterior::log_likelihood(std::span<const double> theta) const {
  if (!priors::in_support(theta, priors_)) return kNegInf;
  try {
    const double ll = evaluate(theta, {});
    return std::isfinite(ll) ? ll : kNegInf;
  } catch (const std::exception&) {
    return kNegInf;
  }
}

double Posterior::log_likelihood_gradient(std::span<const double> theta,
                                          std::span<double> grad) const {
  if (!priors::in_support(theta, priors_)) return kNegInf;
  try {
    const double ll = evaluate(theta, grad);
    return std::isfinite(ll) ? ll : kNegInf;
  } catch (const std::exception&) {
    return kNegInf;
  }
}

double Posterior::log_density_constrained(std::span<const double> theta) const {
  const double lp = priors::log_prior(theta, priors_);
  if (!std::isfinite(lp)) return kNegInf;
  const double ll = log_likelihood(theta);
  return std::isfinite(ll) ? lp + ll : kNegInf;
}

double Posterior::log_density(std::span<const double> z, std::span<double> grad) const {
  const std::size_t d = dimension();
  const auto c = priors::from_unconstrained(z, priors_);
  std::vector<double> g_prior(d, 0.0), g_ll(d, 0.0);
  const double lp = priors::log_prior_gradient(c.theta, priors_, g_prior);
  if (!std::isfinite(lp)) return kNegInf;
  const double ll = log_likelihood_gradient(c.theta, g_ll);
  const double total = lp + ll + c.log_jacobian;
  if (!std::isfinite(total)) return kNegInf;
  for (std::size_t i = 0; i < d; ++i) {
    grad[i] = (g_prior[i] + g_ll[i]) * c.dtheta_dz[i] + c.dlogjac_dz[i];
    if (!std::isfinite(grad[i])) return kNegInf;
  }
  return total;
}

std::string Posterior::diagnose(std::span<const double> z) const {
  const auto c = priors::from_unconstrained(z, priors_);
  std::ostringstream os;
  for (std::size_t i = 0; i < dimension(); ++i) {
    const double x = c.theta[i];
    const auto& entry = priors_.entries[i];
    if (!std::isfinite(x)) {
      os << "parameter " << entry.name << " is not finite";
      return os.str();
    }
    const double lpi = entry.prior.log_density(x);
    if (!std::isfinite(lpi)) {
      os << "parameter " << entry.name << " = " << x << " has zero prior density";
      return os.str();
    }
  }
  try {
    evaluate(c.theta, {});
  } catch (const std::exception& e) {
    os << "likelihood cannot be evaluated: " << e.what();
    return os.str();
  }
  std::vector<double> grad(dimension());
  if (!std::isfinite(log_density(z, grad))) {
    // Find the parameter whose gradient is not finite, if any.
    for (std::size_t i = 0; i < dimension(); ++i) {
      if (!std::isfinite(grad[i])) {
        os << "gradient with respect to " << priors_.entries[i].name << " is not finite";
        return os.str();
      }
    }
    return "log-likelihood is -inf (data impossible under these parameters)";
  }
  return "log density is finite";
}

mcmc::Target Posterior::target() const {
  mcmc::Target t;
  t.names = priors_.names();
  auto self = std::make_shared<Posterior>(*this);
  t.log_density = [self](std::span<const double> z, std::span<double> grad) {
    return self->log_density(z, grad);
  };
  t.constrain = [self](std::span<const double> z) {
    return priors::from_unconstrained(z, self->priors_).theta;
  };
  t.initial_point = [self](Rng& rng) {
    return priors::initial_point(self->priors_, rng);
  };
  t.diagnose = [self](std::span<const double> z) { return self->diagnose(z); };
  return t;
}

}  // namespace epi
