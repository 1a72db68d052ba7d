#include "epi/priors.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "epi/math.hpp"
#include "epi/model.hpp"

namespace epi::priors {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double log_inv_logit(double z) {
  return z >= 0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

}  // namespace

double Prior::log_density(double x) const {
  switch (family) {
    case Family::Beta:
      if (!(x > 0.0 && x < 1.0)) return kNegInf;
      return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) -
             (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
    case Family::LogNormal: {
      if (!(x > 0.0)) return kNegInf;
      const double u = (std::log(x) - a) / b;
      return -std::log(x) - std::log(b) - kLogSqrt2Pi - 0.5 * u * u;
    }
    case Family::TruncatedNormal: {
      if (!(x > 0.0)) return kNegInf;
      const double u = (x - a) / b;
      return -std::log(b) - kLogSqrt2Pi - 0.5 * u * u - std::log(std_normal_cdf(a / b));
    }
    case Family::ExponentialInvSqrt: {
      if (!(x > 0.0)) return kNegInf;
      // density of u = x^{-1/2} ~ Exp(a), times |du/dx| = x^{-3/2} / 2
      return std::log(a) - a / std::sqrt(x) - std::numbers::ln2 - 1.5 * std::log(x);
    }
    case Family::Flat:
      return 0.0;
  }
  return kNegInf;
}

double Prior::d_log_density(double x) const {
  switch (family) {
    case Family::Beta:
      return (a - 1.0) / x - (b - 1.0) / (1.0 - x);
    case Family::LogNormal:
      return -1.0 / x - (std::log(x) - a) / (b * b * x);
    case Family::TruncatedNormal:
      return -(x - a) / (b * b);
    case Family::ExponentialInvSqrt:
      return 0.5 * a * std::pow(x, -1.5) - 1.5 / x;
    case Family::Flat:
      return 0.0;
  }
  return 0.0;
}

double Prior::sample(Rng& rng) const {
  switch (family) {
    case Family::Beta:
      return draw_beta(rng, a, b);
    case Family::LogNormal:
      return std::exp(a + b * draw_normal(rng));
    case Family::TruncatedNormal:
      for (;;) {
        const double x = a + b * draw_normal(rng);
        if (x > 0.0) return x;
      }
    case Family::ExponentialInvSqrt: {
      double u = 0.0;
      while (u == 0.0) u = std::exponential_distribution<double>(a)(rng);
      return 1.0 / (u * u);
    }
    case Family::Flat:
      throw std::logic_error("cannot sample from a flat prior");
  }
  return 0.0;
}

void Prior::validate() const {
  bool ok = true;
  switch (family) {
    case Family::Beta:
      ok = a > 0.0 && b > 0.0;
      break;
    case Family::LogNormal:
    case Family::TruncatedNormal:
      ok = std::isfinite(a) && b > 0.0;
      break;
    case Family::ExponentialInvSqrt:
      ok = a > 0.0;
      break;
    case Family::Flat:
      break;
  }
  if (!ok || !std::isfinite(a) || !std::isfinite(b)) {
    throw std::invalid_argument("invalid hyperparameters for " + family_name(family) + " prior");
  }
}

std::string family_name(Family f) {
  switch (f) {
    case Family::Beta: return "beta";
    case Family::LogNormal: return "log_normal";
    case Family::TruncatedNormal: return "truncated_normal";
    case Family::ExponentialInvSqrt: return "exponential_inv_sqrt";
    case Family::Flat: return "flat";
  }
  return "unknown";
}

Family family_from_name(const std::string& name) {
  for (auto f : {Family::Beta, Family::LogNormal, Family::TruncatedNormal,
                 Family::ExponentialInvSqrt, Family::Flat}) {
    if (family_name(f) == name) return f;
  }
  throw std::invalid_argument("unknown prior family '" + name + "'");
}

std::size_t PriorSpec::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].name == name) return i;
  }
  throw std::out_of_range("prior spec: no parameter named " + name);
}

std::vector<std::string> PriorSpec::names() const {
  std::vector<std::string> out;
  for (const auto& e : entries) out.push_back(e.name);
  return out;
}

void PriorSpec::set(const std::string& name, const Prior& prior) {
  prior.validate();
  entries[index_of(name)].prior = prior;
}

void PriorSpec::validate() const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    entries[i].prior.validate();
    if (entries[i].prior.family == Family::Beta && entries[i].support != Support::UnitInterval) {
      throw std::invalid_argument("prior spec: beta prior on positive parameter " + entries[i].name);
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (entries[j].name == entries[i].name) {
        throw std::invalid_argument("prior spec: duplicate entry " + entries[i].name);
      }
    }
  }
}

PriorSpec default_prior_spec() {
  using S = Support;
  PriorSpec spec;
  spec.entries = {
      {"S0", S::UnitInterval, Prior::beta(983.0, 2.7)},
      {"I_tilde0", S::UnitInterval, Prior::beta(41.3, 17.26)},
      {"Ie_tilde0", S::UnitInterval, Prior::beta(24.43, 27.02)},
      {"R0", S::Positive, Prior::log_normal(-0.25, 0.7)},
      {"inv_gamma", S::Positive, Prior::log_normal(0.0, 0.22)},
      {"inv_nu_e", S::Positive, Prior::log_normal(0.0, 0.22)},
      {"inv_nu_p", S::Positive, Prior::log_normal(0.0, 0.22)},
      {"eta", S::UnitInterval, Prior::beta(1.5, 200.0)},
      {"rho", S::UnitInterval, Prior::beta(8.0, 2.0)},
      {"phi", S::Positive, Prior::exponential_inv_sqrt(1.0)},
      {"alpha0", S::Positive, Prior::truncated_normal(4.0, 2.0)},
      {"alpha1", S::UnitInterval, Prior::beta(3.0, 1.0)},
      {"kappa", S::Positive, Prior::exponential_inv_sqrt(1.0)},
  };
  return spec;
}

PriorSpec no_tests_prior_spec() {
  PriorSpec spec = default_prior_spec();
  spec.entries.resize(kAlpha0);
  spec.entries.push_back({"rho_c", Support::UnitInterval, Prior::beta(5.62, 42.57)});
  spec.entries.push_back({"phi_c", Support::Positive, Prior::exponential_inv_sqrt(1.0)});
  return spec;
}

bool in_support(std::span<const double> theta, const PriorSpec& spec) {
  if (theta.size() != spec.size()) return false;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double x = theta[i];
    if (!std::isfinite(x) || !(x > 0.0)) return false;
    if (spec.entries[i].support == Support::UnitInterval && !(x < 1.0)) return false;
  }
  return true;
}

double log_prior(std::span<const double> theta, const PriorSpec& spec) {
  if (!in_support(theta, spec)) return kNegInf;
  double total = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) total += spec.entries[i].prior.log_density(theta[i]);
  return total;
}

double log_prior(const ParamVector& theta, const PriorSpec& spec) {
  const auto v = theta.to_array();
  return log_prior(std::span<const double>(v), spec);
}

double log_prior_gradient(std::span<const double> theta, const PriorSpec& spec,
                          std::span<double> grad) {
  const double lp = log_prior(theta, spec);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    grad[i] = lp == kNegInf ? 0.0 : spec.entries[i].prior.d_log_density(theta[i]);
  }
  return lp;
}

std::vector<double> sample_prior(const PriorSpec& spec, Rng& rng) {
  std::vector<double> theta(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) theta[i] = spec.entries[i].prior.sample(rng);
  return theta;
}

std::vector<double> initial_point(const PriorSpec& spec, Rng& rng) {
  std::vector<double> z(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const auto& e = spec.entries[i];
    if (e.prior.family == Family::Flat) {
      z[i] = -2.0 + 4.0 * draw_uniform(rng);
    } else {
      const double x = e.prior.sample(rng);
      z[i] = e.support == Support::UnitInterval ? logit(x) : std::log(x);
    }
  }
  return z;
}

std::vector<double> to_unconstrained(std::span<const double> theta, const PriorSpec& spec) {
  std::vector<double> z(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    z[i] = spec.entries[i].support == Support::UnitInterval ? logit(theta[i]) : std::log(theta[i]);
  }
  return z;
}

Constrained from_unconstrained(std::span<const double> z, const PriorSpec& spec) {
  Constrained out;
  const std::size_t n = z.size();
  out.theta.resize(n);
  out.dtheta_dz.resize(n);
  out.dlogjac_dz.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (spec.entries[i].support == Support::UnitInterval) {
      const double t = inv_logit(z[i]);
      out.theta[i] = t;
      out.dtheta_dz[i] = t * inv_logit(-z[i]);
      out.log_jacobian += log_inv_logit(z[i]) + log_inv_logit(-z[i]);
      out.dlogjac_dz[i] = 1.0 - 2.0 * t;
    } else {
      const double t = std::exp(z[i]);
      out.theta[i] = t;
      out.dtheta_dz[i] = t;
      out.log_jacobian += z[i];
      out.dlogjac_dz[i] = 1.0;
    }
  }
  return out;
}

BetaHyper beta_method_of_moments(double mean, double variance) {
  if (!(mean > 0.0 && mean < 1.0)) {
    throw std::invalid_argument("beta_method_of_moments: mean must lie in (0, 1)");
  }
  if (!(variance > 0.0)) {
    throw std::invalid_argument("beta_method_of_moments: variance must be positive");
  }
  const double bound = mean * (1.0 - mean);
  if (variance >= bound) {
    throw std::invalid_argument(
        "beta_method_of_moments: variance exceeds m(1-m), no Beta distribution matches; "
        "cap the variance below m(1-m) (e.g. inflate at most to 0.99 m(1-m))");
  }
  const double common = bound / variance - 1.0;
  return {mean * common, (1.0 - mean) * common};
}

InitialStatePriors propagate_initial_priors(const PosteriorDraws& draws, double at_time,
                                            const ModelConstants& constants) {
  if (draws.size() < 2) throw std::invalid_argument("propagate_initial_priors: need at least two draws");
  if (!(at_time >= 0.0)) throw std::invalid_argument("propagate_initial_priors: negative time");
  std::vector<double> grid = at_time > 0.0 ? std::vector<double>{0.0, at_time} : std::vector<double>{0.0};

  std::vector<double> values[3];
  for (std::size_t d = 0; d < draws.size(); ++d) {
    const auto theta = draws.row(d);
    const auto traj = solve(init_params_of(theta), rate_params_of(theta, constants.delta), grid);
    const auto x = traj.state(traj.size() - 1);
    const double at_risk = x.S + x.E + x.Ie + x.Ip;
    const double infectious = x.Ie + x.Ip;
    values[0].push_back(x.S / at_risk);
    values[1].push_back(infectious / (x.E + infectious));
    values[2].push_back(x.Ie / infectious);
  }
  BetaHyper out[3];
  for (int k = 0; k < 3; ++k) {
    const auto n = static_cast<double>(values[k].size());
    double m = 0.0;
    for (double v : values[k]) m += v;
    m /= n;
    double ss = 0.0;
    for (double v : values[k]) ss += (v - m) * (v - m);
    out[k] = beta_method_of_moments(m, ss / (n - 1.0));
  }
  return {out[0], out[1], out[2]};
}

void apply_initial_priors(PriorSpec& spec, const InitialStatePriors& priors) {
  spec.set("S0", Prior::beta(priors.S0.alpha, priors.S0.beta));
  spec.set("I_tilde0", Prior::beta(priors.I_tilde0.alpha, priors.I_tilde0.beta));
  spec.set("Ie_tilde0", Prior::beta(priors.Ie_tilde0.alpha, priors.Ie_tilde0.beta));
}

}  // namespace epi::priors
