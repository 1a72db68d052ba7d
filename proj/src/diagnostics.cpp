#include "epi/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>

namespace epi::mcmc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ChainSet split(const ChainSet& chains) {
  ChainSet out;
  for (const auto& c : chains) {
    const std::size_t half = c.size() / 2;
    out.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
    out.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
  }
  return out;
}

bool has_variance(const ChainSet& chains) {
  const double first = chains.front().front();
  for (const auto& c : chains) {
    for (double v : c) {
      if (v != first) return true;
    }
  }
  return false;
}

ChainSet rank_normalize(const ChainSet& chains) {
  std::vector<std::pair<double, std::size_t>> pooled;
  for (const auto& c : chains) {
    for (double v : c) pooled.emplace_back(v, pooled.size());
  }
  std::sort(pooled.begin(), pooled.end());
  const auto total = static_cast<double>(pooled.size());
  std::vector<double> z(pooled.size());
  for (std::size_t i = 0; i < pooled.size();) {
    std::size_t j = i;
    while (j + 1 < pooled.size() && pooled[j + 1].first == pooled[i].first) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;  // average of 1-based ranks
    const double p = (rank - 0.375) / (total + 0.25);
    const double value = -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
    for (std::size_t k = i; k <= j; ++k) z[pooled[k].second] = value;
    i = j + 1;
  }
  ChainSet out;
  std::size_t k = 0;
  for (const auto& c : chains) {
    out.emplace_back(z.begin() + static_cast<std::ptrdiff_t>(k),
                     z.begin() + static_cast<std::ptrdiff_t>(k + c.size()));
    k += c.size();
  }
  return out;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v) {
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

double rhat_basic(const ChainSet& chains) {
  const auto n = static_cast<double>(chains.front().size());
  std::vector<double> means, vars;
  for (const auto& c : chains) {
    means.push_back(mean(c));
    vars.push_back(sample_variance(c));
  }
  const double between = n * sample_variance(means);
  const double within = mean(vars);
  if (!(within > 0.0)) return kNaN;
  const double var_plus = (n - 1.0) / n * within + between / n;
  return std::sqrt(var_plus / within);
}

double ess_basic(const ChainSet& chains) {
  const std::size_t n_chains = chains.size();
  const std::size_t n = chains.front().size();
  const auto nd = static_cast<double>(n);

  std::vector<double> chain_mean(n_chains), chain_var(n_chains);
  for (std::size_t c = 0; c < n_chains; ++c) {
    chain_mean[c] = mean(chains[c]);
    chain_var[c] = sample_variance(chains[c]);
  }
  const double mean_var = mean(chain_var);
  double var_plus = mean_var * (nd - 1.0) / nd;
  if (n_chains > 1) var_plus += sample_variance(chain_mean);
  if (!(var_plus > 0.0)) return kNaN;

  // Mean over chains of the biased autocovariance at lag t.
  auto mean_acov = [&](std::size_t t) {
    double total = 0.0;
    for (std::size_t c = 0; c < n_chains; ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i + t < n; ++i) {
        s += (chains[c][i] - chain_mean[c]) * (chains[c][i + t] - chain_mean[c]);
      }
      total += s / nd;
    }
    return total / static_cast<double>(n_chains);
  };

  std::vector<double> rho(n + 2, 0.0);
  rho[0] = 1.0;
  double rho_even = 1.0;
  double rho_odd = 1.0 - (mean_var - mean_acov(1)) / var_plus;
  rho[1] = rho_odd;
  std::size_t t = 1;
  while (t + 4 < n && rho_even + rho_odd > 0.0) {
    rho_even = 1.0 - (mean_var - mean_acov(t + 1)) / var_plus;
    rho_odd = 1.0 - (mean_var - mean_acov(t + 2)) / var_plus;
    if (rho_even + rho_odd >= 0.0) {
      rho[t + 1] = rho_even;
      rho[t + 2] = rho_odd;
    }
    t += 2;
  }
  const std::size_t max_t = t;
  if (rho_even > 0.0) rho[max_t + 1] = rho_even;

  // Enforce a monotone sequence of paired sums.
  for (std::size_t u = 1; u + 2 <= max_t; u += 2) {
    if (rho[u + 1] + rho[u + 2] > rho[u - 1] + rho[u]) {
      rho[u + 1] = (rho[u - 1] + rho[u]) / 2.0;
      rho[u + 2] = rho[u + 1];
    }
  }
  double tau = -1.0 + rho[max_t + 1];
  for (std::size_t u = 0; u <= max_t; ++u) tau += 2.0 * rho[u];
  const double total = static_cast<double>(n_chains) * nd;
  const double ess = total / tau;
  return std::min(ess, total * std::log10(total));
}

void check(const ChainSet& chains) {
  if (chains.size() < 2) throw std::invalid_argument("diagnostics: at least two chains required");
  for (const auto& c : chains) {
    if (c.size() != chains.front().size()) throw std::invalid_argument("diagnostics: chains differ in length");
    if (c.size() < 4) throw std::invalid_argument("diagnostics: chains too short");
  }
}

}  // namespace

double split_rhat(const ChainSet& chains) {
  check(chains);
  if (!has_variance(chains)) return kNaN;
  const auto halves = split(chains);
  const double bulk = rhat_basic(rank_normalize(halves));

  std::vector<double> pooled;
  for (const auto& c : halves) pooled.insert(pooled.end(), c.begin(), c.end());
  std::nth_element(pooled.begin(), pooled.begin() + static_cast<std::ptrdiff_t>(pooled.size() / 2), pooled.end());
  const double median = pooled[pooled.size() / 2];
  ChainSet folded = halves;
  for (auto& c : folded) {
    for (auto& v : c) v = std::abs(v - median);
  }
  const double tail = has_variance(folded) ? rhat_basic(rank_normalize(folded)) : bulk;
  return std::max(bulk, tail);
}

double effective_sample_size(const ChainSet& chains) {
  check(chains);
  if (!has_variance(chains)) return kNaN;
  return ess_basic(rank_normalize(split(chains)));
}

double effective_sample_size_raw(const ChainSet& chains) {
  check(chains);
  if (!has_variance(chains)) return kNaN;
  return ess_basic(split(chains));
}

double Diagnostics::max_rhat() const {
  double out = 0.0;
  for (const auto& p : parameters) {
    if (!p.degenerate) out = std::max(out, p.rhat);
  }
  return out;
}

double Diagnostics::min_ess() const {
  double out = std::numeric_limits<double>::infinity();
  for (const auto& p : parameters) {
    if (!p.degenerate) out = std::min(out, p.ess);
  }
  return out;
}

ChainSet chains_of(const PosteriorDraws& draws, std::size_t param) {
  ChainSet out(draws.n_chains);
  for (std::size_t d = 0; d < draws.size(); ++d) {
    out[static_cast<std::size_t>(draws.chain[d])].push_back(draws.at(d, param));
  }
  return out;
}

Diagnostics diagnostics(const PosteriorDraws& draws) {
  if (draws.n_chains < 2) throw std::invalid_argument("diagnostics: at least two chains required");
  if (draws.draws_per_chain < 100) {
    throw std::invalid_argument("diagnostics: at least 100 retained draws per chain required");
  }
  Diagnostics out;
  for (std::size_t j = 0; j < draws.n_params(); ++j) {
    const auto chains = chains_of(draws, j);
    ParameterDiagnostics p;
    p.name = draws.names[j];
    p.rhat = split_rhat(chains);
    p.ess = effective_sample_size(chains);
    p.degenerate = std::isnan(p.rhat) || std::isnan(p.ess);
    out.parameters.push_back(p);
  }
  for (char d : draws.divergent) out.divergences += d != 0 ? 1 : 0;
  return out;
}

}  // namespace epi::mcmc
