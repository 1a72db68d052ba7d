#include "epi/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "epi/math.hpp"

namespace epi::mcmc {

void SamplerConfig::validate() const {
  if (n_chains < 1) throw std::invalid_argument("sampler.n_chains must be at least 1");
  if (!(n_warmup < n_draws)) throw std::invalid_argument("sampler.n_warmup must be below sampler.n_draws");
  if (n_draws % n_chains != 0 || n_warmup % n_chains != 0) {
    throw std::invalid_argument("sampler.n_draws and sampler.n_warmup must divide evenly across chains");
  }
  if (!(target_accept > 0.0 && target_accept < 1.0)) {
    throw std::invalid_argument("sampler.target_accept must lie in (0, 1)");
  }
  if (max_tree_depth < 0) throw std::invalid_argument("sampler.max_tree_depth must be non-negative");
  if (max_init_attempts < 1) throw std::invalid_argument("sampler.max_init_attempts must be positive");
}

double hamiltonian(const PhasePoint& z, std::span<const double> inv_metric) {
  double kinetic = 0.0;
  for (std::size_t i = 0; i < z.p.size(); ++i) kinetic += z.p[i] * z.p[i] * inv_metric[i];
  const double h = -z.log_density + 0.5 * kinetic;
  return std::isnan(h) ? std::numeric_limits<double>::infinity() : h;
}

void leapfrog(const LogDensityFn& f, PhasePoint& z, std::span<const double> inv_metric, double eps) {
  const std::size_t n = z.q.size();
  for (std::size_t i = 0; i < n; ++i) z.p[i] += 0.5 * eps * z.grad[i];
  for (std::size_t i = 0; i < n; ++i) z.q[i] += eps * inv_metric[i] * z.p[i];
  z.log_density = f(z.q, z.grad);
  if (!std::isfinite(z.log_density)) {
    z.log_density = kNegInf;
    return;
  }
  for (std::size_t i = 0; i < n; ++i) z.p[i] += 0.5 * eps * z.grad[i];
}

void DualAveraging::restart(double step_size) {
  mu_ = std::log(10.0 * step_size);
  s_bar_ = 0.0;
  x_bar_ = 0.0;
  counter_ = 0;
}

double DualAveraging::update(double accept_stat) {
  ++counter_;
  const double stat = std::min(1.0, accept_stat);
  const auto t = static_cast<double>(counter_);
  const double eta = 1.0 / (t + t0_);
  s_bar_ = (1.0 - eta) * s_bar_ + eta * (target_ - stat);
  const double x = mu_ - s_bar_ * std::sqrt(t) / gamma_;
  const double x_eta = std::pow(t, -kappa_);
  x_bar_ = (1.0 - x_eta) * x_bar_ + x_eta * x;
  return std::exp(x);
}

double DualAveraging::final_step_size() const { return std::exp(x_bar_); }

std::vector<std::pair<std::size_t, std::size_t>> adaptation_windows(std::size_t n_warmup,
                                                                    std::size_t base_window) {
  std::vector<std::pair<std::size_t, std::size_t>> windows;
  if (n_warmup < 20) return windows;
  const std::size_t init_buffer = n_warmup * 15 / 100;
  const std::size_t term_buffer = n_warmup * 10 / 100;
  const std::size_t end = n_warmup - term_buffer;
  std::size_t start = init_buffer;
  std::size_t size = std::max<std::size_t>(1, std::min(base_window, end - start));
  while (start < end) {
    std::size_t stop = start + size;
    if (stop + 2 * size > end) stop = end;
    windows.emplace_back(start, stop);
    start = stop;
    size *= 2;
  }
  return windows;
}

namespace {

struct Transition {
  int depth = 0;
  int n_leapfrog = 0;
  bool divergent = false;
  double accept_stat = 0.0;
};

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void add_to(std::vector<double>& acc, const std::vector<double>& v) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
}

std::vector<double> sum(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a);
  add_to(out, b);
  return out;
}

bool no_u_turn(const std::vector<double>& p_sharp_minus, const std::vector<double>& p_sharp_plus,
               const std::vector<double>& rho) {
  return dot(p_sharp_plus, rho) > 0.0 && dot(p_sharp_minus, rho) > 0.0;
}

class NutsChain {
 public:
  NutsChain(const Target& target, const SamplerConfig& config, std::size_t chain_id)
      : target_(target),
        config_(config),
        chain_id_(chain_id),
        rng_(make_stream(config.seed, chain_id)),
        dim_(target.dimension()),
        inv_metric_(dim_, 1.0),
        adapter_(config.target_accept) {}

  void initialize(std::span<const std::vector<double>> inits) {
    z_.grad.assign(dim_, 0.0);
    z_.p.assign(dim_, 0.0);
    if (!inits.empty()) {
      z_.q = inits[chain_id_];
      if (z_.q.size() != dim_) throw std::invalid_argument("sample: initial point has wrong dimension");
      z_.log_density = target_.log_density(z_.q, z_.grad);
      if (!std::isfinite(z_.log_density) || !all_finite(z_.grad)) {
        std::string why = target_.diagnose ? target_.diagnose(z_.q) : std::string("unknown cause");
        throw std::runtime_error("sample: non-finite log density at initial point of chain " +
                                 std::to_string(chain_id_) + ": " + why);
      }
      return;
    }
    std::string last_reason = "no attempts made";
    for (std::size_t attempt = 0; attempt < config_.max_init_attempts; ++attempt) {
      z_.q = target_.initial_point(rng_);
      z_.log_density = target_.log_density(z_.q, z_.grad);
      if (std::isfinite(z_.log_density) && all_finite(z_.grad)) return;
      last_reason = target_.diagnose ? target_.diagnose(z_.q) : std::string("non-finite log density");
    }
    throw std::runtime_error("sample: chain " + std::to_string(chain_id_) + " found no finite starting point in " +
                             std::to_string(config_.max_init_attempts) + " attempts; last: " + last_reason);
  }

  ChainSummary run(PosteriorDraws& out) {
    ChainSummary summary;
    summary.initial_point = z_.q;
    const std::size_t n_warmup = config_.warmup_per_chain();
    const std::size_t n_keep = config_.retained_per_chain();
    const auto windows = adaptation_windows(n_warmup);
    std::size_t window_index = 0;
    std::vector<double> w_mean(dim_, 0.0), w_m2(dim_, 0.0);
    std::size_t w_count = 0;

    step_size_ = 1.0;
    find_reasonable_step_size();
    adapter_.restart(step_size_);

    const std::size_t total = n_warmup + n_keep;
    for (std::size_t it = 0; it < total; ++it) {
      const Transition t = transition();
      if (it < n_warmup) {
        if (t.divergent) ++summary.warmup_divergences;
        step_size_ = adapter_.update(t.accept_stat);
        if (window_index < windows.size() && it >= windows[window_index].first &&
            it < windows[window_index].second) {
          ++w_count;
          for (std::size_t i = 0; i < dim_; ++i) {
            const double delta = z_.q[i] - w_mean[i];
            w_mean[i] += delta / static_cast<double>(w_count);
            w_m2[i] += delta * (z_.q[i] - w_mean[i]);
          }
          if (it + 1 == windows[window_index].second) {
            const auto n = static_cast<double>(w_count);
            for (std::size_t i = 0; i < dim_; ++i) {
              const double var = w_count > 1 ? w_m2[i] / (n - 1.0) : 1.0;
              inv_metric_[i] = (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0));
            }
            std::fill(w_mean.begin(), w_mean.end(), 0.0);
            std::fill(w_m2.begin(), w_m2.end(), 0.0);
            w_count = 0;
            ++window_index;
            find_reasonable_step_size();
            adapter_.restart(step_size_);
          }
        }
        if (it + 1 == n_warmup) {
          step_size_ = adapter_.final_step_size();
          if (summary.warmup_divergences == n_warmup) {
            std::ostringstream msg;
            msg << "sample: every warmup transition of chain " << chain_id_
                << " diverged (final step size " << step_size_ << ")";
            throw std::runtime_error(msg.str());
          }
        }
      } else {
        const auto theta = target_.constrain ? target_.constrain(z_.q) : z_.q;
        out.append(theta, static_cast<int>(chain_id_), z_.log_density, t.divergent, t.depth, step_size_,
                   t.n_leapfrog, t.accept_stat);
      }
      if (config_.progress && (it + 1) % std::max<std::size_t>(1, total / 10) == 0) {
        std::cerr << "chain " << chain_id_ << ": " << (it + 1) << "/" << total
                  << (it < n_warmup ? " (warmup)" : " (sampling)") << '\n';
      }
    }
    summary.step_size = step_size_;
    summary.inv_metric = inv_metric_;
    return summary;
  }

 private:
  static bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  }

  void sample_momentum(PhasePoint& z) {
    for (std::size_t i = 0; i < dim_; ++i) z.p[i] = draw_normal(rng_) / std::sqrt(inv_metric_[i]);
  }

  std::vector<double> sharp(const std::vector<double>& p) const {
    std::vector<double> out(dim_);
    for (std::size_t i = 0; i < dim_; ++i) out[i] = inv_metric_[i] * p[i];
    return out;
  }

  void find_reasonable_step_size() {
    const PhasePoint start = z_;
    const double log_target = std::log(0.8);
    PhasePoint z = start;
    sample_momentum(z);
    double h0 = hamiltonian(z, inv_metric_);
    leapfrog(target_.log_density, z, inv_metric_, step_size_);
    const int direction = (h0 - hamiltonian(z, inv_metric_)) > log_target ? 1 : -1;
    for (;;) {
      z = start;
      sample_momentum(z);
      h0 = hamiltonian(z, inv_metric_);
      leapfrog(target_.log_density, z, inv_metric_, step_size_);
      const double delta_h = h0 - hamiltonian(z, inv_metric_);
      if (direction == 1 && !(delta_h > log_target)) break;
      if (direction == -1 && !(delta_h < log_target)) break;
      step_size_ = direction == 1 ? 2.0 * step_size_ : 0.5 * step_size_;
      if (step_size_ > 1e7) throw std::runtime_error("sample: posterior is improper (step size diverged)");
      if (step_size_ < 1e-300) throw std::runtime_error("sample: no acceptable step size found");
    }
  }

  // Builds a subtree of 2^depth leapfrog steps from `z` in direction `sign`.
  bool build_tree(int depth, PhasePoint& z, PhasePoint& z_propose, std::vector<double>& p_sharp_beg,
                  std::vector<double>& p_sharp_end, std::vector<double>& rho, std::vector<double>& p_beg,
                  std::vector<double>& p_end, double h0, double sign, int& n_leapfrog,
                  double& log_sum_weight, double& sum_metro_prob, bool& divergent) {
    if (depth == 0) {
      leapfrog(target_.log_density, z, inv_metric_, sign * step_size_);
      ++n_leapfrog;
      const double h = hamiltonian(z, inv_metric_);
      if (h - h0 > config_.divergence_threshold) divergent = true;
      log_sum_weight = log_sum_exp(log_sum_weight, h0 - h);
      sum_metro_prob += h0 - h > 0.0 ? 1.0 : std::exp(h0 - h);
      z_propose = z;
      p_sharp_beg = sharp(z.p);
      p_sharp_end = p_sharp_beg;
      add_to(rho, z.p);
      p_beg = z.p;
      p_end = p_beg;
      return !divergent;
    }

    std::vector<double> rho_init(dim_, 0.0), p_init_end(dim_), p_sharp_init_end(dim_);
    double lsw_init = kNegInf;
    if (!build_tree(depth - 1, z, z_propose, p_sharp_beg, p_sharp_init_end, rho_init, p_beg, p_init_end,
                    h0, sign, n_leapfrog, lsw_init, sum_metro_prob, divergent)) {
      return false;
    }

    PhasePoint z_propose_final = z;
    std::vector<double> rho_final(dim_, 0.0), p_final_beg(dim_), p_sharp_final_beg(dim_);
    double lsw_final = kNegInf;
    if (!build_tree(depth - 1, z, z_propose_final, p_sharp_final_beg, p_sharp_end, rho_final, p_final_beg,
                    p_end, h0, sign, n_leapfrog, lsw_final, sum_metro_prob, divergent)) {
      return false;
    }

    const double lsw_subtree = log_sum_exp(lsw_init, lsw_final);
    log_sum_weight = log_sum_exp(log_sum_weight, lsw_subtree);
    if (lsw_final > lsw_subtree) {
      z_propose = z_propose_final;
    } else if (draw_uniform(rng_) < std::exp(lsw_final - lsw_subtree)) {
      z_propose = z_propose_final;
    }

    const auto rho_subtree = sum(rho_init, rho_final);
    add_to(rho, rho_subtree);
    bool persist = no_u_turn(p_sharp_beg, p_sharp_end, rho_subtree);
    persist = persist && no_u_turn(p_sharp_beg, p_sharp_final_beg, sum(rho_init, p_final_beg));
    persist = persist && no_u_turn(p_sharp_init_end, p_sharp_end, sum(rho_final, p_init_end));
    return persist;
  }

  Transition transition() {
    Transition out;
    sample_momentum(z_);
    PhasePoint z_fwd = z_, z_bck = z_, z_sample = z_, z_propose = z_;

    std::vector<double> p_sharp = sharp(z_.p);
    std::vector<double> p_fwd_fwd = z_.p, p_sharp_fwd_fwd = p_sharp;
    std::vector<double> p_fwd_bck = z_.p, p_sharp_fwd_bck = p_sharp;
    std::vector<double> p_bck_fwd = z_.p, p_sharp_bck_fwd = p_sharp;
    std::vector<double> p_bck_bck = z_.p, p_sharp_bck_bck = p_sharp;
    std::vector<double> rho = z_.p;

    double log_sum_weight = 0.0;
    const double h0 = hamiltonian(z_, inv_metric_);
    double sum_metro_prob = 0.0;

    while (out.depth < config_.max_tree_depth) {
      std::vector<double> rho_fwd(dim_, 0.0), rho_bck(dim_, 0.0);
      double lsw_subtree = kNegInf;
      bool valid = false;
      if (draw_uniform(rng_) > 0.5) {
        // The existing trajectory becomes the backward part.
        rho_bck = rho;
        p_bck_fwd = p_fwd_fwd;
        p_sharp_bck_fwd = p_sharp_fwd_fwd;
        PhasePoint z = z_fwd;
        valid = build_tree(out.depth, z, z_propose, p_sharp_fwd_bck, p_sharp_fwd_fwd, rho_fwd, p_fwd_bck,
                           p_fwd_fwd, h0, 1.0, out.n_leapfrog, lsw_subtree, sum_metro_prob, out.divergent);
        z_fwd = std::move(z);
      } else {
        rho_fwd = rho;
        p_fwd_bck = p_bck_bck;
        p_sharp_fwd_bck = p_sharp_bck_bck;
        PhasePoint z = z_bck;
        valid = build_tree(out.depth, z, z_propose, p_sharp_bck_fwd, p_sharp_bck_bck, rho_bck, p_bck_fwd,
                           p_bck_bck, h0, -1.0, out.n_leapfrog, lsw_subtree, sum_metro_prob, out.divergent);
        z_bck = std::move(z);
      }
      if (!valid) break;
      ++out.depth;

      if (lsw_subtree > log_sum_weight) {
        z_sample = z_propose;
      } else if (draw_uniform(rng_) < std::exp(lsw_subtree - log_sum_weight)) {
        z_sample = z_propose;
      }
      log_sum_weight = log_sum_exp(log_sum_weight, lsw_subtree);

      rho = sum(rho_bck, rho_fwd);
      bool persist = no_u_turn(p_sharp_bck_bck, p_sharp_fwd_fwd, rho);
      persist = persist && no_u_turn(p_sharp_bck_bck, p_sharp_fwd_bck, sum(rho_bck, p_fwd_bck));
      persist = persist && no_u_turn(p_sharp_bck_fwd, p_sharp_fwd_fwd, sum(rho_fwd, p_bck_fwd));
      if (!persist) break;
    }

    z_ = std::move(z_sample);
    out.accept_stat = out.n_leapfrog > 0 ? sum_metro_prob / out.n_leapfrog : 0.0;
    return out;
  }

  const Target& target_;
  const SamplerConfig& config_;
  std::size_t chain_id_;
  Rng rng_;
  std::size_t dim_;
  std::vector<double> inv_metric_;
  DualAveraging adapter_;
  double step_size_ = 1.0;
  PhasePoint z_;
};

}  // namespace

SampleResult sample(const Target& target, const SamplerConfig& config,
                    std::span<const std::vector<double>> inits) {
  config.validate();
  if (!target.log_density) throw std::invalid_argument("sample: target has no log density");
  if (inits.empty() && !target.initial_point) {
    throw std::invalid_argument("sample: need initial points or an initial-point generator");
  }
  if (!inits.empty() && inits.size() != config.n_chains) {
    throw std::invalid_argument("sample: one initial point per chain required");
  }

  const std::size_t n_chains = config.n_chains;
  std::vector<PosteriorDraws> per_chain(n_chains);
  std::vector<ChainSummary> summaries(n_chains);
  std::vector<std::exception_ptr> errors(n_chains);

  auto run_chain = [&](std::size_t c) {
    try {
      NutsChain chain(target, config, c);
      chain.initialize(inits);
      per_chain[c].names = target.names;
      summaries[c] = chain.run(per_chain[c]);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };

  if (config.parallel_chains && n_chains > 1) {
    std::vector<std::thread> workers;
    for (std::size_t c = 0; c < n_chains; ++c) workers.emplace_back(run_chain, c);
    for (auto& w : workers) w.join();
  } else {
    for (std::size_t c = 0; c < n_chains; ++c) run_chain(c);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SampleResult result;
  auto& draws = result.draws;
  draws.names = target.names;
  draws.n_chains = n_chains;
  draws.draws_per_chain = config.retained_per_chain();
  for (const auto& pc : per_chain) {
    draws.values.insert(draws.values.end(), pc.values.begin(), pc.values.end());
    draws.chain.insert(draws.chain.end(), pc.chain.begin(), pc.chain.end());
    draws.log_density.insert(draws.log_density.end(), pc.log_density.begin(), pc.log_density.end());
    draws.divergent.insert(draws.divergent.end(), pc.divergent.begin(), pc.divergent.end());
    draws.tree_depth.insert(draws.tree_depth.end(), pc.tree_depth.begin(), pc.tree_depth.end());
    draws.step_size.insert(draws.step_size.end(), pc.step_size.begin(), pc.step_size.end());
    draws.n_leapfrog.insert(draws.n_leapfrog.end(), pc.n_leapfrog.begin(), pc.n_leapfrog.end());
    draws.accept_stat.insert(draws.accept_stat.end(), pc.accept_stat.begin(), pc.accept_stat.end());
  }
  result.chains = std::move(summaries);
  return result;
}

}  // namespace epi::mcmc
