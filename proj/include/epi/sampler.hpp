#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "epi/draws.hpp"
#include "epi/random.hpp"

namespace epi::mcmc {

struct SamplerConfig {
  std::size_t n_chains = 4;
  std::size_t n_draws = 8000;   // total across chains, warmup included
  std::size_t n_warmup = 4000;  // total across chains
  double target_accept = 0.8;
  int max_tree_depth = 10;
  std::uint64_t seed = 20200331;
  bool parallel_chains = true;
  double divergence_threshold = 1000.0;
  std::size_t max_init_attempts = 100;
  bool progress = false;  // report warmup/sampling progress on stderr

  std::size_t warmup_per_chain() const { return n_warmup / n_chains; }
  std::size_t retained_per_chain() const { return (n_draws - n_warmup) / n_chains; }
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Log density on the unconstrained space; writes the gradient into `grad`.
/// Returns -inf (gradient unspecified) where the density vanishes.
using LogDensityFn = std::function<double(std::span<const double> z, std::span<double> grad)>;

struct Target {
  std::vector<std::string> names;
  LogDensityFn log_density;
  /// Map to the reported (constrained) space; identity when empty.
  std::function<std::vector<double>(std::span<const double>)> constrain;
  /// Random starting point in unconstrained space.
  std::function<std::vector<double>(Rng&)> initial_point;
  /// Human-readable reason why the density is not finite at z.
  std::function<std::string(std::span<const double>)> diagnose;

  std::size_t dimension() const { return names.size(); }
};

struct PhasePoint {
  std::vector<double> q;
  std::vector<double> p;
  std::vector<double> grad;
  double log_density = 0.0;
};

double hamiltonian(const PhasePoint& z, std::span<const double> inv_metric);

/// One leapfrog step of size `eps` (negative steps integrate backwards).
void leapfrog(const LogDensityFn& f, PhasePoint& z, std::span<const double> inv_metric, double eps);

/// Stochastic-approximation step size tuning toward a target acceptance statistic.
class DualAveraging {
 public:
  explicit DualAveraging(double target, double gamma = 0.05, double t0 = 10.0, double kappa = 0.75)
      : target_(target), gamma_(gamma), t0_(t0), kappa_(kappa) {}

  void restart(double step_size);
  /// Feeds one acceptance statistic and returns the next step size to try.
  double update(double accept_stat);
  double final_step_size() const;

 private:
  double target_, gamma_, t0_, kappa_;
  double mu_ = 0.0;
  double s_bar_ = 0.0;
  double x_bar_ = 0.0;
  std::size_t counter_ = 0;
};

/// Warmup slow-adaptation windows as half-open [begin, end) iteration ranges:
/// 15% initial buffer, doubling windows over the middle 75%, 10% terminal buffer.
std::vector<std::pair<std::size_t, std::size_t>> adaptation_windows(std::size_t n_warmup,
                                                                    std::size_t base_window = 25);

struct ChainSummary {
  double step_size = 0.0;
  std::vector<double> inv_metric;
  std::size_t warmup_divergences = 0;
  std::vector<double> initial_point;  // unconstrained
};

struct SampleResult {
  PosteriorDraws draws;
  std::vector<ChainSummary> chains;
};

/// Multinomial no-U-turn sampler with diagonal metric adaptation. Deterministic
/// given the seed; each chain draws from its own stream (seed, chain index).
/// `inits`, when non-empty, supplies one unconstrained start per chain.
SampleResult sample(const Target& target, const SamplerConfig& config,
                    std::span<const std::vector<double>> inits = {});

}  // namespace epi::mcmc
