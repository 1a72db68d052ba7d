#pragma once

#include <cstdint>
#include <random>

namespace epi {

using Rng = std::mt19937_64;

/// Independent generator for (seed, stream); streams are chains, datasets or
/// forecast draws depending on the caller.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x5eedu};
  return Rng(seq);
}

inline double draw_uniform(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double draw_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

inline double draw_gamma(Rng& rng, double shape, double scale) {
  return std::gamma_distribution<double>(shape, scale)(rng);
}

inline double draw_beta(Rng& rng, double a, double b) {
  const double x = draw_gamma(rng, a, 1.0);
  const double y = draw_gamma(rng, b, 1.0);
  if (x + y == 0.0) return a / (a + b);
  return x / (x + y);
}

/// NB2 draw with the given mean and overdispersion, as a gamma-Poisson mixture.
inline std::int64_t draw_negative_binomial(Rng& rng, double mean, double phi) {
  if (mean <= 0.0) return 0;
  const double rate = draw_gamma(rng, phi, mean / phi);
  if (rate <= 0.0) return 0;
  return std::poisson_distribution<std::int64_t>(rate)(rng);
}

inline std::int64_t draw_beta_binomial(Rng& rng, std::int64_t trials, double mean, double kappa) {
  if (trials == 0) return 0;
  const double p = draw_beta(rng, kappa * mean, kappa * (1.0 - mean));
  return std::binomial_distribution<std::int64_t>(trials, p)(rng);
}

}  // namespace epi
