#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/math/special_functions/digamma.hpp>

namespace epi {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

inline double inv_logit(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = a > b ? a : b;
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

inline double digamma(double x) { return boost::math::digamma(x); }

/// Tail of the Stirling series for log Gamma(x), accurate to 1e-12 for x >= 10.
inline double stirling_tail(double x) {
  const double r = 1.0 / (x * x);
  return (1.0 / 12.0 - r * (1.0 / 360.0 - r * (1.0 / 1260.0 - r / 1680.0))) / x;
}

/// log Gamma(a + n) - log Gamma(a) - n log(c). Summed directly for short runs and
/// taken from the difference of Stirling series for large a, where the
/// difference of two large lgamma values would cancel badly.
inline double log_rising_scaled(double a, std::int64_t n, double c) {
  if (n == 0) return 0.0;
  if (n <= 16) {
    double s = 0.0;
    for (std::int64_t k = 0; k < n; ++k) s += std::log1p((a + static_cast<double>(k) - c) / c);
    return s;
  }
  const auto m = static_cast<double>(n);
  if (a >= 10.0) {
    return (a - 0.5) * std::log1p(m / a) - m + m * std::log1p((a + m - c) / c) +
           stirling_tail(a + m) - stirling_tail(a);
  }
  return std::lgamma(a + m) - std::lgamma(a) - m * std::log(c);
}

/// log Gamma(a + n) - log Gamma(a).
inline double log_rising(double a, std::int64_t n) {
  if (n == 0) return 0.0;
  if (n <= 16) {
    double s = 0.0;
    for (std::int64_t k = 0; k < n; ++k) s += std::log(a + static_cast<double>(k));
    return s;
  }
  const auto m = static_cast<double>(n);
  if (a >= 10.0) {
    return (a - 0.5) * std::log1p(m / a) + m * (std::log(a + m) - 1.0) + stirling_tail(a + m) -
           stirling_tail(a);
  }
  return std::lgamma(a + m) - std::lgamma(a);
}

/// digamma(a + n) - digamma(a).
inline double digamma_rising(double a, std::int64_t n) {
  if (n == 0) return 0.0;
  if (n <= 16) {
    double s = 0.0;
    for (std::int64_t k = 0; k < n; ++k) s += 1.0 / (a + static_cast<double>(k));
    return s;
  }
  return digamma(a + static_cast<double>(n)) - digamma(a);
}

inline double log_choose(std::int64_t n, std::int64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace epi
