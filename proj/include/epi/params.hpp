#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

#include "epi/model.hpp"

namespace epi {

/// Positions of the free parameters in a flat parameter vector. The first eight
/// match OdeParam; the case-model block starts at kAlpha0 (test-aware) and is
/// replaced by kCaseDetection/kCaseOverdispersion in the no-tests variant.
enum ParamIndex : std::size_t {
  kS0 = 0,
  kInfectiousFraction,
  kEarlyFraction,
  kR0,
  kLatentDuration,
  kEarlyDuration,
  kProgressedDuration,
  kIfr,
  kDeathDetection,
  kDeathOverdispersion,
  kAlpha0,
  kAlpha1,
  kKappa,
};
inline constexpr std::size_t kNumParams = 13;
inline constexpr std::size_t kCaseDetection = 10;
inline constexpr std::size_t kCaseOverdispersion = 11;
inline constexpr std::size_t kNumNoTestsParams = 12;

inline constexpr std::array<std::string_view, kNumParams> kParamNames = {
    "S0",      "I_tilde0", "Ie_tilde0", "R0",  "inv_gamma", "inv_nu_e", "inv_nu_p",
    "eta",     "rho",      "phi",       "alpha0", "alpha1", "kappa"};

/// The thirteen free parameters of the test-aware model (durations in weeks).
struct ParamVector {
  double S0 = 0.0;
  double I_tilde0 = 0.0;
  double Ie_tilde0 = 0.0;
  double R0 = 0.0;
  double inv_gamma = 0.0;
  double inv_nu_e = 0.0;
  double inv_nu_p = 0.0;
  double eta = 0.0;
  double rho = 0.0;
  double phi = 0.0;
  double alpha0 = 0.0;
  double alpha1 = 0.0;
  double kappa = 0.0;

  std::array<double, kNumParams> to_array() const {
    return {S0, I_tilde0, Ie_tilde0, R0, inv_gamma, inv_nu_e, inv_nu_p,
            eta, rho, phi, alpha0, alpha1, kappa};
  }
  static ParamVector from_array(std::span<const double> v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10], v[11], v[12]};
  }
};

/// Simulation truth used throughout the validation study (durations in weeks;
/// phi and kappa stored as 1/(1/sqrt)^2).
inline ParamVector simulation_truth() {
  ParamVector p;
  p.S0 = 1.0 - 3.1e-3;
  p.I_tilde0 = 0.69;
  p.Ie_tilde0 = 0.44;
  p.R0 = 0.92;
  p.inv_gamma = 0.97;
  p.inv_nu_e = 0.96;
  p.inv_nu_p = 0.96;
  p.eta = 0.0092;
  p.rho = 0.83;
  p.phi = 1.0 / (0.38 * 0.38);
  p.alpha0 = 3.87;
  p.alpha1 = 0.83;
  p.kappa = 1.0 / (0.037 * 0.037);
  return p;
}

/// Fixed quantities that are not sampled.
struct ModelConstants {
  double pop_size = 3.18e6;
  double delta = 0.8;
  double bin_width = 3.0 / 7.0;  // weeks
};

/// ODE inputs from the leading eight entries of any parameter vector layout.
inline InitParams init_params_of(std::span<const double> theta) {
  return {theta[kS0], theta[kInfectiousFraction], theta[kEarlyFraction]};
}

inline RateParams rate_params_of(std::span<const double> theta, double delta) {
  return make_rate_params(theta[kR0], theta[kLatentDuration], theta[kEarlyDuration],
                          theta[kProgressedDuration], theta[kIfr], delta);
}

}  // namespace epi
