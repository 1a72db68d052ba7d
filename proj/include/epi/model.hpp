#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace epi {

/// Population fractions in each compartment of the S-E-Ie-Ip-R-D model.
struct CompartmentState {
  double S = 1.0;
  double E = 0.0;
  double Ie = 0.0;
  double Ip = 0.0;
  double R = 0.0;
  double D = 0.0;

  double total() const { return S + E + Ie + Ip + R + D; }
};

/// Cumulative fractions of the population that have made each transition since t0.
struct CumulativeTransitions {
  double N_SE = 0.0;
  double N_EIe = 0.0;
  double N_IeIp = 0.0;
  double N_IpR = 0.0;
  double N_IpD = 0.0;
};

/// Transition rates in 1/week; delta and eta are dimensionless.
struct RateParams {
  double beta = 0.0;
  double delta = 0.8;
  double gamma = 1.0;
  double nu_e = 1.0;
  double nu_p = 1.0;
  double eta = 0.0;
};

struct InitParams {
  double S0 = 1.0;
  double I_tilde0 = 0.5;   // infectious share of the initially infected
  double Ie_tilde0 = 0.5;  // early-stage share of the initially infectious
};

struct TransitionRates {
  double SE = 0.0;
  double EIe = 0.0;
  double IeIp = 0.0;
  double IpR = 0.0;
  double IpD = 0.0;
};

/// Layout of the integrated state vector: six prevalence compartments followed
/// by five cumulative transitions.
enum StateIndex : std::size_t {
  kS = 0,
  kE,
  kIe,
  kIp,
  kR,
  kD,
  kNSE,
  kNEIe,
  kNIeIp,
  kNIpR,
  kNIpD,
};
inline constexpr std::size_t kStateSize = 11;

/// Parameters the ODE solution depends on. Ordered to coincide with the first
/// eight entries of the full model parameter vector.
enum class OdeParam : std::size_t {
  S0 = 0,
  InfectiousFraction,
  EarlyFraction,
  R0,
  LatentDuration,
  EarlyDuration,
  ProgressedDuration,
  Ifr,
};
inline constexpr std::size_t kNumOdeParams = 8;

inline constexpr std::array<OdeParam, kNumOdeParams> kAllOdeParams = {
    OdeParam::S0,           OdeParam::InfectiousFraction, OdeParam::EarlyFraction,
    OdeParam::R0,           OdeParam::LatentDuration,     OdeParam::EarlyDuration,
    OdeParam::ProgressedDuration, OdeParam::Ifr};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solution sampled on an output grid. Sensitivities, when present, are stored
/// as d(state component)/d(parameter) for every grid point and requested parameter.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::vector<double> times, std::vector<OdeParam> wrt);

  std::size_t size() const { return times_.size(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<OdeParam>& sensitivity_params() const { return wrt_; }
  bool has_sensitivities() const { return !wrt_.empty(); }

  CompartmentState state(std::size_t i) const;
  CumulativeTransitions cumulative(std::size_t i) const;

  double value(std::size_t i, StateIndex component) const { return values_[i * kStateSize + component]; }
  std::span<const double> values(std::size_t i) const {
    return {values_.data() + i * kStateSize, kStateSize};
  }

  /// d(component)/d(wrt[param_slot]) at grid point i.
  double sensitivity(std::size_t i, std::size_t param_slot, StateIndex component) const {
    return sens_[(i * wrt_.size() + param_slot) * kStateSize + component];
  }
  /// Slot of `p` among the sensitivity parameters, or npos-like size() if absent.
  std::size_t slot_of(OdeParam p) const;

  // Writers used by the integrator.
  std::span<double> mutable_values(std::size_t i) { return {values_.data() + i * kStateSize, kStateSize}; }
  std::span<double> mutable_sensitivities(std::size_t i) {
    return {sens_.data() + i * wrt_.size() * kStateSize, wrt_.size() * kStateSize};
  }

 private:
  std::vector<double> times_;
  std::vector<OdeParam> wrt_;
  std::vector<double> values_;
  std::vector<double> sens_;
};

struct SolverOptions {
  double max_substep = 0.01;  // weeks
};

TransitionRates transition_rates(const CompartmentState& x, const RateParams& p);

/// Infection rate giving basic reproduction number R0 = beta (1/nu_e + delta/nu_p).
double beta_from_R0(double R0, const RateParams& p);
double R0_from_beta(const RateParams& p);

CompartmentState initial_state(const InitParams& init);

/// Builds rates from R0 and mean durations (weeks).
RateParams make_rate_params(double R0, double latent_duration, double early_duration,
                            double progressed_duration, double ifr, double delta);

/// Right-hand side of the 11-equation system.
void ode_rhs(std::span<const double> x, const RateParams& p, std::span<double> dxdt);

Trajectory solve(const InitParams& init, const RateParams& p, std::span<const double> t_grid,
                 const SolverOptions& options = {});

/// As solve, also integrating forward sensitivities with respect to `wrt` through
/// the same fixed-step scheme, so they are the exact derivatives of the discrete map.
Trajectory solve_with_sensitivities(const InitParams& init, const RateParams& p,
                                    std::span<const double> t_grid, std::span<const OdeParam> wrt,
                                    const SolverOptions& options = {});

/// Output grid t0, t0 + width, ..., t0 + n * width.
std::vector<double> uniform_grid(double t0, double width, std::size_t intervals);

}  // namespace epi
