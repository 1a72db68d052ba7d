#include "epi/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace epi {

Trajectory::Trajectory(std::vector<double> times, std::vector<OdeParam> wrt)
    : times_(std::move(times)),
      wrt_(std::move(wrt)),
      values_(times_.size() * kStateSize, 0.0),
      sens_(times_.size() * wrt_.size() * kStateSize, 0.0) {}

CompartmentState Trajectory::state(std::size_t i) const {
  const double* v = values_.data() + i * kStateSize;
  return {v[kS], v[kE], v[kIe], v[kIp], v[kR], v[kD]};
}

CumulativeTransitions Trajectory::cumulative(std::size_t i) const {
  const double* v = values_.data() + i * kStateSize;
  return {v[kNSE], v[kNEIe], v[kNIeIp], v[kNIpR], v[kNIpD]};
}

std::size_t Trajectory::slot_of(OdeParam p) const {
  const auto it = std::find(wrt_.begin(), wrt_.end(), p);
  return static_cast<std::size_t>(it - wrt_.begin());
}

TransitionRates transition_rates(const CompartmentState& x, const RateParams& p) {
  return {p.beta * (x.Ie + p.delta * x.Ip) * x.S, p.gamma * x.E, p.nu_e * x.Ie,
          (1.0 - p.eta) * p.nu_p * x.Ip, p.eta * p.nu_p * x.Ip};
}

double beta_from_R0(double R0, const RateParams& p) {
  if (!(p.nu_e > 0.0) || !(p.nu_p > 0.0)) {
    throw std::invalid_argument("beta_from_R0: infectious-period rates must be positive");
  }
  if (!(R0 >= 0.0)) throw std::invalid_argument("beta_from_R0: R0 must be non-negative");
  return R0 / (1.0 / p.nu_e + p.delta / p.nu_p);
}

double R0_from_beta(const RateParams& p) { return p.beta * (1.0 / p.nu_e + p.delta / p.nu_p); }

CompartmentState initial_state(const InitParams& init) {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(init.S0) || !in_unit(init.I_tilde0) || !in_unit(init.Ie_tilde0)) {
    throw std::invalid_argument("initial_state: S0, I_tilde0 and Ie_tilde0 must lie in [0, 1]");
  }
  const double infected = 1.0 - init.S0;
  CompartmentState x;
  x.S = init.S0;
  x.E = (1.0 - init.I_tilde0) * infected;
  x.Ie = init.Ie_tilde0 * init.I_tilde0 * infected;
  x.Ip = (1.0 - init.Ie_tilde0) * init.I_tilde0 * infected;
  return x;
}

RateParams make_rate_params(double R0, double latent_duration, double early_duration,
                            double progressed_duration, double ifr, double delta) {
  if (!(latent_duration > 0.0) || !(early_duration > 0.0) || !(progressed_duration > 0.0)) {
    throw std::invalid_argument("make_rate_params: durations must be positive");
  }
  RateParams p;
  p.delta = delta;
  p.gamma = 1.0 / latent_duration;
  p.nu_e = 1.0 / early_duration;
  p.nu_p = 1.0 / progressed_duration;
  p.eta = ifr;
  p.beta = beta_from_R0(R0, p);
  return p;
}

namespace {

void validate(const RateParams& p) {
  const bool ok = p.beta >= 0.0 && p.gamma > 0.0 && p.nu_e > 0.0 && p.nu_p > 0.0 &&
                  p.delta >= 0.0 && p.delta <= 1.0 && p.eta >= 0.0 && p.eta <= 1.0 &&
                  std::isfinite(p.beta) && std::isfinite(p.gamma) && std::isfinite(p.nu_e) &&
                  std::isfinite(p.nu_p);
  if (!ok) throw std::invalid_argument("solve: rate parameters outside their support");
}

void validate_grid(std::span<const double> grid, const SolverOptions& options) {
  if (grid.empty()) throw std::invalid_argument("solve: empty time grid");
  if (!(options.max_substep > 0.0)) throw std::invalid_argument("solve: substep must be positive");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw std::invalid_argument("solve: time grid must be strictly increasing");
    }
  }
}

// Adds the stoichiometric image of the five rates to the 11-vector derivative.
inline void assemble(double lSE, double lEI, double lII, double lIR, double lID, double* out) {
  out[kS] = -lSE;
  out[kE] = lSE - lEI;
  out[kIe] = lEI - lII;
  out[kIp] = lII - lIR - lID;
  out[kR] = lIR;
  out[kD] = lID;
  out[kNSE] = lSE;
  out[kNEIe] = lEI;
  out[kNIeIp] = lII;
  out[kNIpR] = lIR;
  out[kNIpD] = lID;
}

// Augmented system: the state followed by its sensitivities, stored component-major
// (entry kStateSize + c * P + j is d y_c / d wrt[j]) so the inner loops run over
// parameters with no branching. Each parameter's explicit dependence reduces to
// one coefficient per rate.
class AugmentedSystem {
 public:
  AugmentedSystem(const RateParams& p, std::span<const OdeParam> wrt)
      : p_(p), np_(wrt.size()), cSE_(np_), cEI_(np_), cII_(np_), cIR_(np_), cID_(np_) {
    for (auto& v : scratch_) v.resize(np_);
    const double denom = 1.0 / p.nu_e + p.delta / p.nu_p;
    for (std::size_t j = 0; j < np_; ++j) {
      switch (wrt[j]) {
        case OdeParam::R0:
          cSE_[j] = 1.0 / denom;  // d beta / d R0, multiplies force * S
          break;
        case OdeParam::LatentDuration:
          cEI_[j] = -p.gamma * p.gamma;
          break;
        case OdeParam::EarlyDuration:
          cSE_[j] = -p.beta / denom;
          cII_[j] = -p.nu_e * p.nu_e;
          break;
        case OdeParam::ProgressedDuration:
          cSE_[j] = -p.delta * p.beta / denom;
          cIR_[j] = -(1.0 - p.eta) * p.nu_p * p.nu_p;
          cID_[j] = -p.eta * p.nu_p * p.nu_p;
          break;
        case OdeParam::Ifr:
          cIR_[j] = -p.nu_p;
          cID_[j] = p.nu_p;
          break;
        default:  // initial-condition parameters enter through s(t0) only
          break;
      }
    }
  }

  std::size_t size() const { return kStateSize * (1 + np_); }

  void operator()(const double* y, double* dy) {
    const double S = y[kS], E = y[kE], Ie = y[kIe], Ip = y[kIp];
    const double force = Ie + p_.delta * Ip;
    const double lSE = p_.beta * force * S;
    const double lEI = p_.gamma * E;
    const double lII = p_.nu_e * Ie;
    const double lIR = (1.0 - p_.eta) * p_.nu_p * Ip;
    const double lID = p_.eta * p_.nu_p * Ip;
    assemble(lSE, lEI, lII, lIR, lID, dy);
    if (np_ == 0) return;

    if (np_ == kNumOdeParams) {
      sensitivities<kNumOdeParams>(y, dy, kNumOdeParams);
    } else {
      sensitivities<0>(y, dy, np_);
    }
  }

 private:
  // Fixed parameter count lets the compiler unroll and vectorise; 0 means runtime count.
  template <std::size_t Fixed>
  void sensitivities(const double* y, double* dy, std::size_t runtime_p) {
    const std::size_t P = Fixed != 0 ? Fixed : runtime_p;
    const double S = y[kS], E = y[kE], Ie = y[kIe], Ip = y[kIp];
    const double force = Ie + p_.delta * Ip;
    const double* s = y + kStateSize;
    const double* sS = s + kS * P;
    const double* sE = s + kE * P;
    const double* sIe = s + kIe * P;
    const double* sIp = s + kIp * P;
    const double bS = p_.beta * S, bF = p_.beta * force, fS = force * S;
    const double a = 1.0 - p_.eta;
    constexpr std::size_t N = Fixed != 0 ? Fixed : 1;
    double local[5][N];
    double* dSE = Fixed != 0 ? local[0] : scratch_[0].data();
    double* dEI = Fixed != 0 ? local[1] : scratch_[1].data();
    double* dII = Fixed != 0 ? local[2] : scratch_[2].data();
    double* dIR = Fixed != 0 ? local[3] : scratch_[3].data();
    double* dID = Fixed != 0 ? local[4] : scratch_[4].data();
    for (std::size_t j = 0; j < P; ++j) {
      dSE[j] = bS * (sIe[j] + p_.delta * sIp[j]) + bF * sS[j] + cSE_[j] * fS;
      dEI[j] = p_.gamma * sE[j] + cEI_[j] * E;
      dII[j] = p_.nu_e * sIe[j] + cII_[j] * Ie;
      dIR[j] = a * p_.nu_p * sIp[j] + cIR_[j] * Ip;
      dID[j] = p_.eta * p_.nu_p * sIp[j] + cID_[j] * Ip;
    }
    double* ds = dy + kStateSize;
    for (std::size_t j = 0; j < P; ++j) {
      ds[kS * P + j] = -dSE[j];
      ds[kE * P + j] = dSE[j] - dEI[j];
      ds[kIe * P + j] = dEI[j] - dII[j];
      ds[kIp * P + j] = dII[j] - dIR[j] - dID[j];
      ds[kR * P + j] = dIR[j];
      ds[kD * P + j] = dID[j];
      ds[kNSE * P + j] = dSE[j];
      ds[kNEIe * P + j] = dEI[j];
      ds[kNIeIp * P + j] = dII[j];
      ds[kNIpR * P + j] = dIR[j];
      ds[kNIpD * P + j] = dID[j];
    }
  }

  RateParams p_;
  std::size_t np_;
  std::vector<double> cSE_, cEI_, cII_, cIR_, cID_;
  std::array<std::vector<double>, 5> scratch_;  // per-rate derivatives for runtime counts
};

void initial_sensitivity(const InitParams& init, OdeParam param, double* s) {
  const double infected = 1.0 - init.S0;
  const double I = init.I_tilde0, Ie = init.Ie_tilde0;
  switch (param) {
    case OdeParam::S0:
      s[kS] = 1.0;
      s[kE] = -(1.0 - I);
      s[kIe] = -Ie * I;
      s[kIp] = -(1.0 - Ie) * I;
      break;
    case OdeParam::InfectiousFraction:
      s[kE] = -infected;
      s[kIe] = Ie * infected;
      s[kIp] = (1.0 - Ie) * infected;
      break;
    case OdeParam::EarlyFraction:
      s[kIe] = I * infected;
      s[kIp] = -I * infected;
      break;
    default:
      break;
  }
}

Trajectory integrate(const InitParams& init, const RateParams& p, std::span<const double> grid,
                     std::span<const OdeParam> wrt, const SolverOptions& options) {
  validate(p);
  validate_grid(grid, options);
  const CompartmentState x0 = initial_state(init);

  Trajectory traj(std::vector<double>(grid.begin(), grid.end()),
                  std::vector<OdeParam>(wrt.begin(), wrt.end()));
  AugmentedSystem system(p, traj.sensitivity_params());
  const std::size_t n = system.size();

  std::vector<double> y(n, 0.0), k1(n), k2(n), k3(n), k4(n), tmp(n);
  y[kS] = x0.S;
  y[kE] = x0.E;
  y[kIe] = x0.Ie;
  y[kIp] = x0.Ip;
  const std::size_t P = wrt.size();
  for (std::size_t j = 0; j < P; ++j) {
    double s0[kStateSize] = {};
    initial_sensitivity(init, wrt[j], s0);
    for (std::size_t c = 0; c < kStateSize; ++c) y[kStateSize + c * P + j] = s0[c];
  }

  auto store = [&](std::size_t i) {
    auto v = traj.mutable_values(i);
    std::copy(y.begin(), y.begin() + kStateSize, v.begin());
    auto s = traj.mutable_sensitivities(i);
    for (std::size_t j = 0; j < P; ++j) {
      for (std::size_t c = 0; c < kStateSize; ++c) s[j * kStateSize + c] = y[kStateSize + c * P + j];
    }
  };
  store(0);

  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double span = grid[i] - grid[i - 1];
    const auto steps = static_cast<std::size_t>(std::ceil(span / options.max_substep - 1e-9));
    const double h = span / static_cast<double>(std::max<std::size_t>(steps, 1));
    for (std::size_t step = 0; step < std::max<std::size_t>(steps, 1); ++step) {
      system(y.data(), k1.data());
      for (std::size_t c = 0; c < n; ++c) tmp[c] = y[c] + 0.5 * h * k1[c];
      system(tmp.data(), k2.data());
      for (std::size_t c = 0; c < n; ++c) tmp[c] = y[c] + 0.5 * h * k2[c];
      system(tmp.data(), k3.data());
      for (std::size_t c = 0; c < n; ++c) tmp[c] = y[c] + h * k3[c];
      system(tmp.data(), k4.data());
      for (std::size_t c = 0; c < n; ++c) {
        y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
      }
    }
    for (double v : y) {
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "solve: non-finite state at t=" << grid[i] << " (beta=" << p.beta
            << ", gamma=" << p.gamma << ", nu_e=" << p.nu_e << ", nu_p=" << p.nu_p << ")";
        throw SolverError(msg.str());
      }
    }
    store(i);
  }
  return traj;
}

}  // namespace

void ode_rhs(std::span<const double> x, const RateParams& p, std::span<double> dxdt) {
  if (x.size() != kStateSize || dxdt.size() != kStateSize) {
    throw std::invalid_argument("ode_rhs: state vectors must have 11 components");
  }
  AugmentedSystem system(p, {});
  system(x.data(), dxdt.data());
}

Trajectory solve(const InitParams& init, const RateParams& p, std::span<const double> t_grid,
                 const SolverOptions& options) {
  return integrate(init, p, t_grid, {}, options);
}

Trajectory solve_with_sensitivities(const InitParams& init, const RateParams& p,
                                    std::span<const double> t_grid, std::span<const OdeParam> wrt,
                                    const SolverOptions& options) {
  return integrate(init, p, t_grid, wrt, options);
}

std::vector<double> uniform_grid(double t0, double width, std::size_t intervals) {
  std::vector<double> grid(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) grid[i] = t0 + width * static_cast<double>(i);
  return grid;
}

}  // namespace epi
