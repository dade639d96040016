#include "sbtherm/optomech.hpp"

#include <cmath>

#include "sbtherm/constants.hpp"
#include "sbtherm/errors.hpp"

namespace sbtherm {

double n_cav_from_power(double p_in, const SystemParams& sys) {
  if (p_in < 0.0) throw DomainError("n_cav_from_power: p_in must be >= 0");
  return p_in * sys.kappa_ext / (k_hbar * sys.omega_c * sys.omega_m0 * sys.omega_m0);
}

double power_from_n_cav(double n_cav, const SystemParams& sys) {
  if (n_cav < 0.0) throw DomainError("power_from_n_cav: n_cav must be >= 0");
  return n_cav * k_hbar * sys.omega_c * sys.omega_m0 * sys.omega_m0 / sys.kappa_ext;
}

double gamma_opt(double n_cav, const SystemParams& sys) {
  if (n_cav < 0.0) throw DomainError("gamma_opt: n_cav must be >= 0");
  return 4.0 * sys.g0 * sys.g0 * n_cav / sys.kappa_tot;
}

double bose_occupation(double temperature, double omega) {
  if (!(temperature > 0.0)) throw DomainError("bose_occupation: T must be > 0");
  if (!(omega > 0.0)) throw DomainError("bose_occupation: omega must be > 0");
  const double x = k_hbar * omega / (k_boltzmann * temperature);
  return 1.0 / std::expm1(x);
}

double technical_heating_photons(double p_in, const NoiseBudget& noise, double p_ref) {
  if (p_in < 0.0) throw DomainError("technical_heating_photons: p_in must be >= 0");
  if (!(p_ref > 0.0)) throw DomainError("technical_heating_photons: p_ref must be > 0");
  if (noise.tech_heating_coeff == 0.0 || p_in == 0.0) return 0.0;
  return noise.tech_heating_coeff * std::pow(p_in / p_ref, noise.tech_heating_exponent);
}

double cavity_noise_photons(const PumpConfig& pump, const NoiseBudget& noise) {
  // n_cav is proportional to P_in, so photon ratios equal power ratios.
  double tech = 0.0;
  if (noise.tech_heating_coeff > 0.0 && pump.n_cav > 0.0) {
    tech = noise.tech_heating_coeff *
           std::pow(pump.n_cav / noise.tech_ref_photons, noise.tech_heating_exponent);
  }
  return noise.n_cav_noise + tech;
}

double effective_population(double n_th, const NoiseBudget& noise, const PumpConfig& pump,
                            double gamma_m, double gamma_opt_rate, const SystemParams& sys) {
  if (n_th < 0.0) throw DomainError("effective_population: n_th must be >= 0");
  const double n_cav_total = cavity_noise_photons(pump, noise);
  double n_noise;
  double denom;
  if (pump.scheme == Scheme::RedDetuned) {
    n_noise = n_cav_total;
    if (noise.include_backaction_floor) {
      const double q = sys.kappa_tot / (4.0 * sys.omega_m0);
      n_noise += q * q;
    }
    denom = gamma_m + gamma_opt_rate;
    if (!(denom > 0.0)) throw DomainError("effective_population: Gamma_m + Gamma_opt must be > 0");
  } else {
    n_noise = n_cav_total + 1.0;  // cavity zero-point term
    denom = gamma_m - gamma_opt_rate;
    if (!(denom > 0.0)) {
      throw SelfOscillationError("effective_population: blue drive at or beyond the "
                                 "self-oscillation threshold (Gamma_opt >= Gamma_m)");
    }
  }
  return (n_th * gamma_m + n_noise * gamma_opt_rate) / denom;
}

SidebandShape sideband_area_width(const PumpConfig& pump, double n_eff, double gamma_m,
                                  double gamma_opt_rate) {
  SidebandShape s;
  if (pump.scheme == Scheme::RedDetuned) {
    s.width = gamma_m + gamma_opt_rate;
    s.area = gamma_opt_rate * n_eff;
  } else {
    s.width = gamma_m - gamma_opt_rate;
    if (!(s.width > 0.0)) {
      throw SelfOscillationError("sideband_area_width: blue linewidth closed");
    }
    s.area = gamma_opt_rate * (n_eff + 1.0);
  }
  return s;
}

double effective_temperature(double area, double gamma_opt_rate, const SystemParams& sys,
                             Scheme scheme) {
  if (area < 0.0) throw DomainError("effective_temperature: area must be >= 0");
  (void)scheme;  // A/Gamma_opt equals n (red) or n+1 (blue); both map through the same scale
  const double quanta = area / gamma_opt_rate;
  return quanta * k_hbar * sys.omega_m0 / k_boltzmann;
}

double asymmetry_high_t_bound(double n_cav, const SystemParams& sys) {
  const double go = gamma_opt(n_cav, sys);
  const double gm = sys.gamma_m_floor;
  if (!(gm > go)) {
    throw SelfOscillationError("asymmetry: drive at or beyond the self-oscillation threshold");
  }
  return (gm - go) / (gm + go);
}

double asymmetry_ratio(double temperature, double n_cav, const SystemParams& sys) {
  const double bound = asymmetry_high_t_bound(n_cav, sys);
  const double n = bose_occupation(temperature, sys.omega_m0);
  return n / (n + 1.0) * bound;
}

double self_oscillation_threshold(const SystemParams& sys, double gamma_m) {
  if (!(gamma_m > 0.0)) throw DomainError("self_oscillation_threshold: gamma_m must be > 0");
  return gamma_m * sys.kappa_tot / (4.0 * sys.g0 * sys.g0);
}

double optical_spring_shift(const PumpConfig& pump, const SystemParams& sys) {
  // Pump-cavity detuning; +omega_m for blue, -omega_m for red, plus the error.
  const double delta = (pump.scheme == Scheme::BlueDetuned ? sys.omega_m0 : -sys.omega_m0) +
                       pump.detuning_error;
  const double g2 = sys.g0 * sys.g0 * pump.n_cav;
  const double k2 = sys.kappa_tot * sys.kappa_tot / 4.0;
  const double a = delta + sys.omega_m0;
  const double b = delta - sys.omega_m0;
  return g2 * (a / (a * a + k2) + b / (b * b + k2));
}

double duffing_amplitude(double freq_shift_hz, const SystemParams& sys) {
  if (freq_shift_hz == 0.0) return 0.0;
  const double ratio = freq_shift_hz / sys.duffing_beta;
  if (!(ratio > 0.0)) {
    throw DomainError("duffing_amplitude: shift and Duffing coefficient disagree in sign");
  }
  return std::sqrt(ratio);
}

}  // namespace sbtherm
