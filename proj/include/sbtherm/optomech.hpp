#pragma once

#include "sbtherm/system.hpp"

namespace sbtherm {

// Closed-form single-tone optomechanics in the resolved-sideband regime.
// Converts drive power and temperatures into sideband observables and back.

// Drive photons stored in the cavity for input power p_in (W), pumping at
// omega_c +/- omega_m:  n_cav = P_in kappa_ext / (hbar omega_c omega_m^2).
double n_cav_from_power(double p_in, const SystemParams& sys);
double power_from_n_cav(double n_cav, const SystemParams& sys);

// Optomechanically induced damping (red) / anti-damping (blue):
// Gamma_opt = 4 g0^2 n_cav / kappa_tot.
double gamma_opt(double n_cav, const SystemParams& sys);

// Bose-Einstein occupation of a mode at omega (rad/s) and temperature T (K).
double bose_occupation(double temperature, double omega);

// Total cavity noise photons at the given drive (thermal + technical).
double cavity_noise_photons(const PumpConfig& pump, const NoiseBudget& noise);

// Out-of-equilibrium photons generated by the drive tone itself:
// coeff * (P_in / P_ref)^a, with P_ref the power giving tech_ref_photons.
double technical_heating_photons(double p_in, const NoiseBudget& noise, double p_ref);

// Detected effective mode population
//   n_eff = (n_th Gamma_m + N_noise Gamma_opt) / (Gamma_m +/- Gamma_opt)
// with + for red and - for blue; N_noise = N_cav (red, plus the small
// back-action floor when enabled) or N_cav + 1 (blue, zero-point term).
double effective_population(double n_th, const NoiseBudget& noise, const PumpConfig& pump,
                            double gamma_m, double gamma_opt_rate, const SystemParams& sys);

struct SidebandShape {
  double area = 0.0;   // photons/s
  double width = 0.0;  // rad/s
};

// Area and total linewidth of the measured sideband:
// A = Gamma_opt n_eff (red), Gamma_opt (n_eff + 1) (blue); W = Gamma_m +/- Gamma_opt.
SidebandShape sideband_area_width(const PumpConfig& pump, double n_eff, double gamma_m,
                                  double gamma_opt_rate);

// Effective temperature implied by a measured sideband area at the small-drive
// limit: T_blue = (n+1) hbar omega_m / kB, T_red = n hbar omega_m / kB.
double effective_temperature(double area, double gamma_opt_rate, const SystemParams& sys,
                             Scheme scheme);

// Anti-Stokes / Stokes area ratio at finite drive:
// [n/(n+1)] * [(Gamma_m - Gamma_opt)/(Gamma_m + Gamma_opt)].
double asymmetry_ratio(double temperature, double n_cav, const SystemParams& sys);
double asymmetry_high_t_bound(double n_cav, const SystemParams& sys);

// Drive photons at which the blue-detuned linewidth closes:
// n_thr = Gamma_m kappa_tot / (4 g0^2).
double self_oscillation_threshold(const SystemParams& sys, double gamma_m);

// Mechanical frequency pull of an imperfectly tuned pump (standard
// two-Lorentzian optical-spring expression; linear in n_cav).
double optical_spring_shift(const PumpConfig& pump, const SystemParams& sys);

// Self-oscillation amplitude implied by a Duffing frequency shift (Hz):
// amplitude = sqrt(shift / beta), nm.
double duffing_amplitude(double freq_shift_hz, const SystemParams& sys);

}  // namespace sbtherm
