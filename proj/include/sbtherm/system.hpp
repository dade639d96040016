#pragma once

#include <string>
#include <vector>

namespace sbtherm {

enum class Scheme { RedDetuned, BlueDetuned };

const char* scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

// Static device and cavity constants. All rates angular (rad/s).
struct SystemParams {
  double omega_c = 0.0;         // cavity resonance
  double omega_m0 = 0.0;        // high-temperature mechanical frequency
  double kappa_tot = 0.0;       // total cavity damping
  double kappa_ext = 0.0;       // external coupling
  double g0 = 0.0;              // single-photon optomechanical coupling
  double gamma_m_floor = 0.0;   // low-temperature (clamping) mechanical damping
  double duffing_beta = 0.0;    // Hz/nm^2
  double mass = 0.0;            // kg

  void validate() const;                       // throws DomainError on bad invariants
  bool resolved_sideband() const;              // omega_m0 > 10 kappa_tot
  std::vector<std::string> warnings() const;   // non-fatal regime checks
};

// Measurement pump tone. The scheme fixes the pump frequency to
// omega_c +/- omega_m0 + detuning_error.
struct PumpConfig {
  Scheme scheme = Scheme::BlueDetuned;
  double n_cav = 0.0;           // drive photons stored in the cavity
  double p_in = 0.0;            // injected power, W (consistent with n_cav)
  double detuning_error = 0.0;  // rad/s offset from the ideal pump position
};

PumpConfig pump_from_photons(Scheme scheme, double n_cav, const SystemParams& sys,
                             double detuning_error = 0.0);
PumpConfig pump_from_power(Scheme scheme, double p_in, const SystemParams& sys,
                           double detuning_error = 0.0);

// Photon noise budget entering the effective-population formula.
struct NoiseBudget {
  double n_cav_noise = 0.0;          // thermal/out-of-equilibrium cavity photons N_cav
  double tech_heating_coeff = 0.0;   // photons at the reference drive
  double tech_heating_exponent = 1.5;
  double tech_ref_photons = 300.0;   // drive strength the coefficient refers to
  double amplifier_background = 0.0; // detection floor, photons/s/Hz at the HEMT input
  // Small (kappa_tot/4 omega_m)^2 term added to the red-scheme noise; the
  // quantum lower bound for sideband cooling.
  bool include_backaction_floor = true;

  void validate() const;
};

// The measured device: frequencies/rates from the experiment this toolkit is
// benchmarked against.
SystemParams aalto_drum();
NoiseBudget aalto_drum_noise();

}  // namespace sbtherm
