#include "sbtherm/system.hpp"

#include "sbtherm/constants.hpp"
#include "sbtherm/errors.hpp"
#include "sbtherm/optomech.hpp"

namespace sbtherm {

const char* scheme_name(Scheme s) {
  return s == Scheme::RedDetuned ? "red" : "blue";
}

Scheme scheme_from_name(const std::string& name) {
  if (name == "red") return Scheme::RedDetuned;
  if (name == "blue") return Scheme::BlueDetuned;
  throw ConfigError("unknown pump scheme '" + name + "' (expected red|blue)");
}

void SystemParams::validate() const {
  if (!(omega_c > 0.0) || !(omega_m0 > 0.0) || !(kappa_tot > 0.0) ||
      !(kappa_ext > 0.0) || !(g0 > 0.0) || !(gamma_m_floor > 0.0)) {
    throw DomainError("SystemParams: all rates must be > 0");
  }
  if (kappa_ext > kappa_tot) {
    throw DomainError("SystemParams: kappa_ext must not exceed kappa_tot");
  }
  if (!(mass > 0.0)) {
    throw DomainError("SystemParams: mass must be > 0");
  }
}

bool SystemParams::resolved_sideband() const { return omega_m0 > 10.0 * kappa_tot; }

std::vector<std::string> SystemParams::warnings() const {
  std::vector<std::string> w;
  if (!resolved_sideband()) {
    w.push_back("system is not deep in the resolved-sideband regime "
                "(omega_m0 <= 10 kappa_tot); sideband formulas assume it");
  }
  return w;
}

PumpConfig pump_from_photons(Scheme scheme, double n_cav, const SystemParams& sys,
                             double detuning_error) {
  if (n_cav < 0.0) throw DomainError("pump: n_cav must be >= 0");
  PumpConfig p;
  p.scheme = scheme;
  p.n_cav = n_cav;
  p.p_in = power_from_n_cav(n_cav, sys);
  p.detuning_error = detuning_error;
  return p;
}

PumpConfig pump_from_power(Scheme scheme, double p_in, const SystemParams& sys,
                           double detuning_error) {
  if (p_in < 0.0) throw DomainError("pump: p_in must be >= 0");
  PumpConfig p;
  p.scheme = scheme;
  p.n_cav = n_cav_from_power(p_in, sys);
  p.p_in = p_in;
  p.detuning_error = detuning_error;
  return p;
}

void NoiseBudget::validate() const {
  if (n_cav_noise < 0.0 || tech_heating_coeff < 0.0 || amplifier_background < 0.0) {
    throw DomainError("NoiseBudget: photon numbers must be >= 0");
  }
  if (!(tech_ref_photons > 0.0)) {
    throw DomainError("NoiseBudget: tech_ref_photons must be > 0");
  }
}

SystemParams aalto_drum() {
  SystemParams s;
  s.omega_c = hz_to_rad(5.7e9);
  s.omega_m0 = hz_to_rad(15.1e6);
  s.kappa_tot = hz_to_rad(500e3);
  s.kappa_ext = hz_to_rad(240e3);
  s.g0 = hz_to_rad(230.0);
  s.gamma_m_floor = hz_to_rad(420.0);
  s.duffing_beta = 20.0;
  s.mass = 5e-14;
  return s;
}

NoiseBudget aalto_drum_noise() {
  NoiseBudget n;
  n.n_cav_noise = 0.0;
  n.tech_heating_coeff = 1.0;   // about one out-of-equilibrium photon at 300 drive photons
  n.tech_heating_exponent = 1.5;
  n.tech_ref_photons = 300.0;
  n.amplifier_background = 100.0;
  return n;
}

}  // namespace sbtherm
