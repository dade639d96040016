#pragma once

#include <vector>

namespace sbtherm {

// Low-temperature phonon thermal budget of the membrane / torus / substrate
// chain, and the electron-phonon decoupling of the superconducting film.

struct MaterialProps {
  double v_s = 0.0;          // m/s, averaged speed of sound
  double theta_d = 0.0;      // K, Debye temperature
  double rho = 0.0;          // kg/m^3
  double c_p_coeff = 0.0;    // J m^-3 K^-4, c_p = coeff T^3
  double k_bulk_coeff = 0.0; // W m^-1 K^-4, k = coeff T^3
  double g_eph = 0.0;        // W K^-5 m^-3, electron-phonon coupling

  void validate() const;
};

MaterialProps aluminum();

struct ThermalStack {
  double thickness = 0.0;       // m, membrane/torus film thickness e_p
  double r1 = 0.0;              // m, suspended-disk radius
  double r2 = 0.0;              // m, outer torus radius
  double kapitza_coeff = 0.0;   // W cm^-2 K^-4 boundary conductance per area
  double heat_leak_specific = 0.0;  // W/kg
  double lambda_conf = 0.0;     // m, confined mean free path (0 -> thickness)
  double mass_override = 0.0;   // kg; 0 -> rho * disk volume

  void validate() const;
  double confinement_length() const { return lambda_conf > 0.0 ? lambda_conf : thickness; }
  double disk_volume() const;            // m^3
  double torus_contact_area() const;     // m^2
  double membrane_mass(const MaterialProps& mat) const;
};

ThermalStack aalto_drum_stack();

// Debye phonon specific heat, (2 pi^2/5) kB^4/(hbar^3 v_s^3) T^3, J m^-3 K^-1.
double debye_cp(double temperature, const MaterialProps& mat);

// Bulk phonon mean free path from the kinetic equation, Lambda = 3k/(c_p v_s);
// temperature-independent when k and c_p share the T^3 law.
double bulk_mfp(const MaterialProps& mat);

// Boundary-limited (Casimir) conductivity, (1/3) c_p Lambda_conf v_s.
double confined_conductivity(double temperature, double lambda_conf, const MaterialProps& mat);

// Radial 2D conductance of the torus, K = 2 pi e_p k / ln(r2/r1).
double torus_conductance(double temperature, const ThermalStack& stack,
                         const MaterialProps& mat);

// C = c_p * e_p * pi * r1^2.
double membrane_heat_capacity(double temperature, const ThermalStack& stack,
                              const MaterialProps& mat);

// tau = C / K_torus; temperature-independent.
double thermalization_time(const ThermalStack& stack, const MaterialProps& mat);

// Acoustic-mismatch boundary conductance, coeff T^3 * contact area.
double kapitza_conductance(double temperature, const ThermalStack& stack);

// Membrane temperature T1 under absorbed power, solving T1 - T0 = P / K(Tbar)
// self-consistently with K evaluated at the midpoint temperature.
struct GradientResult {
  double t1 = 0.0;
  double t1_naive = 0.0;  // single-pass P / K(T0)
  int iterations = 0;
  bool converged = false;
};
GradientResult temperature_gradient(double t0, double p_heat, const ThermalStack& stack,
                                    const MaterialProps& mat);

// Electron temperature from P = V g (Te^5 - Tph^5).
double electron_temperature(double p_e, double t_ph, const ThermalStack& stack,
                            const MaterialProps& mat);

// Dominant phonon wavelength, 2.23 hbar v_s / (kB T).
double dominant_wavelength(double temperature, const MaterialProps& mat);

// One row of the budget table emitted by the CLI.
struct ThermalBudgetRow {
  double temperature = 0.0;
  double c_p = 0.0;
  double k_nano = 0.0;
  double k_torus = 0.0;
  double heat_capacity = 0.0;
  double tau_th = 0.0;
  double kapitza = 0.0;
  double kapitza_torus_ratio = 0.0;
  double leak_power = 0.0;
  double gradient = 0.0;        // self-consistent T1 - T0 under the leak
  double t_electron_1fw = 0.0;
  double lambda_dominant = 0.0;
};

std::vector<ThermalBudgetRow> thermal_budget(const std::vector<double>& temperatures,
                                             const ThermalStack& stack,
                                             const MaterialProps& mat);

}  // namespace sbtherm
