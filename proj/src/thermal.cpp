#include "sbtherm/thermal.hpp"

#include <cmath>

#include "sbtherm/constants.hpp"
#include "sbtherm/errors.hpp"

namespace sbtherm {

void MaterialProps::validate() const {
  if (!(v_s > 0.0) || !(theta_d > 0.0) || !(rho > 0.0) || !(c_p_coeff > 0.0) ||
      !(k_bulk_coeff > 0.0) || !(g_eph > 0.0)) {
    throw DomainError("MaterialProps: all constants must be > 0");
  }
}

MaterialProps aluminum() {
  MaterialProps m;
  m.v_s = 6700.0;
  m.theta_d = 468.0;
  m.rho = 2700.0;
  m.c_p_coeff = 0.41;
  m.k_bulk_coeff = 23.4;
  m.g_eph = 0.4e9;
  return m;
}

void ThermalStack::validate() const {
  if (!(thickness > 0.0)) throw DomainError("ThermalStack: thickness must be > 0");
  if (!(r1 > 0.0) || !(r2 > r1)) throw DomainError("ThermalStack: need r2 > r1 > 0");
  if (kapitza_coeff < 0.0 || heat_leak_specific < 0.0) {
    throw DomainError("ThermalStack: coefficients must be >= 0");
  }
}

double ThermalStack::disk_volume() const { return thickness * k_pi * r1 * r1; }

double ThermalStack::torus_contact_area() const { return k_pi * (r2 * r2 - r1 * r1); }

double ThermalStack::membrane_mass(const MaterialProps& mat) const {
  return mass_override > 0.0 ? mass_override : mat.rho * disk_volume();
}

ThermalStack aalto_drum_stack() {
  ThermalStack s;
  s.thickness = 100e-9;
  s.r1 = 7e-6;
  s.r2 = 10e-6;
  s.kapitza_coeff = 0.1;        // W cm^-2 K^-4
  s.heat_leak_specific = 1e-10; // W/kg upper bound for internal sources
  return s;
}

double debye_cp(double temperature, const MaterialProps& mat) {
  if (!(temperature > 0.0)) throw DomainError("debye_cp: T must be > 0");
  const double kb4 = k_boltzmann * k_boltzmann * k_boltzmann * k_boltzmann;
  const double h3 = k_hbar * k_hbar * k_hbar;
  const double v3 = mat.v_s * mat.v_s * mat.v_s;
  return (2.0 * k_pi * k_pi / 5.0) * kb4 / (h3 * v3) * temperature * temperature * temperature;
}

double bulk_mfp(const MaterialProps& mat) {
  return 3.0 * mat.k_bulk_coeff / (mat.c_p_coeff * mat.v_s);
}

double confined_conductivity(double temperature, double lambda_conf, const MaterialProps& mat) {
  if (!(lambda_conf > 0.0)) throw DomainError("confined_conductivity: Lambda must be > 0");
  const double c_p = mat.c_p_coeff * temperature * temperature * temperature;
  return c_p * lambda_conf * mat.v_s / 3.0;
}

double torus_conductance(double temperature, const ThermalStack& stack,
                         const MaterialProps& mat) {
  const double k = confined_conductivity(temperature, stack.confinement_length(), mat);
  return 2.0 * k_pi * stack.thickness * k / std::log(stack.r2 / stack.r1);
}

double membrane_heat_capacity(double temperature, const ThermalStack& stack,
                              const MaterialProps& mat) {
  const double c_p = mat.c_p_coeff * temperature * temperature * temperature;
  return c_p * stack.disk_volume();
}

double thermalization_time(const ThermalStack& stack, const MaterialProps& mat) {
  // the T^3 factors cancel; evaluate at 1 K
  return membrane_heat_capacity(1.0, stack, mat) / torus_conductance(1.0, stack, mat);
}

double kapitza_conductance(double temperature, const ThermalStack& stack) {
  const double area_cm2 = stack.torus_contact_area() * 1e4;
  return stack.kapitza_coeff * area_cm2 * temperature * temperature * temperature;
}

GradientResult temperature_gradient(double t0, double p_heat, const ThermalStack& stack,
                                    const MaterialProps& mat) {
  if (!(t0 > 0.0)) throw DomainError("temperature_gradient: T0 must be > 0");
  if (p_heat < 0.0) throw DomainError("temperature_gradient: power must be >= 0");
  GradientResult out;
  out.t1_naive = t0 + p_heat / torus_conductance(t0, stack, mat);
  if (p_heat == 0.0) {
    out.t1 = t0;
    out.converged = true;
    return out;
  }
  // (T1 - T0) K((T0+T1)/2) is strictly increasing in T1, so bisect. Upper
  // bracket: K(Tbar) >= K(T0) gives dT <= P/K(T0); K(Tbar) >= K(dT/2) gives
  // dT <= (8P/c)^(1/4) with c the T^3 coefficient of the torus conductance.
  const double c3 = torus_conductance(1.0, stack, mat);
  const double bound = std::min(out.t1_naive - t0, std::pow(8.0 * p_heat / c3, 0.25));
  double lo = t0;
  double hi = t0 + bound;
  for (int i = 0; i < 50 && hi - lo > 1e-9; ++i) {
    ++out.iterations;
    const double mid = 0.5 * (lo + hi);
    const double residual = (mid - t0) * torus_conductance(0.5 * (t0 + mid), stack, mat) - p_heat;
    (residual > 0.0 ? hi : lo) = mid;
  }
  out.t1 = 0.5 * (lo + hi);
  out.converged = hi - lo <= 1e-9;
  return out;
}

double electron_temperature(double p_e, double t_ph, const ThermalStack& stack,
                            const MaterialProps& mat) {
  if (p_e < 0.0) throw DomainError("electron_temperature: power must be >= 0");
  if (!(t_ph >= 0.0)) throw DomainError("electron_temperature: T_ph must be >= 0");
  const double vg = stack.disk_volume() * mat.g_eph;
  const double t5 = std::pow(t_ph, 5.0) + p_e / vg;
  return std::pow(t5, 0.2);
}

double dominant_wavelength(double temperature, const MaterialProps& mat) {
  if (!(temperature > 0.0)) throw DomainError("dominant_wavelength: T must be > 0");
  return 2.23 * k_hbar * mat.v_s / (k_boltzmann * temperature);
}

std::vector<ThermalBudgetRow> thermal_budget(const std::vector<double>& temperatures,
                                             const ThermalStack& stack,
                                             const MaterialProps& mat) {
  stack.validate();
  mat.validate();
  std::vector<ThermalBudgetRow> rows;
  rows.reserve(temperatures.size());
  const double leak = stack.heat_leak_specific * stack.membrane_mass(mat);
  for (double t : temperatures) {
    ThermalBudgetRow r;
    r.temperature = t;
    r.c_p = mat.c_p_coeff * t * t * t;
    r.k_nano = confined_conductivity(t, stack.confinement_length(), mat);
    r.k_torus = torus_conductance(t, stack, mat);
    r.heat_capacity = membrane_heat_capacity(t, stack, mat);
    r.tau_th = thermalization_time(stack, mat);
    r.kapitza = kapitza_conductance(t, stack);
    r.kapitza_torus_ratio = r.kapitza / r.k_torus;
    r.leak_power = leak;
    r.gradient = temperature_gradient(t, leak, stack, mat).t1 - t;
    r.t_electron_1fw = electron_temperature(1e-15, t, stack, mat);
    r.lambda_dominant = dominant_wavelength(t, mat);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace sbtherm
