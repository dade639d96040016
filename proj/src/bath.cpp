#include "sbtherm/bath.hpp"

#include <cmath>
#include <complex>

#include "sbtherm/constants.hpp"
#include "sbtherm/digamma.hpp"
#include "sbtherm/errors.hpp"
#include "sbtherm/optomech.hpp"

namespace sbtherm {

void BathParams::validate() const {
  if (!(t_c > 0.0)) throw DomainError("BathParams: t_c must be > 0");
  if (!(sigma_ph_prefactor >= 0.0)) throw DomainError("BathParams: sigma_ph_prefactor must be >= 0");
  if (!std::isfinite(tls_log_slope) || !std::isfinite(damping_linear_slope)) {
    throw DomainError("BathParams: slopes must be finite");
  }
  if (!(damping_knee_temperature > 0.0)) {
    throw DomainError("BathParams: damping_knee_temperature must be > 0");
  }
  if (std::abs(walk_correlation) > 1.0) {
    throw DomainError("BathParams: walk_correlation must lie in [-1, 1]");
  }
}

BathParams aalto_drum_bath() {
  BathParams b;
  // Slopes are eye-fit scales for this device class, not measured constants.
  b.tls_log_slope = hz_to_rad(120.0);
  b.damping_linear_slope = hz_to_rad(400.0);
  b.damping_knee_temperature = 0.1;
  b.t_c = 18000.0;  // ~5 h
  b.sigma_ph_prefactor = 0.5;
  b.sigma_f_amp = hz_to_rad(0.2);
  b.sigma_f_exponent = 0.5;
  b.sigma_gamma_amp = hz_to_rad(0.2);
  b.sigma_gamma_exponent = 0.5;
  b.walk_ref_acquisition = 36000.0;
  b.walk_correlation = 0.0;
  return b;
}

double tls_bracket_exact(double temperature, double omega0) {
  if (!(temperature > 0.0)) throw DomainError("tls shift: T must be > 0");
  const double x = k_hbar * omega0 / (k_boltzmann * temperature);
  // 1/(2 pi i) = -i/(2 pi); the real part is even in the imaginary argument.
  const std::complex<double> z(0.5, -x / k_two_pi);
  return digamma(z).real() - std::log(x);
}

double tls_bracket_log(double temperature, double omega0) {
  if (!(temperature > 0.0)) throw DomainError("tls shift: T must be > 0");
  const double x = k_hbar * omega0 / (k_boltzmann * temperature);
  return -std::log(x) + k_digamma_half;
}

static double tls_slope_natural(const BathParams& bath) {
  // Stored per decade of temperature; the bracket advances by ln(10) per decade.
  return bath.tls_log_slope / std::log(10.0);
}

double tls_frequency_shift(double temperature, double omega0, const BathParams& bath) {
  return tls_slope_natural(bath) * tls_bracket_exact(temperature, omega0);
}

double tls_frequency_shift_log(double temperature, double omega0, const BathParams& bath) {
  return tls_slope_natural(bath) * tls_bracket_log(temperature, omega0);
}

double mechanical_damping_mean(double temperature, const SystemParams& sys,
                               const BathParams& bath) {
  if (!(temperature > 0.0)) throw DomainError("mechanical_damping_mean: T must be > 0");
  const double excess = bath.damping_linear_slope * (temperature - bath.damping_knee_temperature);
  return sys.gamma_m_floor + std::max(0.0, excess);
}

std::vector<double> ou_path(double sigma, double t_c, double dt, std::size_t n_steps,
                            std::uint64_t seed) {
  if (!(dt > 0.0) || !(t_c > 0.0)) throw DomainError("ou_path: dt and t_c must be > 0");
  RngStream rng(seed);
  std::vector<double> out(n_steps);
  if (n_steps == 0) return out;
  const double decay = std::exp(-dt / t_c);
  const double kick = sigma * std::sqrt(1.0 - decay * decay);
  double x = sigma * rng.normal();  // stationary start
  out[0] = x;
  for (std::size_t k = 1; k < n_steps; ++k) {
    x = x * decay + kick * rng.normal();
    out[k] = x;
  }
  return out;
}

double ou_spectrum_model(double f_hz, double sigma, double t_c) {
  if (f_hz < 0.0) throw DomainError("ou_spectrum_model: f must be >= 0");
  const double wt = k_two_pi * f_hz * t_c;
  return 4.0 * sigma * sigma * t_c / (1.0 + wt * wt);
}

std::vector<double> random_walk_path(double step_sigma, double dt, std::size_t n_steps,
                                     std::uint64_t seed) {
  if (!(dt > 0.0)) throw DomainError("random_walk_path: dt must be > 0");
  RngStream rng(seed);
  std::vector<double> out(n_steps);
  double x = 0.0;
  for (std::size_t k = 0; k < n_steps; ++k) {
    x += step_sigma * rng.normal();
    out[k] = x;
  }
  return out;
}

double walk_step_sigma(double target_sigma, double acquisition, double dt) {
  if (!(acquisition > 0.0) || !(dt > 0.0)) {
    throw DomainError("walk_step_sigma: acquisition and dt must be > 0");
  }
  return target_sigma * std::sqrt(6.0 * dt / acquisition);
}

static double walk_target(double amp, double exponent, double temperature) {
  return amp * std::pow(temperature, -exponent);
}

BathState initial_bath_state(double temperature, const SystemParams& sys,
                             const BathParams& bath, BathRng& rng) {
  BathState s;
  s.t = 0.0;
  const double n_mean = bose_occupation(temperature, sys.omega_m0);
  const double sigma = bath.sigma_ph_prefactor * std::sqrt(n_mean);
  s.occupation_dev = sigma > 0.0 ? sigma * rng.occupation.normal() : 0.0;
  s.freq_walk = 0.0;
  s.damping_walk = 0.0;
  s.n_inst = std::max(0.0, n_mean + s.occupation_dev);
  s.omega_m_inst = sys.omega_m0 + tls_frequency_shift(temperature, sys.omega_m0, bath);
  s.gamma_m_inst = mechanical_damping_mean(temperature, sys, bath);
  return s;
}

BathState evolve_bath(double temperature, double dt, const BathState& state,
                      const SystemParams& sys, const BathParams& bath, BathRng& rng) {
  if (!(dt > 0.0)) throw DomainError("evolve_bath: dt must be > 0");
  BathState next;
  next.t = state.t + dt;

  const double n_mean = bose_occupation(temperature, sys.omega_m0);
  const double sigma = bath.sigma_ph_prefactor * std::sqrt(n_mean);
  const double decay = std::exp(-dt / bath.t_c);
  const double kick = sigma * std::sqrt(1.0 - decay * decay);
  next.occupation_dev = state.occupation_dev * decay + kick * rng.occupation.normal();
  next.n_inst = std::max(0.0, n_mean + next.occupation_dev);

  const double xi_f = rng.frequency.normal();
  const double xi_g_ind = rng.damping.normal();
  const double rho = bath.walk_correlation;
  const double xi_g = rho * xi_f + std::sqrt(1.0 - rho * rho) * xi_g_ind;

  const double step_f = walk_step_sigma(walk_target(bath.sigma_f_amp, bath.sigma_f_exponent, temperature),
                                        bath.walk_ref_acquisition, dt);
  const double step_g = walk_step_sigma(walk_target(bath.sigma_gamma_amp, bath.sigma_gamma_exponent, temperature),
                                        bath.walk_ref_acquisition, dt);
  next.freq_walk = state.freq_walk + step_f * xi_f;
  next.damping_walk = state.damping_walk + step_g * xi_g;

  next.omega_m_inst = sys.omega_m0 + tls_frequency_shift(temperature, sys.omega_m0, bath) +
                      next.freq_walk;
  const double gamma_mean = mechanical_damping_mean(temperature, sys, bath);
  // Keep the linewidth physical even under a long unfavourable walk.
  next.gamma_m_inst = std::max(sys.gamma_m_floor / 10.0, gamma_mean + next.damping_walk);
  return next;
}

}  // namespace sbtherm
