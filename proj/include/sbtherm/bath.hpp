#pragma once

#include <cstdint>
#include <vector>

#include "sbtherm/rng.hpp"
#include "sbtherm/system.hpp"

namespace sbtherm {

// Stochastic and deterministic environment models: the tunneling-systems
// frequency-shift law, the damping law, slow occupation fluctuations
// (Ornstein-Uhlenbeck) and non-stationary 1/f^2 frequency/damping walks.

struct BathParams {
  // Deterministic laws
  double tls_log_slope = 0.0;        // rad/s per decade of T
  double damping_linear_slope = 0.0; // rad/s per K above the knee
  double damping_knee_temperature = 0.1;  // K; clamping floor below this

  // Occupation fluctuations (stationary, exponential autocorrelation)
  double t_c = 18000.0;              // s
  double sigma_ph_prefactor = 0.5;   // sigma_ph = prefactor * sqrt(n)

  // Frequency/damping random walks. Amplitudes are the expected sample
  // standard deviation accumulated over walk_ref_acquisition at temperature
  // 1 K; both follow amp * T^-exponent.
  double sigma_f_amp = 0.0;          // rad/s at 1 K over the reference acquisition
  double sigma_f_exponent = 0.5;
  double sigma_gamma_amp = 0.0;      // rad/s
  double sigma_gamma_exponent = 0.5;
  double walk_ref_acquisition = 36000.0;  // s
  double walk_correlation = 0.0;     // correlation of freq/damping increments

  std::uint64_t rng_seed = 0;

  void validate() const;
};

BathParams aalto_drum_bath();

// Instantaneous environment-driven mechanical parameters.
struct BathState {
  double t = 0.0;
  double n_inst = 0.0;        // instantaneous mode occupation (clamped >= 0)
  double omega_m_inst = 0.0;  // rad/s
  double gamma_m_inst = 0.0;  // rad/s
  // Raw noise components, kept so evolution stays Markovian even when the
  // clamps above are active.
  double occupation_dev = 0.0;
  double freq_walk = 0.0;     // rad/s
  double damping_walk = 0.0;  // rad/s
};

// Frequency-shift bracket of the tunneling-systems law,
//   Re psi(1/2 + hbar w0/(2 pi i kB T)) - ln(hbar w0/(kB T)),
// dimensionless, multiplied by the per-decade slope (converted to natural
// log). The `_log` variant is the high-temperature asymptote
// ln(kB T/(hbar w0)) + psi(1/2).
double tls_bracket_exact(double temperature, double omega0);
double tls_bracket_log(double temperature, double omega0);
double tls_frequency_shift(double temperature, double omega0, const BathParams& bath);
double tls_frequency_shift_log(double temperature, double omega0, const BathParams& bath);

// Mean mechanical damping: clamping floor below the knee, linear above.
double mechanical_damping_mean(double temperature, const SystemParams& sys,
                               const BathParams& bath);

// Stationary Ornstein-Uhlenbeck path, exact discrete update
//   x_{k+1} = x_k e^{-dt/tc} + sigma sqrt(1 - e^{-2 dt/tc}) xi_k.
// The path starts in the stationary distribution.
std::vector<double> ou_path(double sigma, double t_c, double dt, std::size_t n_steps,
                            std::uint64_t seed);

// One-sided model spectrum of the OU process: S(f) = 4 sigma^2 tc / (1 + (2 pi f tc)^2),
// normalised so that the integral over f >= 0 is sigma^2.
double ou_spectrum_model(double f_hz, double sigma, double t_c);

// Cumulative-sum Gaussian walk (non-stationary, 1/f^2 with no cutoff).
std::vector<double> random_walk_path(double step_sigma, double dt, std::size_t n_steps,
                                     std::uint64_t seed);

// Per-step increment that makes a random walk accumulate an expected sample
// standard deviation `target_sigma` over `acquisition` seconds of dt-sampled
// data (E[sample std] ~ step_sigma sqrt(N/6)).
double walk_step_sigma(double target_sigma, double acquisition, double dt);

// RNG streams owned by a scenario run; one per noise process.
struct BathRng {
  RngStream occupation;
  RngStream frequency;
  RngStream damping;
  explicit BathRng(std::uint64_t master)
      : occupation(master, 1), frequency(master, 2), damping(master, 3) {}
};

BathState initial_bath_state(double temperature, const SystemParams& sys,
                             const BathParams& bath, BathRng& rng);

// Advance the bath by dt at cryostat temperature T:
//   n_inst     = max(0, n(T) + OU deviation with sigma = prefactor sqrt(n(T)))
//   omega_inst = omega_0 + TLS shift(T) + frequency walk
//   gamma_inst = damping mean(T) + damping walk, floored at Gamma_floor/10.
BathState evolve_bath(double temperature, double dt, const BathState& state,
                      const SystemParams& sys, const BathParams& bath, BathRng& rng);

}  // namespace sbtherm
