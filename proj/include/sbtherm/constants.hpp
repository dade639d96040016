#pragma once

namespace sbtherm {

// CODATA 2018 (SI exact where defined).
inline constexpr double k_hbar = 1.054571817e-34;  // J s
inline constexpr double k_boltzmann = 1.380649e-23;  // J/K
inline constexpr double k_pi = 3.14159265358979323846;
inline constexpr double k_two_pi = 2.0 * k_pi;

// All internal rates and frequencies are angular (rad/s). Interface surfaces
// (CLI, config files, tables) speak ordinary Hz; convert exactly once here.
inline constexpr double hz_to_rad(double f_hz) { return k_two_pi * f_hz; }
inline constexpr double rad_to_hz(double w_rad) { return w_rad / k_two_pi; }

}  // namespace sbtherm
