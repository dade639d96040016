#pragma once

#include <complex>

namespace sbtherm {

// Digamma function for complex argument with Re(z) > 0.
// Upward recurrence into Re(z) >= 8, then the Stirling-type asymptotic series.
std::complex<double> digamma(std::complex<double> z);

// psi(1/2) = -gamma - 2 ln 2
inline constexpr double k_digamma_half = -1.9635100260214234794;

}  // namespace sbtherm
