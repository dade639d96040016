#include "sbtherm/digamma.hpp"

#include <cmath>

#include "sbtherm/errors.hpp"

namespace sbtherm {

std::complex<double> digamma(std::complex<double> z) {
  if (!(z.real() > 0.0) && std::abs(z.imag()) == 0.0 && z.real() == std::floor(z.real())) {
    throw DomainError("digamma: pole at non-positive integer");
  }

  std::complex<double> acc(0.0, 0.0);
  while (z.real() < 8.0) {
    acc -= 1.0 / z;
    z += 1.0;
  }

  // psi(z) ~ ln z - 1/(2z) - sum B_{2n}/(2n z^{2n}); truncated so the first
  // omitted term is below 1e-15 relative for |z| >= 8.
  static const double coeff[] = {
      1.0 / 12.0,        -1.0 / 120.0,      1.0 / 252.0,  -1.0 / 240.0,
      1.0 / 132.0,       -691.0 / 32760.0,  1.0 / 12.0,
  };
  const std::complex<double> inv = 1.0 / z;
  const std::complex<double> inv2 = inv * inv;
  std::complex<double> series(0.0, 0.0);
  std::complex<double> p = inv2;
  for (double c : coeff) {
    series += c * p;
    p *= inv2;
  }
  return acc + std::log(z) - 0.5 * inv - series;
}

}  // namespace sbtherm
