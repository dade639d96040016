#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "sbtherm/constants.hpp"

namespace sbtherm {

// Reproducibility contract: every stochastic output of the toolkit must be a
// deterministic function of (parameters, seed). std::mt19937_64 has a
// standard-pinned output sequence, but the std:: distributions do not, so the
// normal and gamma transforms are implemented here.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Decorrelated substream seed for (master seed, stream tag).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
  return splitmix64(splitmix64(master) ^ splitmix64(tag * 0x9E3779B97F4A7C15ull + 0xD1B54A32D192ED03ull));
}

class RngStream {
 public:
  RngStream() : engine_(0) {}
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}
  RngStream(std::uint64_t master, std::uint64_t tag) : engine_(derive_seed(master, tag)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on (0,1); never returns 0, safe under log().
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal, Box-Muller. Second variate is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(k_two_pi * u2);
    have_spare_ = true;
    return r * std::cos(k_two_pi * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  // Gamma(shape, scale), Marsaglia-Tsang squeeze method.
  double gamma(double shape, double scale) {
    if (shape < 1.0) {
      // Boost: Gamma(a) = Gamma(a+1) * U^(1/a)
      const double u = uniform();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x;
      double v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v * scale;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace sbtherm
