#pragma once

#include <cstddef>
#include <span>

namespace sbtherm {

// Damped least-squares fit of  background + Lorentzian
//   m(f) = B + (2A/(pi W)) / (1 + 4 (f - c)^2 / W^2)
// to a one-sided power spectrum. Weights follow averaged-periodogram
// statistics, sigma_i = mean_i / sqrt(n_averages), reweighted once from the
// fitted model. Convergence: relative step < 1e-8, at most 200 iterations.

struct FitResult {
  double area = 0.0;        // photons/s
  double width_hz = 0.0;    // FWHM
  double center_hz = 0.0;
  double background = 0.0;  // photons/s/Hz
  double area_err = 0.0;
  double width_err = 0.0;
  double center_err = 0.0;
  double background_err = 0.0;
  double area_width_cov = 0.0;  // strongly positive for Lorentzian fits
  bool converged = false;
  double residual_rms = 0.0;
  int iterations = 0;
};

FitResult fit_lorentzian(std::span<const double> freq_hz, std::span<const double> psd,
                         double n_averages);

// Model evaluation, shared with the simulator and tests.
double lorentzian_psd(double f_hz, double area, double width_hz, double center_hz,
                      double background);

// Solve a small dense linear system in place (partial pivoting); used by the
// fitters and the calibration regressions. Returns false when singular.
bool solve_small(double* a, double* b, std::size_t n);

}  // namespace sbtherm
