#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sbtherm/lorentz_fit.hpp"
#include "sbtherm/spectrum.hpp"
#include "sbtherm/system.hpp"

namespace sbtherm {

// The inverse pipeline: frames -> (area, width, center)(t) -> populations,
// temperatures, fluctuation spectra, deviation curves, histograms and
// calibrations.

// ---------------------------------------------------------------------------
// Sliding average and fitting

// Trailing boxcar mean of the PSDs over `window_s`, emitted at every frame
// time; summed n_averages. Outputs before the window fills are flagged
// partial by their index (i < window_frames - 1).
std::vector<SpectrumFrame> sliding_average(const std::vector<SpectrumFrame>& frames,
                                           double window_s);

FitResult fit_frame(const SpectrumFrame& frame);

// Independent per-frame fits, fanned out across threads.
std::vector<FitResult> batch_fit(const std::vector<SpectrumFrame>& frames);

// ---------------------------------------------------------------------------
// Calibration from power sweeps

struct PowerPoint {
  double n_cav = 0.0;
  FitResult fit;
};

struct PowerSweep {
  Scheme scheme = Scheme::BlueDetuned;
  std::vector<PowerPoint> points;
};

struct CalibrationResult {
  double g0_est = 0.0;        // rad/s
  double g0_err = 0.0;
  double gamma_m_est = 0.0;   // rad/s
  double gamma_m_err = 0.0;
  double tech_coeff = 0.0;    // photons at tech_ref_photons drive
  double tech_coeff_err = 0.0;
  double tech_exponent = 0.0;
  double tech_ref_photons = 300.0;
  double n_cav_photons = 0.0;  // baseline cavity noise used in corrections
  bool include_backaction_floor = true;
  bool single_scheme = false;
  std::vector<std::string> warnings;

  struct NormalizedArea {
    Scheme scheme;
    double n_cav;
    double value;  // area * width / gamma_opt, photons/s
  };
  std::vector<NormalizedArea> normalized_areas;

  double gamma_opt_at(double n_cav, const SystemParams& sys) const;
  double noise_photons_at(double n_cav) const;  // baseline + technical heating
};

// Width-vs-power slopes give +/- Gamma_opt per photon and hence g0; the
// zero-power intercept gives Gamma_m; the flat part and high-power deviation
// of area*width/Gamma_opt give the technical-heating law.
CalibrationResult calibrate_power_sweep(const std::vector<PowerSweep>& sweeps,
                                        const SystemParams& sys);

// Calibration taken from known ground-truth parameters (used when analysing
// synthetic runs against their own manifest).
CalibrationResult calibration_from_truth(const SystemParams& sys, const NoiseBudget& noise,
                                         double gamma_m);

// ---------------------------------------------------------------------------
// Back-action correction and thermometry

// Invert the sideband relations for the thermal occupation: removes the blue
// zero-point quantum, the amplification gain and the cavity-noise photons.
// Uses the measured width when the fit converged (it carries the damping
// drift), the calibrated Gamma_m otherwise. The result may be negative.
double correct_backaction(const FitResult& fit, const CalibrationResult& calib,
                          const PumpConfig& pump, const SystemParams& sys);

// T = hbar w_m / (kB ln(1 + 1/n)); requires n > 0.
double mode_temperature_from_n(double n, const SystemParams& sys);

struct TimeSeriesRecord {
  double t = 0.0;
  FitResult fit;
  double n_raw = 0.0;        // effective population implied by the raw area
  double n_corrected = 0.0;  // may be negative; kept as-is
  double t_mode = 0.0;       // K; NaN when n_corrected <= 0
  bool partial = false;      // averaging window not yet full
};

std::vector<TimeSeriesRecord> build_records(const std::vector<SpectrumFrame>& averaged,
                                            const std::vector<FitResult>& fits,
                                            const CalibrationResult& calib,
                                            const PumpConfig& pump, const SystemParams& sys,
                                            std::size_t window_frames);

struct AsymmetryResult {
  double ratio = 0.0;      // anti-Stokes / Stokes areas
  double bound = 0.0;      // high-temperature limit of the ratio
  double n_est = 0.0;
  double temperature = 0.0;
  bool ok = false;
  std::string note;
};

// Invert the renormalised ratio R = [n/(n+1)] [(Gm-Go)/(Gm+Go)] for n, then T.
AsymmetryResult asymmetry_thermometry(const FitResult& stokes_blue,
                                      const FitResult& antistokes_red,
                                      const CalibrationResult& calib, double n_cav,
                                      const SystemParams& sys);

// ---------------------------------------------------------------------------
// Series statistics

struct OuFit {
  double sigma = 0.0;
  double t_c = 0.0;
  bool ok = false;
};

struct SpectrumEstimate {
  std::vector<double> freq_hz;
  std::vector<double> psd;  // one-sided
  OuFit ou;
};

// Wiener-Khinchin estimator: biased autocovariance -> cosine transform ->
// one-sided PSD on f_j = j/(N dt); the OU parameters are fitted on the
// autocovariance (same information, better conditioned at short records).
// window_lags > 0 adds a triangular component to the fit model, absorbing
// the correlation a sliding spectral window imprints on estimator noise.
SpectrumEstimate fluctuation_spectrum(const std::vector<double>& series, double dt,
                                      bool detrend, std::size_t window_lags = 0);

OuFit fit_ou_autocovariance(const std::vector<double>& series, double dt,
                            std::size_t window_lags = 0);

struct Histogram {
  std::vector<double> edges;   // n_bins + 1
  std::vector<double> counts;
  double fit_amplitude = 0.0;
  double fit_mean = 0.0;
  double fit_sigma = 0.0;
  bool fit_ok = false;
  bool degenerate = false;  // constant input series
};

// Freedman-Diaconis binning plus a least-squares Gaussian fit. Negative
// values are first-class and never clamped.
Histogram histogram_stats(const std::vector<double>& series);

struct DeviationCurves {
  std::vector<double> acquisitions_s;
  std::vector<double> windows_s;
  // sigma[i][j]: std over acquisition i after boxcar window j; NaN when the
  // record is too short for a full segment.
  std::vector<std::vector<double>> sigma;
  std::vector<double> sigma_zero_window;  // per acquisition, linear extrapolation
  bool plateau = false;                   // acquisition axis flattens at the top
  double plateau_ratio = 0.0;             // sigma(L_max) / sigma(L_max/2)
};

DeviationCurves deviation_curves(const std::vector<double>& series, double dt,
                                 const std::vector<double>& acquisitions_s,
                                 const std::vector<double>& windows_s);

// Two-sample (non-overlapping) Allan deviation at averaging time tau.
double allan_deviation(const std::vector<double>& series, double dt, double tau);

// The companion number quoted in this pipeline: plain standard deviation over
// fixed spans (mean over the available full spans).
double windowed_std(const std::vector<double>& series, double dt, double span_s);

struct SqrtLawFit {
  double prefactor = 0.0;
  double log_err = 0.0;  // 1-sigma scatter of ln(c) across points
  std::size_t n_points = 0;
};

// Least-squares fit of sigma = c sqrt(n) in log space.
SqrtLawFit sigma_vs_n(const std::vector<double>& n_values,
                      const std::vector<double>& sigma_values);

// ---------------------------------------------------------------------------
// Pipeline driver

struct AnalysisConfig {
  double window_s = 1200.0;
  bool drop_partial = true;
  bool detrend = true;
  double t_c_for_errors = 18000.0;  // effective-sample bookkeeping N_eff = T/t_c
  std::vector<double> deviation_windows_s = {300.0, 600.0, 900.0, 1200.0};
  std::vector<double> acquisitions_s;  // empty -> log spacing up to the record
};

struct PipelineResult {
  std::vector<TimeSeriesRecord> records;
  SpectrumEstimate spectrum;   // of the n_corrected series
  Histogram histogram;
  DeviationCurves deviations;
  double mean_n = 0.0;
  double sigma_ph = 0.0;
  double se_mean = 0.0;        // sigma_ph / sqrt(N_eff)
  double n_eff_samples = 0.0;
  std::vector<std::string> warnings;
};

PipelineResult analyze_frames(const std::vector<SpectrumFrame>& frames,
                              const CalibrationResult& calib, const PumpConfig& pump,
                              const SystemParams& sys, const AnalysisConfig& cfg);

}  // namespace sbtherm
