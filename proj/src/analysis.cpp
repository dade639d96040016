#include "sbtherm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sbtherm/constants.hpp"
#include "sbtherm/errors.hpp"
#include "sbtherm/kernels.hpp"
#include "sbtherm/optomech.hpp"

namespace sbtherm {

namespace {

constexpr double k_nan = std::numeric_limits<double>::quiet_NaN();

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / static_cast<double>(v.size());
}

double frame_cadence(const std::vector<SpectrumFrame>& frames) {
  if (frames.size() < 2) throw DomainError("need at least two frames to infer the cadence");
  const double dt = frames[1].t - frames[0].t;
  if (!(dt > 0.0)) throw DomainError("frames are not in increasing time order");
  return dt;
}

struct LineFit {
  double intercept = 0.0, slope = 0.0;
  double intercept_err = 0.0, slope_err = 0.0;
  bool ok = false;
};

LineFit weighted_line_fit(const std::vector<double>& x, const std::vector<double>& y,
                          const std::vector<double>& w) {
  LineFit out;
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    swx += w[i] * x[i];
    swy += w[i] * y[i];
    swxx += w[i] * x[i] * x[i];
    swxy += w[i] * x[i] * y[i];
  }
  const double det = sw * swxx - swx * swx;
  if (!(det > 0.0)) return out;
  out.intercept = (swxx * swy - swx * swxy) / det;
  out.slope = (sw * swxy - swx * swy) / det;
  out.intercept_err = std::sqrt(swxx / det);
  out.slope_err = std::sqrt(sw / det);
  out.ok = true;
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Sliding average and fitting

std::vector<SpectrumFrame> sliding_average(const std::vector<SpectrumFrame>& frames,
                                           double window_s) {
  if (frames.empty()) throw DomainError("sliding_average: no frames");
  if (frames.size() == 1) {
    if (window_s <= 0.0) throw DomainError("sliding_average: window must be > 0");
    return frames;
  }
  const double dt = frame_cadence(frames);
  if (window_s < dt * (1.0 - 1e-9)) {
    throw DomainError("sliding_average: window shorter than the frame cadence");
  }
  const double acquisition = frames.back().t - frames.front().t + dt;
  if (window_s > acquisition * (1.0 + 1e-9)) {
    throw DomainError("sliding_average: window longer than the acquisition");
  }
  const std::size_t wf = static_cast<std::size_t>(std::llround(window_s / dt));
  return boxcar_frames_omp(frames, std::max<std::size_t>(1, wf));
}

FitResult fit_frame(const SpectrumFrame& frame) {
  const std::vector<double> f = frame.grid.freqs();
  return fit_lorentzian(f, frame.psd, frame.n_averages);
}

std::vector<FitResult> batch_fit(const std::vector<SpectrumFrame>& frames) {
  std::vector<FitResult> fits(frames.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(frames.size()); ++i) {
    fits[i] = fit_frame(frames[i]);
  }
  return fits;
}

// ---------------------------------------------------------------------------
// Calibration

double CalibrationResult::gamma_opt_at(double n_cav, const SystemParams& sys) const {
  return 4.0 * g0_est * g0_est * n_cav / sys.kappa_tot;
}

double CalibrationResult::noise_photons_at(double n_cav) const {
  double tech = 0.0;
  if (tech_coeff != 0.0 && n_cav > 0.0) {
    tech = tech_coeff * std::pow(n_cav / tech_ref_photons, tech_exponent);
  }
  return n_cav_photons + tech;
}

CalibrationResult calibration_from_truth(const SystemParams& sys, const NoiseBudget& noise,
                                         double gamma_m) {
  CalibrationResult c;
  c.g0_est = sys.g0;
  c.gamma_m_est = gamma_m;
  c.tech_coeff = noise.tech_heating_coeff;
  c.tech_exponent = noise.tech_heating_exponent;
  c.tech_ref_photons = noise.tech_ref_photons;
  c.n_cav_photons = noise.n_cav_noise;
  c.include_backaction_floor = noise.include_backaction_floor;
  return c;
}

CalibrationResult calibrate_power_sweep(const std::vector<PowerSweep>& sweeps,
                                        const SystemParams& sys) {
  if (sweeps.empty()) throw ConfigError("calibrate: no sweeps given");
  CalibrationResult out;

  struct SchemeFit {
    Scheme scheme;
    LineFit line;
  };
  std::vector<SchemeFit> lines;

  for (const PowerSweep& sweep : sweeps) {
    if (sweep.points.size() < 3) {
      throw ConfigError("calibrate: need at least 3 powers per scheme");
    }
    std::vector<double> x, y, w;
    for (const PowerPoint& p : sweep.points) {
      if (!p.fit.converged) continue;
      x.push_back(p.n_cav);
      y.push_back(hz_to_rad(p.fit.width_hz));
      const double err = hz_to_rad(p.fit.width_err);
      w.push_back(err > 0.0 ? 1.0 / (err * err) : 1.0);
    }
    if (x.size() < 3) throw NumericalError("calibrate: fewer than 3 converged width fits");
    const LineFit line = weighted_line_fit(x, y, w);
    if (!line.ok) throw NumericalError("calibrate: singular width regression");
    lines.push_back({sweep.scheme, line});
  }

  double k_sum = 0.0, k_err2 = 0.0;
  double gm_sum = 0.0, gm_err2 = 0.0;
  double k_blue = 0.0, k_red = 0.0;
  bool have_blue = false, have_red = false;
  for (const SchemeFit& sf : lines) {
    const double expected_sign = sf.scheme == Scheme::BlueDetuned ? -1.0 : 1.0;
    const double k = expected_sign * sf.line.slope;  // Gamma_opt per photon
    if (!(k > 0.0)) {
      out.warnings.push_back(std::string("width slope for the ") + scheme_name(sf.scheme) +
                             " scheme has an unexpected sign");
    }
    if (sf.scheme == Scheme::BlueDetuned) {
      k_blue = k;
      have_blue = true;
    } else {
      k_red = k;
      have_red = true;
    }
    k_sum += k;
    k_err2 += sf.line.slope_err * sf.line.slope_err;
    gm_sum += sf.line.intercept;
    gm_err2 += sf.line.intercept_err * sf.line.intercept_err;
  }
  const double n_schemes = static_cast<double>(lines.size());
  const double k_mean = k_sum / n_schemes;
  out.single_scheme = lines.size() < 2;
  if (have_blue && have_red) {
    if (std::abs(k_blue - k_red) > 0.2 * k_mean) {
      out.warnings.push_back("blue and red width slopes disagree beyond 20%");
    }
  }
  if (!(k_mean > 0.0)) throw NumericalError("calibrate: non-positive width slope magnitude");
  out.g0_est = std::sqrt(k_mean * sys.kappa_tot / 4.0);
  // from g0 = sqrt(k kappa/4): dg0/dk = g0/(2k)
  out.g0_err = out.g0_est / (2.0 * k_mean) * std::sqrt(k_err2) / n_schemes;
  out.gamma_m_est = gm_sum / n_schemes;
  out.gamma_m_err = std::sqrt(gm_err2) / n_schemes;

  // Technical heating from the normalized areas y = A W / Gamma_opt:
  // y = offset(scheme) + [N0 + c (n/n_ref)^a] Gamma_opt(n). The baseline N0
  // is not separable from c without an exponent constraint, so N0 is taken as
  // zero here and any constant noise folds into the fitted law.
  struct TechRow {
    int scheme_idx;
    double n_cav;
    double y;
    double weight;
  };
  std::vector<TechRow> rows;
  int idx_of_scheme[2] = {-1, -1};
  int n_offsets = 0;
  for (const PowerSweep& sweep : sweeps) {
    const int s = sweep.scheme == Scheme::BlueDetuned ? 0 : 1;
    if (idx_of_scheme[s] < 0) idx_of_scheme[s] = n_offsets++;
    for (const PowerPoint& p : sweep.points) {
      if (!p.fit.converged || !(p.n_cav > 0.0)) continue;
      const double go = out.gamma_opt_at(p.n_cav, sys);
      if (!(go > 0.0)) continue;
      const double w_rad = hz_to_rad(p.fit.width_hz);
      const double y = p.fit.area * w_rad / go;
      // propagated variance of y, including the (positive) area-width
      // fit covariance
      const double da = w_rad / go;                      // dy/dA
      const double dw = p.fit.area / go;                 // dy/dW
      const double sig_w = hz_to_rad(p.fit.width_err);
      const double var = da * da * p.fit.area_err * p.fit.area_err + dw * dw * sig_w * sig_w +
                         2.0 * da * dw * hz_to_rad(p.fit.area_width_cov);
      const double weight = var > 0.0 ? 1.0 / var : 1.0;
      rows.push_back({idx_of_scheme[s], p.n_cav, y, weight});
      out.normalized_areas.push_back({sweep.scheme, p.n_cav, y});
    }
  }

  const std::size_t n_params = static_cast<std::size_t>(n_offsets) + 1;
  double best_sse = std::numeric_limits<double>::infinity();
  double best_a = 1.0, best_c = 0.0, best_c_err = 0.0;
  if (rows.size() > n_params) {
    for (double a = 0.25; a <= 4.0 + 1e-9; a += 0.05) {
      // weighted normal equations for [offsets..., c]
      double ata[9] = {0};
      double aty[3] = {0};
      for (const TechRow& r : rows) {
        const double phi = std::pow(r.n_cav / out.tech_ref_photons, a) *
                           out.gamma_opt_at(r.n_cav, sys);
        double cols[3] = {0, 0, 0};
        cols[r.scheme_idx] = 1.0;
        cols[n_params - 1] = phi;
        for (std::size_t i = 0; i < n_params; ++i) {
          aty[i] += r.weight * cols[i] * r.y;
          for (std::size_t j = 0; j < n_params; ++j) {
            ata[i * n_params + j] += r.weight * cols[i] * cols[j];
          }
        }
      }
      double a_copy[9];
      double sol[3];
      std::copy(ata, ata + n_params * n_params, a_copy);
      std::copy(aty, aty + n_params, sol);
      if (!solve_small(a_copy, sol, n_params)) continue;
      double chi2 = 0.0;
      for (const TechRow& r : rows) {
        const double phi = std::pow(r.n_cav / out.tech_ref_photons, a) *
                           out.gamma_opt_at(r.n_cav, sys);
        double pred = sol[r.scheme_idx] + sol[n_params - 1] * phi;
        const double res = r.y - pred;
        chi2 += r.weight * res * res;
      }
      if (chi2 < best_sse) {
        best_sse = chi2;
        best_a = a;
        best_c = sol[n_params - 1];
        // covariance of c at fixed exponent, scaled by the reduced chi^2
        const double dof = static_cast<double>(rows.size() - n_params);
        double inv_col[3] = {0, 0, 0};
        inv_col[n_params - 1] = 1.0;
        double a_inv[9];
        std::copy(ata, ata + n_params * n_params, a_inv);
        if (solve_small(a_inv, inv_col, n_params) && dof > 0.0) {
          const double var = std::max(1.0, chi2 / dof) * inv_col[n_params - 1];
          best_c_err = var > 0.0 ? std::sqrt(var) : 0.0;
        }
      }
    }
  }
  out.tech_exponent = best_a;
  out.tech_coeff = best_c;
  out.tech_coeff_err = best_c_err;
  return out;
}

// ---------------------------------------------------------------------------
// Back-action correction and thermometry

double mode_temperature_from_n(double n, const SystemParams& sys) {
  if (!(n > 0.0)) throw DomainError("mode_temperature_from_n: n must be > 0");
  return k_hbar * sys.omega_m0 / (k_boltzmann * std::log1p(1.0 / n));
}

double correct_backaction(const FitResult& fit, const CalibrationResult& calib,
                          const PumpConfig& pump, const SystemParams& sys) {
  // The amplification gain is taken from the calibrated Gamma_m, not from the
  // per-window fitted width: width estimates carry damping noise and fit
  // scatter that the correction would otherwise amplify. Damping drift thus
  // remains an (acknowledged) error source of the corrected populations.
  const double go = calib.gamma_opt_at(pump.n_cav, sys);
  if (!(go > 0.0)) throw DomainError("correct_backaction: zero drive has no sideband signal");
  const double n_noise = calib.noise_photons_at(pump.n_cav);
  const double gamma_m = calib.gamma_m_est;

  if (pump.scheme == Scheme::BlueDetuned) {
    const double w = gamma_m - go;
    if (!(w > 0.0)) {
      throw DomainError("correct_backaction: calibrated Gamma_opt >= Gamma_m (blue)");
    }
    const double n_eff = fit.area / go - 1.0;
    return (n_eff * w - (n_noise + 1.0) * go) / gamma_m;
  }

  const double w = gamma_m + go;
  double n_red_noise = n_noise;
  if (calib.include_backaction_floor) {
    const double q = sys.kappa_tot / (4.0 * sys.omega_m0);
    n_red_noise += q * q;
  }
  const double n_eff = fit.area / go;
  return (n_eff * w - n_red_noise * go) / gamma_m;
}

std::vector<TimeSeriesRecord> build_records(const std::vector<SpectrumFrame>& averaged,
                                            const std::vector<FitResult>& fits,
                                            const CalibrationResult& calib,
                                            const PumpConfig& pump, const SystemParams& sys,
                                            std::size_t window_frames) {
  if (averaged.size() != fits.size()) throw DomainError("build_records: size mismatch");
  const double go = calib.gamma_opt_at(pump.n_cav, sys);
  std::vector<TimeSeriesRecord> records(averaged.size());
  for (std::size_t i = 0; i < averaged.size(); ++i) {
    TimeSeriesRecord& r = records[i];
    r.t = averaged[i].t;
    r.fit = fits[i];
    r.partial = i + 1 < window_frames;
    if (go > 0.0) {
      r.n_raw = fits[i].area / go - (pump.scheme == Scheme::BlueDetuned ? 1.0 : 0.0);
      r.n_corrected = correct_backaction(fits[i], calib, pump, sys);
    } else {
      r.n_raw = k_nan;
      r.n_corrected = k_nan;
    }
    r.t_mode = r.n_corrected > 0.0 ? mode_temperature_from_n(r.n_corrected, sys) : k_nan;
  }
  return records;
}

AsymmetryResult asymmetry_thermometry(const FitResult& stokes_blue,
                                      const FitResult& antistokes_red,
                                      const CalibrationResult& calib, double n_cav,
                                      const SystemParams& sys) {
  if (!stokes_blue.converged || !antistokes_red.converged) {
    throw DomainError("asymmetry_thermometry: both fits must have converged");
  }
  AsymmetryResult out;
  const double go = calib.gamma_opt_at(n_cav, sys);
  const double gm = calib.gamma_m_est;
  if (!(gm > go)) throw SelfOscillationError("asymmetry_thermometry: Gamma_opt >= Gamma_m");
  out.bound = (gm - go) / (gm + go);
  out.ratio = antistokes_red.area / stokes_blue.area;
  if (!(out.ratio > 0.0) || !(out.ratio < out.bound)) {
    throw DomainError("asymmetry_thermometry: ratio " + std::to_string(out.ratio) +
                      " outside (0, " + std::to_string(out.bound) + ")");
  }
  const double q = out.ratio / out.bound;
  const double n_noise = calib.noise_photons_at(n_cav);
  double n_red_noise = n_noise;
  if (calib.include_backaction_floor) {
    const double bf = sys.kappa_tot / (4.0 * sys.omega_m0);
    n_red_noise += bf * bf;
  }
  out.n_est = q / (1.0 - q) + (q * n_noise - n_red_noise) * go / ((1.0 - q) * gm);
  if (!(out.n_est > 0.0)) {
    out.ok = false;
    out.note = "corrected occupation non-positive; temperature undefined";
    out.temperature = k_nan;
    return out;
  }
  out.temperature = mode_temperature_from_n(out.n_est, sys);
  if (q > 0.999) {
    out.ok = false;
    out.note = "ratio at the high-temperature bound; temperature diverges";
    return out;
  }
  out.ok = true;
  return out;
}

// ---------------------------------------------------------------------------
// Series statistics

namespace {

// Expected biased, mean-removed autocovariance of a dt-sampled OU record of
// length n, per unit stationary variance. Exact for the AR(1) process the
// generator produces; the triangular bias and the x-bar removal terms both
// enter here, which is what keeps t_c estimable from records of a few t_c.
std::vector<double> ou_autocov_expectation(std::size_t n, std::size_t max_lag, double dt,
                                           double tc) {
  const double a = std::exp(-dt / tc);
  std::vector<double> prefix(n + 1, 0.0);  // prefix sums of s_i = sum_j a^|i-j|
  const double inv1ma = 1.0 / (1.0 - a);
  for (std::size_t i = 0; i < n; ++i) {
    const double s_i = 1.0 + (2.0 * a - std::pow(a, static_cast<double>(i + 1)) -
                              std::pow(a, static_cast<double>(n - i))) * inv1ma;
    prefix[i + 1] = prefix[i] + s_i;
  }
  const double nn = static_cast<double>(n);
  const double vbar = prefix[n] / (nn * nn);  // E[xbar^2] / sigma^2
  std::vector<double> m(max_lag);
  double a_k = 1.0;
  for (std::size_t k = 0; k < max_lag; ++k) {
    const double cross = (prefix[n - k] + prefix[n] - prefix[k]) / nn;
    m[k] = (static_cast<double>(n - k) * (a_k + vbar) - cross) / nn;
    a_k *= a;
  }
  return m;
}

OuFit fit_ou_from_autocov(const std::vector<double>& r, std::size_t n, double dt,
                          std::size_t window_lags) {
  OuFit out;
  const std::size_t max_lag = std::min(r.size(), n / 2);
  const double duration = static_cast<double>(n) * dt;

  // boxcar autocorrelation of white estimator noise, up to scale
  std::vector<double> tri(max_lag, 0.0);
  if (window_lags > 1) {
    for (std::size_t k = 0; k < std::min(max_lag, window_lags); ++k) {
      tri[k] = 1.0 - static_cast<double>(k) / static_cast<double>(window_lags);
    }
  }

  double best_sse = std::numeric_limits<double>::infinity();
  double best_tc = 0.0, best_s2 = 0.0;
  const double tc_lo = 2.0 * dt;
  const double tc_hi = 10.0 * duration;
  const int n_grid = 200;
  for (int g = 0; g <= n_grid; ++g) {
    const double tc = tc_lo * std::pow(tc_hi / tc_lo, static_cast<double>(g) / n_grid);
    const std::vector<double> b = ou_autocov_expectation(n, max_lag, dt, tc);

    // least squares in (OU variance, white-noise variance); the second
    // component drops out when no window is declared or its weight turns
    // negative
    double s2 = 0.0, w2 = 0.0;
    if (window_lags > 1) {
      double bb = 0.0, bt = 0.0, tt = 0.0, br = 0.0, tr_ = 0.0;
      for (std::size_t k = 0; k < max_lag; ++k) {
        bb += b[k] * b[k];
        bt += b[k] * tri[k];
        tt += tri[k] * tri[k];
        br += b[k] * r[k];
        tr_ += tri[k] * r[k];
      }
      const double det = bb * tt - bt * bt;
      if (det > 0.0) {
        s2 = (tt * br - bt * tr_) / det;
        w2 = (bb * tr_ - bt * br) / det;
      }
      if (!(w2 > 0.0) || !(s2 > 0.0)) w2 = 0.0;  // fall back to the single basis
    }
    if (w2 == 0.0) {
      double bb = 0.0, br = 0.0;
      for (std::size_t k = 0; k < max_lag; ++k) {
        bb += b[k] * b[k];
        br += b[k] * r[k];
      }
      if (!(bb > 0.0)) continue;
      s2 = br / bb;
    }
    if (!(s2 > 0.0)) continue;
    double sse = 0.0;
    for (std::size_t k = 0; k < max_lag; ++k) {
      const double res = r[k] - s2 * b[k] - w2 * tri[k];
      sse += res * res;
    }
    if (sse < best_sse) {
      best_sse = sse;
      best_tc = tc;
      best_s2 = s2;
    }
  }
  if (best_tc > 0.0) {
    out.sigma = std::sqrt(best_s2);
    out.t_c = best_tc;
    // an estimate pinned at the search edges is not trustworthy
    out.ok = best_tc > tc_lo * 1.01 && best_tc < tc_hi * 0.99;
  }
  return out;
}

}  // namespace

OuFit fit_ou_autocovariance(const std::vector<double>& series, double dt,
                            std::size_t window_lags) {
  const std::size_t n = series.size();
  if (n < 64) return OuFit{};
  const std::vector<double> r = autocovariance_omp(series, n / 2, true);
  return fit_ou_from_autocov(r, n, dt, window_lags);
}

SpectrumEstimate fluctuation_spectrum(const std::vector<double>& series, double dt,
                                      bool detrend, std::size_t window_lags) {
  if (series.size() < 1000) {
    throw DomainError("fluctuation_spectrum: need at least 1000 points");
  }
  if (!(dt > 0.0)) throw DomainError("fluctuation_spectrum: dt must be > 0");
  SpectrumEstimate out;
  const std::size_t n = series.size();

  // Full-lag transform of the biased autocovariance; on the grid j/(N dt)
  // this reproduces the periodogram identically.
  const std::vector<double> r = autocovariance_omp(series, n, detrend);
  out.freq_hz.resize(n / 2);
  for (std::size_t j = 1; j <= n / 2; ++j) {
    out.freq_hz[j - 1] = static_cast<double>(j) / (static_cast<double>(n) * dt);
  }
  out.psd = wk_psd_omp(r, dt, out.freq_hz);
  out.ou = fit_ou_from_autocov(r, n, dt, window_lags);
  return out;
}

Histogram histogram_stats(const std::vector<double>& series) {
  if (series.size() < 100) throw DomainError("histogram_stats: need at least 100 points");
  Histogram out;
  std::vector<double> sorted = series;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double q1 = sorted[n / 4];
  const double q3 = sorted[(3 * n) / 4];
  const double iqr = q3 - q1;
  const double lo = sorted.front();
  const double hi = sorted.back();

  if (!(hi > lo)) {
    out.degenerate = true;
    out.edges = {lo - 0.5, lo + 0.5};
    out.counts = {static_cast<double>(n)};
    out.fit_amplitude = static_cast<double>(n);
    out.fit_mean = lo;
    out.fit_sigma = 0.0;
    out.fit_ok = false;
    return out;
  }

  double h = 2.0 * iqr / std::cbrt(static_cast<double>(n));
  if (!(h > 0.0)) h = (hi - lo) / 16.0;
  std::size_t n_bins = static_cast<std::size_t>(std::ceil((hi - lo) / h));
  n_bins = std::clamp<std::size_t>(n_bins, 4, 256);

  out.edges.resize(n_bins + 1);
  const double width = (hi - lo) / static_cast<double>(n_bins);
  for (std::size_t i = 0; i <= n_bins; ++i) out.edges[i] = lo + width * static_cast<double>(i);
  out.counts.assign(n_bins, 0.0);
  for (double x : series) {
    std::size_t b = static_cast<std::size_t>((x - lo) / width);
    if (b >= n_bins) b = n_bins - 1;
    out.counts[b] += 1.0;
  }

  // moments as the starting point for the least-squares Gaussian
  const double m = mean_of(series);
  const double s0 = std::sqrt(variance_of(series));
  double amp = 0.0;
  for (double c : out.counts) amp = std::max(amp, c);
  double p[3] = {amp, m, s0};

  // small Levenberg-Marquardt on (amplitude, mean, sigma)
  std::vector<double> centers(n_bins);
  for (std::size_t i = 0; i < n_bins; ++i) centers[i] = 0.5 * (out.edges[i] + out.edges[i + 1]);
  auto chi2 = [&](const double* q) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n_bins; ++i) {
      const double z = (centers[i] - q[1]) / q[2];
      const double res = out.counts[i] - q[0] * std::exp(-0.5 * z * z);
      acc += res * res;
    }
    return acc;
  };
  double lambda = 1e-3;
  double cur = chi2(p);
  bool ok = true;
  for (int iter = 0; iter < 100; ++iter) {
    double jtj[9] = {0};
    double jtr[3] = {0};
    for (std::size_t i = 0; i < n_bins; ++i) {
      const double z = (centers[i] - p[1]) / p[2];
      const double g = std::exp(-0.5 * z * z);
      const double model = p[0] * g;
      const double res = out.counts[i] - model;
      const double j0 = g;
      const double j1 = model * z / p[2];
      const double j2 = model * z * z / p[2];
      const double jr[3] = {j0, j1, j2};
      for (int a = 0; a < 3; ++a) {
        jtr[a] += jr[a] * res;
        for (int b = 0; b < 3; ++b) jtj[a * 3 + b] += jr[a] * jr[b];
      }
    }
    double damped[9];
    double delta[3] = {jtr[0], jtr[1], jtr[2]};
    std::copy(jtj, jtj + 9, damped);
    for (int d = 0; d < 3; ++d) damped[d * 3 + d] *= 1.0 + lambda;
    if (!solve_small(damped, delta, 3)) {
      ok = false;
      break;
    }
    double trial[3] = {p[0] + delta[0], p[1] + delta[1], std::abs(p[2] + delta[2])};
    if (!(trial[2] > 0.0)) trial[2] = p[2];
    const double c2 = chi2(trial);
    if (c2 < cur) {
      const double rel = std::max({std::abs(delta[0]) / (std::abs(p[0]) + 1.0),
                                   std::abs(delta[1]) / (std::abs(p[1]) + p[2]),
                                   std::abs(delta[2]) / p[2]});
      std::copy(trial, trial + 3, p);
      cur = c2;
      lambda = std::max(lambda / 3.0, 1e-12);
      if (rel < 1e-9) break;
    } else {
      lambda *= 8.0;
      if (lambda > 1e10) break;
    }
  }
  out.fit_amplitude = p[0];
  out.fit_mean = p[1];
  out.fit_sigma = std::abs(p[2]);
  out.fit_ok = ok && std::isfinite(p[0]) && std::isfinite(p[1]) && std::isfinite(p[2]);
  return out;
}

DeviationCurves deviation_curves(const std::vector<double>& series, double dt,
                                 const std::vector<double>& acquisitions_s,
                                 const std::vector<double>& windows_s) {
  if (series.empty()) throw DomainError("deviation_curves: empty series");
  if (!(dt > 0.0)) throw DomainError("deviation_curves: dt must be > 0");
  DeviationCurves out;
  out.acquisitions_s = acquisitions_s;
  out.windows_s = windows_s;
  const std::size_t n = series.size();

  out.sigma.assign(acquisitions_s.size(), std::vector<double>(windows_s.size(), k_nan));
  for (std::size_t j = 0; j < windows_s.size(); ++j) {
    const std::size_t wf =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(windows_s[j] / dt)));
    if (wf > n) continue;
    const std::vector<double> smoothed = boxcar_series(series, wf);
    const std::size_t start = wf - 1;  // drop not-yet-full boxcar outputs
    const std::size_t avail = n - start;
    for (std::size_t i = 0; i < acquisitions_s.size(); ++i) {
      const std::size_t seg =
          std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(acquisitions_s[i] / dt)));
      const std::size_t n_segs = avail / seg;
      if (n_segs == 0) continue;  // record too short; entry stays flagged NaN
      double var_acc = 0.0;
      for (std::size_t s = 0; s < n_segs; ++s) {
        const std::size_t beg = start + s * seg;
        double mean = 0.0;
        for (std::size_t k = 0; k < seg; ++k) mean += smoothed[beg + k];
        mean /= static_cast<double>(seg);
        double var = 0.0;
        for (std::size_t k = 0; k < seg; ++k) {
          const double d = smoothed[beg + k] - mean;
          var += d * d;
        }
        var_acc += var / static_cast<double>(seg);
      }
      out.sigma[i][j] = std::sqrt(var_acc / static_cast<double>(n_segs));
    }
  }

  // zero-window linear extrapolation per acquisition
  out.sigma_zero_window.assign(acquisitions_s.size(), k_nan);
  for (std::size_t i = 0; i < acquisitions_s.size(); ++i) {
    std::vector<double> x, y, w;
    for (std::size_t j = 0; j < windows_s.size(); ++j) {
      if (std::isfinite(out.sigma[i][j])) {
        x.push_back(windows_s[j]);
        y.push_back(out.sigma[i][j]);
        w.push_back(1.0);
      }
    }
    if (x.size() >= 2) {
      const LineFit line = weighted_line_fit(x, y, w);
      if (line.ok) out.sigma_zero_window[i] = line.intercept;
    } else if (x.size() == 1) {
      out.sigma_zero_window[i] = y[0];
    }
  }

  // plateau detection on the acquisition axis at the smallest window
  if (!acquisitions_s.empty() && !windows_s.empty()) {
    std::size_t j0 = 0;
    for (std::size_t j = 1; j < windows_s.size(); ++j) {
      if (windows_s[j] < windows_s[j0]) j0 = j;
    }
    std::size_t i_max = acquisitions_s.size();
    for (std::size_t i = acquisitions_s.size(); i-- > 0;) {
      if (std::isfinite(out.sigma[i][j0])) {
        i_max = i;
        break;
      }
    }
    if (i_max != acquisitions_s.size()) {
      const double l_half = acquisitions_s[i_max] / 2.0;
      std::size_t i_half = i_max;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < i_max; ++i) {
        if (!std::isfinite(out.sigma[i][j0])) continue;
        const double d = std::abs(std::log(acquisitions_s[i] / l_half));
        if (d < best) {
          best = d;
          i_half = i;
        }
      }
      if (i_half != i_max && out.sigma[i_half][j0] > 0.0) {
        out.plateau_ratio = out.sigma[i_max][j0] / out.sigma[i_half][j0];
        out.plateau = out.plateau_ratio < 1.15;
      }
    }
  }
  return out;
}

double allan_deviation(const std::vector<double>& series, double dt, double tau) {
  if (!(dt > 0.0)) throw DomainError("allan_deviation: dt must be > 0");
  const std::size_t m = static_cast<std::size_t>(std::llround(tau / dt));
  if (m < 2) throw DomainError("allan_deviation: tau must be >= 2 sample intervals");
  const std::size_t n_blocks = series.size() / m;
  if (n_blocks < 2) throw DomainError("allan_deviation: insufficient samples for tau");
  std::vector<double> means(n_blocks);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < m; ++k) acc += series[b * m + k];
    means[b] = acc / static_cast<double>(m);
  }
  double avar = 0.0;
  for (std::size_t b = 0; b + 1 < n_blocks; ++b) {
    const double d = means[b + 1] - means[b];
    avar += d * d;
  }
  avar /= 2.0 * static_cast<double>(n_blocks - 1);
  return std::sqrt(avar);
}

double windowed_std(const std::vector<double>& series, double dt, double span_s) {
  const std::size_t seg =
      std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(span_s / dt)));
  const std::size_t n_segs = series.size() / seg;
  if (n_segs == 0) throw DomainError("windowed_std: record shorter than the span");
  double acc = 0.0;
  for (std::size_t s = 0; s < n_segs; ++s) {
    std::vector<double> chunk(series.begin() + s * seg, series.begin() + (s + 1) * seg);
    acc += variance_of(chunk);
  }
  return std::sqrt(acc / static_cast<double>(n_segs));
}

SqrtLawFit sigma_vs_n(const std::vector<double>& n_values,
                      const std::vector<double>& sigma_values) {
  if (n_values.size() != sigma_values.size() || n_values.size() < 3) {
    throw DomainError("sigma_vs_n: need at least 3 (n, sigma) pairs");
  }
  SqrtLawFit out;
  std::vector<double> logc;
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (!(n_values[i] > 0.0) || !(sigma_values[i] > 0.0)) continue;
    logc.push_back(std::log(sigma_values[i]) - 0.5 * std::log(n_values[i]));
  }
  if (logc.size() < 3) throw DomainError("sigma_vs_n: need at least 3 positive pairs");
  const double m = mean_of(logc);
  out.prefactor = std::exp(m);
  out.log_err = std::sqrt(variance_of(logc) / static_cast<double>(logc.size()));
  out.n_points = logc.size();
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline driver

PipelineResult analyze_frames(const std::vector<SpectrumFrame>& frames,
                              const CalibrationResult& calib, const PumpConfig& pump,
                              const SystemParams& sys, const AnalysisConfig& cfg) {
  if (frames.size() < 2) throw DomainError("analyze_frames: need at least two frames");
  PipelineResult out;
  const double dt = frame_cadence(frames);
  const std::size_t wf =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.window_s / dt)));

  const std::vector<SpectrumFrame> averaged = sliding_average(frames, cfg.window_s);
  const std::vector<FitResult> fits = batch_fit(averaged);
  out.records = build_records(averaged, fits, calib, pump, sys, wf);

  std::vector<double> series;
  series.reserve(out.records.size());
  std::size_t unconverged = 0;
  for (const TimeSeriesRecord& r : out.records) {
    if (cfg.drop_partial && r.partial) continue;
    if (!r.fit.converged) {
      ++unconverged;
      continue;
    }
    series.push_back(r.n_corrected);
  }
  if (unconverged > 0) {
    out.warnings.push_back(std::to_string(unconverged) + " window fits did not converge");
  }
  if (series.empty()) {
    out.warnings.push_back("no usable windows; statistics skipped");
    return out;
  }

  out.mean_n = mean_of(series);
  out.sigma_ph = std::sqrt(variance_of(series));
  const double used = static_cast<double>(series.size()) * dt;
  out.n_eff_samples = std::max(1.0, used / cfg.t_c_for_errors);
  out.se_mean = out.sigma_ph / std::sqrt(out.n_eff_samples);

  if (series.size() >= 1000) {
    out.spectrum = fluctuation_spectrum(series, dt, cfg.detrend, wf);
  } else {
    out.warnings.push_back("series too short for a fluctuation spectrum (< 1000 points)");
  }
  if (series.size() >= 100) {
    out.histogram = histogram_stats(series);
  } else {
    out.warnings.push_back("series too short for a histogram (< 100 points)");
  }

  std::vector<double> acqs = cfg.acquisitions_s;
  if (acqs.empty()) {
    // longest acquisition that still fits after the widest deviation window
    double max_wf = 1.0;
    for (double w : cfg.deviation_windows_s) max_wf = std::max(max_wf, std::round(w / dt));
    const double usable = (static_cast<double>(series.size()) - max_wf + 1.0) * dt;
    for (double a = std::max(20.0 * dt, usable / 64.0); a < usable * 0.999; a *= 2.0) {
      acqs.push_back(a);
    }
    acqs.push_back(usable);
  }
  out.deviations = deviation_curves(series, dt, acqs, cfg.deviation_windows_s);
  return out;
}

}  // namespace sbtherm
