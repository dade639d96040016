#include "sbtherm/kernels.hpp"

#include <cmath>

#include "sbtherm/constants.hpp"
#include "sbtherm/errors.hpp"
#include "sbtherm/rng.hpp"
#include "sbtherm/spectrum.hpp"

namespace sbtherm {

void expected_psd_serial(const FrameModel& model, const GridSpec& grid, double* out) {
  const double amp = model.width_hz > 0.0 ? 2.0 * model.area / (k_pi * model.width_hz) : 0.0;
  const double inv_hw = model.width_hz > 0.0 ? 2.0 / model.width_hz : 0.0;
  for (std::size_t i = 0; i < grid.n_bins; ++i) {
    const double u = (grid.freq(i) - model.center_hz) * inv_hw;
    out[i] = model.background + amp / (1.0 + u * u);
  }
}

void sample_psd_bins(const double* mean, std::size_t n_bins, std::uint32_t n_averages,
                     std::uint64_t seed, double* out) {
  RngStream rng(seed);
  const double shape = static_cast<double>(n_averages);
  for (std::size_t i = 0; i < n_bins; ++i) {
    out[i] = mean[i] > 0.0 ? rng.gamma(shape, mean[i] / shape) : 0.0;
  }
}

static void synth_one(const FrameModel& model, double t, std::uint64_t seed,
                      const GridSpec& grid, std::uint32_t n_averages, SpectrumFrame* out,
                      std::vector<double>& mean_scratch) {
  mean_scratch.resize(grid.n_bins);
  expected_psd_serial(model, grid, mean_scratch.data());
  out->t = t;
  out->grid = grid;
  out->n_averages = n_averages;
  out->psd.resize(grid.n_bins);
  sample_psd_bins(mean_scratch.data(), grid.n_bins, n_averages, seed, out->psd.data());
}

void synth_frames_serial(const FrameModel* models, const double* times,
                         const std::uint64_t* seeds, std::size_t n, const GridSpec& grid,
                         std::uint32_t n_averages, SpectrumFrame* out) {
  std::vector<double> scratch;
  for (std::size_t i = 0; i < n; ++i) {
    synth_one(models[i], times[i], seeds[i], grid, n_averages, &out[i], scratch);
  }
}

void synth_frames_omp(const FrameModel* models, const double* times, const std::uint64_t* seeds,
                      std::size_t n, const GridSpec& grid, std::uint32_t n_averages,
                      SpectrumFrame* out) {
#pragma omp parallel
  {
    std::vector<double> scratch;
#pragma omp for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      synth_one(models[i], times[i], seeds[i], grid, n_averages, &out[i], scratch);
    }
  }
}

static void boxcar_one(const std::vector<SpectrumFrame>& frames, std::size_t window_frames,
                       std::size_t i, SpectrumFrame* out) {
  const std::size_t begin = i + 1 >= window_frames ? i + 1 - window_frames : 0;
  const std::size_t count = i - begin + 1;
  const std::size_t n_bins = frames[i].grid.n_bins;

  out->t = frames[i].t;
  out->grid = frames[i].grid;
  out->meta = frames[i].meta;
  out->psd.assign(n_bins, 0.0);
  double n_av = 0.0;
  for (std::size_t k = begin; k <= i; ++k) {
    const double* src = frames[k].psd.data();
    double* dst = out->psd.data();
    for (std::size_t b = 0; b < n_bins; ++b) dst[b] += src[b];
    n_av += frames[k].n_averages;
  }
  const double inv = 1.0 / static_cast<double>(count);
  for (double& v : out->psd) v *= inv;
  out->n_averages = n_av;
}

std::vector<SpectrumFrame> boxcar_frames_serial(const std::vector<SpectrumFrame>& frames,
                                                std::size_t window_frames) {
  if (window_frames == 0) throw DomainError("boxcar: window must be >= 1 frame");
  std::vector<SpectrumFrame> out(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    boxcar_one(frames, window_frames, i, &out[i]);
  }
  return out;
}

std::vector<SpectrumFrame> boxcar_frames_omp(const std::vector<SpectrumFrame>& frames,
                                             std::size_t window_frames) {
  if (window_frames == 0) throw DomainError("boxcar: window must be >= 1 frame");
  std::vector<SpectrumFrame> out(frames.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(frames.size()); ++i) {
    boxcar_one(frames, window_frames, static_cast<std::size_t>(i), &out[i]);
  }
  return out;
}

std::vector<double> boxcar_series(const std::vector<double>& x, std::size_t window) {
  if (window == 0) throw DomainError("boxcar: window must be >= 1 sample");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t begin = i + 1 >= window ? i + 1 - window : 0;
    double acc = 0.0;
    for (std::size_t k = begin; k <= i; ++k) acc += x[k];
    out[i] = acc / static_cast<double>(i - begin + 1);
  }
  return out;
}

static double lag_sum(const std::vector<double>& x, double mean, std::size_t k) {
  const std::size_t n = x.size();
  double acc = 0.0;
  for (std::size_t i = 0; i + k < n; ++i) acc += (x[i] - mean) * (x[i + k] - mean);
  return acc / static_cast<double>(n);
}

std::vector<double> autocovariance_serial(const std::vector<double>& x, std::size_t max_lag,
                                          bool remove_mean) {
  if (max_lag > x.size()) throw DomainError("autocovariance: max_lag exceeds series length");
  double mean = 0.0;
  if (remove_mean) {
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
  }
  std::vector<double> r(max_lag);
  for (std::size_t k = 0; k < max_lag; ++k) r[k] = lag_sum(x, mean, k);
  return r;
}

std::vector<double> autocovariance_omp(const std::vector<double>& x, std::size_t max_lag,
                                       bool remove_mean) {
  if (max_lag > x.size()) throw DomainError("autocovariance: max_lag exceeds series length");
  double mean = 0.0;
  if (remove_mean) {
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
  }
  std::vector<double> r(max_lag);
#pragma omp parallel for schedule(static)
  for (long long k = 0; k < static_cast<long long>(max_lag); ++k) {
    r[k] = lag_sum(x, mean, static_cast<std::size_t>(k));
  }
  return r;
}

static double wk_one(const std::vector<double>& r, double dt, double f_hz) {
  // cosine accumulation by complex rotation; drift ~ K epsilon, negligible here
  const double w = k_two_pi * f_hz * dt;
  const double cd = std::cos(w);
  const double sd = std::sin(w);
  double c = 1.0, s = 0.0;
  double acc = r[0];
  for (std::size_t k = 1; k < r.size(); ++k) {
    const double c_next = c * cd - s * sd;
    s = s * cd + c * sd;
    c = c_next;
    acc += 2.0 * r[k] * c;
  }
  return 2.0 * dt * acc;
}

std::vector<double> wk_psd_serial(const std::vector<double>& autocov, double dt,
                                  const std::vector<double>& freqs_hz) {
  std::vector<double> s(freqs_hz.size());
  for (std::size_t j = 0; j < freqs_hz.size(); ++j) s[j] = wk_one(autocov, dt, freqs_hz[j]);
  return s;
}

std::vector<double> wk_psd_omp(const std::vector<double>& autocov, double dt,
                               const std::vector<double>& freqs_hz) {
  std::vector<double> s(freqs_hz.size());
#pragma omp parallel for schedule(static)
  for (long long j = 0; j < static_cast<long long>(freqs_hz.size()); ++j) {
    s[j] = wk_one(autocov, dt, freqs_hz[j]);
  }
  return s;
}

}  // namespace sbtherm
