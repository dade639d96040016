#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace sbtherm {

struct FrameModel;
struct GridSpec;
struct SpectrumFrame;

// Data-parallel inner loops of the simulator and the analysis pipeline.
// Every *_omp kernel parallelises over independent outputs while keeping the
// per-output arithmetic order identical to the *_serial reference, so results
// are bit-identical for any thread count. The serial versions stay as the
// test oracle and as the baseline for the benchmark tool.

// Mean PSD of one frame on the grid.
void expected_psd_serial(const FrameModel& model, const GridSpec& grid, double* out);

// Synthesize sampled frames from per-frame models (expectation + Gamma noise).
void synth_frames_serial(const FrameModel* models, const double* times,
                         const std::uint64_t* seeds, std::size_t n, const GridSpec& grid,
                         std::uint32_t n_averages, SpectrumFrame* out);
void synth_frames_omp(const FrameModel* models, const double* times, const std::uint64_t* seeds,
                      std::size_t n, const GridSpec& grid, std::uint32_t n_averages,
                      SpectrumFrame* out);

// Gamma sampling of one frame's bins (shape n_averages, per-bin mean).
void sample_psd_bins(const double* mean, std::size_t n_bins, std::uint32_t n_averages,
                     std::uint64_t seed, double* out);

// Trailing boxcar average over frames, emitted at every frame time; the first
// window_frames-1 outputs average the partial history. n_averages accumulates.
std::vector<SpectrumFrame> boxcar_frames_serial(const std::vector<SpectrumFrame>& frames,
                                                std::size_t window_frames);
std::vector<SpectrumFrame> boxcar_frames_omp(const std::vector<SpectrumFrame>& frames,
                                             std::size_t window_frames);

// Trailing boxcar on a scalar series (same window semantics).
std::vector<double> boxcar_series(const std::vector<double>& x, std::size_t window);

// Mean-removed biased autocovariance, r_k = (1/N) sum_n (x_n - xbar)(x_{n+k} - xbar).
std::vector<double> autocovariance_serial(const std::vector<double>& x, std::size_t max_lag,
                                          bool remove_mean);
std::vector<double> autocovariance_omp(const std::vector<double>& x, std::size_t max_lag,
                                       bool remove_mean);

// One-sided PSD from an autocovariance sequence:
// S(f) = 2 dt (r_0 + 2 sum_{k>=1} r_k cos(2 pi f k dt)).
std::vector<double> wk_psd_serial(const std::vector<double>& autocov, double dt,
                                  const std::vector<double>& freqs_hz);
std::vector<double> wk_psd_omp(const std::vector<double>& autocov, double dt,
                               const std::vector<double>& freqs_hz);

}  // namespace sbtherm
