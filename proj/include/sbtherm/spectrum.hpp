#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sbtherm/bath.hpp"
#include "sbtherm/system.hpp"

namespace sbtherm {

// Forward measurement model: timestamped demodulated sideband spectra with
// averaged-periodogram estimator noise.

// Uniform frequency grid, in Hz offset from the nominal sideband position.
struct GridSpec {
  double f_start_hz = 0.0;
  double f_step_hz = 0.0;
  std::size_t n_bins = 0;

  void validate() const;
  double freq(std::size_t i) const { return f_start_hz + f_step_hz * static_cast<double>(i); }
  double span_hz() const { return f_step_hz * static_cast<double>(n_bins - 1); }
  std::vector<double> freqs() const;
};

// 512 bins spanning +/- 20 Gamma_m/2pi around the nominal peak.
GridSpec default_grid(const SystemParams& sys);
GridSpec centered_grid(double span_hz, std::size_t n_bins);

struct FrameMeta {
  Scheme scheme = Scheme::BlueDetuned;
  double n_cav = 0.0;
  double t_cryo = 0.0;
};

// One demodulated power spectrum. psd is photon flux density (photons/s/Hz).
struct SpectrumFrame {
  double t = 0.0;
  GridSpec grid;
  double n_averages = 1.0;
  std::vector<double> psd;
  FrameMeta meta;
};

// Piecewise-linear cryostat temperature profile. A single point means
// constant temperature; otherwise the first point must sit at t = 0 and the
// last at t >= duration (gaps are a configuration error).
struct TemperatureSchedule {
  std::vector<std::pair<double, double>> points;  // (t, T)
  double at(double t) const;
  void validate(double duration) const;
};

struct Scenario {
  double duration = 0.0;
  double frame_dt = 1.0;
  TemperatureSchedule schedule;
  PumpConfig pump;
  SystemParams sys;
  BathParams bath;
  NoiseBudget noise;
  GridSpec grid;
  std::uint32_t n_averages = 10;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t n_frames() const;
};

// Lorentzian parameters of one frame, derived from the instantaneous bath
// state and the closed-form sideband expressions.
struct FrameModel {
  double area = 0.0;        // photons/s
  double width_hz = 0.0;    // FWHM
  double center_hz = 0.0;   // offset from the nominal sideband position
  double background = 0.0;  // photons/s/Hz
};

FrameModel frame_model(const BathState& state, const PumpConfig& pump, const SystemParams& sys,
                       const NoiseBudget& noise);

// Per-bin mean PSD: background plus the Lorentzian of the model.
std::vector<double> frame_expectation(const FrameModel& model, const GridSpec& grid);

// Draw one frame: each bin is Gamma(shape = n_averages, mean = bin mean),
// the averaged-periodogram statistics of Gaussian noise. Bins independent.
SpectrumFrame sample_frame(const std::vector<double>& mean_psd, const GridSpec& grid, double t,
                           std::uint32_t n_averages, std::uint64_t seed);

struct ScenarioResult {
  std::vector<SpectrumFrame> frames;
  std::vector<std::string> warnings;
};

// Evolve the bath at the frame cadence and emit one sampled frame per step.
// Deterministic given the scenario seed, independent of thread count.
ScenarioResult run_scenario(const Scenario& sc);

// Streaming variant; frames are produced in time order.
void run_scenario_stream(const Scenario& sc, const std::function<void(SpectrumFrame&&)>& sink,
                         std::vector<std::string>* warnings);

}  // namespace sbtherm
