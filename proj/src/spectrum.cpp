#include "sbtherm/spectrum.hpp"

#include <cmath>

#include "sbtherm/constants.hpp"
#include "sbtherm/errors.hpp"
#include "sbtherm/kernels.hpp"
#include "sbtherm/optomech.hpp"

namespace sbtherm {

void GridSpec::validate() const {
  if (n_bins < 64) throw DomainError("GridSpec: need at least 64 bins");
  if (!(f_step_hz > 0.0)) throw DomainError("GridSpec: f_step must be > 0");
}

std::vector<double> GridSpec::freqs() const {
  std::vector<double> f(n_bins);
  for (std::size_t i = 0; i < n_bins; ++i) f[i] = freq(i);
  return f;
}

GridSpec centered_grid(double span_hz, std::size_t n_bins) {
  GridSpec g;
  g.n_bins = n_bins;
  g.f_step_hz = span_hz / static_cast<double>(n_bins - 1);
  g.f_start_hz = -0.5 * span_hz;
  return g;
}

GridSpec default_grid(const SystemParams& sys) {
  return centered_grid(40.0 * rad_to_hz(sys.gamma_m_floor), 512);
}

double TemperatureSchedule::at(double t) const {
  if (points.empty()) throw ConfigError("temperature schedule is empty");
  if (points.size() == 1) return points.front().second;
  if (t <= points.front().first) return points.front().second;
  if (t >= points.back().first) return points.back().second;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (t <= points[i].first) {
      const auto& [t0, v0] = points[i - 1];
      const auto& [t1, v1] = points[i];
      const double w = (t - t0) / (t1 - t0);
      return v0 + w * (v1 - v0);
    }
  }
  return points.back().second;
}

void TemperatureSchedule::validate(double duration) const {
  if (points.empty()) throw ConfigError("temperature schedule is empty");
  for (const auto& [t, temp] : points) {
    (void)t;
    if (!(temp > 0.0)) throw ConfigError("temperature schedule: T must be > 0");
  }
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].first > points[i - 1].first)) {
      throw ConfigError("temperature schedule: times must be strictly increasing");
    }
  }
  if (points.size() > 1) {
    if (points.front().first > 0.0 || points.back().first < duration) {
      throw ConfigError("temperature schedule does not cover [0, duration]");
    }
  }
}

void Scenario::validate() const {
  sys.validate();
  bath.validate();
  noise.validate();
  grid.validate();
  if (!(frame_dt > 0.0)) throw ConfigError("scenario: frame_dt must be > 0");
  if (!(duration >= frame_dt)) throw ConfigError("scenario: duration must be >= frame_dt");
  if (n_averages < 1) throw ConfigError("scenario: n_averages must be >= 1");
  schedule.validate(duration);
}

std::size_t Scenario::n_frames() const {
  return static_cast<std::size_t>(std::llround(duration / frame_dt));
}

FrameModel frame_model(const BathState& state, const PumpConfig& pump, const SystemParams& sys,
                       const NoiseBudget& noise) {
  FrameModel m;
  m.background = noise.amplifier_background;
  const double go = gamma_opt(pump.n_cav, sys);
  const double n_eff =
      effective_population(state.n_inst, noise, pump, state.gamma_m_inst, go, sys);
  const SidebandShape shape = sideband_area_width(pump, n_eff, state.gamma_m_inst, go);
  m.area = shape.area;
  m.width_hz = rad_to_hz(shape.width);
  m.center_hz = rad_to_hz(state.omega_m_inst - sys.omega_m0 + optical_spring_shift(pump, sys));
  return m;
}

std::vector<double> frame_expectation(const FrameModel& model, const GridSpec& grid) {
  std::vector<double> mean(grid.n_bins);
  expected_psd_serial(model, grid, mean.data());
  return mean;
}

SpectrumFrame sample_frame(const std::vector<double>& mean_psd, const GridSpec& grid, double t,
                           std::uint32_t n_averages, std::uint64_t seed) {
  if (n_averages < 1) throw DomainError("sample_frame: n_averages must be >= 1");
  SpectrumFrame frame;
  frame.t = t;
  frame.grid = grid;
  frame.n_averages = n_averages;
  frame.psd.resize(mean_psd.size());
  sample_psd_bins(mean_psd.data(), mean_psd.size(), n_averages, seed, frame.psd.data());
  return frame;
}

void run_scenario_stream(const Scenario& sc, const std::function<void(SpectrumFrame&&)>& sink,
                         std::vector<std::string>* warnings) {
  sc.validate();
  std::vector<std::string> warn = sc.sys.warnings();

  const std::size_t n_frames = sc.n_frames();
  BathRng rng(sc.seed);
  BathState state = initial_bath_state(sc.schedule.at(0.0), sc.sys, sc.bath, rng);

  bool drift_warned = false;
  const double drift_limit = 0.25 * sc.grid.span_hz();

  // Bath evolution is sequential; expectation and bin sampling are the
  // data-parallel part and run chunk by chunk.
  const std::size_t chunk = 2048;
  std::vector<FrameModel> models;
  std::vector<double> times;
  std::vector<std::uint64_t> seeds;
  models.reserve(chunk);
  times.reserve(chunk);
  seeds.reserve(chunk);

  std::size_t produced = 0;
  while (produced < n_frames) {
    models.clear();
    times.clear();
    seeds.clear();
    const std::size_t batch = std::min(chunk, n_frames - produced);
    for (std::size_t i = 0; i < batch; ++i) {
      const std::size_t k = produced + i + 1;
      const double t = static_cast<double>(k) * sc.frame_dt;
      state = evolve_bath(sc.schedule.at(t), sc.frame_dt, state, sc.sys, sc.bath, rng);
      const FrameModel m = frame_model(state, sc.pump, sc.sys, sc.noise);
      if (!drift_warned && std::abs(m.center_hz) > drift_limit) {
        warn.push_back("sideband center drifted beyond 25% of the grid span");
        drift_warned = true;
      }
      models.push_back(m);
      times.push_back(t);
      seeds.push_back(derive_seed(sc.seed, 0x100000000ull + k));
    }

    std::vector<SpectrumFrame> frames(batch);
    synth_frames_omp(models.data(), times.data(), seeds.data(), batch, sc.grid, sc.n_averages,
                     frames.data());
    for (std::size_t i = 0; i < batch; ++i) {
      frames[i].meta.scheme = sc.pump.scheme;
      frames[i].meta.n_cav = sc.pump.n_cav;
      frames[i].meta.t_cryo = sc.schedule.at(frames[i].t);
      sink(std::move(frames[i]));
    }
    produced += batch;
  }
  if (warnings) *warnings = std::move(warn);
}

ScenarioResult run_scenario(const Scenario& sc) {
  ScenarioResult out;
  out.frames.reserve(sc.n_frames());
  run_scenario_stream(
      sc, [&out](SpectrumFrame&& f) { out.frames.push_back(std::move(f)); }, &out.warnings);
  return out;
}

}  // namespace sbtherm
