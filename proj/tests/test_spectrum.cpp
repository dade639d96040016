#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "sbtherm/constants.hpp"
#include "sbtherm/errors.hpp"
#include "sbtherm/optomech.hpp"
#include "sbtherm/spectrum.hpp"

using namespace sbtherm;

namespace {

Scenario base_scenario(Scheme scheme, double n_cav, double t_cryo) {
  Scenario sc;
  sc.duration = 100.0;
  sc.frame_dt = 1.0;
  sc.schedule.points = {{0.0, t_cryo}};
  sc.sys = aalto_drum();
  sc.bath = aalto_drum_bath();
  sc.noise = aalto_drum_noise();
  sc.pump = pump_from_photons(scheme, n_cav, sc.sys);
  sc.grid = default_grid(sc.sys);
  sc.n_averages = 10;
  sc.seed = 42;
  return sc;
}

BathState quiet_state(double t_cryo, const SystemParams& sys, const BathParams& bath) {
  BathParams b = bath;
  b.sigma_ph_prefactor = 0.0;
  b.sigma_f_amp = 0.0;
  b.sigma_gamma_amp = 0.0;
  BathRng rng(1);
  return initial_bath_state(t_cryo, sys, b, rng);
}

}  // namespace

TEST_CASE("frame expectation integrates to the sideband area") {
  // quadrature oracle: rectangle sum over a grid much wider than the
  // linewidth vs the closed-form area
  const SystemParams sys = aalto_drum();
  NoiseBudget noise = aalto_drum_noise();
  const BathParams bath = aalto_drum_bath();
  const PumpConfig pump = pump_from_photons(Scheme::BlueDetuned, 300.0, sys);
  const BathState state = quiet_state(0.1, sys, bath);

  const FrameModel model = frame_model(state, pump, sys, noise);
  // half-span of 100 linewidths keeps the Lorentzian tails below 0.5%
  const GridSpec grid = centered_grid(200.0 * model.width_hz, 8192);
  const std::vector<double> mean = frame_expectation(model, grid);

  double integral = 0.0;
  for (double v : mean) integral += (v - model.background) * grid.f_step_hz;
  CHECK(std::abs(integral / model.area - 1.0) < 0.005);

  // and the closed form matches the optomech prediction
  const double go = gamma_opt(300.0, sys);
  const double n_eff = effective_population(state.n_inst, noise, pump, state.gamma_m_inst, go, sys);
  const SidebandShape shape = sideband_area_width(pump, n_eff, state.gamma_m_inst, go);
  CHECK(model.area == doctest::Approx(shape.area).epsilon(1e-12));
  CHECK(model.width_hz == doctest::Approx(rad_to_hz(shape.width)).epsilon(1e-12));
}

TEST_CASE("zero drive gives a flat background") {
  const SystemParams sys = aalto_drum();
  const NoiseBudget noise = aalto_drum_noise();
  const BathParams bath = aalto_drum_bath();
  const PumpConfig pump = pump_from_photons(Scheme::RedDetuned, 0.0, sys);
  const BathState state = quiet_state(0.1, sys, bath);
  const FrameModel model = frame_model(state, pump, sys, noise);
  CHECK(model.area == 0.0);
  const GridSpec grid = default_grid(sys);
  for (double v : frame_expectation(model, grid)) {
    CHECK(v == noise.amplifier_background);
  }
}

TEST_CASE("blue/red peak relations at high temperature") {
  const SystemParams sys = aalto_drum();
  NoiseBudget noise = aalto_drum_noise();
  noise.tech_heating_coeff = 0.0;
  noise.include_backaction_floor = false;
  const BathParams bath = aalto_drum_bath();
  const BathState state = quiet_state(0.1, sys, bath);

  const PumpConfig blue = pump_from_photons(Scheme::BlueDetuned, 300.0, sys);
  const PumpConfig red = pump_from_photons(Scheme::RedDetuned, 300.0, sys);
  const FrameModel mb = frame_model(state, blue, sys, noise);
  const FrameModel mr = frame_model(state, red, sys, noise);

  const double n = state.n_inst;
  const double gm = state.gamma_m_inst;
  const double go = gamma_opt(300.0, sys);
  const double wr_over_wb = (gm + go) / (gm - go);  // 547/293 at these settings
  CHECK(wr_over_wb == doctest::Approx(546.96 / 293.04).epsilon(1e-3));

  // effective-population ratio carries one linewidth factor
  const double ne_b = effective_population(n, noise, blue, gm, go, sys);
  const double ne_r = effective_population(n, noise, red, gm, go, sys);
  CHECK((ne_b + 1.0) / ne_r ==
        doctest::Approx((n + 1.0) / n * wr_over_wb).epsilon(1e-9));

  // the peak-height ratio carries it twice: heights scale as area/width
  const double height_b = 2.0 * mb.area / (k_pi * mb.width_hz);
  const double height_r = 2.0 * mr.area / (k_pi * mr.width_hz);
  CHECK(height_b / height_r ==
        doctest::Approx((n + 1.0) / n * wr_over_wb * wr_over_wb).epsilon(1e-9));
}

TEST_CASE("gamma sampling statistics") {
  const std::size_t n_bins = 10000;
  const std::vector<double> mean(n_bins, 7.5);
  const GridSpec grid = centered_grid(1000.0, n_bins);

  SUBCASE("bin scatter follows 1/sqrt(n_averages)") {
    for (std::uint32_t n_av : {4u, 25u, 100u}) {
      const SpectrumFrame f = sample_frame(mean, grid, 1.0, n_av, 99);
      double m = 0.0, v = 0.0;
      for (double x : f.psd) m += x;
      m /= static_cast<double>(n_bins);
      for (double x : f.psd) v += (x - m) * (x - m);
      v /= static_cast<double>(n_bins);
      const double expected = 7.5 / std::sqrt(static_cast<double>(n_av));
      CHECK(std::abs(std::sqrt(v) / expected - 1.0) < 0.10);
    }
  }

  SUBCASE("sample mean is unbiased") {
    const SpectrumFrame f = sample_frame(mean, grid, 1.0, 10, 123);
    double m = 0.0;
    for (double x : f.psd) m += x;
    m /= static_cast<double>(n_bins);
    const double se = 7.5 / std::sqrt(10.0 * static_cast<double>(n_bins));
    CHECK(std::abs(m - 7.5) < 3.0 * se);
  }

  SUBCASE("seeded determinism") {
    const SpectrumFrame a = sample_frame(mean, grid, 1.0, 10, 7);
    const SpectrumFrame b = sample_frame(mean, grid, 1.0, 10, 7);
    CHECK(a.psd == b.psd);
    const SpectrumFrame c = sample_frame(mean, grid, 1.0, 10, 8);
    CHECK(a.psd != c.psd);
  }
}

TEST_CASE("scenario run basics") {
  SUBCASE("frame count and cadence") {
    Scenario sc = base_scenario(Scheme::BlueDetuned, 300.0, 0.1);
    sc.duration = 3600.0;
    const ScenarioResult r = run_scenario(sc);
    CHECK(r.frames.size() == 3600);
    CHECK(r.frames.front().t == doctest::Approx(1.0));
    CHECK(r.frames.back().t == doctest::Approx(3600.0));
    CHECK(r.frames.front().meta.t_cryo == doctest::Approx(0.1));
  }

  SUBCASE("bit-identical reruns") {
    const Scenario sc = base_scenario(Scheme::BlueDetuned, 600.0, 0.01);
    const ScenarioResult a = run_scenario(sc);
    const ScenarioResult b = run_scenario(sc);
    REQUIRE(a.frames.size() == b.frames.size());
    for (std::size_t i = 0; i < a.frames.size(); ++i) {
      CHECK(a.frames[i].psd == b.frames[i].psd);
    }
  }

  SUBCASE("noise-free constant-T frames share one expectation") {
    Scenario sc = base_scenario(Scheme::BlueDetuned, 600.0, 0.1);
    sc.bath.sigma_ph_prefactor = 0.0;
    sc.bath.sigma_f_amp = 0.0;
    sc.bath.sigma_gamma_amp = 0.0;
    sc.n_averages = 4000;  // tiny estimator noise
    sc.duration = 50.0;
    const ScenarioResult r = run_scenario(sc);
    // every frame scatters around the same mean: compare frame means
    std::vector<double> frame_means;
    for (const SpectrumFrame& f : r.frames) {
      double m = 0.0;
      for (double x : f.psd) m += x;
      frame_means.push_back(m / static_cast<double>(f.psd.size()));
    }
    double lo = frame_means[0], hi = frame_means[0];
    for (double m : frame_means) {
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
    CHECK((hi - lo) / lo < 0.01);
  }

  SUBCASE("schedule validation") {
    Scenario sc = base_scenario(Scheme::BlueDetuned, 300.0, 0.1);
    sc.schedule.points = {{0.0, 0.1}, {50.0, 0.05}};  // stops before duration
    CHECK_THROWS_AS(sc.validate(), ConfigError);
    sc.schedule.points = {{0.0, 0.1}, {40.0, 0.0}, {100.0, 0.1}};
    CHECK_THROWS_AS(sc.validate(), ConfigError);
    sc.schedule.points = {{0.0, 0.1}, {100.0, 0.05}};
    CHECK_NOTHROW(sc.validate());
    CHECK(sc.schedule.at(50.0) == doctest::Approx(0.075));
  }

  SUBCASE("center drift warning") {
    Scenario sc = base_scenario(Scheme::BlueDetuned, 300.0, 0.1);
    sc.duration = 60.0;
    sc.schedule.points = {{0.0, 0.1}, {60.0, 5e-4}};
    sc.bath.tls_log_slope = hz_to_rad(1e4);  // exaggerated pulling
    const ScenarioResult r = run_scenario(sc);
    bool warned = false;
    for (const std::string& w : r.warnings) {
      if (w.find("drifted") != std::string::npos) warned = true;
    }
    CHECK(warned);
  }

  SUBCASE("self-oscillation propagates") {
    Scenario sc = base_scenario(Scheme::BlueDetuned, 1100.0, 0.1);  // above ~992
    CHECK_THROWS_AS(run_scenario(sc), SelfOscillationError);
  }
}
