#include "sbtherm/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sbtherm/analysis.hpp"
#include "sbtherm/config.hpp"
#include "sbtherm/constants.hpp"
#include "sbtherm/container.hpp"
#include "sbtherm/errors.hpp"
#include "sbtherm/kernels.hpp"
#include "sbtherm/rng.hpp"
#include "sbtherm/thermal.hpp"

namespace sbtherm {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

ConfigFile load_config(const CommandOptions& opt, bool required) {
  if (opt.config.empty()) {
    if (required) throw ConfigError("this command needs --config");
    std::string text;
    if (!opt.preset.empty()) text = "preset = " + opt.preset + "\n";
    return ConfigFile::parse_string(text, "<flags>");
  }
  ConfigFile f = ConfigFile::parse_file(opt.config);
  if (!opt.preset.empty()) {
    // --preset acts as the top-level preset line; the usual exactly-one rule
    // against explicit sections still applies.
    std::string text = "preset = " + opt.preset + "\n";
    std::ifstream in(opt.config);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string body = ss.str();
    return ConfigFile::parse_string(text + body, opt.config.string() + "+preset");
  }
  return f;
}

void ensure_out_dir(const CommandOptions& opt) {
  if (opt.out_dir.empty()) throw ConfigError("this command needs --out");
  fs::create_directories(opt.out_dir);
}

void write_tsv(const fs::path& path, const std::string& content) {
  atomic_write_text(path, content);
}

CalibrationResult load_calibration(const fs::path& path) {
  const ConfigFile f = ConfigFile::parse_file(path);
  CalibrationResult c;
  c.g0_est = hz_to_rad(f.number("calibration", "g0_hz"));
  c.g0_err = hz_to_rad(f.number_or("calibration", "g0_err_hz", 0.0));
  c.gamma_m_est = hz_to_rad(f.number("calibration", "gamma_m_hz"));
  c.gamma_m_err = hz_to_rad(f.number_or("calibration", "gamma_m_err_hz", 0.0));
  c.tech_coeff = f.number_or("calibration", "tech_coeff", 0.0);
  c.tech_coeff_err = f.number_or("calibration", "tech_coeff_err", 0.0);
  c.tech_exponent = f.number_or("calibration", "tech_exponent", 1.0);
  c.tech_ref_photons = f.number_or("calibration", "tech_ref_photons", 300.0);
  c.n_cav_photons = f.number_or("calibration", "n_cav_photons", 0.0);
  c.include_backaction_floor = f.flag_or("calibration", "include_backaction_floor", true);
  c.single_scheme = f.flag_or("calibration", "single_scheme", false);
  return c;
}

std::string calibration_text(const CalibrationResult& c) {
  std::ostringstream out;
  out << "[calibration]\n";
  out << "g0_hz = " << num(rad_to_hz(c.g0_est)) << "\n";
  out << "g0_err_hz = " << num(rad_to_hz(c.g0_err)) << "\n";
  out << "gamma_m_hz = " << num(rad_to_hz(c.gamma_m_est)) << "\n";
  out << "gamma_m_err_hz = " << num(rad_to_hz(c.gamma_m_err)) << "\n";
  out << "tech_coeff = " << num(c.tech_coeff) << "\n";
  out << "tech_coeff_err = " << num(c.tech_coeff_err) << "\n";
  out << "tech_exponent = " << num(c.tech_exponent) << "\n";
  out << "tech_ref_photons = " << num(c.tech_ref_photons) << "\n";
  out << "n_cav_photons = " << num(c.n_cav_photons) << "\n";
  out << "include_backaction_floor = " << (c.include_backaction_floor ? "true" : "false") << "\n";
  out << "single_scheme = " << (c.single_scheme ? "true" : "false") << "\n";
  for (const std::string& w : c.warnings) out << "# warning: " << w << "\n";
  return out.str();
}

}  // namespace

// ---------------------------------------------------------------------------

void cmd_simulate(const CommandOptions& opt) {
  ConfigFile file = load_config(opt, true);
  RunConfig rc = resolve_config(file);
  if (!rc.have_scenario) throw ConfigError("simulate needs a [scenario] section");
  if (opt.seed) {
    rc.have_seed = true;
    rc.seed = *opt.seed;
    rc.scenario.seed = *opt.seed;
  }
  if (!rc.have_seed) throw ConfigError("simulate needs a seed ([scenario] seed or --seed)");
  ensure_out_dir(opt);

  rc.scenario.validate();
  ContainerWriter writer(opt.out_dir / "frames.sbth", rc.scenario.grid);
  std::vector<std::string> warnings;
  run_scenario_stream(rc.scenario, [&writer](SpectrumFrame&& f) { writer.push(f); }, &warnings);
  writer.finish();

  atomic_write_text(opt.out_dir / "manifest.cfg", manifest_text(rc));
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "wrote " << writer.frames_written() << " frames to "
            << (opt.out_dir / "frames.sbth").string() << "\n";
}

// ---------------------------------------------------------------------------

void cmd_calibrate(const CommandOptions& opt) {
  ConfigFile file = load_config(opt, true);
  RunConfig rc = resolve_config(file);
  if (!rc.have_calibrate) throw ConfigError("calibrate needs a [calibrate] section");
  CalibrateSpec& cs = rc.calibrate;
  if (opt.seed) {
    cs.have_seed = true;
    cs.seed = *opt.seed;
  }
  if (!cs.have_seed) throw ConfigError("calibrate needs a seed ([calibrate] seed or --seed)");
  if (cs.photons.size() < 3) throw ConfigError("calibrate needs at least 3 drive powers");
  if (cs.schemes.empty()) throw ConfigError("calibrate needs at least one scheme");
  ensure_out_dir(opt);

  std::vector<PowerSweep> sweeps;
  std::uint64_t run_idx = 0;
  std::ostringstream table;
  table << "scheme\tn_cav\tarea\twidth_hz\tcenter_hz\tbackground\tconverged\n";
  for (Scheme scheme : cs.schemes) {
    PowerSweep sweep;
    sweep.scheme = scheme;
    for (double photons : cs.photons) {
      Scenario sc;
      sc.duration = cs.duration;
      sc.frame_dt = cs.frame_dt;
      sc.schedule.points = {{0.0, cs.t_cryo}};
      sc.pump = pump_from_photons(scheme, photons, rc.sys, rc.pump.detuning_error);
      sc.sys = rc.sys;
      sc.bath = rc.bath;
      sc.bath.sigma_ph_prefactor = cs.sigma_ph_prefactor;
      sc.noise = rc.noise;
      sc.grid = cs.grid;
      sc.n_averages = cs.n_averages;
      sc.seed = derive_seed(cs.seed, 0xCA11B000ull + run_idx++);
      const ScenarioResult run = run_scenario(sc);

      // all frames of one power collapse into a single averaged spectrum
      const std::vector<SpectrumFrame> avg = boxcar_frames_omp(run.frames, run.frames.size());
      const FitResult fit = fit_frame(avg.back());
      sweep.points.push_back({photons, fit});
      table << scheme_name(scheme) << "\t" << num(photons) << "\t" << num(fit.area) << "\t"
            << num(fit.width_hz) << "\t" << num(fit.center_hz) << "\t" << num(fit.background)
            << "\t" << (fit.converged ? 1 : 0) << "\n";
    }
    sweeps.push_back(std::move(sweep));
  }

  const CalibrationResult calib = calibrate_power_sweep(sweeps, rc.sys);
  atomic_write_text(opt.out_dir / "calibration.cfg", calibration_text(calib));
  write_tsv(opt.out_dir / "sweep_fits.tsv", table.str());

  std::ostringstream norm;
  norm << "scheme\tn_cav\tnormalized_area\n";
  for (const auto& na : calib.normalized_areas) {
    norm << scheme_name(na.scheme) << "\t" << num(na.n_cav) << "\t" << num(na.value) << "\n";
  }
  write_tsv(opt.out_dir / "normalized_areas.tsv", norm.str());

  for (const std::string& w : calib.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "g0_hz = " << num(rad_to_hz(calib.g0_est)) << " +- "
            << num(rad_to_hz(calib.g0_err)) << "\n";
  std::cout << "gamma_m_hz = " << num(rad_to_hz(calib.gamma_m_est)) << " +- "
            << num(rad_to_hz(calib.gamma_m_err)) << "\n";
  std::cout << "tech_coeff = " << num(calib.tech_coeff) << " +- " << num(calib.tech_coeff_err)
            << " at " << num(calib.tech_ref_photons) << " photons, exponent "
            << num(calib.tech_exponent) << "\n";
}

// ---------------------------------------------------------------------------

namespace {

std::string record_flags(const TimeSeriesRecord& r) {
  std::string flags;
  auto add = [&flags](const char* f) {
    if (!flags.empty()) flags += ",";
    flags += f;
  };
  if (r.partial) add("partial");
  if (!r.fit.converged) add("unconverged");
  if (!(r.n_corrected > 0.0)) add("non-invertible");
  if (flags.empty()) flags = "ok";
  return flags;
}

}  // namespace

void cmd_analyze(const CommandOptions& opt) {
  ConfigFile file = load_config(opt, true);
  RunConfig rc = resolve_config(file);
  if (!rc.have_pump) throw ConfigError("analyze needs the [pump] section of the run");
  if (opt.container.empty()) throw ConfigError("analyze needs --container");
  ensure_out_dir(opt);

  const FrameContainer container = read_container(opt.container);
  if (container.frames.size() < 2) throw DataError("container holds fewer than two frames", 20);

  CalibrationResult calib;
  if (!opt.calib.empty()) {
    calib = load_calibration(opt.calib);
  } else {
    // ground-truth mode: correction parameters from the run's own manifest
    const double t0 = rc.have_scenario ? rc.scenario.schedule.at(0.0)
                                       : rc.bath.damping_knee_temperature;
    calib = calibration_from_truth(rc.sys, rc.noise, mechanical_damping_mean(t0, rc.sys, rc.bath));
  }

  const PipelineResult res = analyze_frames(container.frames, calib, rc.pump, rc.sys, rc.analysis);

  // per-window table
  std::ostringstream ts;
  ts << "t_s\tarea\twidth_hz\tcenter_hz\tn_raw\tn_corrected\tt_mode_k\tflags\n";
  for (const TimeSeriesRecord& r : res.records) {
    ts << num(r.t) << "\t" << num(r.fit.area) << "\t" << num(r.fit.width_hz) << "\t"
       << num(r.fit.center_hz) << "\t" << num(r.n_raw) << "\t" << num(r.n_corrected) << "\t"
       << num(r.t_mode) << "\t" << record_flags(r) << "\n";
  }
  write_tsv(opt.out_dir / "timeseries.tsv", ts.str());

  std::ostringstream sp;
  sp << "# ou_sigma " << num(res.spectrum.ou.sigma) << " ou_t_c_s " << num(res.spectrum.ou.t_c)
     << " ou_fit_ok " << (res.spectrum.ou.ok ? 1 : 0) << "\n";
  sp << "f_hz\tpsd\n";
  for (std::size_t i = 0; i < res.spectrum.freq_hz.size(); ++i) {
    sp << num(res.spectrum.freq_hz[i]) << "\t" << num(res.spectrum.psd[i]) << "\n";
  }
  write_tsv(opt.out_dir / "spectrum.tsv", sp.str());

  std::ostringstream hi;
  hi << "# gaussian_fit amplitude " << num(res.histogram.fit_amplitude) << " mean "
     << num(res.histogram.fit_mean) << " sigma " << num(res.histogram.fit_sigma) << " ok "
     << (res.histogram.fit_ok ? 1 : 0) << (res.histogram.degenerate ? " degenerate" : "") << "\n";
  hi << "bin_lo\tbin_hi\tcount\n";
  for (std::size_t i = 0; i < res.histogram.counts.size(); ++i) {
    hi << num(res.histogram.edges[i]) << "\t" << num(res.histogram.edges[i + 1]) << "\t"
       << num(res.histogram.counts[i]) << "\n";
  }
  write_tsv(opt.out_dir / "histogram.tsv", hi.str());

  std::ostringstream dv;
  dv << "# plateau " << (res.deviations.plateau ? 1 : 0) << " plateau_ratio "
     << num(res.deviations.plateau_ratio) << "\n";
  dv << "acquisition_s";
  for (double w : res.deviations.windows_s) dv << "\tsigma_w" << num(w);
  dv << "\tsigma_zero_window\n";
  for (std::size_t i = 0; i < res.deviations.acquisitions_s.size(); ++i) {
    dv << num(res.deviations.acquisitions_s[i]);
    for (std::size_t j = 0; j < res.deviations.windows_s.size(); ++j) {
      dv << "\t" << num(res.deviations.sigma[i][j]);
    }
    dv << "\t" << num(res.deviations.sigma_zero_window[i]) << "\n";
  }
  write_tsv(opt.out_dir / "deviations.tsv", dv.str());

  // Allan deviations of the corrected population and of the fitted center
  // frequency, next to the plain windowed standard deviation of each series.
  {
    std::vector<double> n_series, c_series;
    const std::vector<TimeSeriesRecord>& recs = res.records;
    const double dt = recs.size() > 1 ? recs[1].t - recs[0].t : rc.analysis.window_s;
    for (const TimeSeriesRecord& r : recs) {
      if (r.partial || !r.fit.converged) continue;
      n_series.push_back(r.n_corrected);
      c_series.push_back(r.fit.center_hz);
    }
    std::ostringstream al;
    const double record_s = static_cast<double>(n_series.size()) * dt;
    const double span = std::min(36000.0, record_s / 2.0);
    if (n_series.size() >= 8) {
      al << "# windowed_std span_s " << num(span) << " n " << num(windowed_std(n_series, dt, span))
         << " center_hz " << num(windowed_std(c_series, dt, span)) << "\n";
      al << "tau_s\tallan_n\tallan_center_hz\n";
      for (double tau = 2.0 * dt; tau <= record_s / 4.0; tau *= 2.0) {
        al << num(tau) << "\t" << num(allan_deviation(n_series, dt, tau)) << "\t"
           << num(allan_deviation(c_series, dt, tau)) << "\n";
      }
    } else {
      al << "# record too short for Allan statistics\n";
    }
    write_tsv(opt.out_dir / "allan.tsv", al.str());
  }

  std::ostringstream sm;
  sm << "frames = " << container.frames.size() << "\n";
  sm << "windows = " << res.records.size() << "\n";
  sm << "mean_n = " << num(res.mean_n) << "\n";
  sm << "sigma_ph = " << num(res.sigma_ph) << "\n";
  sm << "se_mean = " << num(res.se_mean) << "\n";
  sm << "n_eff_samples = " << num(res.n_eff_samples) << "\n";
  sm << "ou_sigma = " << num(res.spectrum.ou.sigma) << "\n";
  sm << "ou_t_c_s = " << num(res.spectrum.ou.t_c) << "\n";
  sm << "ou_fit_ok = " << (res.spectrum.ou.ok ? 1 : 0) << "\n";
  sm << "hist_sigma = " << num(res.histogram.fit_sigma) << "\n";
  sm << "plateau = " << (res.deviations.plateau ? 1 : 0) << "\n";
  for (const std::string& w : res.warnings) sm << "# warning: " << w << "\n";
  write_tsv(opt.out_dir / "analysis_summary.txt", sm.str());

  for (const std::string& w : res.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "mean_n = " << num(res.mean_n) << ", sigma_ph = " << num(res.sigma_ph)
            << " (se_mean " << num(res.se_mean) << ")\n";
}

// ---------------------------------------------------------------------------

void cmd_thermal(const CommandOptions& opt) {
  ConfigFile file = load_config(opt, false);
  RunConfig rc = resolve_config(file);
  ensure_out_dir(opt);

  const std::vector<ThermalBudgetRow> rows =
      thermal_budget(rc.thermal_grid, rc.stack, rc.material);

  std::ostringstream out;
  out << "# lambda_bulk_m " << num(bulk_mfp(rc.material)) << " tau_th_s "
      << num(thermalization_time(rc.stack, rc.material)) << " t_e_1fw_k "
      << num(electron_temperature(1e-15, 1e-3, rc.stack, rc.material)) << " t_e_1aw_k "
      << num(electron_temperature(1e-18, 1e-3, rc.stack, rc.material)) << "\n";
  out << "t_k\tc_p_j_m3_k\tk_nano_w_m_k\tk_torus_w_k\theat_capacity_j_k\ttau_th_s\t"
         "kapitza_w_k\tkapitza_torus_ratio\tleak_w\tgradient_k\tt_electron_1fw_k\t"
         "lambda_dom_m\n";
  for (const ThermalBudgetRow& r : rows) {
    out << num(r.temperature) << "\t" << num(r.c_p) << "\t" << num(r.k_nano) << "\t"
        << num(r.k_torus) << "\t" << num(r.heat_capacity) << "\t" << num(r.tau_th) << "\t"
        << num(r.kapitza) << "\t" << num(r.kapitza_torus_ratio) << "\t" << num(r.leak_power)
        << "\t" << num(r.gradient) << "\t" << num(r.t_electron_1fw) << "\t"
        << num(r.lambda_dominant) << "\n";
  }
  write_tsv(opt.out_dir / "thermal_budget.tsv", out.str());
  std::cout << out.str();
}

// ---------------------------------------------------------------------------

void cmd_report(const CommandOptions& opt) {
  if (opt.run_dir.empty()) throw ConfigError("report needs a run directory");
  const fs::path dir = opt.run_dir;
  if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
  const fs::path out_dir = opt.out_dir.empty() ? dir : opt.out_dir;
  fs::create_directories(out_dir / "plotdata");

  std::ostringstream rep;
  rep << "run report for " << dir.string() << "\n\n";

  if (fs::exists(dir / "manifest.cfg")) {
    const ConfigFile mf = ConfigFile::parse_file(dir / "manifest.cfg");
    rep << "[parameters]\n";
    for (const char* key : {"scheme", "n_cav"}) {
      if (mf.has("pump", key)) rep << "pump " << key << " = " << mf.get("pump", key) << "\n";
    }
    for (const char* key : {"duration_s", "frame_dt_s", "t_schedule_k", "seed"}) {
      if (mf.has("scenario", key)) rep << key << " = " << mf.get("scenario", key) << "\n";
    }
    rep << "\n";
  } else {
    rep << "missing: manifest.cfg\n\n";
  }

  if (fs::exists(dir / "frames.sbth")) {
    // full read doubles as an integrity check; a corrupt file aborts with
    // the offending offset (exit 3)
    const FrameContainer c = read_container(dir / "frames.sbth");
    rep << "[container]\n";
    rep << "frames = " << c.frames.size() << "\n";
    rep << "n_bins = " << c.grid.n_bins << "\n";
    if (!c.frames.empty()) {
      rep << "t_first_s = " << num(c.frames.front().t) << "\n";
      rep << "t_last_s = " << num(c.frames.back().t) << "\n";
    }
    rep << "\n";
  } else {
    rep << "missing: frames.sbth\n\n";
  }

  if (fs::exists(dir / "analysis_summary.txt")) {
    std::ifstream in(dir / "analysis_summary.txt");
    rep << "[analysis]\n" << in.rdbuf() << "\n";
  } else {
    rep << "missing: analysis summary\n\n";
  }

  if (fs::exists(dir / "calibration.cfg")) {
    std::ifstream in(dir / "calibration.cfg");
    rep << in.rdbuf() << "\n";
  } else {
    rep << "missing: calibration\n\n";
  }

  // plot-data: population trace and companions, derived from the tables
  if (fs::exists(dir / "timeseries.tsv")) {
    std::ifstream in(dir / "timeseries.tsv");
    std::string header;
    std::getline(in, header);
    std::ostringstream trace;
    trace << "t_s\tn_corrected\tt_mode_k\n";
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      std::string t, area, width, center, n_raw, n_corr, t_mode, flags;
      std::getline(ls, t, '\t');
      std::getline(ls, area, '\t');
      std::getline(ls, width, '\t');
      std::getline(ls, center, '\t');
      std::getline(ls, n_raw, '\t');
      std::getline(ls, n_corr, '\t');
      std::getline(ls, t_mode, '\t');
      std::getline(ls, flags, '\t');
      trace << t << "\t" << n_corr << "\t" << t_mode << "\n";
    }
    atomic_write_text(out_dir / "plotdata" / "population_trace.tsv", trace.str());
  } else {
    rep << "missing: timeseries.tsv\n";
  }
  for (const char* name : {"spectrum.tsv", "histogram.tsv", "deviations.tsv"}) {
    if (fs::exists(dir / name)) {
      fs::copy_file(dir / name, out_dir / "plotdata" / name,
                    fs::copy_options::overwrite_existing);
    } else {
      rep << "missing: " << name << "\n";
    }
  }

  atomic_write_text(out_dir / "report.txt", rep.str());
  std::cout << rep.str();
}

}  // namespace sbtherm
