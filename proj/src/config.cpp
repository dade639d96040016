#include "sbtherm/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sbtherm/constants.hpp"
#include "sbtherm/errors.hpp"

namespace sbtherm {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path.string());
}

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& origin) {
  ConfigFile cf;
  cf.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(where + ": empty section name");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (value.empty()) throw ConfigError(where + ": empty value for '" + key + "'");
    auto& sec = cf.sections_[section];
    if (sec.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    sec[key] = value;
  }
  return cf;
}

bool ConfigFile::has_section(const std::string& section) const {
  return sections_.count(section) != 0;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  auto it = sections_.find(section);
  return it != sections_.end() && it->second.count(key) != 0;
}

void ConfigFile::mark_used(const std::string& section, const std::string& key) const {
  used_[section + "." + key] = true;
}

std::string ConfigFile::get(const std::string& section, const std::string& key) const {
  auto it = sections_.find(section);
  if (it == sections_.end() || !it->second.count(key)) {
    throw ConfigError(origin_ + ": missing required key '" + key + "' in section [" + section +
                      "]");
  }
  mark_used(section, key);
  return it->second.at(key);
}

std::string ConfigFile::get_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  if (!has(section, key)) return fallback;
  return get(section, key);
}

double ConfigFile::parse_number(const std::string& raw, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(raw.c_str(), &end);
  if (end == raw.c_str() || *end != '\0' || errno == ERANGE) {
    throw ConfigError(where + ": '" + raw + "' is not a plain number (unit suffixes rejected)");
  }
  return v;
}

double ConfigFile::number(const std::string& section, const std::string& key) const {
  return parse_number(get(section, key), origin_ + " [" + section + "] " + key);
}

double ConfigFile::number_or(const std::string& section, const std::string& key,
                             double fallback) const {
  if (!has(section, key)) return fallback;
  return number(section, key);
}

std::uint64_t ConfigFile::seed_value(const std::string& section, const std::string& key) const {
  const std::string raw = get(section, key);
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(raw.c_str(), &end, 10);
  if (end == raw.c_str() || *end != '\0' || errno == ERANGE) {
    throw ConfigError(origin_ + " [" + section + "] " + key + ": '" + raw +
                      "' is not an unsigned integer");
  }
  return v;
}

bool ConfigFile::flag_or(const std::string& section, const std::string& key,
                         bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get(section, key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(origin_ + " [" + section + "] " + key + ": expected true|false");
}

std::vector<double> ConfigFile::number_list(const std::string& section,
                                            const std::string& key) const {
  const std::string raw = get(section, key);
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_number(item, origin_ + " [" + section + "] " + key));
  }
  if (out.empty()) throw ConfigError(origin_ + " [" + section + "] " + key + ": empty list");
  return out;
}

std::vector<std::string> ConfigFile::token_list(const std::string& section,
                                                const std::string& key) const {
  const std::string raw = get(section, key);
  std::vector<std::string> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  if (out.empty()) throw ConfigError(origin_ + " [" + section + "] " + key + ": empty list");
  return out;
}

std::vector<std::string> ConfigFile::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [section, kv] : sections_) {
    for (const auto& [key, value] : kv) {
      (void)value;
      if (!used_.count(section + "." + key)) out.push_back(section + "." + key);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

SystemParams system_from(const ConfigFile& f) {
  SystemParams s;
  s.omega_c = hz_to_rad(f.number("system", "cavity_freq_hz"));
  s.omega_m0 = hz_to_rad(f.number("system", "mech_freq_hz"));
  s.kappa_tot = hz_to_rad(f.number("system", "kappa_tot_hz"));
  s.kappa_ext = hz_to_rad(f.number("system", "kappa_ext_hz"));
  s.g0 = hz_to_rad(f.number("system", "g0_hz"));
  s.gamma_m_floor = hz_to_rad(f.number("system", "gamma_m_floor_hz"));
  s.duffing_beta = f.number("system", "duffing_hz_per_nm2");
  s.mass = f.number("system", "mass_kg");
  s.validate();
  return s;
}

BathParams bath_from(const ConfigFile& f) {
  BathParams b;
  b.tls_log_slope = hz_to_rad(f.number("bath", "tls_slope_hz_per_decade"));
  b.damping_linear_slope = hz_to_rad(f.number("bath", "damping_slope_hz_per_k"));
  b.damping_knee_temperature = f.number("bath", "damping_knee_k");
  b.t_c = f.number("bath", "t_c_s");
  b.sigma_ph_prefactor = f.number("bath", "sigma_ph_prefactor");
  b.sigma_f_amp = hz_to_rad(f.number("bath", "sigma_f_amp_hz"));
  b.sigma_f_exponent = f.number("bath", "sigma_f_exponent");
  b.sigma_gamma_amp = hz_to_rad(f.number("bath", "sigma_gamma_amp_hz"));
  b.sigma_gamma_exponent = f.number("bath", "sigma_gamma_exponent");
  b.walk_ref_acquisition = f.number("bath", "walk_ref_acquisition_s");
  b.walk_correlation = f.number("bath", "walk_correlation");
  b.validate();
  return b;
}

NoiseBudget noise_from(const ConfigFile& f) {
  NoiseBudget n;
  n.n_cav_noise = f.number("noise", "cavity_noise_photons");
  n.tech_heating_coeff = f.number("noise", "tech_heating_coeff");
  n.tech_heating_exponent = f.number("noise", "tech_heating_exponent");
  n.tech_ref_photons = f.number("noise", "tech_ref_photons");
  n.amplifier_background = f.number("noise", "amplifier_background");
  n.include_backaction_floor = f.flag_or("noise", "include_backaction_floor", true);
  n.validate();
  return n;
}

void thermal_from(const ConfigFile& f, ThermalStack* stack, MaterialProps* mat) {
  mat->v_s = f.number("thermal", "v_s_m_per_s");
  mat->theta_d = f.number("thermal", "theta_d_k");
  mat->rho = f.number("thermal", "rho_kg_per_m3");
  mat->c_p_coeff = f.number("thermal", "cp_coeff_j_m3_k4");
  mat->k_bulk_coeff = f.number("thermal", "k_bulk_coeff_w_m_k4");
  mat->g_eph = f.number("thermal", "g_eph_w_k5_m3");
  mat->validate();
  stack->thickness = f.number("thermal", "thickness_m");
  stack->r1 = f.number("thermal", "r1_m");
  stack->r2 = f.number("thermal", "r2_m");
  stack->kapitza_coeff = f.number("thermal", "kapitza_w_cm2_k4");
  stack->heat_leak_specific = f.number("thermal", "heat_leak_w_per_kg");
  stack->lambda_conf = f.number_or("thermal", "lambda_conf_m", 0.0);
  stack->mass_override = f.number_or("thermal", "mass_override_kg", 0.0);
  stack->validate();
}

TemperatureSchedule schedule_from(const ConfigFile& f, const std::string& section,
                                  const std::string& key) {
  const std::string raw = f.get(section, key);
  TemperatureSchedule sched;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const std::size_t colon = item.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("[" + section + "] " + key + ": expected t:T pairs, got '" + item + "'");
    }
    const double t = ConfigFile::parse_number(item.substr(0, colon), key);
    const double temp = ConfigFile::parse_number(item.substr(colon + 1), key);
    sched.points.emplace_back(t, temp);
  }
  if (sched.points.empty()) throw ConfigError("[" + section + "] " + key + ": empty schedule");
  return sched;
}

}  // namespace

RunConfig resolve_config(const ConfigFile& f) {
  RunConfig rc;

  const std::string units = f.get_or("", "units", "hz-s-k-w");
  if (units != "hz-s-k-w") {
    throw ConfigError("units declaration must be 'hz-s-k-w' (got '" + units + "')");
  }

  rc.preset = f.get_or("", "preset", "");
  const bool preset = !rc.preset.empty();
  if (preset && rc.preset != "aalto-drum") {
    throw ConfigError("unknown preset '" + rc.preset + "'");
  }
  for (const char* sec : {"system", "bath", "noise", "thermal"}) {
    if (preset && f.has_section(sec)) {
      throw ConfigError(std::string("section [") + sec +
                        "] conflicts with the preset; use exactly one of preset|explicit");
    }
    if (!preset && !f.has_section(sec) && (std::string(sec) == "system")) {
      throw ConfigError("no preset and no [system] section");
    }
  }

  if (preset) {
    rc.sys = aalto_drum();
    rc.bath = aalto_drum_bath();
    rc.noise = aalto_drum_noise();
    rc.stack = aalto_drum_stack();
    rc.material = aluminum();
  } else {
    rc.sys = system_from(f);
    rc.bath = f.has_section("bath") ? bath_from(f) : aalto_drum_bath();
    rc.noise = f.has_section("noise") ? noise_from(f) : aalto_drum_noise();
    rc.stack = aalto_drum_stack();
    rc.material = aluminum();
    if (f.has_section("thermal")) thermal_from(f, &rc.stack, &rc.material);
  }
  if (f.has("", "thermal_grid_k")) {
    rc.thermal_grid = f.number_list("", "thermal_grid_k");
  }

  if (f.has_section("pump")) {
    rc.have_pump = true;
    const Scheme scheme = scheme_from_name(f.get("pump", "scheme"));
    const double detuning = hz_to_rad(f.number_or("pump", "detuning_error_hz", 0.0));
    const bool has_n = f.has("pump", "n_cav");
    const bool has_p = f.has("pump", "p_in_w");
    if (has_n == has_p) {
      throw ConfigError("[pump]: give exactly one of n_cav | p_in_w");
    }
    rc.pump = has_n ? pump_from_photons(scheme, f.number("pump", "n_cav"), rc.sys, detuning)
                    : pump_from_power(scheme, f.number("pump", "p_in_w"), rc.sys, detuning);
  }

  if (f.has_section("scenario")) {
    rc.have_scenario = true;
    Scenario& sc = rc.scenario;
    sc.duration = f.number("scenario", "duration_s");
    sc.frame_dt = f.number_or("scenario", "frame_dt_s", 1.0);
    sc.schedule = schedule_from(f, "scenario", "t_schedule_k");
    const double span = f.number_or("scenario", "span_hz", 40.0 * rad_to_hz(rc.sys.gamma_m_floor));
    const std::size_t n_bins =
        static_cast<std::size_t>(f.number_or("scenario", "n_bins", 512.0));
    sc.grid = centered_grid(span, n_bins);
    sc.n_averages = static_cast<std::uint32_t>(f.number_or("scenario", "n_averages", 10.0));
    if (!rc.have_pump) throw ConfigError("[scenario] requires a [pump] section");
    sc.pump = rc.pump;
    sc.sys = rc.sys;
    sc.bath = rc.bath;
    sc.noise = rc.noise;
    if (f.has("scenario", "seed")) {
      rc.have_seed = true;
      rc.seed = f.seed_value("scenario", "seed");
      sc.seed = rc.seed;
    }
  }

  rc.analysis.window_s = f.number_or("analyze", "window_s", 1200.0);
  rc.analysis.t_c_for_errors = f.number_or("analyze", "t_c_s", rc.bath.t_c);
  rc.analysis.detrend = f.flag_or("analyze", "detrend", true);
  rc.analysis.drop_partial = f.flag_or("analyze", "drop_partial", true);
  if (f.has("analyze", "windows_s")) {
    rc.analysis.deviation_windows_s = f.number_list("analyze", "windows_s");
  }
  if (f.has("analyze", "acquisitions_s")) {
    rc.analysis.acquisitions_s = f.number_list("analyze", "acquisitions_s");
  }

  if (f.has_section("calibrate")) {
    rc.have_calibrate = true;
    CalibrateSpec& cs = rc.calibrate;
    cs.photons = f.number_list("calibrate", "photons");
    for (const std::string& s : f.token_list("calibrate", "schemes")) {
      cs.schemes.push_back(scheme_from_name(s));
    }
    cs.t_cryo = f.number("calibrate", "t_cryo_k");
    cs.duration = f.number_or("calibrate", "duration_s", 240.0);
    cs.frame_dt = f.number_or("calibrate", "frame_dt_s", 1.0);
    cs.n_averages = static_cast<std::uint32_t>(f.number_or("calibrate", "n_averages", 50.0));
    const double span = f.number_or("calibrate", "span_hz", 40.0 * rad_to_hz(rc.sys.gamma_m_floor));
    const std::size_t n_bins =
        static_cast<std::size_t>(f.number_or("calibrate", "n_bins", 2048.0));
    cs.grid = centered_grid(span, n_bins);
    cs.sigma_ph_prefactor = f.number_or("calibrate", "sigma_ph_prefactor", 0.0);
    if (f.has("calibrate", "seed")) {
      cs.have_seed = true;
      cs.seed = f.seed_value("calibrate", "seed");
    }
  }

  const std::vector<std::string> unused = f.unused_keys();
  if (!unused.empty()) {
    std::string msg = "unrecognised config keys:";
    for (const std::string& k : unused) msg += " " + k;
    throw ConfigError(msg);
  }
  return rc;
}

std::string manifest_text(const RunConfig& rc) {
  std::ostringstream out;
  out << "# resolved run parameters; feeding this file back reproduces the run\n";
  out << "units = hz-s-k-w\n";
  out << "thermal_grid_k = ";
  for (std::size_t i = 0; i < rc.thermal_grid.size(); ++i) {
    if (i) out << ",";
    out << fmt(rc.thermal_grid[i]);
  }
  out << "\n\n";

  out << "[system]\n";
  out << "cavity_freq_hz = " << fmt(rad_to_hz(rc.sys.omega_c)) << "\n";
  out << "mech_freq_hz = " << fmt(rad_to_hz(rc.sys.omega_m0)) << "\n";
  out << "kappa_tot_hz = " << fmt(rad_to_hz(rc.sys.kappa_tot)) << "\n";
  out << "kappa_ext_hz = " << fmt(rad_to_hz(rc.sys.kappa_ext)) << "\n";
  out << "g0_hz = " << fmt(rad_to_hz(rc.sys.g0)) << "\n";
  out << "gamma_m_floor_hz = " << fmt(rad_to_hz(rc.sys.gamma_m_floor)) << "\n";
  out << "duffing_hz_per_nm2 = " << fmt(rc.sys.duffing_beta) << "\n";
  out << "mass_kg = " << fmt(rc.sys.mass) << "\n\n";

  out << "[bath]\n";
  out << "tls_slope_hz_per_decade = " << fmt(rad_to_hz(rc.bath.tls_log_slope)) << "\n";
  out << "damping_slope_hz_per_k = " << fmt(rad_to_hz(rc.bath.damping_linear_slope)) << "\n";
  out << "damping_knee_k = " << fmt(rc.bath.damping_knee_temperature) << "\n";
  out << "t_c_s = " << fmt(rc.bath.t_c) << "\n";
  out << "sigma_ph_prefactor = " << fmt(rc.bath.sigma_ph_prefactor) << "\n";
  out << "sigma_f_amp_hz = " << fmt(rad_to_hz(rc.bath.sigma_f_amp)) << "\n";
  out << "sigma_f_exponent = " << fmt(rc.bath.sigma_f_exponent) << "\n";
  out << "sigma_gamma_amp_hz = " << fmt(rad_to_hz(rc.bath.sigma_gamma_amp)) << "\n";
  out << "sigma_gamma_exponent = " << fmt(rc.bath.sigma_gamma_exponent) << "\n";
  out << "walk_ref_acquisition_s = " << fmt(rc.bath.walk_ref_acquisition) << "\n";
  out << "walk_correlation = " << fmt(rc.bath.walk_correlation) << "\n\n";

  out << "[noise]\n";
  out << "cavity_noise_photons = " << fmt(rc.noise.n_cav_noise) << "\n";
  out << "tech_heating_coeff = " << fmt(rc.noise.tech_heating_coeff) << "\n";
  out << "tech_heating_exponent = " << fmt(rc.noise.tech_heating_exponent) << "\n";
  out << "tech_ref_photons = " << fmt(rc.noise.tech_ref_photons) << "\n";
  out << "amplifier_background = " << fmt(rc.noise.amplifier_background) << "\n";
  out << "include_backaction_floor = " << (rc.noise.include_backaction_floor ? "true" : "false")
      << "\n\n";

  out << "[thermal]\n";
  out << "v_s_m_per_s = " << fmt(rc.material.v_s) << "\n";
  out << "theta_d_k = " << fmt(rc.material.theta_d) << "\n";
  out << "rho_kg_per_m3 = " << fmt(rc.material.rho) << "\n";
  out << "cp_coeff_j_m3_k4 = " << fmt(rc.material.c_p_coeff) << "\n";
  out << "k_bulk_coeff_w_m_k4 = " << fmt(rc.material.k_bulk_coeff) << "\n";
  out << "g_eph_w_k5_m3 = " << fmt(rc.material.g_eph) << "\n";
  out << "thickness_m = " << fmt(rc.stack.thickness) << "\n";
  out << "r1_m = " << fmt(rc.stack.r1) << "\n";
  out << "r2_m = " << fmt(rc.stack.r2) << "\n";
  out << "kapitza_w_cm2_k4 = " << fmt(rc.stack.kapitza_coeff) << "\n";
  out << "heat_leak_w_per_kg = " << fmt(rc.stack.heat_leak_specific) << "\n";
  if (rc.stack.lambda_conf > 0.0) out << "lambda_conf_m = " << fmt(rc.stack.lambda_conf) << "\n";
  if (rc.stack.mass_override > 0.0) {
    out << "mass_override_kg = " << fmt(rc.stack.mass_override) << "\n";
  }
  out << "\n";

  if (rc.have_pump) {
    out << "[pump]\n";
    out << "scheme = " << scheme_name(rc.pump.scheme) << "\n";
    out << "n_cav = " << fmt(rc.pump.n_cav) << "\n";
    out << "detuning_error_hz = " << fmt(rad_to_hz(rc.pump.detuning_error)) << "\n\n";
  }

  if (rc.have_scenario) {
    const Scenario& sc = rc.scenario;
    out << "[scenario]\n";
    out << "duration_s = " << fmt(sc.duration) << "\n";
    out << "frame_dt_s = " << fmt(sc.frame_dt) << "\n";
    out << "t_schedule_k = ";
    for (std::size_t i = 0; i < sc.schedule.points.size(); ++i) {
      if (i) out << ",";
      out << fmt(sc.schedule.points[i].first) << ":" << fmt(sc.schedule.points[i].second);
    }
    out << "\n";
    out << "n_bins = " << sc.grid.n_bins << "\n";
    out << "span_hz = " << fmt(sc.grid.span_hz()) << "\n";
    out << "n_averages = " << sc.n_averages << "\n";
    if (rc.have_seed) out << "seed = " << rc.seed << "\n";
    out << "\n";
  }

  out << "[analyze]\n";
  out << "window_s = " << fmt(rc.analysis.window_s) << "\n";
  out << "t_c_s = " << fmt(rc.analysis.t_c_for_errors) << "\n";
  out << "detrend = " << (rc.analysis.detrend ? "true" : "false") << "\n";
  out << "drop_partial = " << (rc.analysis.drop_partial ? "true" : "false") << "\n";
  out << "windows_s = ";
  for (std::size_t i = 0; i < rc.analysis.deviation_windows_s.size(); ++i) {
    if (i) out << ",";
    out << fmt(rc.analysis.deviation_windows_s[i]);
  }
  out << "\n";
  if (!rc.analysis.acquisitions_s.empty()) {
    out << "acquisitions_s = ";
    for (std::size_t i = 0; i < rc.analysis.acquisitions_s.size(); ++i) {
      if (i) out << ",";
      out << fmt(rc.analysis.acquisitions_s[i]);
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace sbtherm
