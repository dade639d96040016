#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sbtherm/analysis.hpp"
#include "sbtherm/spectrum.hpp"
#include "sbtherm/system.hpp"
#include "sbtherm/thermal.hpp"

namespace sbtherm {

// Flat, line-oriented configuration: `key = value` lines under `[section]`
// headers, `#` comments. Values are plain numbers or bare tokens; unit
// suffixes are rejected (frequencies in Hz, times in s, temperatures in K,
// powers in W, all stated by the key names).

class ConfigFile {
 public:
  static ConfigFile parse_file(const std::filesystem::path& path);
  static ConfigFile parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;

  double number(const std::string& section, const std::string& key) const;
  double number_or(const std::string& section, const std::string& key, double fallback) const;
  std::uint64_t seed_value(const std::string& section, const std::string& key) const;
  bool flag_or(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> number_list(const std::string& section, const std::string& key) const;
  std::vector<std::string> token_list(const std::string& section, const std::string& key) const;

  const std::map<std::string, std::map<std::string, std::string>>& sections() const {
    return sections_;
  }

  // Keys actually consumed are tracked so resolvers can reject typos.
  void mark_used(const std::string& section, const std::string& key) const;
  std::vector<std::string> unused_keys() const;

  static double parse_number(const std::string& raw, const std::string& where);

 private:
  std::string origin_;
  std::map<std::string, std::map<std::string, std::string>> sections_;
  mutable std::map<std::string, bool> used_;
};

struct CalibrateSpec {
  std::vector<double> photons;
  std::vector<Scheme> schemes;
  double t_cryo = 0.1;
  double duration = 240.0;
  double frame_dt = 1.0;
  std::uint32_t n_averages = 50;
  GridSpec grid;
  std::uint64_t seed = 0;
  bool have_seed = false;
  // Population fluctuations during sweep runs. Off by default: a sweep
  // probes the time-averaged response, which experimentally comes from
  // multi-day averaging that a short synthetic run cannot reproduce.
  double sigma_ph_prefactor = 0.0;
};

// Fully resolved run parameters. Sections resolve from the preset or from an
// explicit block, never both.
struct RunConfig {
  std::string preset;  // empty when everything is explicit
  SystemParams sys;
  BathParams bath;
  NoiseBudget noise;
  ThermalStack stack;
  MaterialProps material;
  std::vector<double> thermal_grid = {0.5e-3, 1e-3, 10e-3, 100e-3};

  bool have_pump = false;
  PumpConfig pump;

  bool have_scenario = false;
  Scenario scenario;
  bool have_seed = false;
  std::uint64_t seed = 0;

  AnalysisConfig analysis;
  bool have_calibrate = false;
  CalibrateSpec calibrate;
};

RunConfig resolve_config(const ConfigFile& file);

// Serialise the fully resolved parameters back to config syntax; feeding the
// result through resolve_config reproduces the run.
std::string manifest_text(const RunConfig& rc);

}  // namespace sbtherm
