#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace sbtherm {

// CLI entry points. They throw ConfigError/DataError/NumericalError; the
// frontend maps those to exit codes 2/3/4.

struct CommandOptions {
  std::filesystem::path config;     // empty means "no config file given"
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;
  std::string preset;               // --preset override
  std::filesystem::path container;  // analyze input
  std::filesystem::path calib;      // analyze calibration input (optional)
  std::filesystem::path run_dir;    // report input
};

void cmd_simulate(const CommandOptions& opt);
void cmd_calibrate(const CommandOptions& opt);
void cmd_analyze(const CommandOptions& opt);
void cmd_thermal(const CommandOptions& opt);
void cmd_report(const CommandOptions& opt);

}  // namespace sbtherm
