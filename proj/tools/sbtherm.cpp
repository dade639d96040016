#include <CLI11.hpp>
#include <cstdint>
#include <exception>
#include <iostream>

#include "sbtherm/commands.hpp"
#include "sbtherm/errors.hpp"

using namespace sbtherm;

int main(int argc, char** argv) {
  CLI::App app{"sbtherm: sideband-thermometry simulator and analysis toolkit"};
  app.require_subcommand(1);

  CommandOptions opt;
  std::string config, out_dir, preset, container, calib, run_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "configuration file");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
      seed_given = true;
    });
    sub->add_option("--preset", preset, "parameter preset name (aalto-drum)");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "synthesize a sideband frame container");
  add_common(simulate);
  CLI::App* calibrate = app.add_subcommand("calibrate", "run and fit a drive-power sweep");
  add_common(calibrate);
  CLI::App* analyze = app.add_subcommand("analyze", "run the inverse pipeline on a container");
  add_common(analyze);
  analyze->add_option("--container", container, "frame container to analyse")->required();
  analyze->add_option("--calib", calib, "calibration file (defaults to manifest ground truth)");
  CLI::App* thermal = app.add_subcommand("thermal", "thermal budget over a temperature grid");
  add_common(thermal);
  CLI::App* report = app.add_subcommand("report", "summarize a run directory");
  add_common(report);
  report->add_option("run_dir", run_dir, "run directory")->required();

  CLI11_PARSE(app, argc, argv);

  opt.config = config;
  opt.out_dir = out_dir;
  opt.preset = preset;
  opt.container = container;
  opt.calib = calib;
  opt.run_dir = run_dir;
  if (seed_given) opt.seed = seed;

  try {
    if (simulate->parsed()) cmd_simulate(opt);
    if (calibrate->parsed()) cmd_calibrate(opt);
    if (analyze->parsed()) cmd_analyze(opt);
    if (thermal->parsed()) cmd_thermal(opt);
    if (report->parsed()) cmd_report(opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumericalError;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
