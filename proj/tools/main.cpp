#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Dual-clutch hydrostatic powertrain simulator"};
  app.require_subcommand(1);

  std::string config;
  std::string out = ".";
  std::string sweep;
  double dt = 0.0;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());

  auto* run = app.add_subcommand("run", "simulate a scenario, write trace.csv and metrics.json");
  run->add_option("--config", config, "scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "output directory");
  auto* dt_opt = run->add_option("--dt", dt, "override the integration step (s)");

  auto* sw = app.add_subcommand("sweep", "grid search over smooth-phase parameters");
  sw->add_option("--config", config, "base scenario file")->required()->check(CLI::ExistingFile);
  sw->add_option("--sweep", sweep, "sweep spec file")->required()->check(CLI::ExistingFile);
  sw->add_option("--out", out, "output directory");
  sw->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  auto* val = app.add_subcommand("validate", "parse and validate a scenario file");
  val->add_option("--config", config, "scenario file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : dct::cli::kValidation;
  }

  if (*run) {
    std::optional<double> dt_override;
    if (*dt_opt) dt_override = dt;
    return dct::cli::cmd_run(config, out, dt_override, std::cerr);
  }
  if (*sw) return dct::cli::cmd_sweep(config, sweep, out, jobs, std::cerr);
  return dct::cli::cmd_validate(config, std::cerr);
}
