#include "commands.hpp"

#include <fstream>
#include <ostream>

#include "dct/io.hpp"
#include "dct/sweep.hpp"

namespace dct::cli {

namespace {

bool open_out(const std::filesystem::path& dir, const char* name, std::ofstream& file,
              std::ostream& log) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  file.open(dir / name);
  if (!file) {
    log << "error: cannot write " << (dir / name).string() << '\n';
    return false;
  }
  return true;
}

}  // namespace

int cmd_run(const std::filesystem::path& config, const std::filesystem::path& out_dir,
            std::optional<double> dt, std::ostream& log) {
  Scenario sc;
  try {
    sc = load_config(config);
    if (dt) {
      sc.dt = *dt;
      sc.validate();
    }
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << '\n';
    return kValidation;
  }

  std::ofstream trace_file;
  if (!open_out(out_dir, "trace.csv", trace_file, log)) return kValidation;

  if (sc.steps() == 0) {
    write_trace_csv(trace_file, Trace{});
    log << "error: duration shorter than one step, nothing simulated\n";
    return kValidation;
  }

  const RunResult result = run(sc);
  write_trace_csv(trace_file, result.trace, result.fault);

  std::ofstream metrics_file;
  if (!open_out(out_dir, "metrics.json", metrics_file, log)) return kValidation;
  metrics_file << metrics_json(sc, result);

  if (result.fault) {
    log << "fault at t=" << result.fault->time() << ": " << result.fault->what() << '\n';
    return kFault;
  }
  log << "ok: " << result.trace.records.size() << " steps, " << result.trace.windows.size()
      << " shift(s)\n";
  return kOk;
}

int cmd_sweep(const std::filesystem::path& config, const std::filesystem::path& sweep,
              const std::filesystem::path& out_dir, unsigned jobs, std::ostream& log) {
  Scenario sc;
  SweepSpec spec;
  try {
    sc = load_config(config);
    spec = load_sweep(sweep);
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kValidation;
  }
  const auto rows = run_sweep(sc, spec, jobs);
  std::ofstream out;
  if (!open_out(out_dir, "sweep.csv", out, log)) return kValidation;
  write_sweep_csv(out, rows);
  std::size_t ok = 0;
  for (const auto& r : rows) ok += r.status == "ok";
  log << "ok: " << ok << " of " << rows.size() << " points completed\n";
  return kOk;
}

int cmd_validate(const std::filesystem::path& config, std::ostream& log) {
  try {
    const Scenario sc = load_config(config);
    log << "ok: " << sc.steps() << " steps, " << sc.shifts.size() << " shift(s)\n";
    return kOk;
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kValidation;
  }
}

}  // namespace dct::cli
