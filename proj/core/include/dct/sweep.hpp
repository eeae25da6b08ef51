#pragma once

// Grid search over the smooth-phase tuning parameters.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dct/sim.hpp"

namespace dct {

struct SweepSpec {
  std::vector<double> window_slip_accel;  // Gamma_2_1; empty keeps the scenario value
  std::vector<double> engage_slip_accel;  // Gamma_2_2
  std::vector<double> window_slip;        // Omega_2; empty keeps the scenario value
  double w_duration = 1.0;
  double w_step = 1.0;
  double w_tracking = 0.0;

  std::size_t size() const;
};

/// [sweep] section with comma-separated grids and objective weights.
/// Throws ConfigError.
SweepSpec parse_sweep(std::string_view text);
SweepSpec load_sweep(const std::filesystem::path& path);

struct SweepRow {
  std::size_t index = 0;
  double window_slip_accel = 0.0;
  double engage_slip_accel = 0.0;
  double window_slip = 0.0;
  std::string status;   // ok, invalid, fault, no_shift, incomplete
  std::string message;
  ShiftMetrics metrics;
  double objective = 0.0;
  bool pareto = false;
};

/// Runs every grid point on up to `jobs` threads. Rows come back in grid
/// order regardless of scheduling.
std::vector<SweepRow> run_sweep(const Scenario& base, const SweepSpec& spec, unsigned jobs);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace dct
