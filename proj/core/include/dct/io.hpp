#pragma once

// Scenario files, trace CSV and metrics JSON.
//
// Scenario files are sectioned key = value text (see docs/config_format.md).
// All quantities are SI: rad, rad/s, N m, s, m, kg.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dct/sim.hpp"

namespace dct {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, std::string key, const std::string& message);
  int line() const { return line_; }  // 0 when not tied to a line
  const std::string& key() const { return key_; }

 private:
  int line_;
  std::string key_;
};

/// Parses and validates scenario text. Throws ConfigError.
Scenario parse_config(std::string_view text);
Scenario load_config(const std::filesystem::path& path);

/// Writes every field so that parse_config(serialize_config(s)) == s.
std::string serialize_config(const Scenario& scenario);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double value);
/// Strict decimal parse of a whole token; nullopt on trailing junk or non-finite.
std::optional<double> parse_double(std::string_view text);

inline constexpr std::string_view kTraceColumns =
    "t,omega_m,omega_v,omega_s1,omega_s2,T_m,T_c1,T_c2,Tp_m,Tp_c1,Tp_c2,T_d,T_d_target,phase";

void write_trace_csv(std::ostream& out, const Trace& trace,
                     const std::optional<SimulationFault>& fault = std::nullopt);

/// Metrics JSON for a finished run: the first shift's metrics at top level,
/// every shift under "shifts".
std::string metrics_json(const Scenario& scenario, const RunResult& result);

}  // namespace dct
