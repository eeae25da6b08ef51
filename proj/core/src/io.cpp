#include "dct/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace dct {

ConfigError::ConfigError(int line, std::string key, const std::string& message)
    : std::runtime_error(
          (line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
          (key.empty() ? std::string() : key + ": ") + message),
      line_(line),
      key_(std::move(key)) {}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_double(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
};

using Section = std::map<std::string, Entry>;

class Reader {
 public:
  explicit Reader(std::string_view text) {
    static const std::set<std::string> kSections{"vehicle", "controller", "scenario", "limits"};
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto nl = text.find('\n', pos);
      std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
      pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError(line_no, "", "malformed section header");
        section = std::string(trim(line.substr(1, line.size() - 2)));
        if (!kSections.count(section)) throw ConfigError(line_no, section, "unknown section");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ConfigError(line_no, "", "expected key = value");
      const std::string key(trim(line.substr(0, eq)));
      if (key.empty()) throw ConfigError(line_no, "", "empty key");
      if (section.empty()) throw ConfigError(line_no, key, "key outside of a section");
      auto& sec = sections_[section];
      if (sec.count(key)) throw ConfigError(line_no, key, "duplicate key");
      sec[key] = Entry{std::string(trim(line.substr(eq + 1))), line_no};
      lines_[key] = line_no;
    }
  }

  // Consumes a key; handler parses the value.
  bool take(const std::string& section, const std::string& key,
            const std::function<void(const Entry&)>& handler) {
    auto s = sections_.find(section);
    if (s == sections_.end()) return false;
    auto e = s->second.find(key);
    if (e == s->second.end()) return false;
    const Entry entry = e->second;
    s->second.erase(e);
    handler(entry);
    return true;
  }

  void number(const std::string& section, const std::string& key, double& out, bool required) {
    const bool found = take(section, key, [&](const Entry& e) { out = to_number(e, key); });
    if (!found && required) throw ConfigError(0, key, "missing required key in [" + section + "]");
  }

  void optional_number(const std::string& section, const std::string& key,
                       std::optional<double>& out) {
    take(section, key, [&](const Entry& e) { out = to_number(e, key); });
  }

  void reject_leftovers() const {
    const Entry* first = nullptr;
    std::string name;
    for (const auto& [section, keys] : sections_) {
      for (const auto& [key, entry] : keys) {
        if (!first || entry.line < first->line) {
          first = &entry;
          name = key;
        }
      }
    }
    if (first) throw ConfigError(first->line, name, "unknown key");
  }

  int line_of(const std::string& key) const {
    auto it = lines_.find(key);
    return it == lines_.end() ? 0 : it->second;
  }

  static double to_number(const Entry& e, const std::string& key) {
    const auto v = parse_double(e.value);
    if (!v) throw ConfigError(e.line, key, "not a number: '" + e.value + "'");
    return *v;
  }

 private:
  std::map<std::string, Section> sections_;
  std::map<std::string, int> lines_;
};

TorqueProfile parse_profile(const Entry& e) {
  std::vector<std::pair<double, double>> knots;
  if (e.value.find(':') == std::string::npos) {
    return TorqueProfile::constant(Reader::to_number(e, "td_target"));
  }
  for (auto item : split(e.value, ',')) {
    const auto parts = split(item, ':');
    std::optional<double> t;
    std::optional<double> v;
    if (parts.size() == 2) {
      t = parse_double(parts[0]);
      v = parse_double(parts[1]);
    }
    if (!t || !v) throw ConfigError(e.line, "td_target", "expected time:value, got '" + std::string(item) + "'");
    knots.emplace_back(*t, *v);
  }
  try {
    return TorqueProfile(std::move(knots));
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(e.line, "td_target", ex.what());
  }
}

std::vector<ScheduledShift> parse_shifts(const Entry& e) {
  std::vector<ScheduledShift> out;
  if (trim(e.value).empty()) return out;
  for (auto item : split(e.value, ',')) {
    const auto parts = split(item, ':');
    std::optional<double> t;
    if (parts.size() == 2) t = parse_double(parts[0]);
    if (!t || (parts[1] != "up" && parts[1] != "down")) {
      throw ConfigError(e.line, "shifts", "expected time:up or time:down, got '" + std::string(item) + "'");
    }
    out.push_back({*t, parts[1] == "up" ? ShiftRequest::Up : ShiftRequest::Down});
  }
  return out;
}

}  // namespace

Scenario parse_config(std::string_view text) {
  Reader rd(text);
  Scenario sc;
  VehicleParams& v = sc.vehicle;

  rd.number("vehicle", "J_m", v.motor_inertia, true);
  rd.number("vehicle", "m_v", v.vehicle_mass, true);
  rd.number("vehicle", "r_rad", v.wheel_radius, true);
  bool has_jv = rd.take("vehicle", "J_v", [&](const Entry& e) { v.vehicle_inertia = Reader::to_number(e, "J_v"); });
  rd.number("vehicle", "c_w", v.drag_coeff, true);
  rd.number("vehicle", "A_v", v.reference_area, true);
  rd.number("vehicle", "rho_air", v.air_density, true);
  rd.number("vehicle", "i_1", v.ratio_gear1, true);
  rd.number("vehicle", "i_2", v.ratio_gear2, true);
  rd.number("vehicle", "i_final", v.ratio_final, true);
  rd.number("vehicle", "eta", v.final_drive_efficiency, true);
  rd.number("vehicle", "theta_m", v.motor_time_const, true);
  rd.number("vehicle", "theta_c", v.clutch_time_const, true);
  rd.optional_number("vehicle", "theta_c1", v.clutch1_time_const);
  rd.optional_number("vehicle", "theta_c2", v.clutch2_time_const);
  if (!has_jv) v.vehicle_inertia = v.vehicle_mass * v.wheel_radius * v.wheel_radius;

  ControllerConfig& c = sc.controller;
  rd.number("controller", "Gamma_1", c.fast_slip_accel, false);
  rd.number("controller", "Gamma_2_1", c.window_slip_accel, false);
  rd.number("controller", "Gamma_2_2", c.engage_slip_accel, false);
  rd.number("controller", "Omega_2", c.window_slip, false);
  rd.number("controller", "dds_set", c.torque_phase_slip_jerk, false);
  rd.number("controller", "handover_s", c.handover_time, false);
  rd.number("controller", "eps_slip", c.engaged_slip_band, false);
  rd.number("controller", "est_tau", c.estimator_tau, false);
  rd.number("controller", "hold_safety", c.hold_margin, false);
  rd.number("controller", "release_tol", c.release_tolerance, false);

  rd.number("limits", "T_m_max", sc.limits.motor_max, false);
  rd.number("limits", "T_c_max", sc.limits.clutch_max, false);
  rd.number("limits", "rate_limit", sc.limits.rate_limit, false);

  rd.number("scenario", "dt", sc.dt, false);
  rd.number("scenario", "duration", sc.duration, true);
  rd.number("scenario", "grade", sc.grade, false);
  rd.number("scenario", "load", sc.load_torque, false);
  rd.number("scenario", "omega_v0", sc.initial.drive_shaft_speed, false);
  rd.take("scenario", "gear0", [&](const Entry& e) {
    if (e.value == "1") sc.initial.gear = GearId::first();
    else if (e.value == "2") sc.initial.gear = GearId::second();
    else throw ConfigError(e.line, "gear0", "must be 1 or 2");
  });
  if (!rd.take("scenario", "td_target", [&](const Entry& e) { sc.target_drive_torque = parse_profile(e); })) {
    throw ConfigError(0, "td_target", "missing required key in [scenario]");
  }
  rd.take("scenario", "shifts", [&](const Entry& e) { sc.shifts = parse_shifts(e); });
  rd.take("scenario", "policy", [&](const Entry& e) {
    if (e.value == "powershift") sc.policy.managed = false;
    else if (e.value == "managed") sc.policy.managed = true;
    else throw ConfigError(e.line, "policy", "must be powershift or managed");
  });
  rd.number("scenario", "policy_v_max", sc.policy.max_powershift_speed, false);

  rd.reject_leftovers();

  try {
    sc.validate();
  } catch (const std::invalid_argument& ex) {
    const std::string msg = ex.what();
    const auto colon = msg.find(':');
    const std::string key = colon == std::string::npos ? std::string() : msg.substr(0, colon);
    const std::string rest = colon == std::string::npos ? msg : std::string(trim(msg.substr(colon + 1)));
    throw ConfigError(rd.line_of(key), key, rest);
  }
  return sc;
}

Scenario load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const Scenario& sc) {
  std::ostringstream o;
  const auto kv = [&](const char* key, double value) { o << key << " = " << format_double(value) << '\n'; };
  const VehicleParams& v = sc.vehicle;
  o << "[vehicle]\n";
  kv("J_m", v.motor_inertia);
  kv("m_v", v.vehicle_mass);
  kv("r_rad", v.wheel_radius);
  kv("J_v", v.vehicle_inertia);
  kv("c_w", v.drag_coeff);
  kv("A_v", v.reference_area);
  kv("rho_air", v.air_density);
  kv("i_1", v.ratio_gear1);
  kv("i_2", v.ratio_gear2);
  kv("i_final", v.ratio_final);
  kv("eta", v.final_drive_efficiency);
  kv("theta_m", v.motor_time_const);
  kv("theta_c", v.clutch_time_const);
  if (v.clutch1_time_const) kv("theta_c1", *v.clutch1_time_const);
  if (v.clutch2_time_const) kv("theta_c2", *v.clutch2_time_const);

  const ControllerConfig& c = sc.controller;
  o << "\n[controller]\n";
  kv("Gamma_1", c.fast_slip_accel);
  kv("Gamma_2_1", c.window_slip_accel);
  kv("Gamma_2_2", c.engage_slip_accel);
  kv("Omega_2", c.window_slip);
  kv("dds_set", c.torque_phase_slip_jerk);
  kv("handover_s", c.handover_time);
  kv("eps_slip", c.engaged_slip_band);
  kv("est_tau", c.estimator_tau);
  kv("hold_safety", c.hold_margin);
  kv("release_tol", c.release_tolerance);

  o << "\n[limits]\n";
  kv("T_m_max", sc.limits.motor_max);
  kv("T_c_max", sc.limits.clutch_max);
  kv("rate_limit", sc.limits.rate_limit);

  o << "\n[scenario]\n";
  kv("dt", sc.dt);
  kv("duration", sc.duration);
  kv("grade", sc.grade);
  kv("load", sc.load_torque);
  kv("omega_v0", sc.initial.drive_shaft_speed);
  o << "gear0 = " << sc.initial.gear.index() << '\n';
  o << "td_target = ";
  const auto& knots = sc.target_drive_torque.knots();
  for (std::size_t i = 0; i < knots.size(); ++i) {
    o << (i ? ", " : "") << format_double(knots[i].first) << ':' << format_double(knots[i].second);
  }
  o << "\nshifts = ";
  for (std::size_t i = 0; i < sc.shifts.size(); ++i) {
    o << (i ? ", " : "") << format_double(sc.shifts[i].time) << ':'
      << (sc.shifts[i].request == ShiftRequest::Up ? "up" : "down");
  }
  o << "\npolicy = " << (sc.policy.managed ? "managed" : "powershift") << '\n';
  kv("policy_v_max", sc.policy.max_powershift_speed);
  return o.str();
}

void write_trace_csv(std::ostream& out, const Trace& trace,
                     const std::optional<SimulationFault>& fault) {
  out << kTraceColumns << '\n';
  for (const auto& r : trace.records) {
    const double values[] = {r.time,
                             r.motor_speed,
                             r.drive_shaft_speed,
                             r.slip[0],
                             r.slip[1],
                             r.motor_torque,
                             r.clutch_capacity[0],
                             r.clutch_capacity[1],
                             r.command.motor,
                             r.command.clutch[0],
                             r.command.clutch[1],
                             r.drive_torque,
                             r.target_drive_torque};
    for (double v : values) out << format_double(v) << ',';
    out << to_string(r.phase) << '\n';
  }
  if (fault) out << "# fault at t=" << format_double(fault->time()) << ": " << fault->what() << '\n';
}

namespace {

nlohmann::json shift_json(const Trace& trace, const ShiftWindow& w) {
  const ShiftMetrics m = metrics(trace, w);
  nlohmann::json j;
  j["target_gear"] = w.target.index();
  j["mode"] = w.mode == ShiftMode::Powershift ? "powershift" : "sequential";
  j["completed"] = w.completed;
  j["window_start_s"] = m.window_start;
  j["window_end_s"] = m.window_end;
  j["tracking_error_integral"] = m.tracking_error_integral;
  j["shift_duration_s"] = m.shift_duration;
  j["engagement_step_Nm"] = m.engagement_torque_step;
  j["pre_engagement_slip_accel"] = m.pre_engagement_slip_accel;
  j["friction_energy_J"] = m.clutch_friction_energy;
  j["max_command_rate"] = {{"motor", m.max_command_rate[0]},
                           {"clutch1", m.max_command_rate[1]},
                           {"clutch2", m.max_command_rate[2]}};
  return j;
}

}  // namespace

std::string metrics_json(const Scenario& scenario, const RunResult& result) {
  const Trace& trace = result.trace;
  nlohmann::json root;
  nlohmann::json shifts = nlohmann::json::array();
  for (const auto& w : trace.windows) {
    if (w.end <= w.begin || w.end >= trace.records.size()) continue;
    nlohmann::json s = shift_json(trace, w);
    s["predicted_step_Nm"] = torque_drop_at_engagement(s["pre_engagement_slip_accel"].get<double>(),
                                                        w.target, scenario.vehicle);
    shifts.push_back(std::move(s));
  }
  for (const char* key : {"tracking_error_integral", "shift_duration_s", "engagement_step_Nm",
                          "friction_energy_J", "max_command_rate"}) {
    root[key] = shifts.empty() ? nlohmann::json() : shifts.front()[key];
  }
  root["shifts"] = shifts;
  root["feasible"] = trace.feasible;
  root["steps"] = trace.records.size();
  root["fault"] = result.fault ? nlohmann::json(result.fault->what()) : nlohmann::json();
  return root.dump(2) + "\n";
}

}  // namespace dct
