#include "dct/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "dct/io.hpp"

namespace dct {

std::size_t SweepSpec::size() const {
  const auto n = [](const std::vector<double>& v) { return std::max<std::size_t>(1, v.size()); };
  return n(window_slip_accel) * engage_slip_accel.size() * n(window_slip);
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<double> parse_list(std::string_view value, const std::string& key, int line) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    auto pos = value.find(',', start);
    if (pos == std::string_view::npos) pos = value.size();
    const auto item = trim(value.substr(start, pos - start));
    const auto v = parse_double(item);
    if (!v) throw ConfigError(line, key, "not a number: '" + std::string(item) + "'");
    if (!(*v > 0)) throw ConfigError(line, key, "grid values must be positive");
    out.push_back(*v);
    start = pos + 1;
  }
  return out;
}

}  // namespace

SweepSpec parse_sweep(std::string_view text) {
  SweepSpec spec;
  bool in_section = false;
  bool have_engage = false;
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
      if (line != "[sweep]") throw ConfigError(line_no, std::string(line), "unknown section");
      in_section = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "", "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    if (!in_section) throw ConfigError(line_no, key, "key outside of [sweep]");
    if (key == "Gamma_2_1") {
      spec.window_slip_accel = parse_list(value, key, line_no);
    } else if (key == "Gamma_2_2") {
      spec.engage_slip_accel = parse_list(value, key, line_no);
      have_engage = true;
    } else if (key == "Omega_2") {
      spec.window_slip = parse_list(value, key, line_no);
    } else if (key == "w_duration" || key == "w_step" || key == "w_tracking") {
      const auto v = parse_double(value);
      if (!v || !(*v >= 0) || !std::isfinite(*v)) {
        throw ConfigError(line_no, key, "weight must be a non-negative number");
      }
      (key == "w_duration" ? spec.w_duration : key == "w_step" ? spec.w_step : spec.w_tracking) = *v;
    } else {
      throw ConfigError(line_no, key, "unknown key");
    }
  }
  if (!have_engage) throw ConfigError(0, "Gamma_2_2", "missing required key in [sweep]");
  return spec;
}

SweepSpec load_sweep(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_sweep(ss.str());
}

namespace {

SweepRow evaluate_point(Scenario sc, SweepRow row) {
  sc.controller.window_slip_accel = row.window_slip_accel;
  sc.controller.engage_slip_accel = row.engage_slip_accel;
  sc.controller.window_slip = row.window_slip;
  try {
    sc.validate();
  } catch (const std::exception& ex) {
    row.status = "invalid";
    row.message = ex.what();
    return row;
  }
  const RunResult result = run(sc);
  if (result.fault) {
    row.status = "fault";
    row.message = result.fault->what();
    return row;
  }
  const auto& windows = result.trace.windows;
  if (windows.empty()) {
    row.status = "no_shift";
    return row;
  }
  const ShiftWindow& w = windows.front();
  if (!w.completed) {
    row.status = "incomplete";
    return row;
  }
  row.metrics = metrics(result.trace, w);
  row.status = "ok";
  return row;
}

}  // namespace

std::vector<SweepRow> run_sweep(const Scenario& base, const SweepSpec& spec, unsigned jobs) {
  const auto or_base = [](const std::vector<double>& v, double fallback) {
    return v.empty() ? std::vector<double>{fallback} : v;
  };
  const auto g21 = or_base(spec.window_slip_accel, base.controller.window_slip_accel);
  const auto g22 = spec.engage_slip_accel;
  const auto om2 = or_base(spec.window_slip, base.controller.window_slip);

  std::vector<SweepRow> rows;
  for (double a : g21) {
    for (double b : g22) {
      for (double c : om2) {
        SweepRow r;
        r.index = rows.size();
        r.window_slip_accel = a;
        r.engage_slip_accel = b;
        r.window_slip = c;
        rows.push_back(r);
      }
    }
  }

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) rows[i] = evaluate_point(base, rows[i]);
  };
  const unsigned n_threads =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, jobs), rows.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  // Objective is normalized by the best value among ok rows per term.
  double best_d = 0.0, best_s = 0.0, best_t = 0.0;
  bool any = false;
  for (const auto& r : rows) {
    if (r.status != "ok") continue;
    const double d = r.metrics.shift_duration;
    const double s = std::abs(r.metrics.engagement_torque_step);
    const double t = r.metrics.tracking_error_integral;
    best_d = any ? std::min(best_d, d) : d;
    best_s = any ? std::min(best_s, s) : s;
    best_t = any ? std::min(best_t, t) : t;
    any = true;
  }
  const auto norm = [](double v, double best) { return best > 0 ? v / best : v; };
  for (auto& r : rows) {
    if (r.status != "ok") {
      r.objective = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    r.objective = spec.w_duration * norm(r.metrics.shift_duration, best_d) +
                  spec.w_step * norm(std::abs(r.metrics.engagement_torque_step), best_s) +
                  spec.w_tracking * norm(r.metrics.tracking_error_integral, best_t);
    r.pareto = true;
  }
  for (auto& r : rows) {
    if (r.status != "ok") continue;
    const double d = r.metrics.shift_duration;
    const double s = std::abs(r.metrics.engagement_torque_step);
    for (const auto& o : rows) {
      if (o.status != "ok" || &o == &r) continue;
      const double od = o.metrics.shift_duration;
      const double os = std::abs(o.metrics.engagement_torque_step);
      if (od <= d && os <= s && (od < d || os < s)) {
        r.pareto = false;
        break;
      }
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "index,Gamma_2_1,Gamma_2_2,Omega_2,status,shift_duration_s,engagement_step_Nm,"
         "tracking_error_integral,friction_energy_J,objective,pareto,message\n";
  for (const auto& r : rows) {
    const bool ok = r.status == "ok";
    const auto num = [&](double v) { return ok ? format_double(v) : std::string(); };
    std::string msg = r.message;
    std::replace(msg.begin(), msg.end(), '"', '\'');
    out << r.index << ',' << format_double(r.window_slip_accel) << ','
        << format_double(r.engage_slip_accel) << ',' << format_double(r.window_slip) << ','
        << r.status << ',' << num(r.metrics.shift_duration) << ','
        << num(r.metrics.engagement_torque_step) << ',' << num(r.metrics.tracking_error_integral)
        << ',' << num(r.metrics.clutch_friction_energy) << ',' << num(r.objective) << ','
        << (r.pareto ? 1 : 0) << ",\"" << msg << "\"\n";
  }
}

}  // namespace dct
