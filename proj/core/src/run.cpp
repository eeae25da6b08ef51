#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dct/sim.hpp"

namespace dct {

TorqueProfile::TorqueProfile(std::vector<std::pair<double, double>> knots)
    : knots_(std::move(knots)) {
  if (knots_.empty()) {
    throw std::invalid_argument("td_target: profile needs at least one point");
  }
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (!(knots_[i].first > knots_[i - 1].first)) {
      throw std::invalid_argument("td_target: times must be strictly increasing");
    }
  }
}

double TorqueProfile::value(double t) const {
  if (knots_.empty()) return 0.0;
  if (t <= knots_.front().first) return knots_.front().second;
  if (t >= knots_.back().first) return knots_.back().second;
  auto hi = std::upper_bound(knots_.begin(), knots_.end(), t,
                             [](double x, const auto& k) { return x < k.first; });
  auto lo = std::prev(hi);
  const double w = (t - lo->first) / (hi->first - lo->first);
  return lo->second + w * (hi->second - lo->second);
}

double TorqueProfile::rate(double t) const {
  if (knots_.size() < 2 || t < knots_.front().first || t >= knots_.back().first) return 0.0;
  auto hi = std::upper_bound(knots_.begin(), knots_.end(), t,
                             [](double x, const auto& k) { return x < k.first; });
  auto lo = std::prev(hi);
  return (hi->second - lo->second) / (hi->first - lo->first);
}

void Scenario::validate() const {
  vehicle.validate();
  controller.validate();
  limits.validate();
  if (!(dt > 0)) throw std::invalid_argument("dt: must be positive");
  if (!(duration > 0)) throw std::invalid_argument("duration: must be positive");
  const double fastest = std::min({vehicle.motor_time_const, vehicle.clutch_time(GearId::first()),
                                   vehicle.clutch_time(GearId::second())});
  if (dt > fastest / 4.0) {
    throw std::invalid_argument("dt: must not exceed a quarter of the fastest actuator time constant");
  }
  if (!std::isfinite(grade) || std::abs(grade) >= 1.5707963267948966) {
    throw std::invalid_argument("grade: must be a finite angle within (-pi/2, pi/2)");
  }
  if (!std::isfinite(load_torque)) throw std::invalid_argument("load: must be finite");
  if (!std::isfinite(initial.drive_shaft_speed)) {
    throw std::invalid_argument("omega_v0: must be finite");
  }
  if (target_drive_torque.knots().empty()) {
    throw std::invalid_argument("td_target: profile needs at least one point");
  }
  for (const auto& s : shifts) {
    if (!(s.time >= 0)) throw std::invalid_argument("shifts: times must be non-negative");
    if (s.request == ShiftRequest::None) throw std::invalid_argument("shifts: request must be up or down");
  }
  if (!(policy.max_powershift_speed > 0)) {
    throw std::invalid_argument("policy_v_max: must be positive");
  }
}

std::size_t Scenario::steps() const {
  return static_cast<std::size_t>(std::llround(std::floor(duration / dt + 1e-9)));
}

namespace {

ControllerInputs measure(const DrivetrainState& s, const Scenario& sc, double t) {
  ControllerInputs in;
  in.time = t;
  in.target_drive_torque = sc.target_drive_torque.value(t);
  in.target_drive_torque_rate = sc.target_drive_torque.rate(t);
  in.motor_speed = s.motor_speed;
  in.drive_shaft_speed = s.drive_shaft_speed;
  in.motor_torque = s.motor_torque;
  in.clutch_capacity = s.clutch_capacity;
  return in;
}

}  // namespace

DrivetrainState initial_state(const Scenario& sc) {
  const GearId gear = sc.initial.gear;
  DrivetrainState s;
  s.time = 0.0;
  s.drive_shaft_speed = sc.initial.drive_shaft_speed;
  s.motor_speed = primary_speed(s.drive_shaft_speed, gear, sc.vehicle);
  s.engaged = clutch_of(gear);
  s.active_gear = gear;
  const PowershiftController controller(sc.vehicle, sc.controller, sc.limits, gear, sc.dt);
  const ControlCommand cmd = controller.initial_command(measure(s, sc, 0.0));
  s.motor_torque = std::clamp(cmd.motor, -sc.limits.motor_max, sc.limits.motor_max);
  s.clutch_capacity = {std::clamp(cmd.clutch[0], 0.0, sc.limits.clutch_max),
                       std::clamp(cmd.clutch[1], 0.0, sc.limits.clutch_max)};
  return s;
}

RunResult run(const Scenario& sc) {
  sc.validate();
  RunResult result;
  Trace& trace = result.trace;
  trace.dt = sc.dt;

  DrivetrainState state = initial_state(sc);
  PowershiftController controller(sc.vehicle, sc.controller, sc.limits, sc.initial.gear, sc.dt);

  std::vector<ScheduledShift> shifts = sc.shifts;
  std::stable_sort(shifts.begin(), shifts.end(),
                   [](const auto& a, const auto& b) { return a.time < b.time; });
  std::size_t next_shift = 0;
  std::optional<std::size_t> open_window;

  const std::size_t n_steps = sc.steps();
  trace.records.reserve(n_steps);
  for (std::size_t n = 0; n < n_steps; ++n) {
    const double t = static_cast<double>(n) * sc.dt;
    state.time = t;

    ControllerInputs in = measure(state, sc, t);
    while (next_shift < shifts.size() && shifts[next_shift].time <= t + 1e-9 * sc.dt) {
      in.request = shifts[next_shift].request;
      ++next_shift;
    }
    if (in.request != ShiftRequest::None) {
      in.mode = shift_permitted(sc.grade, state.drive_shaft_speed * sc.vehicle.wheel_radius,
                                in.request, sc.policy);
    }

    const ShiftPhase before = controller.phase();
    const ControlCommand cmd = controller.tick(in);
    const ShiftPhase phase = controller.phase();
    if (is_steady(before) && !is_steady(phase)) {
      ShiftWindow w;
      w.begin = n;
      w.target = phase_gear(phase);
      w.mode = controller.shift_mode();
      trace.windows.push_back(w);
      open_window = trace.windows.size() - 1;
    } else if (open_window && phase == steady_phase(trace.windows[*open_window].target)) {
      trace.windows[*open_window].end = n;
      trace.windows[*open_window].completed = true;
      open_window.reset();
    }
    trace.feasible = trace.feasible && cmd.feasible;

    const PlantRates pr = evaluate(state, sc);
    TraceRecord rec;
    rec.time = t;
    rec.motor_speed = state.motor_speed;
    rec.drive_shaft_speed = state.drive_shaft_speed;
    rec.slip = {clutch_slip(state, GearId::first(), sc.vehicle),
                clutch_slip(state, GearId::second(), sc.vehicle)};
    rec.motor_torque = state.motor_torque;
    rec.clutch_capacity = state.clutch_capacity;
    rec.clutch_transmitted = pr.transmitted;
    rec.command = cmd;
    rec.drive_torque = pr.drive_torque;
    rec.target_drive_torque = in.target_drive_torque;
    rec.phase = phase;
    rec.engaged = state.engaged;
    trace.records.push_back(rec);

    StepReport report;
    try {
      state = integrate_step(state, cmd, sc, &report);
    } catch (const SimulationFault& fault) {
      result.fault = fault;
      break;
    }
    trace.engagements.insert(trace.engagements.end(), report.engagements.begin(),
                             report.engagements.end());
  }
  if (open_window && !trace.records.empty()) {
    trace.windows[*open_window].end = trace.records.size() - 1;
  }
  result.final_state = state;
  return result;
}

}  // namespace dct
