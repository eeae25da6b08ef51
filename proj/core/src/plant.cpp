#include <algorithm>
#include <cmath>

#include "dct/sim.hpp"

namespace dct {

namespace {

constexpr double kSlipCrossingTolerance = 1e-6;  // rad/s
constexpr int kMaxEventsPerStep = 16;
constexpr int kMaxBisections = 200;

struct ShaftSpeeds {
  double motor = 0.0;
  double vehicle = 0.0;
};

struct Rates {
  double motor_accel = 0.0;
  double vehicle_accel = 0.0;
  std::array<double, 2> transmitted{0.0, 0.0};
  double demand = 0.0;  // of the locked clutch
  double drive_torque = 0.0;
  double load_torque = 0.0;
};

struct ActuatorOutputs {
  double motor = 0.0;
  std::array<double, 2> clutch{0.0, 0.0};
};

// Exact actuator responses across one step.
class StepResponse {
 public:
  StepResponse(const DrivetrainState& s, const ControlCommand& cmd, const Scenario& sc)
      : motor_(sc.vehicle.motor_time_const, -sc.limits.motor_max, sc.limits.motor_max,
               s.motor_torque),
        clutch_{FirstOrderActuator(sc.vehicle.clutch_time(GearId::first()), 0.0,
                                   sc.limits.clutch_max, s.clutch_capacity[0]),
                FirstOrderActuator(sc.vehicle.clutch_time(GearId::second()), 0.0,
                                   sc.limits.clutch_max, s.clutch_capacity[1])},
        command_(cmd) {}

  ActuatorOutputs at(double elapsed) const {
    if (elapsed <= 0.0) {
      return {motor_.output(), {clutch_[0].output(), clutch_[1].output()}};
    }
    return {motor_.output_after(command_.motor, elapsed),
            {clutch_[0].output_after(command_.clutch[0], elapsed),
             clutch_[1].output_after(command_.clutch[1], elapsed)}};
  }

 private:
  FirstOrderActuator motor_;
  std::array<FirstOrderActuator, 2> clutch_;
  ControlCommand command_;
};

double slip_of(const ShaftSpeeds& y, GearId g, const VehicleParams& p) {
  return y.motor - primary_speed(y.vehicle, g, p);
}

Rates rates_at(const ActuatorOutputs& out, const ShaftSpeeds& y, std::optional<GearId> locked,
               const std::array<int, 2>& sign, const Scenario& sc) {
  const VehicleParams& p = sc.vehicle;
  Rates r;
  r.load_torque = resistance_torque(y.vehicle, sc);
  if (!locked) {
    for (std::size_t k = 0; k < 2; ++k) r.transmitted[k] = sign[k] * out.clutch[k];
    const auto acc = dynamics_free(out.motor, r.transmitted[0], r.transmitted[1], r.load_torque, p);
    r.motor_accel = acc.motor;
    r.vehicle_accel = acc.vehicle;
  } else {
    const GearId k = *locked;
    const GearId j = k.other();
    const double other = sign[j.slot()] * out.clutch[j.slot()];
    r.vehicle_accel = dynamics_engaged(k, out.motor, r.load_torque, other, p);
    r.motor_accel = r.vehicle_accel * p.ratio_final * p.gear_ratio(k);
    r.demand = engaged_clutch_demand(k, out.motor - other, r.vehicle_accel, p);
    r.transmitted[k.slot()] = r.demand;
    r.transmitted[j.slot()] = other;
  }
  r.drive_torque = drive_torque(r.transmitted[0], r.transmitted[1], p);
  return r;
}

class Stepper {
 public:
  Stepper(const StepResponse& response, const Scenario& sc) : response_(response), sc_(sc) {}

  Rates rates(double at, const ShaftSpeeds& y) const {
    return rates_at(response_.at(at), y, locked, sign, sc_);
  }

  ShaftSpeeds rk4(const ShaftSpeeds& y, double at, double h) const {
    const Rates k1 = rates(at, y);
    const ShaftSpeeds y2{y.motor + 0.5 * h * k1.motor_accel, y.vehicle + 0.5 * h * k1.vehicle_accel};
    const Rates k2 = rates(at + 0.5 * h, y2);
    const ShaftSpeeds y3{y.motor + 0.5 * h * k2.motor_accel, y.vehicle + 0.5 * h * k2.vehicle_accel};
    const Rates k3 = rates(at + 0.5 * h, y3);
    const ShaftSpeeds y4{y.motor + h * k3.motor_accel, y.vehicle + h * k3.vehicle_accel};
    const Rates k4 = rates(at + h, y4);
    return {y.motor + h / 6.0 * (k1.motor_accel + 2 * k2.motor_accel + 2 * k3.motor_accel + k4.motor_accel),
            y.vehicle + h / 6.0 * (k1.vehicle_accel + 2 * k2.vehicle_accel + 2 * k3.vehicle_accel +
                                   k4.vehicle_accel)};
  }

  // Margin by which the locked clutch still holds; negative means breakaway.
  double hold_margin(double at, const ShaftSpeeds& y) const {
    const double capacity = response_.at(at).clutch[locked->slot()];
    return capacity - std::abs(rates(at, y).demand);
  }

  std::optional<GearId> locked;
  std::array<int, 2> sign{1, 1};

 private:
  const StepResponse& response_;
  const Scenario& sc_;
};

bool finite(const ShaftSpeeds& y) { return std::isfinite(y.motor) && std::isfinite(y.vehicle); }

int sign_of(double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

}  // namespace

double resistance_torque(double drive_shaft_speed, const Scenario& sc) {
  const VehicleParams& p = sc.vehicle;
  const double v = drive_shaft_speed * p.wheel_radius;
  const double aero = 0.5 * p.air_density * p.drag_coeff * p.reference_area * v * v *
                      sign_of(drive_shaft_speed);
  return aero * p.wheel_radius + p.vehicle_mass * kGravity * std::sin(sc.grade) * p.wheel_radius +
         sc.load_torque;
}

PlantRates evaluate(const DrivetrainState& s, const Scenario& sc) {
  const ShaftSpeeds y{s.motor_speed, s.drive_shaft_speed};
  std::array<int, 2> sign{};
  for (GearId g : {GearId::first(), GearId::second()}) {
    const int slip_sign = sign_of(slip_of(y, g, sc.vehicle));
    const int hint = s.slip_direction[g.slot()];
    sign[g.slot()] = slip_sign != 0 ? slip_sign : (hint != 0 ? hint : 1);
  }
  const ActuatorOutputs out{s.motor_torque, s.clutch_capacity};
  const Rates r = rates_at(out, y, engaged_gear(s.engaged), sign, sc);
  PlantRates pr;
  pr.transmitted = r.transmitted;
  pr.motor_accel = r.motor_accel;
  pr.vehicle_accel = r.vehicle_accel;
  pr.drive_torque = r.drive_torque;
  pr.load_torque = r.load_torque;
  return pr;
}

DrivetrainState integrate_step(const DrivetrainState& state, const ControlCommand& command,
                               const Scenario& sc, StepReport* report) {
  const VehicleParams& p = sc.vehicle;
  const double dt = sc.dt;
  const StepResponse response(state, command, sc);
  Stepper st(response, sc);
  st.locked = engaged_gear(state.engaged);

  ShaftSpeeds y{state.motor_speed, state.drive_shaft_speed};
  for (GearId g : {GearId::first(), GearId::second()}) {
    const int s = sign_of(slip_of(y, g, p));
    const int hint = state.slip_direction[g.slot()];
    st.sign[g.slot()] = s != 0 ? s : (hint != 0 ? hint : 1);
  }

  double at = 0.0;
  for (int event = 0; event < kMaxEventsPerStep && at < dt; ++event) {
    const double remaining = dt - at;

    if (st.locked && st.hold_margin(at, y) < 0.0) {
      const GearId k = *st.locked;
      st.sign[k.slot()] = st.rates(at, y).demand >= 0 ? 1 : -1;
      st.locked.reset();
      if (report) ++report->breakaways;
    }

    const ShaftSpeeds y_end = st.rk4(y, at, remaining);
    if (!finite(y_end)) {
      throw SimulationFault(state.time + at, "non-finite shaft speed during step");
    }

    double hit = remaining;
    std::optional<GearId> crossing;
    bool breakaway = false;
    if (!st.locked) {
      for (GearId g : {GearId::first(), GearId::second()}) {
        const int sg = st.sign[g.slot()];
        if (sg * slip_of(y_end, g, p) >= 0.0) continue;
        double lo = 0.0;
        double hi = remaining;
        double slip_hi = slip_of(y_end, g, p);
        for (int i = 0; i < kMaxBisections && std::abs(slip_hi) > kSlipCrossingTolerance &&
                        hi - lo > 1e-15;
             ++i) {
          const double mid = 0.5 * (lo + hi);
          const double s = slip_of(st.rk4(y, at, mid), g, p);
          if (sg * s < 0.0) {
            hi = mid;
            slip_hi = s;
          } else {
            lo = mid;
          }
        }
        if (!crossing || hi < hit) {
          hit = hi;
          crossing = g;
        }
      }
    } else if (st.hold_margin(at + remaining, y_end) < 0.0) {
      double lo = 0.0;
      double hi = remaining;
      for (int i = 0; i < kMaxBisections && hi - lo > 1e-13; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (st.hold_margin(at + mid, st.rk4(y, at, mid)) < 0.0) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      hit = hi;
      breakaway = true;
    }

    if (!crossing && !breakaway) {
      y = y_end;
      at = dt;
      break;
    }

    y = hit == remaining ? y_end : st.rk4(y, at, hit);
    at = std::min(dt, at + hit);

    if (crossing) {
      const GearId g = *crossing;
      const Rates before = st.rates(at, y);
      ShaftSpeeds snapped = y;
      snapped.motor = primary_speed(y.vehicle, g, p);
      Stepper trial = st;
      trial.locked = g;
      const Rates after = trial.rates(at, snapped);
      const double capacity = response.at(at).clutch[g.slot()];
      if (engagement_holds(capacity, after.demand)) {
        if (report) {
          EngagementEvent ev;
          ev.time = state.time + at;
          ev.gear = g;
          ev.drive_torque_before = before.drive_torque;
          ev.drive_torque_after = after.drive_torque;
          ev.slip_accel_before =
              before.motor_accel - before.vehicle_accel * p.ratio_final * p.gear_ratio(g);
          report->engagements.push_back(ev);
        }
        y = snapped;
        st.locked = g;
      } else {
        st.sign[g.slot()] = -st.sign[g.slot()];
        if (report) ++report->slip_reversals;
      }
    }
    // Breakaway is handled at the top of the next iteration.
  }

  if (!finite(y)) {
    throw SimulationFault(state.time + dt, "non-finite shaft speed at end of step");
  }

  DrivetrainState next = state;
  const ActuatorOutputs out = response.at(dt);
  next.time = state.time + dt;
  next.motor_speed = y.motor;
  next.drive_shaft_speed = y.vehicle;
  next.motor_torque = out.motor;
  next.clutch_capacity = out.clutch;
  next.engaged = st.locked ? clutch_of(*st.locked) : EngagedClutch::None;
  if (st.locked) {
    next.motor_speed = primary_speed(y.vehicle, *st.locked, p);
    next.active_gear = *st.locked;
  }
  for (std::size_t k = 0; k < 2; ++k) {
    next.slip_direction[k] = (st.locked && st.locked->slot() == k) ? 0 : st.sign[k];
  }
  return next;
}

}  // namespace dct
