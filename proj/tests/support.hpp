#pragma once

// Shared helpers for the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include "dct/io.hpp"
#include "dct/sim.hpp"

namespace dct::testing {

inline std::filesystem::path config_path(const char* name) {
  return std::filesystem::path(DCT_SOURCE_DIR) / "configs" / name;
}

// Eliminating the drive-shaft acceleration from the motor balance gives the
// engaged clutch torque directly.
inline double demand_closed_form(GearId g, double tm, double tv, const VehicleParams& p) {
  const double i = p.gear_ratio(g) * p.ratio_final;
  return (tm * p.vehicle_inertia + p.motor_inertia * i * tv) /
         (p.vehicle_inertia + i * i * p.final_drive_efficiency * p.motor_inertia);
}

inline Scenario downshift_reference() { return load_config(config_path("wheel_loader_10t.ini")); }
inline Scenario upshift_reference() {
  return load_config(config_path("wheel_loader_10t_upshift.ini"));
}

/// Power balance residual of one recorded tick, relative to motor power
/// (floored at 1 W so that idle ticks compare in absolute terms).
inline double power_residual(const TraceRecord& rec, const Scenario& sc) {
  const VehicleParams& p = sc.vehicle;
  DrivetrainState s;
  s.motor_speed = rec.motor_speed;
  s.drive_shaft_speed = rec.drive_shaft_speed;
  s.motor_torque = rec.motor_torque;
  s.clutch_capacity = rec.clutch_capacity;
  s.engaged = rec.engaged;
  const PlantRates r = evaluate(s, sc);
  const double motor_power = rec.motor_torque * rec.motor_speed;
  double friction = 0.0;
  double geared = 0.0;
  for (GearId g : {GearId::first(), GearId::second()}) {
    friction += r.transmitted[g.slot()] * clutch_slip(s, g, p);
    geared += r.transmitted[g.slot()] * p.gear_ratio(g);
  }
  const double final_drive_loss =
      (1.0 - p.final_drive_efficiency) * geared * p.ratio_final * rec.drive_shaft_speed;
  const double load_power = r.load_torque * rec.drive_shaft_speed;
  const double kinetic = p.motor_inertia * rec.motor_speed * r.motor_accel +
                         p.vehicle_inertia * rec.drive_shaft_speed * r.vehicle_accel;
  const double residual = motor_power - friction - final_drive_loss - load_power - kinetic;
  return std::abs(residual) / std::max(std::abs(motor_power), 1.0);
}

inline double max_power_residual(const Trace& trace, const Scenario& sc) {
  double worst = 0.0;
  for (const auto& rec : trace.records) worst = std::max(worst, power_residual(rec, sc));
  return worst;
}

/// Free segment with both clutches sliding under constant commands.
struct OrderStudy {
  std::vector<double> dts;
  std::vector<double> errors;
  double min_ratio = 0.0;
};

inline OrderStudy integrator_order_study() {
  Scenario sc;
  sc.vehicle.drag_coeff = 0.8;
  sc.grade = 0.05;
  DrivetrainState s0;
  s0.drive_shaft_speed = 2.0;
  s0.motor_speed = 150.0;
  s0.motor_torque = 20.0;
  s0.clutch_capacity = {10.0, 5.0};
  ControlCommand cmd;
  cmd.motor = 320.0;
  cmd.clutch = {180.0, 90.0};
  const double horizon = 0.08;

  const auto integrate = [&](double dt) {
    Scenario s = sc;
    s.dt = dt;
    DrivetrainState x = s0;
    const int n = static_cast<int>(std::lround(horizon / dt));
    for (int i = 0; i < n; ++i) x = integrate_step(x, cmd, s);
    return x;
  };
  const DrivetrainState ref = integrate(horizon / 2560.0);
  OrderStudy study;
  for (double dt : {0.02, 0.01, 0.005, 0.0025}) {
    const DrivetrainState x = integrate(dt);
    study.dts.push_back(dt);
    study.errors.push_back(std::max(std::abs(x.motor_speed - ref.motor_speed),
                                    std::abs(x.drive_shaft_speed - ref.drive_shaft_speed) *
                                        sc.vehicle.ratio_final * sc.vehicle.ratio_gear1));
  }
  study.min_ratio = 1e300;
  for (std::size_t i = 1; i < study.errors.size(); ++i) {
    study.min_ratio = std::min(study.min_ratio, study.errors[i - 1] / study.errors[i]);
  }
  return study;
}

}  // namespace dct::testing
