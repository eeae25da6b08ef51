#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dct/actuators.hpp"
#include "dct/controller.hpp"
#include "dct/drivetrain.hpp"

namespace dct {

/// Piecewise-linear function of time through (t, value) knots, held constant
/// outside the knot range.
class TorqueProfile {
 public:
  TorqueProfile() = default;
  explicit TorqueProfile(std::vector<std::pair<double, double>> knots);
  static TorqueProfile constant(double value) { return TorqueProfile({{0.0, value}}); }

  double value(double t) const;
  double rate(double t) const;
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

 private:
  std::vector<std::pair<double, double>> knots_;
};

struct ScheduledShift {
  double time = 0.0;
  ShiftRequest request = ShiftRequest::Up;
};

struct InitialCondition {
  GearId gear = GearId::first();
  double drive_shaft_speed = 1.0;  // rad/s
};

struct Scenario {
  VehicleParams vehicle;
  ControllerConfig controller;
  ActuatorLimits limits;
  InitialCondition initial;
  TorqueProfile target_drive_torque = TorqueProfile::constant(0.0);
  double grade = 0.0;        // rad, positive uphill
  double load_torque = 0.0;  // N m at the drive shaft
  std::vector<ScheduledShift> shifts;
  ShiftPolicy policy;
  double dt = 1e-3;
  double duration = 1.0;

  /// Throws std::invalid_argument naming the offending key.
  void validate() const;
  std::size_t steps() const;
};

class SimulationFault : public std::runtime_error {
 public:
  SimulationFault(double time, const std::string& what)
      : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Aero drag, grade and constant load, referred to the drive shaft.
double resistance_torque(double drive_shaft_speed, const Scenario& scenario);

/// Transmitted torques and accelerations of the plant at one instant.
struct PlantRates {
  std::array<double, 2> transmitted{0.0, 0.0};
  double motor_accel = 0.0;
  double vehicle_accel = 0.0;
  double drive_torque = 0.0;
  double load_torque = 0.0;
};

PlantRates evaluate(const DrivetrainState& state, const Scenario& scenario);

/// A lock-up located inside a step, with the drive torque on both sides.
struct EngagementEvent {
  double time = 0.0;
  GearId gear = GearId::first();
  double drive_torque_before = 0.0;
  double drive_torque_after = 0.0;
  double slip_accel_before = 0.0;
};

struct StepReport {
  std::vector<EngagementEvent> engagements;
  int breakaways = 0;
  int slip_reversals = 0;
};

/// Advances the plant by scenario.dt under constant actuator commands.
/// Actuator outputs follow their exact exponential response; the shaft
/// dynamics use classical RK4 with slip zero crossings and breakaway located
/// by bisection. Throws SimulationFault on non-finite state.
DrivetrainState integrate_step(const DrivetrainState& state, const ControlCommand& command,
                               const Scenario& scenario, StepReport* report = nullptr);

struct TraceRecord {
  double time = 0.0;
  double motor_speed = 0.0;
  double drive_shaft_speed = 0.0;
  std::array<double, 2> slip{0.0, 0.0};
  double motor_torque = 0.0;
  std::array<double, 2> clutch_capacity{0.0, 0.0};
  std::array<double, 2> clutch_transmitted{0.0, 0.0};
  ControlCommand command;
  double drive_torque = 0.0;
  double target_drive_torque = 0.0;
  ShiftPhase phase = ShiftPhase::Steady1;
  EngagedClutch engaged = EngagedClutch::None;
};

struct ShiftWindow {
  std::size_t begin = 0;  // record index of the request tick
  std::size_t end = 0;    // record index of the first Steady(target) tick
  GearId target = GearId::first();
  ShiftMode mode = ShiftMode::Powershift;
  bool completed = false;
};

struct Trace {
  double dt = 0.0;
  std::vector<TraceRecord> records;
  std::vector<EngagementEvent> engagements;
  std::vector<ShiftWindow> windows;
  bool feasible = true;
};

struct RunResult {
  Trace trace;
  std::optional<SimulationFault> fault;
  /// Final plant state (after the last recorded tick).
  DrivetrainState final_state;
};

/// Initial plant state: steady in the initial gear with actuators at rest on
/// the controller's hold command.
DrivetrainState initial_state(const Scenario& scenario);

RunResult run(const Scenario& scenario);

struct ShiftMetrics {
  double tracking_error_integral = 0.0;  // N^2 m^2 s
  double shift_duration = 0.0;           // s
  double engagement_torque_step = 0.0;   // N m, signed
  double pre_engagement_slip_accel = 0.0;
  bool engaged = false;
  std::array<double, 3> max_command_rate{0.0, 0.0, 0.0};  // motor, clutch 1, clutch 2 (N m/s)
  double clutch_friction_energy = 0.0;                     // J
  double window_start = 0.0;
  double window_end = 0.0;
};

/// Throws std::domain_error for an empty or out-of-range window.
ShiftMetrics metrics(const Trace& trace, const ShiftWindow& window);

}  // namespace dct
