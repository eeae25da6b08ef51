#pragma once

// Powershift controller: a phase selector plus a torque generator that
// produces motor and clutch commands every tick, pre-compensated for the
// first-order actuator lags.
//
// Slip convention: during a shift, slip is measured against the on-coming
// gear. Calibration accelerations and the window slip are stored as
// magnitudes; each approach applies its own direction.

#include <array>
#include <optional>
#include <string_view>

#include "dct/actuators.hpp"
#include "dct/drivetrain.hpp"
#include "dct/estimator.hpp"

namespace dct {

enum class ShiftPhase {
  Steady1,
  Steady2,
  UpshiftTorquePhase,
  UpshiftInertiaFast,
  UpshiftInertiaSmooth,
  UpshiftForced,
  DownshiftFast1,    // P0
  DownshiftSmooth1,  // P1
  DownshiftFast2,    // P2, cross-shift
  DownshiftSmooth2,  // P3
  DownshiftForced,   // P4
};

enum class ShiftRequest { None, Up, Down };
enum class ShiftMode { Powershift, Sequential, Deny };

std::string_view to_string(ShiftPhase phase);
std::optional<ShiftPhase> phase_from_string(std::string_view name);
std::string_view to_string(ShiftMode mode);

ShiftPhase steady_phase(GearId gear);
bool is_steady(ShiftPhase phase);
bool is_forced(ShiftPhase phase);
bool is_smooth(ShiftPhase phase);
bool is_fast(ShiftPhase phase);
/// Gear held in a steady phase, or the target gear of a shift phase.
GearId phase_gear(ShiftPhase phase);

struct ControllerConfig {
  double fast_slip_accel = 40.0;         // rad/s^2, held during fast phases
  double window_slip_accel = 10.0;       // rad/s^2, arrival at the cross-shift window
  double engage_slip_accel = 1.0;        // rad/s^2, arrival at lock-up
  double torque_phase_slip_jerk = 5.0;   // rad/s^3
  double window_slip = 10.0;             // rad/s
  double handover_time = 0.3;            // s
  double engaged_slip_band = kSlipTolerance;
  double estimator_tau = 0.01;           // s
  double hold_margin = 1.2;              // capacity / demand while holding a gear
  double release_tolerance = 0.1;        // N m, off-going capacity counted as released

  void validate() const;
};

struct ControlCommand {
  double motor = 0.0;
  std::array<double, 2> clutch{0.0, 0.0};  // capacities, >= 0
  bool feasible = true;                    // false when a limit clipped the raw command

  double clutch_for(GearId gear) const { return clutch[gear.slot()]; }
};

struct ControllerInputs {
  double time = 0.0;
  double target_drive_torque = 0.0;
  double target_drive_torque_rate = 0.0;
  double motor_speed = 0.0;
  double drive_shaft_speed = 0.0;
  double motor_torque = 0.0;                        // realized actuator output
  std::array<double, 2> clutch_capacity{0.0, 0.0};  // realized actuator outputs
  ShiftRequest request = ShiftRequest::None;
  ShiftMode mode = ShiftMode::Powershift;
};

/// Quantities the controller derives from speed measurements alone.
struct StateEstimates {
  std::array<double, 2> slip{0.0, 0.0};        // vs gear 1, vs gear 2
  std::array<double, 2> slip_accel{0.0, 0.0};
  bool slip_accel_valid = false;
  double vehicle_accel = 0.0;
  double vehicle_jerk = 0.0;
};

/// Target slip, signed arrival slip acceleration and travel direction of one
/// fast/smooth approach.
struct Approach {
  double target_slip = 0.0;
  double arrival_accel = 0.0;
  int direction = -1;
};

std::optional<Approach> approach_of(ShiftPhase phase, const ControllerConfig& cfg);

/// Inputs the phase selector looks at.
struct PhaseSignals {
  ShiftRequest request = ShiftRequest::None;
  ShiftMode mode = ShiftMode::Powershift;
  double slip = 0.0;                    // vs the on-coming gear of the current shift
  std::optional<double> slip_accel;
  double offgoing_command = 0.0;
  double offgoing_output = 0.0;
  bool target_engaged = false;
};

ShiftPhase select_phase(ShiftPhase phase, const PhaseSignals& signals, const ControllerConfig& cfg,
                        const VehicleParams& params);

/// Slip level at which a critically damped glide started now reaches
/// `target_slip` with slip acceleration `arrival_accel` (signed).
double trigger_level(double slip_accel, double target_slip, double arrival_accel,
                     double motor_time_const);

/// True once the slip has reached the trigger level in the direction of travel
/// given by the sign of `arrival_accel`.
bool smooth_trigger(double slip, double slip_accel, double target_slip, double arrival_accel,
                    double motor_time_const);

/// Slip jerk demanded by the critically damped law.
double smooth_slip_jerk(double slip, double target_slip, double arrival_accel,
                        double motor_time_const);

/// Motor command that makes the slip against `gear` follow
/// slip_jerk = -slip_accel / theta_m + u, given the transmitted clutch torque
/// and its rate.
double motor_command_for_slip_jerk(double u, GearId gear, double transmitted_clutch_torque,
                                   double transmitted_clutch_rate, const StateEstimates& est,
                                   const VehicleParams& params);

struct HandoverTargets {
  double offgoing = 0.0;
  double oncoming = 0.0;
};

/// Clutch targets with the off-going share reduced linearly by `fraction`
/// (0 at entry, 1 at the end) while the drive torque stays on target.
HandoverTargets handover_targets(double target_drive_torque, GearId from, GearId to,
                                 double fraction, const VehicleParams& params);

ControlCommand torque_phase_command(const ControllerInputs& in, const StateEstimates& est,
                                    double elapsed, const ControllerConfig& cfg,
                                    const VehicleParams& params);

/// Slip acceleration against `gear` implied by the realized motor and clutch
/// torques while the motor shaft slides.
double model_slip_accel(const ControllerInputs& in, const StateEstimates& est, GearId gear,
                        const ControllerConfig& cfg, const VehicleParams& params);

/// Fast and smooth inertia-phase commands. With dt > 0 the motor command is
/// held for dt and chosen so the slip acceleration at the end of the hold
/// lands on the ideal closed-loop trajectory; dt = 0 gives the
/// continuous-time inversion.
ControlCommand inertia_phase_command(const ControllerInputs& in, const StateEstimates& est,
                                     ShiftPhase phase, double handover_elapsed, ShiftMode mode,
                                     const ControllerConfig& cfg, const VehicleParams& params,
                                     double dt = 0.0);

/// Holds `gear` engaged: capacity above the demand by the hold margin, motor
/// torque set from the torque balance so the drive torque meets the target.
/// Used for steady driving and for the forced-engagement phases.
ControlCommand forced_engage_command(const ControllerInputs& in, const StateEstimates& est,
                                     GearId gear, const ControllerConfig& cfg,
                                     const VehicleParams& params);

struct ShiftPolicy {
  bool managed = false;               // when false every shift is a powershift
  double max_powershift_speed = 2.0;  // m/s
};

ShiftMode shift_permitted(double grade, double velocity, ShiftRequest request,
                          const ShiftPolicy& policy);

class PowershiftController {
 public:
  PowershiftController(const VehicleParams& params, const ControllerConfig& cfg,
                       const ActuatorLimits& limits, GearId initial_gear, double dt);

  ControlCommand tick(const ControllerInputs& in);

  /// Steady hold command for the initial gear with zero accelerations; used to
  /// start a simulation from a consistent actuator state.
  ControlCommand initial_command(const ControllerInputs& in) const;

  ShiftPhase phase() const { return phase_; }
  ShiftMode shift_mode() const { return mode_; }
  const StateEstimates& estimates() const { return est_; }
  bool last_request_rejected() const { return rejected_; }

 private:
  void update_estimates(const ControllerInputs& in);
  ControlCommand raw_command(const ControllerInputs& in) const;
  ControlCommand finalize(const ControlCommand& raw);

  VehicleParams params_;
  ControllerConfig cfg_;
  ActuatorLimits limits_;
  double dt_;
  ShiftPhase phase_;
  ShiftMode mode_ = ShiftMode::Powershift;
  double handover_start_ = 0.0;
  double forced_start_ = 0.0;
  bool rejected_ = false;
  std::array<RateEstimator, 2> slip_rate_;
  RateEstimator vehicle_rate_;
  RateEstimator vehicle_jerk_;
  StateEstimates est_;
  std::optional<ControlCommand> last_command_;
};

}  // namespace dct
