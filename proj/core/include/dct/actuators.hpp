#pragma once

#include "dct/drivetrain.hpp"

namespace dct {

/// First-order lag torque actuator, T_dot = (T' - T) / theta, with output limits.
///
/// Commands are clamped to the limits before they act, so the exact
/// exponential update keeps the output inside the limits without a second clamp
/// changing the trajectory.
class FirstOrderActuator {
 public:
  FirstOrderActuator(double time_constant, double lower, double upper, double initial = 0.0);

  /// Advances by dt under a constant command and returns the new output.
  /// Throws std::domain_error for dt <= 0.
  double step(double command, double dt);

  /// Output `elapsed` seconds from now under a constant command; no mutation.
  double output_after(double command, double elapsed) const;

  /// Command whose instantaneous output rate equals desired_rate, clamped.
  double invert(double desired_rate) const;

  double clamp(double value) const;
  void reset(double output);

  double output() const { return output_; }
  double time_constant() const { return time_constant_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }

 private:
  double time_constant_;
  double lower_;
  double upper_;
  double output_;
};

struct ActuatorLimits {
  double motor_max = 2000.0;    // N m, symmetric
  double clutch_max = 2000.0;   // N m capacity
  double rate_limit = 10000.0;  // N m/s, per command channel

  void validate() const;
};

struct ActuatorBank {
  FirstOrderActuator motor;
  FirstOrderActuator clutch1;
  FirstOrderActuator clutch2;

  static ActuatorBank make(const VehicleParams& params, const ActuatorLimits& limits);

  FirstOrderActuator& clutch(GearId gear) { return gear.index() == 1 ? clutch1 : clutch2; }
  const FirstOrderActuator& clutch(GearId gear) const {
    return gear.index() == 1 ? clutch1 : clutch2;
  }
};

}  // namespace dct
