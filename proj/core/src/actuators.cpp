#include "dct/actuators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dct {

FirstOrderActuator::FirstOrderActuator(double time_constant, double lower, double upper,
                                       double initial)
    : time_constant_(time_constant), lower_(lower), upper_(upper), output_(0.0) {
  if (!(time_constant > 0)) {
    throw std::invalid_argument("actuator time constant must be positive");
  }
  if (!(lower <= upper)) {
    throw std::invalid_argument("actuator lower limit exceeds upper limit");
  }
  output_ = clamp(initial);
}

double FirstOrderActuator::clamp(double value) const { return std::clamp(value, lower_, upper_); }

double FirstOrderActuator::output_after(double command, double elapsed) const {
  const double target = clamp(command);
  return target + (output_ - target) * std::exp(-elapsed / time_constant_);
}

double FirstOrderActuator::step(double command, double dt) {
  if (!(dt > 0)) {
    throw std::domain_error("actuator step: dt must be positive");
  }
  output_ = clamp(output_after(command, dt));
  return output_;
}

double FirstOrderActuator::invert(double desired_rate) const {
  return clamp(output_ + time_constant_ * desired_rate);
}

void FirstOrderActuator::reset(double output) { output_ = clamp(output); }

void ActuatorLimits::validate() const {
  if (!(motor_max > 0)) throw std::invalid_argument("T_m_max: must be positive");
  if (!(clutch_max > 0)) throw std::invalid_argument("T_c_max: must be positive");
  if (!(rate_limit > 0)) throw std::invalid_argument("rate_limit: must be positive");
}

ActuatorBank ActuatorBank::make(const VehicleParams& params, const ActuatorLimits& limits) {
  return ActuatorBank{
      FirstOrderActuator(params.motor_time_const, -limits.motor_max, limits.motor_max),
      FirstOrderActuator(params.clutch_time(GearId::first()), 0.0, limits.clutch_max),
      FirstOrderActuator(params.clutch_time(GearId::second()), 0.0, limits.clutch_max),
  };
}

}  // namespace dct
