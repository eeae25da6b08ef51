#include "dct/drivetrain.hpp"

#include <cmath>
#include <stdexcept>

namespace dct {

namespace {

void require(bool ok, const char* field, const char* what) {
  if (!ok) {
    throw std::invalid_argument(std::string(field) + ": " + what);
  }
}

}  // namespace

GearId GearId::from_index(int index) {
  if (index != 1 && index != 2) {
    throw std::invalid_argument("gear index must be 1 or 2, got " + std::to_string(index));
  }
  return GearId(index);
}

double GearId::ratio(const VehicleParams& params) const { return params.gear_ratio(*this); }

double VehicleParams::clutch_time(GearId gear) const {
  const auto& override_value = gear.index() == 1 ? clutch1_time_const : clutch2_time_const;
  return override_value.value_or(clutch_time_const);
}

void VehicleParams::validate() const {
  require(motor_inertia > 0, "J_m", "must be positive");
  require(vehicle_mass > 0, "m_v", "must be positive");
  require(wheel_radius > 0, "r_rad", "must be positive");
  require(vehicle_inertia > 0, "J_v", "must be positive");
  require(drag_coeff >= 0, "c_w", "must be non-negative");
  require(reference_area >= 0, "A_v", "must be non-negative");
  require(air_density >= 0, "rho_air", "must be non-negative");
  require(ratio_gear1 > 0, "i_1", "must be positive");
  require(ratio_gear2 > 0, "i_2", "must be positive");
  require(ratio_final > 0, "i_final", "must be positive");
  require(final_drive_efficiency > 0 && final_drive_efficiency <= 1, "eta", "must lie in (0, 1]");
  require(motor_time_const > 0, "theta_m", "must be positive");
  require(clutch_time_const > 0, "theta_c", "must be positive");
  require(!clutch1_time_const || *clutch1_time_const > 0, "theta_c1", "must be positive");
  require(!clutch2_time_const || *clutch2_time_const > 0, "theta_c2", "must be positive");
  require(ratio_gear1 > ratio_gear2, "i_1", "gear 1 must be the low gear (i_1 > i_2)");
}

std::optional<GearId> engaged_gear(EngagedClutch clutch) {
  switch (clutch) {
    case EngagedClutch::Clutch1:
      return GearId::first();
    case EngagedClutch::Clutch2:
      return GearId::second();
    case EngagedClutch::None:
      break;
  }
  return std::nullopt;
}

EngagedClutch clutch_of(GearId gear) {
  return gear.index() == 1 ? EngagedClutch::Clutch1 : EngagedClutch::Clutch2;
}

double equivalent_inertia(double mass, double radius) {
  if (!(mass > 0) || !(radius > 0)) {
    throw std::domain_error("equivalent_inertia: mass and radius must be positive");
  }
  return mass * radius * radius;
}

double primary_speed(double drive_shaft_speed, GearId gear, const VehicleParams& params) {
  return drive_shaft_speed * params.ratio_final * params.gear_ratio(gear);
}

double clutch_slip(const DrivetrainState& state, GearId gear, const VehicleParams& params) {
  return state.motor_speed - primary_speed(state.drive_shaft_speed, gear, params);
}

double drive_torque(double clutch1_torque, double clutch2_torque, const VehicleParams& params) {
  return (clutch1_torque * params.ratio_gear1 + clutch2_torque * params.ratio_gear2) *
         params.ratio_final * params.final_drive_efficiency;
}

ShaftAccelerations dynamics_free(double motor_torque, double clutch1_torque, double clutch2_torque,
                                 double load_torque, const VehicleParams& params) {
  const double td = drive_torque(clutch1_torque, clutch2_torque, params);
  return {(motor_torque - clutch1_torque - clutch2_torque) / params.motor_inertia,
          (td - load_torque) / params.vehicle_inertia};
}

double dynamics_engaged(GearId gear, double motor_torque, double load_torque,
                        const VehicleParams& params) {
  return dynamics_engaged(gear, motor_torque, load_torque, 0.0, params);
}

double dynamics_engaged(GearId gear, double motor_torque, double load_torque,
                        double other_clutch_torque, const VehicleParams& params) {
  const double i_k = params.gear_ratio(gear);
  const double i_j = params.gear_ratio(gear.other());
  const double fd = params.ratio_final * params.final_drive_efficiency;
  const double reflected =
      params.motor_inertia * i_k * i_k * params.ratio_final * params.ratio_final *
      params.final_drive_efficiency;
  const double drive = (motor_torque - other_clutch_torque) * i_k * fd + other_clutch_torque * i_j * fd;
  return (drive - load_torque) / (params.vehicle_inertia + reflected);
}

double engaged_clutch_demand(GearId gear, double motor_torque, double vehicle_accel,
                             const VehicleParams& params) {
  return motor_torque -
         params.motor_inertia * vehicle_accel * params.ratio_final * params.gear_ratio(gear);
}

bool engagement_holds(double capacity, double demand) { return capacity >= std::abs(demand); }

double torque_drop_at_engagement(double slip_accel_before, GearId target,
                                 const VehicleParams& params) {
  const double i_t = params.gear_ratio(target);
  const double gain = i_t * params.ratio_final * params.final_drive_efficiency;
  const double denom = params.vehicle_inertia + params.motor_inertia * i_t * i_t *
                                                    params.ratio_final * params.ratio_final *
                                                    params.final_drive_efficiency;
  return gain / denom * slip_accel_before * params.motor_inertia * params.vehicle_inertia;
}

}  // namespace dct
