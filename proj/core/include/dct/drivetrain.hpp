#pragma once

// Plant equations for the hydrostatic motor + dual-clutch powertrain.
//
// Two configurations exist: a free 2-DOF system (motor shaft and drive shaft
// decoupled, both clutches sliding or open) and an engaged 1-DOF system where
// one clutch holds the motor shaft to its gear's primary speed.

#include <array>
#include <optional>
#include <string>

namespace dct {

inline constexpr double kGravity = 9.81;

/// Slip band inside which a clutch is classified as engaged (rad/s).
inline constexpr double kSlipTolerance = 1e-3;

struct VehicleParams;

/// One of the two forward gears. Gear 1 is the low gear.
class GearId {
 public:
  static constexpr GearId first() { return GearId(1); }
  static constexpr GearId second() { return GearId(2); }
  /// Throws std::invalid_argument unless index is 1 or 2.
  static GearId from_index(int index);

  constexpr int index() const { return index_; }
  constexpr GearId other() const { return GearId(3 - index_); }
  /// 0 for gear 1, 1 for gear 2; handy for per-clutch arrays.
  constexpr std::size_t slot() const { return static_cast<std::size_t>(index_ - 1); }
  double ratio(const VehicleParams& params) const;

  friend constexpr bool operator==(GearId a, GearId b) { return a.index_ == b.index_; }

 private:
  constexpr explicit GearId(int index) : index_(index) {}
  int index_;
};

struct VehicleParams {
  double motor_inertia = 1.5;          // kg m^2
  double vehicle_mass = 9450.0;        // kg
  double wheel_radius = 0.615;         // m
  double vehicle_inertia = 3574.2;     // kg m^2, wheel-side equivalent
  double drag_coeff = 0.8;
  double reference_area = 0.8;         // m^2
  double air_density = 1.293;          // kg/m^3
  double ratio_gear1 = 3.74;
  double ratio_gear2 = 1.5;
  double ratio_final = 15.429;
  double final_drive_efficiency = 0.9;
  double motor_time_const = 0.08;      // s
  double clutch_time_const = 0.04;     // s
  std::optional<double> clutch1_time_const;
  std::optional<double> clutch2_time_const;

  /// The 10 t wheel loader the defaults describe.
  static VehicleParams wheel_loader_10t() { return {}; }

  double gear_ratio(GearId gear) const { return gear.index() == 1 ? ratio_gear1 : ratio_gear2; }
  double clutch_time(GearId gear) const;

  /// Throws std::invalid_argument naming the first offending field.
  void validate() const;
};

enum class EngagedClutch { None, Clutch1, Clutch2 };

std::optional<GearId> engaged_gear(EngagedClutch clutch);
EngagedClutch clutch_of(GearId gear);

struct DrivetrainState {
  double time = 0.0;
  double motor_speed = 0.0;         // omega_m
  double drive_shaft_speed = 0.0;   // omega_v
  double motor_torque = 0.0;        // realized actuator output
  std::array<double, 2> clutch_capacity{0.0, 0.0};
  EngagedClutch engaged = EngagedClutch::None;
  GearId active_gear = GearId::first();
  // Direction a clutch slides in while its slip sits exactly on zero, e.g.
  // right after breakaway. Entries are -1, 0 or +1.
  std::array<int, 2> slip_direction{0, 0};
};

/// m * r^2. Throws std::domain_error for non-positive inputs.
double equivalent_inertia(double mass, double radius);

/// Speed of the gear-side plate of the clutch serving `gear`.
double primary_speed(double drive_shaft_speed, GearId gear, const VehicleParams& params);

double clutch_slip(const DrivetrainState& state, GearId gear, const VehicleParams& params);

/// Torque at the wheels from the torques actually transmitted by each clutch.
double drive_torque(double clutch1_torque, double clutch2_torque, const VehicleParams& params);

struct ShaftAccelerations {
  double motor = 0.0;
  double vehicle = 0.0;
};

/// Free 2-DOF dynamics. Clutch torques are the transmitted (signed) values.
ShaftAccelerations dynamics_free(double motor_torque, double clutch1_torque, double clutch2_torque,
                                 double load_torque, const VehicleParams& params);

/// Drive-shaft acceleration with `gear`'s clutch engaged and the other clutch open.
double dynamics_engaged(GearId gear, double motor_torque, double load_torque,
                        const VehicleParams& params);

/// As above, with the other clutch sliding and transmitting `other_clutch_torque`.
double dynamics_engaged(GearId gear, double motor_torque, double load_torque,
                        double other_clutch_torque, const VehicleParams& params);

/// Torque the engaged clutch must carry to stay locked, from the motor-side
/// torque balance: T_m - J_m * omega_v_dot * i_final * i_gear.
double engaged_clutch_demand(GearId gear, double motor_torque, double vehicle_accel,
                             const VehicleParams& params);

/// A clutch stays locked while its capacity covers the magnitude of the demand.
bool engagement_holds(double capacity, double demand);

/// Jump of the drive torque when `target` locks with slip acceleration
/// `slip_accel_before` immediately before lock-up.
double torque_drop_at_engagement(double slip_accel_before, GearId target,
                                 const VehicleParams& params);

}  // namespace dct
