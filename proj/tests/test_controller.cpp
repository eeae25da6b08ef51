#include <gtest/gtest.h>

#include <cmath>

#include "dct/controller.hpp"
#include "dct/sim.hpp"
#include "oracle_values.hpp"

namespace dct {
namespace {

const VehicleParams kP;
const ControllerConfig kCfg;

PhaseSignals signals_with(double slip, std::optional<double> accel = std::nullopt) {
  PhaseSignals s;
  s.slip = slip;
  s.slip_accel = accel;
  return s;
}

TEST(PhaseNames, RoundTrip) {
  for (int i = 0; i <= static_cast<int>(ShiftPhase::DownshiftForced); ++i) {
    const auto phase = static_cast<ShiftPhase>(i);
    EXPECT_EQ(phase_from_string(to_string(phase)), phase);
  }
  EXPECT_EQ(to_string(ShiftPhase::UpshiftTorquePhase), "UpshiftTorquePhase");
  EXPECT_FALSE(phase_from_string("Neutral").has_value());
}

TEST(ControllerConfig, RejectsInconsistentCalibration) {
  auto expect_key = [](ControllerConfig c, const std::string& key) {
    try {
      c.validate();
      FAIL() << key;
    } catch (const std::invalid_argument& e) {
      EXPECT_EQ(std::string(e.what()).rfind(key + ":", 0), 0u) << e.what();
    }
  };
  EXPECT_NO_THROW(kCfg.validate());
  ControllerConfig c;
  c.engage_slip_accel = 20.0;
  expect_key(c, "Gamma_2_2");
  c = kCfg;
  c.fast_slip_accel = 5.0;
  expect_key(c, "Gamma_1");
  c = kCfg;
  c.window_slip = -1.0;
  expect_key(c, "Omega_2");
  c = kCfg;
  c.handover_time = 0.0;
  expect_key(c, "handover_s");
}

TEST(SelectPhase, SteadyUpRequestStartsTorquePhase) {
  PhaseSignals s;
  s.request = ShiftRequest::Up;
  EXPECT_EQ(select_phase(ShiftPhase::Steady1, s, kCfg, kP), ShiftPhase::UpshiftTorquePhase);
  s.mode = ShiftMode::Sequential;
  EXPECT_EQ(select_phase(ShiftPhase::Steady1, s, kCfg, kP), ShiftPhase::UpshiftInertiaFast);
  s.mode = ShiftMode::Deny;
  EXPECT_EQ(select_phase(ShiftPhase::Steady1, s, kCfg, kP), ShiftPhase::Steady1);
  s.mode = ShiftMode::Powershift;
  s.request = ShiftRequest::Down;
  EXPECT_EQ(select_phase(ShiftPhase::Steady1, s, kCfg, kP), ShiftPhase::Steady1);
  EXPECT_EQ(select_phase(ShiftPhase::Steady2, s, kCfg, kP), ShiftPhase::DownshiftFast1);
}

TEST(SelectPhase, TorquePhaseEndsWhenOffgoingClutchReleased) {
  PhaseSignals s;
  s.offgoing_command = 0.0;
  s.offgoing_output = 0.5;
  EXPECT_EQ(select_phase(ShiftPhase::UpshiftTorquePhase, s, kCfg, kP),
            ShiftPhase::UpshiftTorquePhase);
  s.offgoing_output = 0.05;
  EXPECT_EQ(select_phase(ShiftPhase::UpshiftTorquePhase, s, kCfg, kP),
            ShiftPhase::UpshiftInertiaFast);
  s.offgoing_command = 1.0;
  EXPECT_EQ(select_phase(ShiftPhase::UpshiftTorquePhase, s, kCfg, kP),
            ShiftPhase::UpshiftTorquePhase);
}

TEST(SelectPhase, DownshiftCrossShiftStartsAtWindowSlip) {
  const double omega2 = kCfg.window_slip;
  EXPECT_EQ(select_phase(ShiftPhase::DownshiftSmooth1, signals_with(omega2 - 0.01, 12.0), kCfg, kP),
            ShiftPhase::DownshiftSmooth1);
  EXPECT_EQ(select_phase(ShiftPhase::DownshiftSmooth1, signals_with(omega2, 10.0), kCfg, kP),
            ShiftPhase::DownshiftFast2);
}

TEST(SelectPhase, FastToSmoothOnTrigger) {
  // Upshift approach: target 0, arrival -Gamma_2_2; trigger at 2*theta*(39).
  const double level = trigger_level(-40.0, 0.0, -kCfg.engage_slip_accel, kP.motor_time_const);
  EXPECT_EQ(select_phase(ShiftPhase::UpshiftInertiaFast, signals_with(level + 0.01, -40.0), kCfg, kP),
            ShiftPhase::UpshiftInertiaFast);
  EXPECT_EQ(select_phase(ShiftPhase::UpshiftInertiaFast, signals_with(level, -40.0), kCfg, kP),
            ShiftPhase::UpshiftInertiaSmooth);
  // No acceleration estimate yet: only reaching the target ends the phase.
  EXPECT_EQ(select_phase(ShiftPhase::UpshiftInertiaFast, signals_with(0.5), kCfg, kP),
            ShiftPhase::UpshiftInertiaFast);
  EXPECT_EQ(select_phase(ShiftPhase::UpshiftInertiaFast, signals_with(-0.1), kCfg, kP),
            ShiftPhase::UpshiftInertiaSmooth);
  // Downshift P0 travels upward to Omega_2.
  const double up_level =
      trigger_level(40.0, kCfg.window_slip, kCfg.window_slip_accel, kP.motor_time_const);
  EXPECT_EQ(select_phase(ShiftPhase::DownshiftFast1, signals_with(up_level - 0.01, 40.0), kCfg, kP),
            ShiftPhase::DownshiftFast1);
  EXPECT_EQ(select_phase(ShiftPhase::DownshiftFast1, signals_with(up_level, 40.0), kCfg, kP),
            ShiftPhase::DownshiftSmooth1);
}

TEST(SelectPhase, SmoothToForcedToSteady) {
  const double eps = kCfg.engaged_slip_band;
  EXPECT_EQ(select_phase(ShiftPhase::UpshiftInertiaSmooth, signals_with(2 * eps), kCfg, kP),
            ShiftPhase::UpshiftInertiaSmooth);
  EXPECT_EQ(select_phase(ShiftPhase::UpshiftInertiaSmooth, signals_with(eps), kCfg, kP),
            ShiftPhase::UpshiftForced);
  EXPECT_EQ(select_phase(ShiftPhase::DownshiftSmooth2, signals_with(0.5 * eps), kCfg, kP),
            ShiftPhase::DownshiftForced);
  PhaseSignals s;
  EXPECT_EQ(select_phase(ShiftPhase::UpshiftForced, s, kCfg, kP), ShiftPhase::UpshiftForced);
  s.target_engaged = true;
  EXPECT_EQ(select_phase(ShiftPhase::UpshiftForced, s, kCfg, kP), ShiftPhase::Steady2);
  EXPECT_EQ(select_phase(ShiftPhase::DownshiftForced, s, kCfg, kP), ShiftPhase::Steady1);
}

TEST(SmoothTrigger, Examples) {
  EXPECT_NEAR(trigger_level(-30.0, 5.0, -10.0, 0.08), oracle::kTriggerLevel, 1e-12);
  // Arrival acceleration already reached: the level is the target itself.
  EXPECT_DOUBLE_EQ(trigger_level(-10.0, 5.0, -10.0, 0.08), 5.0);
  EXPECT_TRUE(smooth_trigger(5.0, -10.0, 5.0, -10.0, 0.08));
  EXPECT_FALSE(smooth_trigger(5.0 + 1e-9, -10.0, 5.0, -10.0, 0.08));
  // Boundary: slip_accel = Gamma - (slip - target) / (2 theta) puts the
  // level exactly on the current slip.
  const double theta = 0.0625;
  const double slip = 6.0;
  const double accel = -10.0 - (slip - 5.0) / (2 * theta);
  EXPECT_DOUBLE_EQ(trigger_level(accel, 5.0, -10.0, theta), slip);
  EXPECT_TRUE(smooth_trigger(slip, accel, 5.0, -10.0, theta));
  // Upward travel mirrors the comparison.
  EXPECT_TRUE(smooth_trigger(9.0, 40.0, 10.0, 10.0, 0.08));
  EXPECT_FALSE(smooth_trigger(4.0, 40.0, 10.0, 10.0, 0.08));
}

TEST(SmoothLaw, Examples) {
  const double theta = 0.08;
  const double rest = 5.0 + 2 * theta * -10.0;
  EXPECT_DOUBLE_EQ(smooth_slip_jerk(rest, 5.0, -10.0, theta), 0.0);
  EXPECT_NEAR(smooth_slip_jerk(rest + 1.0, 5.0, -10.0, theta), oracle::kSmoothJerkUnitOffset, 1e-9);
}

TEST(SmoothLaw, GlideFromTriggerArrivesWithoutCrossing) {
  // Ideal closed loop x'' = -x'/theta + u(x), started on the trigger level.
  const double theta = kP.motor_time_const;
  const double gamma = -1.0;
  double x = trigger_level(-30.0, 0.0, gamma, theta);
  double v = -30.0;
  EXPECT_NEAR(x, oracle::kGlideStartSlip, 1e-12);
  auto f = [&](double xx, double vv) { return -vv / theta + smooth_slip_jerk(xx, 0.0, gamma, theta); };
  const double h = 1e-5;
  double t = 0.0;
  double min_x = x;
  while (x > 0.0 && t < 2.0) {
    const double k1x = v, k1v = f(x, v);
    const double k2x = v + 0.5 * h * k1v, k2v = f(x + 0.5 * h * k1x, v + 0.5 * h * k1v);
    const double k3x = v + 0.5 * h * k2v, k3v = f(x + 0.5 * h * k2x, v + 0.5 * h * k2v);
    const double k4x = v + h * k3v, k4v = f(x + h * k3x, v + h * k3v);
    const double xn = x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
    const double vn = v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    if (xn <= 0.0) {
      const double s = x / (x - xn);
      t += s * h;
      v += s * (vn - v);
      x = 0.0;
      break;
    }
    x = xn;
    v = vn;
    t += h;
    min_x = std::min(min_x, x);
  }
  EXPECT_NEAR(t, oracle::kGlideArrivalTime, 1e-4);
  EXPECT_NEAR(v, oracle::kGlideArrivalAccel, 1e-3);
  EXPECT_GT(min_x, 0.0);
}

TEST(MotorCommand, ProducesRequestedSlipJerk) {
  StateEstimates est;
  est.vehicle_accel = 0.3;
  est.vehicle_jerk = -0.7;
  const GearId g = GearId::second();
  const double tm = 180.0;
  const double tc = 150.0;
  const double tc_rate = 400.0;
  const double u = -55.0;
  const double reflect = kP.ratio_final * kP.gear_ratio(g);
  const double cmd = motor_command_for_slip_jerk(u, g, tc, tc_rate, est, kP);
  const double slip_accel = (tm - tc) / kP.motor_inertia - reflect * est.vehicle_accel;
  const double tm_rate = (cmd - tm) / kP.motor_time_const;
  const double jerk = (tm_rate - tc_rate) / kP.motor_inertia - reflect * est.vehicle_jerk;
  EXPECT_NEAR(jerk, -slip_accel / kP.motor_time_const + u, 1e-9);
}

TEST(Handover, Examples) {
  const double td = 4000.0;
  auto t = handover_targets(td, GearId::first(), GearId::second(), 0.0, kP);
  EXPECT_NEAR(t.oncoming, 0.0, 1e-12);
  EXPECT_NEAR(t.offgoing, td / (3.74 * 15.429 * 0.9), 1e-9);
  t = handover_targets(oracle::kDriveTorqueClutch2, GearId::first(), GearId::second(), 1.0, kP);
  EXPECT_NEAR(t.offgoing, 0.0, 1e-12);
  EXPECT_NEAR(t.oncoming, 100.0, 1e-9);
  // Any split keeps the drive torque on target.
  for (double f : {0.1, 0.5, 0.9}) {
    t = handover_targets(td, GearId::first(), GearId::second(), f, kP);
    EXPECT_NEAR(drive_torque(t.offgoing, t.oncoming, kP), td, 1e-9);
  }
  t = handover_targets(td, GearId::first(), GearId::second(), 3.0, kP);
  EXPECT_NEAR(t.offgoing, 0.0, 1e-12);
}

TEST(ForcedEngage, HoldsWithSafetyMargin) {
  ControllerInputs in;
  in.motor_torque = 100.0;
  in.target_drive_torque = drive_torque(100.0, 0.0, kP);
  StateEstimates est;
  est.vehicle_accel = 0.6436;
  const auto cmd = forced_engage_command(in, est, GearId::first(), kCfg, kP);
  EXPECT_GE(cmd.clutch[0], 53.15 - 0.01);
  EXPECT_GE(cmd.clutch[0], oracle::kForcedHoldGear1 - 0.01);
  EXPECT_DOUBLE_EQ(cmd.clutch[1], 0.0);

  ControllerInputs zero;
  const auto idle = forced_engage_command(zero, StateEstimates{}, GearId::first(), kCfg, kP);
  EXPECT_DOUBLE_EQ(idle.clutch[0], 0.0);
  EXPECT_DOUBLE_EQ(idle.motor, 0.0);
}

TEST(ShiftPermitted, Examples) {
  ShiftPolicy managed{true, 2.0};
  EXPECT_EQ(shift_permitted(0.05, 1.0, ShiftRequest::Down, managed), ShiftMode::Powershift);
  EXPECT_EQ(shift_permitted(0.0, 5.0, ShiftRequest::Up, managed), ShiftMode::Sequential);
  EXPECT_EQ(shift_permitted(0.05, 2.0, ShiftRequest::Up, managed), ShiftMode::Sequential);
  EXPECT_EQ(shift_permitted(0.05, 1.0, ShiftRequest::None, managed), ShiftMode::Deny);
  EXPECT_EQ(shift_permitted(0.0, 5.0, ShiftRequest::Up, ShiftPolicy{}), ShiftMode::Powershift);
}

TEST(InertiaCommand, HoldIntervalLandsOnIdealTrajectory) {
  // Sliding upshift state; one controller command held over dt must bring the
  // slip acceleration to the ideal critically damped value.
  Scenario sc;
  sc.dt = 1e-3;
  DrivetrainState s;
  s.drive_shaft_speed = 2.0;
  s.motor_speed = primary_speed(2.0, GearId::second(), kP) + 3.0;
  s.motor_torque = 160.0;
  s.clutch_capacity = {0.0, 140.0};
  const PlantRates r0 = evaluate(s, sc);

  ControllerInputs in;
  in.motor_speed = s.motor_speed;
  in.drive_shaft_speed = s.drive_shaft_speed;
  in.motor_torque = s.motor_torque;
  in.clutch_capacity = s.clutch_capacity;
  in.target_drive_torque = drive_torque(0.0, 140.0, kP);
  StateEstimates est;
  est.slip = {clutch_slip(s, GearId::first(), kP), clutch_slip(s, GearId::second(), kP)};
  est.vehicle_accel = r0.vehicle_accel;

  const double theta = kP.motor_time_const;
  const double a = 1.0 / (2 * theta);
  const double gamma = -kCfg.engage_slip_accel;
  const double slip_accel0 = r0.motor_accel - kP.ratio_final * kP.gear_ratio(GearId::second()) * r0.vehicle_accel;
  const double z0 = slip_accel0 + a * (est.slip[1] - 2 * theta * gamma);
  const double ideal = (slip_accel0 - a * z0 * sc.dt) * std::exp(-a * sc.dt);

  const auto cmd = inertia_phase_command(in, est, ShiftPhase::UpshiftInertiaSmooth, 0.0,
                                         ShiftMode::Powershift, kCfg, kP, sc.dt);
  const DrivetrainState s1 = integrate_step(s, cmd, sc);
  const PlantRates r1 = evaluate(s1, sc);
  const double slip_accel1 =
      r1.motor_accel - kP.ratio_final * kP.gear_ratio(GearId::second()) * r1.vehicle_accel;
  EXPECT_NEAR(slip_accel1, ideal, 1e-3 * std::abs(slip_accel0 - ideal) + 1e-4);
}

}  // namespace
}  // namespace dct
