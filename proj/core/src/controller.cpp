#include <algorithm>
#include <cmath>

#include "dct/controller.hpp"

namespace dct {

namespace {

double clutch_share(double drive, GearId gear, const VehicleParams& p) {
  return drive / (p.gear_ratio(gear) * p.ratio_final * p.final_drive_efficiency);
}

// Sign of the torque a clutch transmits; inside the engaged band the clutch
// is taken to push forward, which is the only direction the shifts drive it.
// Lock-up is reported by the plant as an exactly synchronous motor speed.
constexpr double kLockedSlip = 1e-9;
// Forced engagement falls back to the holding command after this many clutch
// time constants without lock-up.
constexpr double kForcedTimeoutFactor = 5.0;

double slide_sign(double slip, double band) { return slip < -band ? -1.0 : 1.0; }

struct TransmittedEstimate {
  double torque = 0.0;
  double rate = 0.0;
};

TransmittedEstimate transmitted(const ControlCommand& cmd, const ControllerInputs& in,
                                const StateEstimates& est, const ControllerConfig& cfg,
                                const VehicleParams& p) {
  TransmittedEstimate out;
  for (GearId g : {GearId::first(), GearId::second()}) {
    const std::size_t k = g.slot();
    const double sign = slide_sign(est.slip[k], cfg.engaged_slip_band);
    const double command = std::max(0.0, cmd.clutch[k]);
    out.torque += sign * in.clutch_capacity[k];
    out.rate += sign * (command - in.clutch_capacity[k]) / p.clutch_time(g);
  }
  return out;
}

}  // namespace

double motor_command_for_slip_jerk(double u, GearId gear, double transmitted_clutch_torque,
                                   double transmitted_clutch_rate, const StateEstimates& est,
                                   const VehicleParams& p) {
  const double reflect = p.ratio_final * p.gear_ratio(gear);
  const double jm = p.motor_inertia;
  const double theta = p.motor_time_const;
  return transmitted_clutch_torque + jm * reflect * est.vehicle_accel +
         theta * (transmitted_clutch_rate + jm * reflect * est.vehicle_jerk) + theta * jm * u;
}

HandoverTargets handover_targets(double target_drive_torque, GearId from, GearId to,
                                 double fraction, const VehicleParams& p) {
  const double f = std::clamp(fraction, 0.0, 1.0);
  HandoverTargets t;
  t.offgoing = (1.0 - f) * clutch_share(target_drive_torque, from, p);
  const double at_clutch = target_drive_torque / (p.ratio_final * p.final_drive_efficiency);
  t.oncoming = (at_clutch - t.offgoing * p.gear_ratio(from)) / p.gear_ratio(to);
  return t;
}

ControlCommand torque_phase_command(const ControllerInputs& in, const StateEstimates& est,
                                    double elapsed, const ControllerConfig& cfg,
                                    const VehicleParams& p) {
  const GearId from = GearId::first();
  const GearId to = GearId::second();
  const auto targets =
      handover_targets(in.target_drive_torque, from, to, elapsed / cfg.handover_time, p);

  ControlCommand cmd;
  cmd.clutch[from.slot()] = targets.offgoing;
  cmd.clutch[to.slot()] = targets.oncoming;

  // While the off-going clutch is still locked it transmits the demand, which
  // follows the ramp rather than its (higher) capacity.
  const bool locked = std::abs(est.slip[from.slot()]) <= cfg.engaged_slip_band &&
                      in.clutch_capacity[from.slot()] > targets.offgoing;
  const double from_now = locked ? targets.offgoing : in.clutch_capacity[from.slot()];
  const double theta_m = p.motor_time_const;
  const double from_term =
      theta_m / p.clutch_time(from) * (cmd.clutch[from.slot()] - from_now);
  const double to_term =
      theta_m / p.clutch_time(to) * (cmd.clutch[to.slot()] - in.clutch_capacity[to.slot()]);
  const double reflect = p.ratio_final * p.gear_ratio(from);
  cmd.motor = in.motor_torque + from_term + to_term +
              theta_m * p.motor_inertia * reflect * est.vehicle_jerk +
              cfg.torque_phase_slip_jerk * theta_m * p.motor_inertia;
  return cmd;
}

double model_slip_accel(const ControllerInputs& in, const StateEstimates& est, GearId gear,
                        const ControllerConfig& cfg, const VehicleParams& p) {
  double clutch = 0.0;
  for (GearId g : {GearId::first(), GearId::second()}) {
    clutch += slide_sign(est.slip[g.slot()], cfg.engaged_slip_band) * in.clutch_capacity[g.slot()];
  }
  return (in.motor_torque - clutch) / p.motor_inertia -
         p.ratio_final * p.gear_ratio(gear) * est.vehicle_accel;
}

ControlCommand inertia_phase_command(const ControllerInputs& in, const StateEstimates& est,
                                     ShiftPhase phase, double handover_elapsed, ShiftMode mode,
                                     const ControllerConfig& cfg, const VehicleParams& p,
                                     double dt) {
  // Forced engagement keeps gliding on the final smooth law until lock-up.
  if (phase == ShiftPhase::UpshiftForced) phase = ShiftPhase::UpshiftInertiaSmooth;
  if (phase == ShiftPhase::DownshiftForced) phase = ShiftPhase::DownshiftSmooth2;
  const GearId on = phase_gear(phase);
  const GearId off = on.other();
  const double drive = mode == ShiftMode::Sequential ? 0.0 : in.target_drive_torque;

  ControlCommand cmd;
  switch (phase) {
    case ShiftPhase::UpshiftInertiaFast:
    case ShiftPhase::UpshiftInertiaSmooth:
      cmd.clutch[on.slot()] = clutch_share(drive, on, p);
      break;
    case ShiftPhase::DownshiftFast1:
    case ShiftPhase::DownshiftSmooth1:
      cmd.clutch[off.slot()] = clutch_share(drive, off, p);
      break;
    case ShiftPhase::DownshiftFast2:
    case ShiftPhase::DownshiftSmooth2: {
      const auto t = handover_targets(drive, off, on, handover_elapsed / cfg.handover_time, p);
      cmd.clutch[off.slot()] = t.offgoing;
      cmd.clutch[on.slot()] = t.oncoming;
      break;
    }
    default:
      break;
  }

  const Approach a = approach_of(phase, cfg).value_or(Approach{});
  if (a.target_slip == 0.0) {
    // Enough capacity for the lock-up to hold even without drive torque.
    const double drag = cfg.hold_margin * p.motor_inertia * cfg.engage_slip_accel;
    cmd.clutch[on.slot()] = std::max(cmd.clutch[on.slot()], drag);
  }

  const auto tc = transmitted(cmd, in, est, cfg, p);
  const double theta = p.motor_time_const;
  if (dt <= 0.0) {
    const double u = is_smooth(phase)
                         ? smooth_slip_jerk(est.slip[on.slot()], a.target_slip, a.arrival_accel, theta)
                         : a.direction * cfg.fast_slip_accel / theta;
    cmd.motor = motor_command_for_slip_jerk(u, on, tc.torque, tc.rate, est, p);
    return cmd;
  }

  // Slip acceleration one hold interval ahead on the ideal closed loop.
  const double accel_now = model_slip_accel(in, est, on, cfg, p);
  const double decay_m = std::exp(-dt / theta);
  double accel_end = 0.0;
  if (is_smooth(phase)) {
    const double rate = 1.0 / (2.0 * theta);
    const double rest = a.target_slip + 2.0 * theta * a.arrival_accel;
    const double z = accel_now + rate * (est.slip[on.slot()] - rest);
    accel_end = (accel_now - rate * z * dt) * std::exp(-rate * dt);
  } else {
    const double level = a.direction * cfg.fast_slip_accel;
    accel_end = level + (accel_now - level) * decay_m;
  }
  double clutch_end = 0.0;
  for (GearId g : {GearId::first(), GearId::second()}) {
    const std::size_t k = g.slot();
    const double target = std::max(0.0, cmd.clutch[k]);
    const double decay_c = std::exp(-dt / p.clutch_time(g));
    clutch_end += slide_sign(est.slip[k], cfg.engaged_slip_band) *
                  (target + (in.clutch_capacity[k] - target) * decay_c);
  }
  const double reflect = p.ratio_final * p.gear_ratio(on);
  const double vehicle_end = est.vehicle_accel + est.vehicle_jerk * dt;
  cmd.motor = (p.motor_inertia * (accel_end + reflect * vehicle_end) + clutch_end -
               in.motor_torque * decay_m) /
              (1.0 - decay_m);
  return cmd;
}

ControlCommand forced_engage_command(const ControllerInputs& in, const StateEstimates& est,
                                     GearId gear, const ControllerConfig& cfg,
                                     const VehicleParams& p) {
  const double reflect = p.ratio_final * p.gear_ratio(gear);
  const double jm = p.motor_inertia;
  ControlCommand cmd;
  cmd.motor = clutch_share(in.target_drive_torque, gear, p) + jm * reflect * est.vehicle_accel +
              p.motor_time_const *
                  (clutch_share(in.target_drive_torque_rate, gear, p) +
                   jm * reflect * est.vehicle_jerk);
  const double demand_now = engaged_clutch_demand(gear, in.motor_torque, est.vehicle_accel, p);
  const double demand_next = engaged_clutch_demand(gear, cmd.motor, est.vehicle_accel, p);
  cmd.clutch[gear.slot()] = cfg.hold_margin * std::max(std::abs(demand_now), std::abs(demand_next));
  return cmd;
}

PowershiftController::PowershiftController(const VehicleParams& params, const ControllerConfig& cfg,
                                           const ActuatorLimits& limits, GearId initial_gear,
                                           double dt)
    : params_(params),
      cfg_(cfg),
      limits_(limits),
      dt_(dt),
      phase_(steady_phase(initial_gear)),
      slip_rate_{RateEstimator(cfg.estimator_tau), RateEstimator(cfg.estimator_tau)},
      vehicle_rate_(cfg.estimator_tau),
      vehicle_jerk_(cfg.estimator_tau) {}

void PowershiftController::update_estimates(const ControllerInputs& in) {
  for (GearId g : {GearId::first(), GearId::second()}) {
    const std::size_t k = g.slot();
    est_.slip[k] = in.motor_speed - primary_speed(in.drive_shaft_speed, g, params_);
    if (auto a = slip_rate_[k].update(in.time, est_.slip[k])) {
      est_.slip_accel[k] = *a;
      est_.slip_accel_valid = true;
    }
  }
  if (auto a = vehicle_rate_.update(in.time, in.drive_shaft_speed)) {
    est_.vehicle_accel = *a;
    if (auto j = vehicle_jerk_.update(in.time, *a)) {
      est_.vehicle_jerk = *j;
    }
  }
}

ControlCommand PowershiftController::initial_command(const ControllerInputs& in) const {
  ControllerInputs steady = in;
  ControlCommand cmd = forced_engage_command(steady, StateEstimates{}, phase_gear(phase_), cfg_,
                                             params_);
  steady.motor_torque = cmd.motor;
  return forced_engage_command(steady, StateEstimates{}, phase_gear(phase_), cfg_, params_);
}

ControlCommand PowershiftController::raw_command(const ControllerInputs& in) const {
  switch (phase_) {
    case ShiftPhase::Steady1:
    case ShiftPhase::Steady2:
      return forced_engage_command(in, est_, phase_gear(phase_), cfg_, params_);
    case ShiftPhase::UpshiftForced:
    case ShiftPhase::DownshiftForced:
      if (in.time - forced_start_ >= kForcedTimeoutFactor * params_.clutch_time(phase_gear(phase_))) {
        return forced_engage_command(in, est_, phase_gear(phase_), cfg_, params_);
      }
      return inertia_phase_command(in, est_, phase_, in.time - handover_start_, mode_, cfg_,
                                   params_, dt_);
    case ShiftPhase::UpshiftTorquePhase:
      return torque_phase_command(in, est_, in.time - handover_start_, cfg_, params_);
    default:
      return inertia_phase_command(in, est_, phase_, in.time - handover_start_, mode_, cfg_,
                                   params_, dt_);
  }
}

ControlCommand PowershiftController::finalize(const ControlCommand& raw) {
  ControlCommand cmd = raw;
  if (last_command_) {
    const double step = limits_.rate_limit * dt_;
    cmd.motor = std::clamp(cmd.motor, last_command_->motor - step, last_command_->motor + step);
    for (std::size_t k = 0; k < 2; ++k) {
      cmd.clutch[k] =
          std::clamp(cmd.clutch[k], last_command_->clutch[k] - step, last_command_->clutch[k] + step);
    }
  }
  const double motor = std::clamp(cmd.motor, -limits_.motor_max, limits_.motor_max);
  bool feasible = std::abs(raw.motor) <= limits_.motor_max;
  cmd.motor = motor;
  for (std::size_t k = 0; k < 2; ++k) {
    feasible = feasible && raw.clutch[k] <= limits_.clutch_max;
    cmd.clutch[k] = std::clamp(cmd.clutch[k], 0.0, limits_.clutch_max);
  }
  cmd.feasible = feasible;
  return cmd;
}

ControlCommand PowershiftController::tick(const ControllerInputs& in) {
  update_estimates(in);

  const GearId target = phase_gear(phase_);
  const GearId offgoing = target.other();
  PhaseSignals signals;
  signals.request = in.request;
  signals.mode = is_steady(phase_) ? in.mode : mode_;
  signals.slip = est_.slip[target.slot()];
  if (is_fast(phase_) || is_smooth(phase_)) {
    // The filtered estimate lags by about tau * slip jerk, which delays the
    // smooth-phase trigger by several ticks.
    signals.slip_accel = model_slip_accel(in, est_, target, cfg_, params_);
  } else if (est_.slip_accel_valid) {
    signals.slip_accel = est_.slip_accel[target.slot()];
  }
  signals.offgoing_command = last_command_ ? last_command_->clutch[offgoing.slot()] : 0.0;
  signals.offgoing_output = in.clutch_capacity[offgoing.slot()];
  const double demand =
      engaged_clutch_demand(target, in.motor_torque, est_.vehicle_accel, params_);
  signals.target_engaged = std::abs(signals.slip) <= kLockedSlip &&
                           engagement_holds(in.clutch_capacity[target.slot()], demand);

  const ShiftPhase next = select_phase(phase_, signals, cfg_, params_);
  rejected_ = in.request != ShiftRequest::None && is_steady(phase_) && next == phase_;
  rejected_ = rejected_ || (in.request != ShiftRequest::None && !is_steady(phase_));
  if (next != phase_) {
    if (is_steady(phase_)) mode_ = in.mode;
    if (next == ShiftPhase::UpshiftTorquePhase || next == ShiftPhase::DownshiftFast2) {
      handover_start_ = in.time;
    }
    if (is_forced(next)) forced_start_ = in.time;
    phase_ = next;
  }

  const ControlCommand cmd = finalize(raw_command(in));
  last_command_ = cmd;
  return cmd;
}

}  // namespace dct
