#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "dct/controller.hpp"

namespace dct {

namespace {

constexpr std::array<std::pair<ShiftPhase, std::string_view>, 11> kPhaseNames{{
    {ShiftPhase::Steady1, "Steady1"},
    {ShiftPhase::Steady2, "Steady2"},
    {ShiftPhase::UpshiftTorquePhase, "UpshiftTorquePhase"},
    {ShiftPhase::UpshiftInertiaFast, "UpshiftInertiaFast"},
    {ShiftPhase::UpshiftInertiaSmooth, "UpshiftInertiaSmooth"},
    {ShiftPhase::UpshiftForced, "UpshiftForced"},
    {ShiftPhase::DownshiftFast1, "DownshiftFast1"},
    {ShiftPhase::DownshiftSmooth1, "DownshiftSmooth1"},
    {ShiftPhase::DownshiftFast2, "DownshiftFast2"},
    {ShiftPhase::DownshiftSmooth2, "DownshiftSmooth2"},
    {ShiftPhase::DownshiftForced, "DownshiftForced"},
}};

bool reached(double slip, const Approach& a, double band) {
  return a.direction * (slip - a.target_slip) >= -band;
}

}  // namespace

std::string_view to_string(ShiftPhase phase) {
  for (const auto& [p, name] : kPhaseNames) {
    if (p == phase) return name;
  }
  return "?";
}

std::optional<ShiftPhase> phase_from_string(std::string_view name) {
  for (const auto& [p, n] : kPhaseNames) {
    if (n == name) return p;
  }
  return std::nullopt;
}

std::string_view to_string(ShiftMode mode) {
  switch (mode) {
    case ShiftMode::Powershift:
      return "powershift";
    case ShiftMode::Sequential:
      return "sequential";
    case ShiftMode::Deny:
      return "deny";
  }
  return "?";
}

ShiftPhase steady_phase(GearId gear) {
  return gear.index() == 1 ? ShiftPhase::Steady1 : ShiftPhase::Steady2;
}

bool is_steady(ShiftPhase phase) {
  return phase == ShiftPhase::Steady1 || phase == ShiftPhase::Steady2;
}

bool is_forced(ShiftPhase phase) {
  return phase == ShiftPhase::UpshiftForced || phase == ShiftPhase::DownshiftForced;
}

bool is_smooth(ShiftPhase phase) {
  return phase == ShiftPhase::UpshiftInertiaSmooth || phase == ShiftPhase::DownshiftSmooth1 ||
         phase == ShiftPhase::DownshiftSmooth2;
}

bool is_fast(ShiftPhase phase) {
  return phase == ShiftPhase::UpshiftInertiaFast || phase == ShiftPhase::DownshiftFast1 ||
         phase == ShiftPhase::DownshiftFast2;
}

GearId phase_gear(ShiftPhase phase) {
  switch (phase) {
    case ShiftPhase::Steady1:
    case ShiftPhase::DownshiftFast1:
    case ShiftPhase::DownshiftSmooth1:
    case ShiftPhase::DownshiftFast2:
    case ShiftPhase::DownshiftSmooth2:
    case ShiftPhase::DownshiftForced:
      return GearId::first();
    default:
      return GearId::second();
  }
}

void ControllerConfig::validate() const {
  auto require = [](bool ok, const char* key, const char* what) {
    if (!ok) throw std::invalid_argument(std::string(key) + ": " + what);
  };
  require(engage_slip_accel > 0, "Gamma_2_2", "must be positive");
  require(window_slip_accel > 0, "Gamma_2_1", "must be positive");
  require(engage_slip_accel <= window_slip_accel, "Gamma_2_2",
          "magnitude must not exceed Gamma_2_1");
  require(fast_slip_accel >= window_slip_accel, "Gamma_1", "must be at least Gamma_2_1");
  require(torque_phase_slip_jerk > 0, "dds_set", "must be positive");
  require(window_slip >= 0, "Omega_2", "must be non-negative");
  require(handover_time > 0, "handover_s", "must be positive");
  require(engaged_slip_band > 0, "eps_slip", "must be positive");
  require(estimator_tau > 0, "est_tau", "must be positive");
  require(hold_margin >= 1, "hold_safety", "must be at least 1");
  require(release_tolerance > 0, "release_tol", "must be positive");
}

std::optional<Approach> approach_of(ShiftPhase phase, const ControllerConfig& cfg) {
  switch (phase) {
    case ShiftPhase::UpshiftInertiaFast:
    case ShiftPhase::UpshiftInertiaSmooth:
    case ShiftPhase::DownshiftFast2:
    case ShiftPhase::DownshiftSmooth2:
      return Approach{0.0, -cfg.engage_slip_accel, -1};
    case ShiftPhase::DownshiftFast1:
    case ShiftPhase::DownshiftSmooth1:
      return Approach{cfg.window_slip, cfg.window_slip_accel, +1};
    default:
      return std::nullopt;
  }
}

double trigger_level(double slip_accel, double target_slip, double arrival_accel,
                     double motor_time_const) {
  return target_slip + 2.0 * motor_time_const * (arrival_accel - slip_accel);
}

bool smooth_trigger(double slip, double slip_accel, double target_slip, double arrival_accel,
                    double motor_time_const) {
  const double level = trigger_level(slip_accel, target_slip, arrival_accel, motor_time_const);
  return arrival_accel < 0 ? slip <= level : slip >= level;
}

double smooth_slip_jerk(double slip, double target_slip, double arrival_accel,
                        double motor_time_const) {
  // Rest point sits 2*theta_m*Gamma beyond the target, so the glide crosses
  // the target with slip acceleration Gamma instead of creeping up to it.
  const double rest = target_slip + 2.0 * motor_time_const * arrival_accel;
  return -(slip - rest) / (4.0 * motor_time_const * motor_time_const);
}

ShiftPhase select_phase(ShiftPhase phase, const PhaseSignals& s, const ControllerConfig& cfg,
                        const VehicleParams& params) {
  const double theta = params.motor_time_const;
  switch (phase) {
    case ShiftPhase::Steady1:
      if (s.request == ShiftRequest::Up && s.mode != ShiftMode::Deny) {
        return s.mode == ShiftMode::Powershift ? ShiftPhase::UpshiftTorquePhase
                                               : ShiftPhase::UpshiftInertiaFast;
      }
      return phase;
    case ShiftPhase::Steady2:
      if (s.request == ShiftRequest::Down && s.mode != ShiftMode::Deny) {
        return ShiftPhase::DownshiftFast1;
      }
      return phase;
    case ShiftPhase::UpshiftTorquePhase:
      if (s.offgoing_command <= 0.0 && s.offgoing_output < cfg.release_tolerance) {
        return ShiftPhase::UpshiftInertiaFast;
      }
      return phase;
    case ShiftPhase::UpshiftInertiaFast:
    case ShiftPhase::DownshiftFast1:
    case ShiftPhase::DownshiftFast2: {
      const Approach a = *approach_of(phase, cfg);
      const bool fire = s.slip_accel && smooth_trigger(s.slip, *s.slip_accel, a.target_slip,
                                                       a.arrival_accel, theta);
      if (fire || reached(s.slip, a, 0.0)) {
        if (phase == ShiftPhase::UpshiftInertiaFast) return ShiftPhase::UpshiftInertiaSmooth;
        if (phase == ShiftPhase::DownshiftFast1) return ShiftPhase::DownshiftSmooth1;
        return ShiftPhase::DownshiftSmooth2;
      }
      return phase;
    }
    case ShiftPhase::DownshiftSmooth1:
      return reached(s.slip, *approach_of(phase, cfg), 0.0) ? ShiftPhase::DownshiftFast2 : phase;
    case ShiftPhase::UpshiftInertiaSmooth:
      return reached(s.slip, *approach_of(phase, cfg), cfg.engaged_slip_band)
                 ? ShiftPhase::UpshiftForced
                 : phase;
    case ShiftPhase::DownshiftSmooth2:
      return reached(s.slip, *approach_of(phase, cfg), cfg.engaged_slip_band)
                 ? ShiftPhase::DownshiftForced
                 : phase;
    case ShiftPhase::UpshiftForced:
      return s.target_engaged ? ShiftPhase::Steady2 : phase;
    case ShiftPhase::DownshiftForced:
      return s.target_engaged ? ShiftPhase::Steady1 : phase;
  }
  return phase;
}

ShiftMode shift_permitted(double grade, double velocity, ShiftRequest request,
                          const ShiftPolicy& policy) {
  if (request == ShiftRequest::None) return ShiftMode::Deny;
  if (!policy.managed) return ShiftMode::Powershift;
  return (grade > 0 && velocity < policy.max_powershift_speed) ? ShiftMode::Powershift
                                                               : ShiftMode::Sequential;
}

}  // namespace dct
