#include <cmath>
#include <stdexcept>

#include "dct/sim.hpp"

namespace dct {

ShiftMetrics metrics(const Trace& trace, const ShiftWindow& window) {
  const auto& r = trace.records;
  if (r.empty() || window.end <= window.begin || window.end >= r.size()) {
    throw std::domain_error("metrics: empty or out-of-range shift window");
  }
  const double dt = trace.dt;
  ShiftMetrics m;
  m.window_start = r[window.begin].time;
  m.window_end = r[window.end].time;
  m.shift_duration = m.window_end - m.window_start;

  for (std::size_t i = window.begin; i < window.end; ++i) {
    const double e = r[i].drive_torque - r[i].target_drive_torque;
    m.tracking_error_integral += e * e * dt;
    m.clutch_friction_energy += (std::abs(r[i].clutch_transmitted[0] * r[i].slip[0]) +
                                 std::abs(r[i].clutch_transmitted[1] * r[i].slip[1])) *
                                dt;
  }

  for (std::size_t i = window.begin + 1; i <= window.end; ++i) {
    const auto& a = r[i - 1].command;
    const auto& b = r[i].command;
    m.max_command_rate[0] = std::max(m.max_command_rate[0], std::abs(b.motor - a.motor) / dt);
    m.max_command_rate[1] = std::max(m.max_command_rate[1], std::abs(b.clutch[0] - a.clutch[0]) / dt);
    m.max_command_rate[2] = std::max(m.max_command_rate[2], std::abs(b.clutch[1] - a.clutch[1]) / dt);
  }

  // Last lock-up of the target clutch inside the window.
  const EngagedClutch target = clutch_of(window.target);
  const std::size_t slot = window.target.slot();
  for (std::size_t k = window.end; k > window.begin; --k) {
    if (r[k].engaged == target && r[k - 1].engaged != target) {
      m.engaged = true;
      m.engagement_torque_step = r[k].drive_torque - r[k - 1].drive_torque;
      const std::size_t j = k - 1;
      if (j >= window.begin + 2) {
        m.pre_engagement_slip_accel =
            (3.0 * r[j].slip[slot] - 4.0 * r[j - 1].slip[slot] + r[j - 2].slip[slot]) / (2.0 * dt);
      } else if (j >= window.begin + 1) {
        m.pre_engagement_slip_accel = (r[j].slip[slot] - r[j - 1].slip[slot]) / dt;
      }
      break;
    }
  }
  return m;
}

}  // namespace dct
