#pragma once

#include <optional>
#include <span>

namespace dct {

struct SpeedSample {
  double time = 0.0;
  double value = 0.0;
};

/// Filtered finite-difference differentiator.
///
/// Each new sample yields a backward difference, which is fed through a
/// first-order low-pass with time constant tau (exact discretization, so
/// irregular sample spacing is fine). The filter state starts at the first
/// difference, which removes the start-up transient for ramps.
class RateEstimator {
 public:
  explicit RateEstimator(double tau);

  /// Returns the current estimate, or nullopt until two samples have arrived.
  std::optional<double> update(double time, double value);
  std::optional<double> estimate() const { return estimate_; }
  double tau() const { return tau_; }
  void reset();

 private:
  double tau_;
  std::optional<SpeedSample> last_;
  std::optional<double> estimate_;
};

/// Slip acceleration from a window of slip-speed samples (oldest first).
/// nullopt when fewer than two samples are given.
std::optional<double> estimate_slip_acceleration(std::span<const SpeedSample> samples, double tau);

}  // namespace dct
