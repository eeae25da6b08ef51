#include "dct/estimator.hpp"

#include <cmath>
#include <stdexcept>

namespace dct {

RateEstimator::RateEstimator(double tau) : tau_(tau) {
  if (!(tau > 0)) {
    throw std::invalid_argument("est_tau: must be positive");
  }
}

std::optional<double> RateEstimator::update(double time, double value) {
  if (last_ && time > last_->time) {
    const double dt = time - last_->time;
    const double raw = (value - last_->value) / dt;
    if (!estimate_) {
      estimate_ = raw;
    } else {
      const double alpha = 1.0 - std::exp(-dt / tau_);
      *estimate_ += alpha * (raw - *estimate_);
    }
  }
  last_ = SpeedSample{time, value};
  return estimate_;
}

void RateEstimator::reset() {
  last_.reset();
  estimate_.reset();
}

std::optional<double> estimate_slip_acceleration(std::span<const SpeedSample> samples, double tau) {
  if (samples.size() < 2) {
    return std::nullopt;
  }
  RateEstimator estimator(tau);
  std::optional<double> result;
  for (const auto& s : samples) {
    result = estimator.update(s.time, s.value);
  }
  return result;
}

}  // namespace dct
