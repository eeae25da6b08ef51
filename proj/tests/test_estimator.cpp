#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "dct/estimator.hpp"

namespace dct {
namespace {

TEST(RateEstimator, NeedsTwoSamples) {
  RateEstimator e(0.01);
  EXPECT_FALSE(e.update(0.0, 1.0).has_value());
  EXPECT_TRUE(e.update(0.001, 1.0).has_value());
}

TEST(RateEstimator, ConstantGivesZero) {
  RateEstimator e(0.01);
  std::optional<double> r;
  for (int i = 0; i < 100; ++i) r = e.update(i * 1e-3, 3.5);
  EXPECT_DOUBLE_EQ(*r, 0.0);
}

TEST(RateEstimator, RampAfterSettling) {
  const double tau = 0.01;
  const double a = -7.0;
  RateEstimator e(tau);
  std::optional<double> r;
  for (int i = 0; i <= 50; ++i) r = e.update(i * 1e-3, 2.0 + a * i * 1e-3);
  EXPECT_NEAR(*r, a, 0.02 * std::abs(a));
}

TEST(RateEstimator, SineWithinFilterLagBound) {
  const double tau = 0.01;
  const double dt = 1e-3;
  const double w = 2.0;  // w * tau = 0.02
  RateEstimator e(tau);
  double worst = 0.0;
  for (int i = 0; i <= 3000; ++i) {
    const double t = i * dt;
    const auto r = e.update(t, std::sin(w * t));
    if (t > 5 * tau) worst = std::max(worst, std::abs(*r - w * std::cos(w * t)));
  }
  // First-order lag of tau plus half a sample of backward difference.
  const double bound = w * w * (tau + dt / 2) * 1.05;
  EXPECT_LE(worst, bound);
  EXPECT_GT(worst, 0.5 * w * w * tau);
}

TEST(RateEstimator, ResetForgetsHistory) {
  RateEstimator e(0.01);
  e.update(0.0, 0.0);
  e.update(0.001, 1.0);
  e.reset();
  EXPECT_FALSE(e.estimate().has_value());
  EXPECT_FALSE(e.update(0.002, 5.0).has_value());
}

TEST(SlipAcceleration, FromSamples) {
  std::vector<SpeedSample> s;
  EXPECT_FALSE(estimate_slip_acceleration(s, 0.01).has_value());
  s.push_back({0.0, 4.0});
  EXPECT_FALSE(estimate_slip_acceleration(s, 0.01).has_value());
  // Irregular spacing on a ramp of slope -2.
  for (double t : {0.001, 0.0025, 0.003, 0.0051, 0.007})
    s.push_back({t, 4.0 - 2.0 * t});
  EXPECT_NEAR(*estimate_slip_acceleration(s, 0.01), -2.0, 1e-9);
}

}  // namespace
}  // namespace dct
