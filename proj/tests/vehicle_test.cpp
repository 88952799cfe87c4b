#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "rdacppo/env/vehicle.hpp"

namespace rdacppo::env {
namespace {

VehicleState moving(double speed) {
  VehicleState s;
  s.speed = speed;
  return s;
}

TEST(ApplyControl, StraightConstantSpeed) {
  const VehicleState next = apply_control(moving(5.0), {0.0, 0.0}, 0.1, VehicleLimits{});
  EXPECT_DOUBLE_EQ(next.x, 0.5);
  EXPECT_DOUBLE_EQ(next.y, 0.0);
  EXPECT_DOUBLE_EQ(next.speed, 5.0);
}

TEST(ApplyControl, SpeedFlooredAtZero) {
  const VehicleState next = apply_control(moving(0.0), {-3.0, 0.0}, 0.1, VehicleLimits{});
  EXPECT_EQ(next.speed, 0.0);
  EXPECT_EQ(next.x, 0.0);
}

TEST(ApplyControl, StopsMidStepWithExactDistance) {
  const VehicleState next = apply_control(moving(0.4), {-8.0, 0.0}, 0.1, VehicleLimits{});
  EXPECT_EQ(next.speed, 0.0);
  EXPECT_NEAR(next.x, 0.4 * 0.4 / 16.0, 1e-15);
}

TEST(ApplyControl, InputsClampedBeforeIntegration) {
  const VehicleLimits lim;
  const VehicleState a = apply_control(moving(2.0), {100.0, 3.0}, 0.1, lim);
  const VehicleState b = apply_control(moving(2.0), {lim.max_accel, lim.max_steer}, 0.1, lim);
  EXPECT_EQ(a, b);
  EXPECT_NEAR(a.speed, 2.8, 1e-12);
}

TEST(ApplyControl, RejectsNonPositiveDt) {
  EXPECT_THROW(apply_control(moving(1.0), {}, 0.0, VehicleLimits{}), std::invalid_argument);
}

// Circle through three points, used as an independent radius estimate.
double circumradius(double ax, double ay, double bx, double by, double cx, double cy) {
  const double a = std::hypot(bx - cx, by - cy);
  const double b = std::hypot(ax - cx, ay - cy);
  const double c = std::hypot(ax - bx, ay - by);
  const double area2 = std::abs((bx - ax) * (cy - ay) - (cx - ax) * (by - ay));
  return a * b * c / (2.0 * area2);
}

TEST(ApplyControl, TurningRadiusMatchesBicycleModel) {
  const VehicleLimits lim;
  for (double steer : {0.1, 0.3, 0.6}) {
    VehicleState s = moving(6.0);
    double xs[3], ys[3];
    const int stride = 25;
    for (int i = 0; i < 3 * stride; ++i) {
      if (i % stride == 0) {
        xs[i / stride] = s.x;
        ys[i / stride] = s.y;
      }
      s = apply_control(s, {0.0, steer}, 0.1, lim);
    }
    const double expected = lim.wheelbase / std::tan(steer);
    const double traced = circumradius(xs[0], ys[0], xs[1], ys[1], xs[2], ys[2]);
    EXPECT_NEAR(traced / expected, 1.0, 0.01) << "steer " << steer;
  }
}

TEST(ApplyControl, HeadingStaysWrapped) {
  VehicleState s = moving(8.0);
  for (int i = 0; i < 2000; ++i) {
    s = apply_control(s, {0.0, -0.7}, 0.1, VehicleLimits{});
    ASSERT_GT(s.heading, -M_PI);
    ASSERT_LE(s.heading, M_PI);
  }
}

}  // namespace
}  // namespace rdacppo::env
