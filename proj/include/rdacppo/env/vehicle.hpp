#ifndef RDACPPO_ENV_VEHICLE_HPP_
#define RDACPPO_ENV_VEHICLE_HPP_

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rdacppo/geometry.hpp"

namespace rdacppo::env {

// Physical actuation limits shared by every vehicle.
struct VehicleLimits {
  double max_accel = 8.0;                // m/s^2, both directions
  double max_steer = deg_to_rad(45.0);   // rad
  double wheelbase = 3.0;                // m
};

struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double speed = 0.0;
  double heading = 0.0;
  double length = 5.0;
  double width = 2.0;
  int route = 0;
  double progress = 0.0;  // arc length along `route`

  Vec2 position() const { return {x, y}; }
  OrientedRect footprint() const { return {{x, y}, heading, length, width}; }
  bool operator==(const VehicleState&) const = default;
};

struct Control {
  double accel = 0.0;
  double steer = 0.0;
};

inline Control clamp_control(Control c, const VehicleLimits& lim) {
  c.accel = std::clamp(c.accel, -lim.max_accel, lim.max_accel);
  c.steer = std::clamp(c.steer, -lim.max_steer, lim.max_steer);
  return c;
}

// Kinematic bicycle step about the footprint center. The speed update is
// exact for constant acceleration (stopping mid-step included) and the pose
// follows the exact circular arc of the travelled distance.
inline VehicleState apply_control(VehicleState s, Control u, double dt,
                                  const VehicleLimits& lim) {
  if (!(dt > 0.0)) throw std::invalid_argument("apply_control: dt must be positive");
  u = clamp_control(u, lim);
  const double v0 = s.speed;
  double v1 = v0 + u.accel * dt;
  double travelled = 0.0;
  if (v1 >= 0.0) {
    travelled = 0.5 * (v0 + v1) * dt;
  } else {
    v1 = 0.0;
    travelled = u.accel < 0.0 ? v0 * v0 / (2.0 * -u.accel) : 0.0;
  }
  const double turn = travelled * std::tan(u.steer) / lim.wheelbase;
  double chord = travelled;
  if (std::abs(turn) > 1e-12) chord = 2.0 * (travelled / turn) * std::sin(0.5 * turn);
  const double mid = s.heading + 0.5 * turn;
  s.x += chord * std::cos(mid);
  s.y += chord * std::sin(mid);
  s.heading = wrap_angle(s.heading + turn);
  s.speed = v1;
  return s;
}

}  // namespace rdacppo::env

#endif  // RDACPPO_ENV_VEHICLE_HPP_
