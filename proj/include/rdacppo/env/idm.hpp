#ifndef RDACPPO_ENV_IDM_HPP_
#define RDACPPO_ENV_IDM_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rdacppo/env/vehicle.hpp"

namespace rdacppo::env {

// Behavior of the scripted surrounding vehicles: intelligent driver model
// parameters plus the hard actuation limits.
struct SvBehaviorConfig {
  double desired_speed_approach = 12.0;  // v0 away from the junction
  double desired_speed_junction = 9.0;   // v0 near and inside the junction
  double junction_zone = 15.0;           // distance to the box where the junction v0 applies
  double time_headway = 1.5;             // T
  double min_gap = 2.0;                  // s0
  double accel = 3.0;                    // a
  double comfort_decel = 5.0;            // b
  double exponent = 4.0;                 // delta
  VehicleLimits limits;
  double lookahead_min = 4.0;            // pure-pursuit lookahead floor
  double lookahead_gain = 0.6;           // seconds of travel added to the lookahead
  double stop_clearance = 3.0;           // stand-off from a conflict point
  double arrival_tie = 0.5;              // s; closer arrivals fall back to right-of-way
};

inline void validate(const SvBehaviorConfig& c) {
  const double vals[] = {c.desired_speed_approach, c.desired_speed_junction, c.time_headway,
                         c.min_gap, c.accel, c.comfort_decel, c.exponent,
                         c.limits.max_accel, c.limits.max_steer, c.limits.wheelbase,
                         c.lookahead_min};
  for (double v : vals) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("sv behavior: parameters must be finite and positive");
    }
  }
}

// Gap sentinel for an unobstructed road.
inline constexpr double kFreeRoad = std::numeric_limits<double>::infinity();

struct IdmParams {
  double desired_speed;
  double time_headway;
  double min_gap;
  double accel;
  double comfort_decel;
  double exponent;
  double max_accel;
};

inline IdmParams idm_params(const SvBehaviorConfig& c, double desired_speed) {
  return {desired_speed, c.time_headway, c.min_gap, c.accel,
          c.comfort_decel, c.exponent, c.limits.max_accel};
}

// Desired gap s*; the dynamic term is floored at zero so a faster leader never
// shrinks it below s0.
inline double idm_desired_gap(double v, double v_lead, const IdmParams& p) {
  const double dynamic =
      v * p.time_headway + v * (v - v_lead) / (2.0 * std::sqrt(p.accel * p.comfort_decel));
  return p.min_gap + std::max(0.0, dynamic);
}

inline double idm_acceleration(double v, double gap, double v_lead, const IdmParams& p) {
  if (!(gap > 0.0)) return -p.max_accel;
  double a = p.accel * (1.0 - std::pow(v / p.desired_speed, p.exponent));
  if (std::isfinite(gap)) {
    const double ratio = idm_desired_gap(v, v_lead, p) / gap;
    a -= p.accel * ratio * ratio;
  }
  return std::clamp(a, -p.max_accel, p.max_accel);
}

inline double idm_acceleration(double v, double gap, double v_lead,
                               const SvBehaviorConfig& c, double desired_speed) {
  return idm_acceleration(v, gap, v_lead, idm_params(c, desired_speed));
}

}  // namespace rdacppo::env

#endif  // RDACPPO_ENV_IDM_HPP_
