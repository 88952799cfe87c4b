#ifndef RDACPPO_ENV_WORLD_HPP_
#define RDACPPO_ENV_WORLD_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rdacppo/env/idm.hpp"
#include "rdacppo/env/road_network.hpp"
#include "rdacppo/env/vehicle.hpp"
#include "rdacppo/geometry.hpp"
#include "rdacppo/random.hpp"

namespace rdacppo::env {

struct SpawnConfig {
  double ego_distance_min = 10.0;  // distance of the ego center to the junction box
  double ego_distance_max = 50.0;
  double ego_speed_min = 4.0;
  double ego_speed_max = 8.0;
  double sv_distance_min = 5.0;
  double sv_distance_max = 50.0;
  double sv_speed_fraction_min = 0.6;  // of the local desired speed
  double sv_speed_fraction_max = 1.0;
  double min_separation = 12.0;        // between any two spawned centers
  int max_retries = 100;               // per vehicle
  double goal_offset = 20.0;           // goal anchor past the junction box
};

struct EnvConfig {
  GeometryConfig geometry;
  SvBehaviorConfig sv;
  SpawnConfig spawn;
  double vehicle_length = 5.0;
  double vehicle_width = 2.0;
  double dt = 0.1;
  int n_sv_max = 6;
  double off_road_tolerance = 0.1;
  double leader_lookahead = 50.0;
};

inline void validate(const EnvConfig& c) {
  validate(c.geometry);
  validate(c.sv);
  if (!(c.dt > 0.0)) throw std::invalid_argument("env: dt must be positive");
  if (c.n_sv_max < 0) throw std::invalid_argument("env: n_sv_max must be >= 0");
  if (!(c.vehicle_length > 0.0) || !(c.vehicle_width > 0.0)) {
    throw std::invalid_argument("env: vehicle dimensions must be positive");
  }
  if (c.geometry.lane_width <= c.vehicle_width) {
    throw std::invalid_argument("env: lane width must exceed vehicle width");
  }
  const SpawnConfig& s = c.spawn;
  if (s.ego_distance_min < 0.0 || s.ego_distance_max < s.ego_distance_min ||
      s.ego_distance_max > c.geometry.arm_length || s.sv_distance_min < 0.0 ||
      s.sv_distance_max < s.sv_distance_min || s.sv_distance_max > c.geometry.arm_length ||
      s.ego_speed_min < 0.0 || s.ego_speed_max < s.ego_speed_min ||
      s.sv_speed_fraction_min < 0.0 || s.sv_speed_fraction_max < s.sv_speed_fraction_min ||
      s.max_retries < 1 || !(s.goal_offset > 0.0) ||
      s.goal_offset > c.geometry.arm_length) {
    throw std::invalid_argument("env: invalid spawn ranges");
  }
}

// Simulation snapshot. Vehicle index 0 is the ego, 1..n the surrounding
// vehicles in spawn order.
struct WorldState {
  double time = 0.0;
  VehicleState ego;
  std::vector<VehicleState> svs;
  std::shared_ptr<const RoadNetwork> network;
  Vec2 goal;
  double goal_progress = 0.0;

  int vehicle_count() const { return 1 + static_cast<int>(svs.size()); }
  const VehicleState& vehicle(int k) const {
    return k == 0 ? ego : svs.at(static_cast<std::size_t>(k - 1));
  }
  const Route& route_of(int k) const { return network->route(vehicle(k).route); }
};

// Distance from the vehicle center to the junction box measured along its route.
inline double distance_to_junction(const Route& r, double s) {
  if (s < r.junction_enter()) return r.junction_enter() - s;
  if (s > r.junction_exit()) return s - r.junction_exit();
  return 0.0;
}

inline double sv_desired_speed(const SvBehaviorConfig& c, const Route& r, double s) {
  return distance_to_junction(r, s) < c.junction_zone ? c.desired_speed_junction
                                                       : c.desired_speed_approach;
}

inline VehicleState place_on_route(const RoadNetwork& net, RouteId id, double s,
                                   double speed, double length, double width) {
  const Route& r = net.route(id);
  const Vec2 p = r.point_at(s);
  VehicleState v;
  v.x = p.x;
  v.y = p.y;
  v.speed = speed;
  v.heading = r.heading_at(s);
  v.length = length;
  v.width = width;
  v.route = id;
  v.progress = s;
  return v;
}

// Random initial scene: the ego on the south entry lane heading for a random
// legal exit (or `ego_turn` when given), and n_sv surrounding vehicles on the
// other three entries.
inline WorldState spawn_scenario(int n_sv, Rng& rng, const EnvConfig& cfg,
                                 std::shared_ptr<const RoadNetwork> network,
                                 std::optional<Turn> ego_turn = std::nullopt) {
  if (n_sv < 0 || n_sv > cfg.n_sv_max) {
    throw std::invalid_argument("spawn_scenario: n_sv out of range [0, n_sv_max]");
  }
  const RoadNetwork& net = *network;
  const SpawnConfig& sp = cfg.spawn;
  const double arm = cfg.geometry.arm_length;

  WorldState w;
  w.network = network;
  const std::vector<RouteId> ego_routes = net.routes_from(Road::kSouth);
  RouteId ego_route = ego_routes[uniform_index(rng, ego_routes.size())];
  if (ego_turn) {
    for (RouteId id : ego_routes) {
      if (net.route(id).turn() == *ego_turn) ego_route = id;
    }
  }
  const double ego_d = uniform(rng, sp.ego_distance_min, sp.ego_distance_max);
  const double ego_v = uniform(rng, sp.ego_speed_min, sp.ego_speed_max);
  w.ego = place_on_route(net, ego_route, arm - ego_d, ego_v, cfg.vehicle_length,
                         cfg.vehicle_width);
  const Route& er = net.route(ego_route);
  w.goal_progress = er.junction_exit() + sp.goal_offset;
  w.goal = er.point_at(w.goal_progress);

  constexpr Road kSvRoads[] = {Road::kEast, Road::kNorth, Road::kWest};
  for (int i = 0; i < n_sv; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < sp.max_retries && !placed; ++attempt) {
      const Road entry = kSvRoads[uniform_index(rng, 3)];
      const std::vector<RouteId> options = net.routes_from(entry);
      const RouteId id = options[uniform_index(rng, options.size())];
      const double d = uniform(rng, sp.sv_distance_min, sp.sv_distance_max);
      const double frac = uniform(rng, sp.sv_speed_fraction_min, sp.sv_speed_fraction_max);
      const Route& r = net.route(id);
      const double s = arm - d;
      const double v = frac * sv_desired_speed(cfg.sv, r, s);
      VehicleState cand = place_on_route(net, id, s, v, cfg.vehicle_length, cfg.vehicle_width);
      bool clear = distance(cand.position(), w.ego.position()) >= sp.min_separation;
      for (const VehicleState& o : w.svs) {
        clear = clear && distance(cand.position(), o.position()) >= sp.min_separation;
      }
      if (clear) {
        w.svs.push_back(cand);
        placed = true;
      }
    }
    if (!placed) {
      throw std::runtime_error("spawn_scenario: could not place surrounding vehicle " +
                               std::to_string(i + 1) + " without overlap");
    }
  }
  return w;
}

// Pure-pursuit steering toward the route point one lookahead ahead of the
// vehicle's progress, offset laterally by `lateral_offset` (left positive).
inline double pure_pursuit_steer(const VehicleState& v, const Route& r, double lookahead,
                                 double wheelbase, double lateral_offset = 0.0) {
  const double s_target = v.progress + lookahead;
  Vec2 target = r.point_at(s_target);
  if (lateral_offset != 0.0) {
    const double h = r.heading_at(s_target);
    target = target + Vec2{-std::sin(h), std::cos(h)} * lateral_offset;
  }
  const Vec2 d = target - v.position();
  const double ld = std::max(d.norm(), 1e-6);
  const double alpha = wrap_angle(std::atan2(d.y, d.x) - v.heading);
  return std::atan2(2.0 * wheelbase * std::sin(alpha), ld);
}

namespace detail {

inline bool conflict_cleared(const VehicleState& v, double s_conflict, double lane_width) {
  return v.progress - s_conflict > v.length + lane_width;
}

inline double stop_distance(const VehicleState& v, double s_conflict,
                            const SvBehaviorConfig& c) {
  return s_conflict - v.progress - 0.5 * v.length - c.stop_clearance;
}

inline bool committed(const VehicleState& v, double s_conflict, const SvBehaviorConfig& c) {
  const double d = stop_distance(v, s_conflict, c);
  return d <= 0.0 || v.speed * v.speed / (2.0 * c.comfort_decel) >= d;
}

inline double arrival_time(const VehicleState& v, double s_conflict) {
  return std::max(0.0, s_conflict - v.progress) / std::max(v.speed, 1.0);
}

// True when vehicle i may pass the shared conflict point before vehicle j.
// Antisymmetric in (i, j) for distinct vehicles.
inline bool has_priority(const WorldState& w, int i, double si, int j, double sj,
                         const SvBehaviorConfig& c) {
  const VehicleState& a = w.vehicle(i);
  const VehicleState& b = w.vehicle(j);
  const bool ca = committed(a, si, c);
  const bool cb = committed(b, sj, c);
  if (ca != cb) return ca;
  const double ta = arrival_time(a, si);
  const double tb = arrival_time(b, sj);
  if (std::abs(ta - tb) > c.arrival_tie) return ta < tb;
  const Route& ra = w.route_of(i);
  const Route& rb = w.route_of(j);
  const Vec2 a_right = right_of(road_outward(ra.entry()) * -1.0);
  const Vec2 b_right = right_of(road_outward(rb.entry()) * -1.0);
  if (road_outward(rb.entry()) == a_right) return false;
  if (road_outward(ra.entry()) == b_right) return true;
  const bool a_left = ra.turn() == Turn::kLeft;
  const bool b_left = rb.turn() == Turn::kLeft;
  if (a_left != b_left) return b_left;
  return i < j;
}

}  // namespace detail

// Longitudinal and lateral control of surrounding vehicle `sv_index`
// (0-based into world.svs).
inline Control sv_policy_step(const WorldState& w, int sv_index, const EnvConfig& cfg) {
  if (sv_index < 0 || sv_index >= static_cast<int>(w.svs.size())) {
    throw std::out_of_range("sv_policy_step: invalid surrounding-vehicle index");
  }
  const SvBehaviorConfig& c = cfg.sv;
  const int self = sv_index + 1;
  const VehicleState& me = w.vehicle(self);
  const Route& route = w.network->route(me.route);
  const double v0 = sv_desired_speed(c, route, me.progress);
  const IdmParams params = idm_params(c, v0);

  double accel = idm_acceleration(me.speed, kFreeRoad, 0.0, params);
  for (int k = 0; k < w.vehicle_count(); ++k) {
    if (k == self) continue;
    const VehicleState& o = w.vehicle(k);
    // Leader anywhere ahead on this vehicle's own path.
    if (distance(me.position(), o.position()) <= cfg.leader_lookahead + o.length) {
      const RouteProjection pr =
          route.project(o.position(), me.progress, me.progress + cfg.leader_lookahead);
      const double dh = std::abs(wrap_angle(o.heading - route.heading_at(pr.s)));
      // Lateral reach of the other footprint across this path.
      const double reach = 0.5 * (me.width + o.width * std::abs(std::cos(dh)) +
                                  o.length * std::abs(std::sin(dh))) + 0.5;
      if (std::abs(pr.lateral) < reach && dh < deg_to_rad(80.0) && pr.s > me.progress) {
        const double gap = pr.s - me.progress - 0.5 * (me.length + o.length);
        accel = std::min(accel, idm_acceleration(me.speed, gap, o.speed * std::cos(dh), params));
      }
    }
    // Yield at a crossing or merging point owned by another vehicle.
    const auto& mine = w.network->conflict(me.route, o.route);
    const auto& theirs = w.network->conflict(o.route, me.route);
    if (!mine || !theirs) continue;
    const double si = mine->s_self;
    const double sj = theirs->s_self;
    if (detail::conflict_cleared(me, si, cfg.geometry.lane_width) ||
        detail::conflict_cleared(o, sj, cfg.geometry.lane_width)) {
      continue;
    }
    if (detail::has_priority(w, self, si, k, sj, c)) continue;
    const double gap = detail::stop_distance(me, si, c) + c.min_gap;
    accel = std::min(accel, idm_acceleration(me.speed, gap, 0.0, params));
  }

  const double lookahead = std::max(c.lookahead_min, c.lookahead_gain * me.speed);
  const double steer = pure_pursuit_steer(me, route, lookahead, c.limits.wheelbase);
  return clamp_control({accel, steer}, c.limits);
}

// Advances the tracked arc length after a pose update; never decreases.
inline void update_progress(VehicleState& v, const RoadNetwork& net, double dt) {
  const Route& r = net.route(v.route);
  const RouteProjection pr =
      r.project(v.position(), v.progress - 1.0, v.progress + v.speed * dt + 2.0);
  v.progress = std::max(v.progress, pr.s);
}

// One fixed-dt simulation step. Every surrounding-vehicle control is computed
// from the same snapshot before any vehicle moves.
inline WorldState env_step(const WorldState& w, Control ego_control, const EnvConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("env_step: dt must be positive");
  std::vector<Control> controls;
  controls.reserve(w.svs.size());
  for (int i = 0; i < static_cast<int>(w.svs.size()); ++i) {
    controls.push_back(sv_policy_step(w, i, cfg));
  }
  WorldState next = w;
  const VehicleLimits& lim = cfg.sv.limits;
  next.ego = apply_control(w.ego, ego_control, cfg.dt, lim);
  update_progress(next.ego, *w.network, cfg.dt);
  for (std::size_t i = 0; i < w.svs.size(); ++i) {
    next.svs[i] = apply_control(w.svs[i], controls[i], cfg.dt, lim);
    update_progress(next.svs[i], *w.network, cfg.dt);
  }
  next.time = w.time + cfg.dt;
  return next;
}

// Every overlapping vehicle pair (i < j), indices as in WorldState::vehicle.
inline std::vector<std::pair<int, int>> detect_collisions(const WorldState& w) {
  std::vector<std::pair<int, int>> out;
  const int n = w.vehicle_count();
  for (int i = 0; i < n; ++i) {
    const VehicleState& a = w.vehicle(i);
    for (int j = i + 1; j < n; ++j) {
      const VehicleState& b = w.vehicle(j);
      const double reach = 0.5 * (std::hypot(a.length, a.width) + std::hypot(b.length, b.width));
      if (distance(a.position(), b.position()) > reach) continue;
      if (overlaps(a.footprint(), b.footprint())) out.emplace_back(i, j);
    }
  }
  return out;
}

inline bool ego_collided(const WorldState& w) {
  for (const auto& [i, j] : detect_collisions(w)) {
    if (i == 0) return true;
  }
  return false;
}

inline bool off_road(const WorldState& w, double tolerance = 0.1) {
  return w.network->distance_to_surface(w.ego.position()) > tolerance;
}

inline void write_trace_header(std::ostream& os) {
  os << "time,vehicle,x,y,speed,heading\n";
}

inline void write_trace_rows(std::ostream& os, const WorldState& w) {
  for (int k = 0; k < w.vehicle_count(); ++k) {
    const VehicleState& v = w.vehicle(k);
    os << w.time << ',' << k << ',' << v.x << ',' << v.y << ',' << v.speed << ','
       << v.heading << '\n';
  }
}

}  // namespace rdacppo::env

#endif  // RDACPPO_ENV_WORLD_HPP_
