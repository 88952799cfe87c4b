#ifndef RDACPPO_ENV_ROAD_NETWORK_HPP_
#define RDACPPO_ENV_ROAD_NETWORK_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdacppo/geometry.hpp"

namespace rdacppo::env {

// Compass position of an approach road relative to the junction center.
enum class Road { kSouth = 0, kEast = 1, kNorth = 2, kWest = 3 };
enum class Turn { kRight, kStraight, kLeft };

inline constexpr std::array<Road, 4> kAllRoads = {Road::kSouth, Road::kEast,
                                                  Road::kNorth, Road::kWest};

inline const char* to_string(Road r) {
  switch (r) {
    case Road::kSouth: return "south";
    case Road::kEast: return "east";
    case Road::kNorth: return "north";
    case Road::kWest: return "west";
  }
  return "?";
}

inline const char* to_string(Turn t) {
  switch (t) {
    case Turn::kRight: return "right";
    case Turn::kStraight: return "straight";
    case Turn::kLeft: return "left";
  }
  return "?";
}

// Unit vector pointing from the junction center out along the road.
inline Vec2 road_outward(Road r) {
  switch (r) {
    case Road::kSouth: return {0.0, -1.0};
    case Road::kEast: return {1.0, 0.0};
    case Road::kNorth: return {0.0, 1.0};
    case Road::kWest: return {-1.0, 0.0};
  }
  return {};
}

// Right-hand normal of a travel direction (right-hand traffic).
inline Vec2 right_of(const Vec2& h) { return {h.y, -h.x}; }

struct GeometryConfig {
  double lane_width = 4.0;
  double arm_length = 60.0;         // straight road beyond the junction box
  double junction_half_size = 12.0; // half side of the square junction box
  double point_spacing = 0.25;      // route polyline resolution
  double conflict_distance = 2.5;   // centerline proximity that defines a conflict
};

inline void validate(const GeometryConfig& g) {
  if (!(g.lane_width > 0.0) || !(g.arm_length > 0.0) ||
      !(g.junction_half_size > 0.0) || !(g.point_spacing > 0.0) ||
      !(g.conflict_distance > 0.0)) {
    throw std::invalid_argument("geometry: dimensions must be positive");
  }
  if (g.point_spacing > 0.5) {
    throw std::invalid_argument("geometry: point_spacing must be <= 0.5 m");
  }
  if (g.junction_half_size <= g.lane_width) {
    throw std::invalid_argument("geometry: junction_half_size must exceed lane_width");
  }
  if (g.arm_length <= 2.0 * (2.0 * g.junction_half_size)) {
    throw std::invalid_argument("geometry: arm_length must exceed twice the junction size");
  }
  if (g.conflict_distance >= g.lane_width) {
    throw std::invalid_argument("geometry: conflict_distance must be below lane_width");
  }
}

struct RouteProjection {
  double s = 0.0;        // arc length of the closest point
  double lateral = 0.0;  // signed offset, positive to the left of travel
  double distance = 0.0;
};

// A lane-centerline path from an entry road to an exit road, stored as a dense
// polyline with cumulative arc length. Queries beyond either end extrapolate
// along the terminal heading.
class Route {
 public:
  Route() = default;
  Route(Road entry, Road exit, Turn turn, std::vector<Vec2> points,
        double s_junction_enter, double s_junction_exit)
      : entry_(entry), exit_(exit), turn_(turn), points_(std::move(points)),
        s_junction_enter_(s_junction_enter), s_junction_exit_(s_junction_exit) {
    s_.resize(points_.size(), 0.0);
    for (std::size_t i = 1; i < points_.size(); ++i) {
      s_[i] = s_[i - 1] + distance(points_[i - 1], points_[i]);
    }
    heading_.resize(points_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
      const Vec2 d = points_[i + 1] - points_[i];
      heading_[i] = std::atan2(d.y, d.x);
    }
    if (points_.size() >= 2) heading_.back() = heading_[points_.size() - 2];
  }

  Road entry() const { return entry_; }
  Road exit() const { return exit_; }
  Turn turn() const { return turn_; }
  double length() const { return s_.empty() ? 0.0 : s_.back(); }
  double junction_enter() const { return s_junction_enter_; }
  double junction_exit() const { return s_junction_exit_; }
  const std::vector<Vec2>& points() const { return points_; }
  const std::vector<double>& arc_lengths() const { return s_; }

  // Index i of the segment [i, i+1] containing arc length s (clamped).
  std::size_t segment_at(double s) const {
    if (points_.size() < 2) return 0;
    auto it = std::upper_bound(s_.begin(), s_.end(), s);
    std::size_t i = it == s_.begin() ? 0 : static_cast<std::size_t>(it - s_.begin()) - 1;
    return std::min(i, points_.size() - 2);
  }

  Vec2 point_at(double s) const {
    if (s <= 0.0) return points_.front() + unit_from_heading(heading_.front()) * s;
    if (s >= length()) {
      return points_.back() + unit_from_heading(heading_.back()) * (s - length());
    }
    const std::size_t i = segment_at(s);
    const double seg = s_[i + 1] - s_[i];
    const double t = seg > 0.0 ? (s - s_[i]) / seg : 0.0;
    return points_[i] + (points_[i + 1] - points_[i]) * t;
  }

  double heading_at(double s) const {
    if (s <= 0.0) return heading_.front();
    if (s >= length()) return heading_.back();
    return heading_[segment_at(s)];
  }

  // Closest point restricted to arc lengths in [s_lo, s_hi]. Points past the
  // route ends are projected onto the extrapolated terminal rays.
  RouteProjection project(const Vec2& p, double s_lo, double s_hi) const {
    RouteProjection best;
    best.distance = std::numeric_limits<double>::infinity();
    auto consider = [&](const Vec2& a, const Vec2& dir, double s_a, double t_lo,
                        double t_hi) {
      double t = (p - a).dot(dir);
      t = std::clamp(t, t_lo, t_hi);
      const Vec2 q = a + dir * t;
      const double d = distance(p, q);
      if (d < best.distance) {
        best.distance = d;
        best.s = s_a + t;
        best.lateral = dir.cross(p - q);
      }
    };
    const double total = length();
    if (s_lo < 0.0) {
      consider(points_.front(), unit_from_heading(heading_.front()), 0.0, s_lo,
               std::min(0.0, s_hi));
    }
    if (s_hi > total) {
      consider(points_.back(), unit_from_heading(heading_.back()), total,
               std::max(0.0, s_lo - total), s_hi - total);
    }
    const double lo = std::max(0.0, s_lo);
    const double hi = std::min(total, s_hi);
    if (lo <= hi && points_.size() >= 2) {
      const std::size_t i0 = segment_at(lo);
      const std::size_t i1 = segment_at(hi);
      for (std::size_t i = i0; i <= i1; ++i) {
        const double seg = s_[i + 1] - s_[i];
        if (seg <= 0.0) continue;
        const Vec2 dir = (points_[i + 1] - points_[i]) * (1.0 / seg);
        consider(points_[i], dir, s_[i], std::max(0.0, lo - s_[i]),
                 std::min(seg, hi - s_[i]));
      }
    }
    return best;
  }

  RouteProjection project(const Vec2& p) const {
    return project(p, 0.0, length());
  }

 private:
  Road entry_ = Road::kSouth;
  Road exit_ = Road::kNorth;
  Turn turn_ = Turn::kStraight;
  std::vector<Vec2> points_;
  std::vector<double> s_;
  std::vector<double> heading_;
  double s_junction_enter_ = 0.0;
  double s_junction_exit_ = 0.0;
};

// Arc-length positions where two routes first come within the conflict
// distance of each other.
struct ConflictPoint {
  double s_self = 0.0;
  double s_other = 0.0;
};

struct AxisBox {
  double x_min, x_max, y_min, y_max;

  double distance_to(const Vec2& p) const {
    const double dx = std::max({x_min - p.x, 0.0, p.x - x_max});
    const double dy = std::max({y_min - p.y, 0.0, p.y - y_max});
    return std::hypot(dx, dy);
  }
};

using RouteId = int;

// Four approach roads at 90 degree spacing around a square junction box, one
// lane per direction, with 12 routes (every entry to each of the three other
// roads).
class RoadNetwork {
 public:
  static constexpr int kRouteCount = 12;
  static constexpr int kLanesPerDirection = 1;

  explicit RoadNetwork(const GeometryConfig& cfg) : cfg_(cfg) {
    validate(cfg_);
    for (Road entry : kAllRoads) {
      for (Road exit : kAllRoads) {
        if (exit == entry) continue;
        routes_.push_back(build_route(entry, exit));
      }
    }
    const double j = cfg_.junction_half_size;
    const double w = cfg_.lane_width;
    const double far = j + cfg_.arm_length;
    surfaces_ = {AxisBox{-j, j, -j, j}, AxisBox{-w, w, -far, -j}, AxisBox{j, far, -w, w},
                 AxisBox{-w, w, j, far}, AxisBox{-far, -j, -w, w}};
    compute_conflicts();
  }

  const GeometryConfig& config() const { return cfg_; }
  int route_count() const { return static_cast<int>(routes_.size()); }
  const Route& route(RouteId id) const { return routes_.at(static_cast<std::size_t>(id)); }
  const std::vector<Route>& routes() const { return routes_; }

  RouteId route_id(Road entry, Road exit) const {
    for (int i = 0; i < route_count(); ++i) {
      if (routes_[i].entry() == entry && routes_[i].exit() == exit) return i;
    }
    throw std::invalid_argument(std::string("no route from ") + to_string(entry) +
                                " to " + to_string(exit));
  }

  std::vector<RouteId> routes_from(Road entry) const {
    std::vector<RouteId> out;
    for (int i = 0; i < route_count(); ++i) {
      if (routes_[i].entry() == entry) out.push_back(i);
    }
    return out;
  }

  // Centerline of the lane driving toward (inbound) or away from the junction.
  // Returns the lane start and its unit direction.
  std::pair<Vec2, Vec2> lane_centerline(Road road, bool inbound) const {
    const Vec2 out = road_outward(road);
    const double j = cfg_.junction_half_size;
    const double half = 0.5 * cfg_.lane_width;
    if (inbound) {
      const Vec2 h = out * -1.0;
      return {out * (j + cfg_.arm_length) + right_of(h) * half, h};
    }
    return {out * j + right_of(out) * half, out};
  }

  // Distance from p to the drivable surface (zero when on it).
  double distance_to_surface(const Vec2& p) const {
    double d = std::numeric_limits<double>::infinity();
    for (const AxisBox& b : surfaces_) d = std::min(d, b.distance_to(p));
    return d;
  }

  bool in_junction(const Vec2& p) const { return surfaces_[0].distance_to(p) == 0.0; }

  const std::optional<ConflictPoint>& conflict(RouteId self, RouteId other) const {
    return conflicts_[static_cast<std::size_t>(self) * routes_.size() +
                      static_cast<std::size_t>(other)];
  }

 private:
  static Turn classify(Road entry, Road exit) {
    const Vec2 h_in = road_outward(entry) * -1.0;
    const Vec2 h_out = road_outward(exit);
    const double c = h_in.cross(h_out);
    if (std::abs(c) < 1e-9) return Turn::kStraight;
    return c > 0.0 ? Turn::kLeft : Turn::kRight;
  }

  void append_segment(std::vector<Vec2>& pts, const Vec2& a, const Vec2& b) const {
    const double len = distance(a, b);
    const int n = std::max(1, static_cast<int>(std::ceil(len / cfg_.point_spacing)));
    for (int k = pts.empty() ? 0 : 1; k <= n; ++k) {
      pts.push_back(a + (b - a) * (static_cast<double>(k) / n));
    }
  }

  Route build_route(Road entry, Road exit) const {
    const Turn turn = classify(entry, exit);
    const auto [in_start, h_in] = lane_centerline(entry, true);
    const auto [out_start, h_out] = lane_centerline(exit, false);
    const double j = cfg_.junction_half_size;
    const Vec2 junction_in = in_start + h_in * cfg_.arm_length;
    const Vec2 out_end = out_start + h_out * cfg_.arm_length;

    std::vector<Vec2> pts;
    append_segment(pts, in_start, junction_in);
    const double s_enter = cfg_.arm_length;
    double through = 0.0;
    if (turn == Turn::kStraight) {
      append_segment(pts, junction_in, out_start);
      through = 2.0 * j;
    } else {
      // Quarter circle tangent to both lane centerlines; the corner is where
      // the two centerlines intersect.
      const Vec2 corner = junction_in + h_in * (out_start - junction_in).dot(h_in);
      const double radius = distance(corner, junction_in);
      const Vec2 normal = turn == Turn::kLeft ? Vec2{-h_in.y, h_in.x} : right_of(h_in);
      const Vec2 center = junction_in + normal * radius;
      const double start_angle = std::atan2(junction_in.y - center.y, junction_in.x - center.x);
      const double sweep = (turn == Turn::kLeft ? 1.0 : -1.0) * std::numbers::pi / 2.0;
      through = radius * std::numbers::pi / 2.0;
      const int n = std::max(2, static_cast<int>(std::ceil(through / cfg_.point_spacing)));
      for (int k = 1; k < n; ++k) {
        const double a = start_angle + sweep * (static_cast<double>(k) / n);
        pts.push_back(center + Vec2{std::cos(a), std::sin(a)} * radius);
      }
      pts.push_back(out_start);
    }
    append_segment(pts, out_start, out_end);
    Route r(entry, exit, turn, std::move(pts), s_enter, 0.0);
    // Recover the exact junction exit arc length from the stored polyline.
    const double s_exit = r.project(out_start, s_enter, s_enter + through + 1.0).s;
    return Route(entry, exit, turn, r.points(), s_enter, s_exit);
  }

  void compute_conflicts() {
    const std::size_t n = routes_.size();
    conflicts_.assign(n * n, std::nullopt);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (a == b || routes_[a].entry() == routes_[b].entry()) continue;
        const Route& ra = routes_[a];
        const Route& rb = routes_[b];
        const double lo_b = rb.junction_enter() - 5.0;
        const double hi_b = rb.junction_exit() + cfg_.arm_length;
        const auto& pts = ra.points();
        const auto& s = ra.arc_lengths();
        for (std::size_t k = 0; k < pts.size(); ++k) {
          if (s[k] < ra.junction_enter() - 5.0) continue;
          const RouteProjection pr = rb.project(pts[k], lo_b, hi_b);
          if (pr.distance < cfg_.conflict_distance) {
            conflicts_[a * n + b] = ConflictPoint{s[k], pr.s};
            break;
          }
        }
      }
    }
  }

  GeometryConfig cfg_;
  std::vector<Route> routes_;
  std::vector<AxisBox> surfaces_;
  std::vector<std::optional<ConflictPoint>> conflicts_;
};

inline RoadNetwork build_intersection(const GeometryConfig& cfg) { return RoadNetwork(cfg); }

}  // namespace rdacppo::env

#endif  // RDACPPO_ENV_ROAD_NETWORK_HPP_
