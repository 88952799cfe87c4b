#ifndef RDACPPO_TESTS_SAMPLING_ORACLE_HPP_
#define RDACPPO_TESTS_SAMPLING_ORACLE_HPP_

// Collision oracle that never projects onto separating axes: overlap is
// decided by sampling one rectangle's area on a dense grid and testing point
// containment in the other.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

#include "rdacppo/geometry.hpp"
#include "rdacppo/random.hpp"

namespace rdacppo::testing_oracle {

inline std::pair<OrientedRect, OrientedRect> random_rect_pair(Rng& rng) {
  auto make = [&](double cx, double cy) {
    return OrientedRect{{cx, cy}, uniform(rng, -3.2, 3.2), uniform(rng, 1.0, 5.5),
                        uniform(rng, 0.6, 2.5)};
  };
  const OrientedRect a = make(0.0, 0.0);
  const OrientedRect b = make(uniform(rng, -6.0, 6.0), uniform(rng, -6.0, 6.0));
  return {a, b};
}

// Depth of p inside r (distance to the nearest edge), negative when outside.
inline double inside_depth(const OrientedRect& r, const Vec2& p) {
  const Vec2 d = p - r.center;
  const double u = std::abs(d.dot(r.axis_long()));
  const double v = std::abs(d.dot(r.axis_lat()));
  return std::min(0.5 * r.length - u, 0.5 * r.width - v);
}

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.dot(ab), 0.0, 1.0);
  return distance(p, a + ab * t);
}

// Polygon distance between two disjoint convex quadrilaterals.
inline double polygon_distance(const OrientedRect& a, const OrientedRect& b) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < 4; ++k) {
      d = std::min(d, point_segment_distance(ca[i], cb[k], cb[(k + 1) % 4]));
      d = std::min(d, point_segment_distance(cb[i], ca[k], ca[(k + 1) % 4]));
    }
  }
  return d;
}

// Maximum containment depth over a grid of spacing h covering `src`.
inline double max_sampled_depth(const OrientedRect& src, const OrientedRect& dst, double h) {
  const int nu = static_cast<int>(std::ceil(src.length / h));
  const int nv = static_cast<int>(std::ceil(src.width / h));
  const Vec2 u = src.axis_long();
  const Vec2 v = src.axis_lat();
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= nu; ++i) {
    const double lu = -0.5 * src.length + src.length * i / nu;
    for (int k = 0; k <= nv; ++k) {
      const double lv = -0.5 * src.width + src.width * k / nv;
      best = std::max(best, inside_depth(dst, src.center + u * lu + v * lv));
    }
  }
  return best;
}

struct OracleVerdict {
  bool overlap = false;
  double margin = 0.0;  // penetration depth of the deepest sample, or gap width
};

inline OracleVerdict classify(const OrientedRect& a, const OrientedRect& b, double h) {
  const double depth = std::max(max_sampled_depth(a, b, h), max_sampled_depth(b, a, h));
  if (depth >= 0.0) return {true, depth};
  return {false, polygon_distance(a, b)};
}

inline bool sampled_overlap(const OrientedRect& a, const OrientedRect& b, double h) {
  return classify(a, b, h).overlap;
}

inline double separation_margin(const OrientedRect& a, const OrientedRect& b) {
  return classify(a, b, 0.01).margin;
}

}  // namespace rdacppo::testing_oracle

#endif  // RDACPPO_TESTS_SAMPLING_ORACLE_HPP_
