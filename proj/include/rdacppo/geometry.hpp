#ifndef RDACPPO_GEOMETRY_HPP_
#define RDACPPO_GEOMETRY_HPP_

#include <array>
#include <cmath>
#include <numbers>

namespace rdacppo {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr bool operator==(const Vec2&) const = default;

  constexpr double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  constexpr double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
};

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

inline Vec2 unit_from_heading(double heading) {
  return {std::cos(heading), std::sin(heading)};
}

// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

// Rectangle centered at `center`, long axis along `heading`.
struct OrientedRect {
  Vec2 center;
  double heading = 0.0;
  double length = 0.0;
  double width = 0.0;

  Vec2 axis_long() const { return unit_from_heading(heading); }
  Vec2 axis_lat() const { return unit_from_heading(heading + std::numbers::pi / 2.0); }

  std::array<Vec2, 4> corners() const {
    const Vec2 u = axis_long() * (0.5 * length);
    const Vec2 v = axis_lat() * (0.5 * width);
    return {center + u + v, center - u + v, center - u - v, center + u - v};
  }

  bool contains(const Vec2& p) const {
    const Vec2 d = p - center;
    return std::abs(d.dot(axis_long())) <= 0.5 * length &&
           std::abs(d.dot(axis_lat())) <= 0.5 * width;
  }
};

// Separating-axis overlap test for two oriented rectangles. Touching
// boundaries count as overlap.
inline bool overlaps(const OrientedRect& a, const OrientedRect& b) {
  const Vec2 d = b.center - a.center;
  const std::array<Vec2, 4> axes = {a.axis_long(), a.axis_lat(), b.axis_long(),
                                    b.axis_lat()};
  const Vec2 a_u = a.axis_long() * (0.5 * a.length);
  const Vec2 a_v = a.axis_lat() * (0.5 * a.width);
  const Vec2 b_u = b.axis_long() * (0.5 * b.length);
  const Vec2 b_v = b.axis_lat() * (0.5 * b.width);
  for (const Vec2& n : axes) {
    const double ra = std::abs(a_u.dot(n)) + std::abs(a_v.dot(n));
    const double rb = std::abs(b_u.dot(n)) + std::abs(b_v.dot(n));
    if (std::abs(d.dot(n)) > ra + rb) return false;
  }
  return true;
}

}  // namespace rdacppo

#endif  // RDACPPO_GEOMETRY_HPP_
