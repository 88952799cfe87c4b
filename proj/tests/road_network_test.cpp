#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "rdacppo/env/road_network.hpp"

namespace rdacppo::env {
namespace {

TEST(BuildIntersection, DefaultHasTwelveRoutesThreePerEntry) {
  const RoadNetwork net = build_intersection(GeometryConfig{});
  EXPECT_EQ(net.route_count(), 12);
  for (Road r : kAllRoads) {
    const auto ids = net.routes_from(r);
    ASSERT_EQ(ids.size(), 3u);
    std::set<Turn> turns;
    for (RouteId id : ids) turns.insert(net.route(id).turn());
    EXPECT_EQ(turns.size(), 3u);
  }
}

TEST(BuildIntersection, RejectsDegenerateGeometry) {
  GeometryConfig g;
  g.arm_length = 0.0;
  EXPECT_THROW(build_intersection(g), std::invalid_argument);
  g = GeometryConfig{};
  g.lane_width = -1.0;
  EXPECT_THROW(build_intersection(g), std::invalid_argument);
  g = GeometryConfig{};
  g.arm_length = 40.0;  // not more than twice the 24 m junction
  EXPECT_THROW(build_intersection(g), std::invalid_argument);
  g = GeometryConfig{};
  g.junction_half_size = 3.0;
  EXPECT_THROW(build_intersection(g), std::invalid_argument);
}

TEST(BuildIntersection, SouthToWestEndpointsOnLaneCenterlines) {
  const GeometryConfig g;
  const RoadNetwork net(g);
  const Route& r = net.route(net.route_id(Road::kSouth, Road::kWest));
  EXPECT_EQ(r.turn(), Turn::kLeft);
  // Northbound south lane: x = +w/2. Westbound west lane: y = +w/2.
  const double half = 0.5 * g.lane_width;
  const double far = g.junction_half_size + g.arm_length;
  const Vec2 start = r.points().front();
  const Vec2 end = r.points().back();
  EXPECT_NEAR(start.x, half, 1e-12);
  EXPECT_NEAR(start.y, -far, 1e-12);
  EXPECT_NEAR(end.x, -far, 1e-12);
  EXPECT_NEAR(end.y, half, 1e-12);
  EXPECT_NEAR(r.heading_at(0.0), M_PI / 2.0, 1e-9);
  EXPECT_NEAR(std::abs(r.heading_at(r.length())), M_PI, 1e-9);
}

TEST(BuildIntersection, TurnLengthsMatchQuarterCircles) {
  const GeometryConfig g;
  const RoadNetwork net(g);
  const double j = g.junction_half_size;
  const double half = 0.5 * g.lane_width;
  const Route& left = net.route(net.route_id(Road::kSouth, Road::kWest));
  const Route& right = net.route(net.route_id(Road::kSouth, Road::kEast));
  const Route& straight = net.route(net.route_id(Road::kSouth, Road::kNorth));
  // Chord-sampled arcs are slightly shorter than the true arc.
  EXPECT_NEAR(left.length(), 2.0 * g.arm_length + (j + half) * M_PI / 2.0, 5e-3);
  EXPECT_NEAR(right.length(), 2.0 * g.arm_length + (j - half) * M_PI / 2.0, 5e-3);
  EXPECT_NEAR(straight.length(), 2.0 * g.arm_length + 2.0 * j, 1e-9);
}

TEST(BuildIntersection, RoutesContinuousAndOnTheRoad) {
  const RoadNetwork net(GeometryConfig{});
  for (const Route& r : net.routes()) {
    const auto& pts = r.points();
    for (std::size_t i = 1; i < pts.size(); ++i) {
      EXPECT_LE(distance(pts[i - 1], pts[i]), 0.5);
      const double dh = std::abs(wrap_angle(r.heading_at(r.arc_lengths()[i]) -
                                            r.heading_at(r.arc_lengths()[i - 1])));
      EXPECT_LT(dh, 0.05);
    }
    for (const Vec2& p : pts) EXPECT_EQ(net.distance_to_surface(p), 0.0);
  }
}

TEST(BuildIntersection, Deterministic) {
  const RoadNetwork a(GeometryConfig{});
  const RoadNetwork b(GeometryConfig{});
  for (int i = 0; i < a.route_count(); ++i) {
    EXPECT_EQ(a.route(i).points(), b.route(i).points());
  }
}

TEST(Route, ProjectionRecoversArcLength) {
  const RoadNetwork net(GeometryConfig{});
  const Route& r = net.route(net.route_id(Road::kEast, Road::kSouth));
  for (double s = 0.0; s < r.length(); s += 7.3) {
    const RouteProjection p = r.project(r.point_at(s));
    EXPECT_NEAR(p.s, s, 1e-9);
    EXPECT_NEAR(p.distance, 0.0, 1e-9);
  }
  // Extrapolation beyond the end.
  const RouteProjection beyond = r.project(r.point_at(r.length() + 10.0), 0.0, r.length() + 20.0);
  EXPECT_NEAR(beyond.s, r.length() + 10.0, 1e-9);
}

TEST(Route, LateralSignIsPositiveToTheLeft) {
  const RoadNetwork net(GeometryConfig{});
  const Route& r = net.route(net.route_id(Road::kSouth, Road::kNorth));
  // Heading north: left is -x.
  EXPECT_GT(r.project({0.0, -30.0}).lateral, 0.0);
  EXPECT_LT(r.project({4.0, -30.0}).lateral, 0.0);
}

TEST(Conflicts, CrossingAndMergingPairsOnly) {
  const RoadNetwork net(GeometryConfig{});
  const RouteId sn = net.route_id(Road::kSouth, Road::kNorth);
  const RouteId ew = net.route_id(Road::kEast, Road::kWest);
  const RouteId se = net.route_id(Road::kSouth, Road::kEast);
  const RouteId ns = net.route_id(Road::kNorth, Road::kSouth);
  const RouteId we = net.route_id(Road::kWest, Road::kEast);
  const RouteId sw = net.route_id(Road::kSouth, Road::kWest);
  EXPECT_TRUE(net.conflict(sn, ew).has_value());
  EXPECT_TRUE(net.conflict(ew, sn).has_value());
  EXPECT_TRUE(net.conflict(se, we).has_value());  // merge into the eastbound lane
  EXPECT_FALSE(net.conflict(se, ns).has_value());  // right turn never meets opposing straight
  EXPECT_TRUE(net.conflict(sw, ns).has_value());  // unprotected left
  EXPECT_FALSE(net.conflict(sn, sw).has_value());  // shared entry lane
  // Crossing point of two straights lies inside the junction box.
  const ConflictPoint c = *net.conflict(sn, ew);
  const Vec2 p = net.route(sn).point_at(c.s_self);
  EXPECT_TRUE(net.in_junction(p));
}

TEST(Surface, OffRoadDistance) {
  const RoadNetwork net(GeometryConfig{});
  EXPECT_EQ(net.distance_to_surface({2.0, -40.0}), 0.0);
  EXPECT_NEAR(net.distance_to_surface({24.0, -40.0}), 20.0, 1e-12);
  EXPECT_EQ(net.distance_to_surface({11.0, 11.0}), 0.0);
  EXPECT_NEAR(net.distance_to_surface({16.0, 16.0}), std::hypot(4.0, 4.0), 1e-12);
}

}  // namespace
}  // namespace rdacppo::env
