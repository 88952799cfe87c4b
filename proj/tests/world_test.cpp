#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <sstream>

#include "rdacppo/env/world.hpp"

namespace rdacppo::env {
namespace {

class WorldTest : public ::testing::Test {
 protected:
  EnvConfig cfg;
  std::shared_ptr<const RoadNetwork> net = std::make_shared<RoadNetwork>(cfg.geometry);

  // World with only a parked ego at the far end of the south approach.
  WorldState parked_ego_world() const {
    WorldState w;
    w.network = net;
    w.ego = place_on_route(*net, net->route_id(Road::kSouth, Road::kNorth), 0.0, 0.0,
                           cfg.vehicle_length, cfg.vehicle_width);
    w.goal = net->route(w.ego.route).point_at(100.0);
    w.goal_progress = 100.0;
    return w;
  }
};

TEST_F(WorldTest, SpawnWithoutSurroundingVehicles) {
  Rng rng(1);
  const WorldState w = spawn_scenario(0, rng, cfg, net);
  EXPECT_TRUE(w.svs.empty());
  EXPECT_EQ(net->route(w.ego.route).entry(), Road::kSouth);
  EXPECT_EQ(w.time, 0.0);
}

TEST_F(WorldTest, SpawnIsDeterministicForFixedSeed) {
  Rng a(99), b(99);
  const WorldState wa = spawn_scenario(6, a, cfg, net);
  const WorldState wb = spawn_scenario(6, b, cfg, net);
  EXPECT_EQ(wa.ego, wb.ego);
  EXPECT_EQ(wa.svs, wb.svs);
}

TEST_F(WorldTest, SpawnRejectsOutOfRangeCount) {
  Rng rng(1);
  EXPECT_THROW(spawn_scenario(7, rng, cfg, net), std::invalid_argument);
  EXPECT_THROW(spawn_scenario(-1, rng, cfg, net), std::invalid_argument);
}

TEST_F(WorldTest, SpawnFailsWhenPlacementImpossible) {
  EnvConfig tight = cfg;
  tight.spawn.min_separation = 200.0;
  Rng rng(1);
  EXPECT_THROW(spawn_scenario(2, rng, tight, net), std::runtime_error);
}

TEST_F(WorldTest, ThousandSpawnsStartCollisionFree) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const WorldState w = spawn_scenario(6, rng, cfg, net);
    ASSERT_TRUE(detect_collisions(w).empty()) << "spawn " << i;
    ASSERT_FALSE(off_road(w));
    for (const VehicleState& sv : w.svs) EXPECT_NE(net->route(sv.route).entry(), Road::kSouth);
  }
}

TEST_F(WorldTest, SpawnHonorsRequestedEgoTurn) {
  Rng rng(3);
  for (Turn t : {Turn::kLeft, Turn::kStraight, Turn::kRight}) {
    const WorldState w = spawn_scenario(2, rng, cfg, net, t);
    EXPECT_EQ(net->route(w.ego.route).turn(), t);
  }
}

TEST_F(WorldTest, LoneStraightSvHoldsSpeedAndLane) {
  WorldState w = parked_ego_world();
  const RouteId id = net->route_id(Road::kEast, Road::kWest);
  w.svs.push_back(place_on_route(*net, id, 5.0, cfg.sv.desired_speed_approach,
                                 cfg.vehicle_length, cfg.vehicle_width));
  const Control u = sv_policy_step(w, 0, cfg);
  EXPECT_NEAR(u.accel, 0.0, 1e-9);
  EXPECT_NEAR(u.steer, 0.0, 1e-9);
}

TEST_F(WorldTest, SvYieldsToVehicleHoldingTheConflictPoint) {
  WorldState w = parked_ego_world();
  const RouteId crossing = net->route_id(Road::kEast, Road::kWest);
  const RouteId yielding = net->route_id(Road::kNorth, Road::kSouth);
  const ConflictPoint c_cross = *net->conflict(crossing, yielding);
  const ConflictPoint c_yield = *net->conflict(yielding, crossing);
  // First vehicle already at its conflict point, second approaching at 9 m/s
  // with room to stop comfortably.
  w.svs.push_back(place_on_route(*net, crossing, c_cross.s_self, 6.0, cfg.vehicle_length,
                                 cfg.vehicle_width));
  w.svs.push_back(place_on_route(*net, yielding, c_yield.s_self - 17.0, 9.0,
                                 cfg.vehicle_length, cfg.vehicle_width));
  const Control blocked = sv_policy_step(w, 1, cfg);
  EXPECT_LT(blocked.accel, 0.0);

  WorldState alone = w;
  alone.svs.erase(alone.svs.begin());
  EXPECT_GT(sv_policy_step(alone, 0, cfg).accel, blocked.accel);
  // The vehicle already in the junction keeps going.
  EXPECT_GE(sv_policy_step(w, 0, cfg).accel, 0.0);
}

TEST_F(WorldTest, ControlsRespectHardLimitsOverLongRun) {
  Rng rng(17);
  WorldState w = spawn_scenario(6, rng, cfg, net);
  for (int k = 0; k < 10000; ++k) {
    for (int i = 0; i < static_cast<int>(w.svs.size()); ++i) {
      const Control u = sv_policy_step(w, i, cfg);
      ASSERT_LE(std::abs(u.steer), deg_to_rad(45.0) + 1e-12);
      ASSERT_LE(std::abs(u.accel), 8.0 + 1e-12);
    }
    w = env_step(w, {uniform(rng, -10.0, 10.0), uniform(rng, -1.0, 1.0)}, cfg);
  }
}

TEST_F(WorldTest, StepIsDeterministic) {
  Rng rng(8);
  const WorldState w = spawn_scenario(5, rng, cfg, net);
  WorldState a = w, b = w;
  for (int k = 0; k < 200; ++k) {
    a = env_step(a, {1.0, 0.05}, cfg);
    b = env_step(b, {1.0, 0.05}, cfg);
  }
  EXPECT_EQ(a.ego, b.ego);
  EXPECT_EQ(a.svs, b.svs);
  EXPECT_EQ(a.time, b.time);
}

TEST_F(WorldTest, EmptyWorldOnlyMovesEgo) {
  Rng rng(2);
  const WorldState w = spawn_scenario(0, rng, cfg, net);
  const WorldState next = env_step(w, {0.0, 0.0}, cfg);
  EXPECT_TRUE(next.svs.empty());
  EXPECT_NE(next.ego, w.ego);
  EXPECT_DOUBLE_EQ(next.time, cfg.dt);
  EXPECT_GE(next.ego.progress, w.ego.progress);
}

TEST_F(WorldTest, PlatoonOfFourNeverCollides) {
  WorldState w = parked_ego_world();
  const RouteId id = net->route_id(Road::kEast, Road::kWest);
  const double v = cfg.sv.desired_speed_approach;
  const double spacing = cfg.vehicle_length + cfg.sv.min_gap + v * cfg.sv.time_headway + 1.0;
  for (int i = 0; i < 4; ++i) {
    w.svs.push_back(place_on_route(*net, id, 3.0 * spacing - i * spacing, v,
                                   cfg.vehicle_length, cfg.vehicle_width));
  }
  double prev_progress[4];
  for (int i = 0; i < 4; ++i) prev_progress[i] = w.svs[i].progress;
  for (int k = 0; k < 10000; ++k) {
    w = env_step(w, {0.0, 0.0}, cfg);
    ASSERT_TRUE(detect_collisions(w).empty()) << "step " << k;
    for (int i = 0; i < 4; ++i) {
      ASSERT_GE(w.svs[i].progress, prev_progress[i]);
      prev_progress[i] = w.svs[i].progress;
    }
  }
}

TEST_F(WorldTest, OffRoadPredicate) {
  WorldState w = parked_ego_world();
  w.ego = place_on_route(*net, w.ego.route, 30.0, 5.0, 5.0, 2.0);
  EXPECT_FALSE(off_road(w));
  w.ego.x += 20.0;
  EXPECT_TRUE(off_road(w));
}

TEST_F(WorldTest, EveryLegalRoutePointIsOnRoad) {
  WorldState w = parked_ego_world();
  for (const Route& r : net->routes()) {
    for (const Vec2& p : r.points()) {
      w.ego.x = p.x;
      w.ego.y = p.y;
      ASSERT_FALSE(off_road(w));
    }
  }
}

TEST_F(WorldTest, TraceRowsPerVehicle) {
  Rng rng(4);
  const WorldState w = spawn_scenario(3, rng, cfg, net);
  std::ostringstream os;
  write_trace_header(os);
  write_trace_rows(os, w);
  int lines = 0;
  for (char ch : os.str()) lines += ch == '\n';
  EXPECT_EQ(lines, 5);
  EXPECT_EQ(os.str().rfind("time,vehicle,x,y,speed,heading\n", 0), 0u);
}

}  // namespace
}  // namespace rdacppo::env
