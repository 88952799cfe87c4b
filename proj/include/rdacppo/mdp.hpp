#ifndef RDACPPO_MDP_HPP_
#define RDACPPO_MDP_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdacppo/env/world.hpp"

namespace rdacppo::mdp {

using env::Control;
using env::EnvConfig;
using env::VehicleState;
using env::WorldState;

inline constexpr int kFeatureCount = 6;

enum class Action : int {
  kLaneLeft = 0,
  kKeep = 1,
  kLaneRight = 2,
  kDecelerate = 3,
  kAccelerate = 4,
};
inline constexpr int kActionCount = 5;

inline const char* to_string(Action a) {
  switch (a) {
    case Action::kLaneLeft: return "lane_left";
    case Action::kKeep: return "keep";
    case Action::kLaneRight: return "lane_right";
    case Action::kDecelerate: return "decelerate";
    case Action::kAccelerate: return "accelerate";
  }
  return "?";
}

struct ActionConfig {
  double speed_step = 1.5;      // target-speed change of Accelerate / Decelerate
  double max_speed = 12.0;
  int decision_steps = 2;       // simulation steps each action is held
  double speed_gain = 2.0;      // proportional speed controller, 1/s
  double lookahead_min = 4.0;
  double lookahead_gain = 0.6;
};

struct RewardConfig {
  double success_time_coef = -2.0;      // alpha_1
  double success_bonus = 5.0;           // alpha_2
  double collision_speed_coef = -0.05;  // alpha_3
  double collision_bonus = -5.0;        // alpha_4
  double timeout = -5.0;
  double off_road = -5.0;
  double lane_change = -0.2;            // per change
  double survival = 0.05;               // per decision step
  double max_time = 20.0;               // t_c^max, s
  double gamma = 0.9;
  double goal_radius = 4.0;
};

struct MdpConfig {
  ActionConfig action;
  RewardConfig reward;
};

inline void validate(const MdpConfig& c) {
  if (!(c.reward.gamma > 0.0 && c.reward.gamma < 1.0)) {
    throw std::invalid_argument("reward: gamma must lie in (0, 1)");
  }
  if (!(c.reward.max_time > 0.0)) throw std::invalid_argument("reward: max_time must be > 0");
  if (!(c.reward.goal_radius > 0.0)) throw std::invalid_argument("reward: goal_radius must be > 0");
  if (!(c.action.speed_step > 0.0) || !(c.action.max_speed > 0.0) ||
      c.action.decision_steps < 1 || !(c.action.speed_gain > 0.0) ||
      !(c.action.lookahead_min > 0.0)) {
    throw std::invalid_argument("action: parameters must be positive");
  }
}

// (n_max + 1) x 6 kinematic feature matrix, row-major. Row 0 is the ego.
class ObservationMatrix {
 public:
  explicit ObservationMatrix(int n_max)
      : rows_(n_max + 1), data_(static_cast<std::size_t>(n_max + 1) * kFeatureCount, 0.0) {}

  int rows() const { return rows_; }
  std::span<const double> row(int r) const {
    return {data_.data() + static_cast<std::size_t>(r) * kFeatureCount, kFeatureCount};
  }
  std::span<double> row(int r) {
    return {data_.data() + static_cast<std::size_t>(r) * kFeatureCount, kFeatureCount};
  }
  const std::vector<double>& data() const { return data_; }

 private:
  int rows_;
  std::vector<double> data_;
};

inline void fill_row(std::span<double> row, const VehicleState& v) {
  const double c = std::cos(v.heading);
  const double s = std::sin(v.heading);
  row[0] = v.x;
  row[1] = v.y;
  row[2] = v.speed * c;
  row[3] = v.speed * s;
  row[4] = s;
  row[5] = c;
}

// Ego first, then surrounding vehicles nearest-first (ties by spawn order),
// absent vehicles zero-padded.
inline ObservationMatrix observe(const WorldState& w, int n_max) {
  if (static_cast<int>(w.svs.size()) > n_max) {
    throw std::invalid_argument("observe: more surrounding vehicles than n_max");
  }
  ObservationMatrix obs(n_max);
  fill_row(obs.row(0), w.ego);
  std::vector<int> order(w.svs.size());
  std::iota(order.begin(), order.end(), 0);
  const Vec2 ego = w.ego.position();
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return distance(w.svs[a].position(), ego) < distance(w.svs[b].position(), ego);
  });
  for (std::size_t k = 0; k < order.size(); ++k) {
    fill_row(obs.row(static_cast<int>(k) + 1), w.svs[order[k]]);
  }
  return obs;
}

// Network input: positions scaled by the arm length, velocities by the speed
// cap, heading features unchanged.
inline std::vector<double> flatten(const ObservationMatrix& obs, double position_scale,
                                   double speed_scale) {
  std::vector<double> out(obs.data());
  for (std::size_t i = 0; i < out.size(); i += kFeatureCount) {
    out[i + 0] /= position_scale;
    out[i + 1] /= position_scale;
    out[i + 2] /= speed_scale;
    out[i + 3] /= speed_scale;
  }
  return out;
}

// Set-point handed to the low-level controllers.
struct ControlTarget {
  int lane = 0;  // same-direction lane index, 0 = rightmost
  double speed = 0.0;
  bool operator==(const ControlTarget&) const = default;
};

struct DecodedAction {
  ControlTarget target;
  bool lane_changed = false;
};

// Lane changes are honored only on straight segments outside the junction and
// only toward an existing same-direction lane; otherwise they act as Keep.
inline DecodedAction decode_action(Action a, const ControlTarget& current,
                                   const VehicleState& ego, const env::RoadNetwork& net,
                                   const ActionConfig& cfg) {
  DecodedAction out{current, false};
  switch (a) {
    case Action::kKeep:
      break;
    case Action::kAccelerate:
      out.target.speed = std::clamp(current.speed + cfg.speed_step, 0.0, cfg.max_speed);
      break;
    case Action::kDecelerate:
      out.target.speed = std::clamp(current.speed - cfg.speed_step, 0.0, cfg.max_speed);
      break;
    case Action::kLaneLeft:
    case Action::kLaneRight: {
      const int lane = current.lane + (a == Action::kLaneLeft ? 1 : -1);
      const env::Route& r = net.route(ego.route);
      const bool straight = ego.progress < r.junction_enter() || ego.progress > r.junction_exit();
      if (straight && lane >= 0 && lane < env::RoadNetwork::kLanesPerDirection) {
        out.target.lane = lane;
        out.lane_changed = true;
      }
      break;
    }
  }
  return out;
}

inline Control low_level_control(const VehicleState& ego, const ControlTarget& target,
                                 const env::RoadNetwork& net, const ActionConfig& cfg,
                                 const env::VehicleLimits& lim) {
  const double accel = cfg.speed_gain * (target.speed - ego.speed);
  const double lookahead = std::max(cfg.lookahead_min, cfg.lookahead_gain * ego.speed);
  const double offset = target.lane * net.config().lane_width;
  const double steer =
      env::pure_pursuit_steer(ego, net.route(ego.route), lookahead, lim.wheelbase, offset);
  return env::clamp_control({accel, steer}, lim);
}

enum class Outcome { kRunning, kSuccess, kCollision, kTimeout, kOffRoad };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::kRunning: return "running";
    case Outcome::kSuccess: return "success";
    case Outcome::kCollision: return "collision";
    case Outcome::kTimeout: return "timeout";
    case Outcome::kOffRoad: return "off_road";
  }
  return "?";
}

struct EpisodeOutcome {
  Outcome kind = Outcome::kRunning;
  double completion_time = 0.0;  // t_c
  int lane_changes = 0;
  double terminal_speed = 0.0;

  bool terminal() const { return kind != Outcome::kRunning; }
};

inline bool reached_goal(const WorldState& w, const RewardConfig& cfg) {
  return distance(w.ego.position(), w.goal) <= cfg.goal_radius;
}

inline bool timed_out(const WorldState& w, const RewardConfig& cfg) {
  return w.time >= cfg.max_time - 1e-9;
}

// Precedence: Collision > OffRoad > Success > Timeout.
inline EpisodeOutcome terminal_check(const WorldState& w, const RewardConfig& cfg,
                                     double off_road_tolerance = 0.1) {
  EpisodeOutcome o;
  o.completion_time = std::min(w.time, cfg.max_time);
  o.terminal_speed = w.ego.speed;
  if (env::ego_collided(w)) {
    o.kind = Outcome::kCollision;
  } else if (env::off_road(w, off_road_tolerance)) {
    o.kind = Outcome::kOffRoad;
  } else if (reached_goal(w, cfg)) {
    o.kind = Outcome::kSuccess;
  } else if (timed_out(w, cfg)) {
    o.kind = Outcome::kTimeout;
  }
  return o;
}

struct RewardBreakdown {
  double success = 0.0;
  double collision = 0.0;
  double timeout = 0.0;
  double off_road = 0.0;
  double lane_change = 0.0;
  double survival = 0.0;
  double total = 0.0;
};

inline RewardBreakdown compute_reward(const WorldState& /*prev*/, const WorldState& w,
                                      const EpisodeOutcome& outcome, int lane_change_delta,
                                      const RewardConfig& cfg,
                                      double off_road_tolerance = 0.1) {
  switch (outcome.kind) {
    case Outcome::kCollision:
      if (!env::ego_collided(w)) throw std::logic_error("compute_reward: collision without contact");
      break;
    case Outcome::kOffRoad:
      if (!env::off_road(w, off_road_tolerance)) {
        throw std::logic_error("compute_reward: off-road outcome with ego on the road");
      }
      break;
    case Outcome::kSuccess:
      if (!reached_goal(w, cfg)) throw std::logic_error("compute_reward: success away from goal");
      break;
    case Outcome::kTimeout:
      if (!timed_out(w, cfg)) throw std::logic_error("compute_reward: timeout before max_time");
      break;
    case Outcome::kRunning:
      break;
  }
  if (lane_change_delta < 0) throw std::invalid_argument("compute_reward: negative lane changes");
  if (outcome.completion_time > cfg.max_time + 1e-9) {
    throw std::logic_error("compute_reward: completion time exceeds max_time");
  }
  const double n_sv = static_cast<double>(w.svs.size());
  RewardBreakdown r;
  if (outcome.kind == Outcome::kSuccess) {
    r.success = cfg.success_time_coef * (outcome.completion_time / cfg.max_time) * n_sv * n_sv +
                cfg.success_bonus;
  }
  if (outcome.kind == Outcome::kCollision) {
    r.collision = cfg.collision_speed_coef * w.ego.speed * n_sv * n_sv + cfg.collision_bonus;
  }
  if (outcome.kind == Outcome::kTimeout) r.timeout = cfg.timeout;
  if (outcome.kind == Outcome::kOffRoad) r.off_road = cfg.off_road;
  r.lane_change = cfg.lane_change * lane_change_delta;
  r.survival = cfg.survival;
  r.total = r.success + r.collision + r.timeout + r.off_road + r.lane_change + r.survival;
  return r;
}

struct StepResult {
  RewardBreakdown reward;
  EpisodeOutcome outcome;
};

// One driving episode at the decision level: each action is held for
// `decision_steps` simulation steps, and the episode ends at the first
// terminal simulation step.
class Episode {
 public:
  Episode(WorldState initial, const EnvConfig& env_cfg, const MdpConfig& cfg)
      : world_(std::move(initial)), env_cfg_(&env_cfg), cfg_(&cfg) {
    target_.speed = std::clamp(world_.ego.speed, 0.0, cfg.action.max_speed);
  }

  const WorldState& world() const { return world_; }
  const ControlTarget& target() const { return target_; }
  const EpisodeOutcome& outcome() const { return outcome_; }
  bool done() const { return outcome_.terminal(); }
  int decisions() const { return decisions_; }

  ObservationMatrix observe() const { return mdp::observe(world_, env_cfg_->n_sv_max); }

  std::vector<double> observe_flat() const {
    return flatten(observe(), env_cfg_->geometry.arm_length, cfg_->action.max_speed);
  }

  StepResult step(Action a) {
    if (done()) throw std::logic_error("Episode::step after termination");
    const WorldState prev = world_;
    const DecodedAction d =
        decode_action(a, target_, world_.ego, *world_.network, cfg_->action);
    target_ = d.target;
    const int lc = d.lane_changed ? 1 : 0;
    lane_changes_ += lc;
    for (int k = 0; k < cfg_->action.decision_steps; ++k) {
      const Control u = low_level_control(world_.ego, target_, *world_.network, cfg_->action,
                                          env_cfg_->sv.limits);
      world_ = env::env_step(world_, u, *env_cfg_);
      outcome_ = terminal_check(world_, cfg_->reward, env_cfg_->off_road_tolerance);
      if (outcome_.terminal()) break;
    }
    outcome_.lane_changes = lane_changes_;
    ++decisions_;
    StepResult out;
    out.outcome = outcome_;
    out.reward = compute_reward(prev, world_, outcome_, lc, cfg_->reward,
                                env_cfg_->off_road_tolerance);
    return out;
  }

 private:
  WorldState world_;
  const EnvConfig* env_cfg_;
  const MdpConfig* cfg_;
  ControlTarget target_;
  EpisodeOutcome outcome_;
  int lane_changes_ = 0;
  int decisions_ = 0;
};

inline void write_reward_header(std::ostream& os) {
  os << "step,success,collision,timeout,off_road,lane_change,survival,total\n";
}

inline void write_reward_row(std::ostream& os, int step, const RewardBreakdown& r) {
  os << step << ',' << r.success << ',' << r.collision << ',' << r.timeout << ','
     << r.off_road << ',' << r.lane_change << ',' << r.survival << ',' << r.total << '\n';
}

}  // namespace rdacppo::mdp

#endif  // RDACPPO_MDP_HPP_
