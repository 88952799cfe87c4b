#ifndef RDACPPO_CONFIG_HPP_
#define RDACPPO_CONFIG_HPP_

#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "rdacppo/bandit.hpp"
#include "rdacppo/env/world.hpp"
#include "rdacppo/mdp.hpp"
#include "rdacppo/ppo.hpp"
#include "rdacppo/trainer.hpp"

// JSON (de)serialization of every tunable. Leaf structs use nlohmann's
// field macros; missing keys keep their defaults, unknown keys are rejected by
// load_run_config so typos cannot silently fall back to a default.

namespace rdacppo::env {
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(GeometryConfig, lane_width, arm_length,
                                                junction_half_size, point_spacing,
                                                conflict_distance)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(VehicleLimits, max_accel, max_steer, wheelbase)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SvBehaviorConfig, desired_speed_approach,
                                                desired_speed_junction, junction_zone,
                                                time_headway, min_gap, accel, comfort_decel,
                                                exponent, limits, lookahead_min, lookahead_gain,
                                                stop_clearance, arrival_tie)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SpawnConfig, ego_distance_min, ego_distance_max,
                                                ego_speed_min, ego_speed_max, sv_distance_min,
                                                sv_distance_max, sv_speed_fraction_min,
                                                sv_speed_fraction_max, min_separation,
                                                max_retries, goal_offset)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(EnvConfig, geometry, sv, spawn, vehicle_length,
                                                vehicle_width, dt, n_sv_max, off_road_tolerance,
                                                leader_lookahead)
}  // namespace rdacppo::env

namespace rdacppo::mdp {
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ActionConfig, speed_step, max_speed,
                                                decision_steps, speed_gain, lookahead_min,
                                                lookahead_gain)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RewardConfig, success_time_coef, success_bonus,
                                                collision_speed_coef, collision_bonus, timeout,
                                                off_road, lane_change, survival, max_time, gamma,
                                                goal_radius)
}  // namespace rdacppo::mdp

namespace rdacppo::curriculum {
NLOHMANN_JSON_SERIALIZE_ENUM(InitScheme, {{InitScheme::kExp, "exp"}, {InitScheme::kEqual, "equal"}})
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(BanditConfig, eta, alpha, k0, k1, sync_interval,
                                                init)
}  // namespace rdacppo::curriculum

namespace rdacppo::ppo {
// gamma lives with the reward settings; it is copied in on load.
inline void to_json(nlohmann::json& j, const PpoConfig& c) {
  j = {{"lambda", c.lambda},         {"clip", c.clip},
       {"epochs", c.epochs},         {"actor_lr", c.actor_lr},
       {"critic_lr", c.critic_lr},   {"value_coef", c.value_coef},
       {"entropy_coef", c.entropy_coef}, {"normalize_advantages", c.normalize_advantages}};
}
inline void from_json(const nlohmann::json& j, PpoConfig& c) {
  c.lambda = j.value("lambda", c.lambda);
  c.clip = j.value("clip", c.clip);
  c.epochs = j.value("epochs", c.epochs);
  c.actor_lr = j.value("actor_lr", c.actor_lr);
  c.critic_lr = j.value("critic_lr", c.critic_lr);
  c.value_coef = j.value("value_coef", c.value_coef);
  c.entropy_coef = j.value("entropy_coef", c.entropy_coef);
  c.normalize_advantages = j.value("normalize_advantages", c.normalize_advantages);
}
}  // namespace rdacppo::ppo

namespace rdacppo::config {

struct EvalConfig {
  int trials = 200;
  std::uint64_t seed = 2024;
  int n_sv_min = 0;
  int n_sv_max = -1;  // -1: up to the environment's n_sv_max
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(EvalConfig, trials, seed, n_sv_min, n_sv_max)

struct ExportConfig {
  int window = 51;
  int order = 3;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ExportConfig, window, order)

struct RunConfig {
  std::string label = "default";
  std::string out_dir = "runs/default";
  train::TrainerConfig trainer;
  EvalConfig eval;
  ExportConfig export_curves;
};

inline nlohmann::json to_json(const RunConfig& c) {
  const train::TrainerConfig& t = c.trainer;
  nlohmann::json j;
  j["label"] = c.label;
  j["out_dir"] = c.out_dir;
  j["seed"] = t.seed;
  j["baseline"] = train::to_string(t.baseline);
  j["episodes"] = t.episodes;
  j["checkpoint_every"] = t.checkpoint_every;
  j["network"] = {{"actor_hidden", t.actor_hidden}, {"critic_hidden", t.critic_hidden}};
  j["env"] = t.env;
  j["action"] = t.mdp.action;
  j["reward"] = t.mdp.reward;
  j["ppo"] = t.ppo;
  j["bandit"] = t.bandit;
  j["eval"] = c.eval;
  j["export"] = c.export_curves;
  return j;
}

// Throws on any key of `user` that has no counterpart in `reference`.
inline void reject_unknown_keys(const nlohmann::json& user, const nlohmann::json& reference,
                                const std::string& path = "") {
  if (!user.is_object()) return;
  if (!reference.is_object()) throw std::invalid_argument("config: '" + path + "' is not a section");
  for (const auto& [key, value] : user.items()) {
    const std::string here = path.empty() ? key : path + "." + key;
    if (!reference.contains(key)) throw std::invalid_argument("config: unknown key '" + here + "'");
    reject_unknown_keys(value, reference.at(key), here);
  }
}

inline RunConfig from_json(const nlohmann::json& j) {
  reject_unknown_keys(j, to_json(RunConfig{}));
  RunConfig c;
  train::TrainerConfig& t = c.trainer;
  c.label = j.value("label", c.label);
  c.out_dir = j.value("out_dir", c.out_dir);
  t.seed = j.value("seed", t.seed);
  if (j.contains("baseline")) t.baseline = train::parse_baseline(j.at("baseline").get<std::string>());
  t.episodes = j.value("episodes", t.episodes);
  t.checkpoint_every = j.value("checkpoint_every", t.checkpoint_every);
  if (j.contains("network")) {
    t.actor_hidden = j["network"].value("actor_hidden", t.actor_hidden);
    t.critic_hidden = j["network"].value("critic_hidden", t.critic_hidden);
  }
  if (j.contains("env")) t.env = j["env"].get<env::EnvConfig>();
  if (j.contains("action")) t.mdp.action = j["action"].get<mdp::ActionConfig>();
  if (j.contains("reward")) t.mdp.reward = j["reward"].get<mdp::RewardConfig>();
  if (j.contains("ppo")) t.ppo = j["ppo"].get<ppo::PpoConfig>();
  if (j.contains("bandit")) {
    if (j["bandit"].contains("init")) {
      curriculum::parse_init_scheme(j["bandit"]["init"].get<std::string>());  // clear error text
    }
    t.bandit = j["bandit"].get<curriculum::BanditConfig>();
  }
  if (j.contains("eval")) c.eval = j["eval"].get<EvalConfig>();
  if (j.contains("export")) c.export_curves = j["export"].get<ExportConfig>();
  t.ppo.gamma = t.mdp.reward.gamma;
  return c;
}

inline void validate(const RunConfig& c) {
  train::validate(c.trainer);
  if (c.eval.trials < 1) throw std::invalid_argument("eval: trials must be >= 1");
  const int hi = c.eval.n_sv_max < 0 ? c.trainer.env.n_sv_max : c.eval.n_sv_max;
  if (c.eval.n_sv_min < 0 || c.eval.n_sv_min > hi || hi > c.trainer.env.n_sv_max) {
    throw std::invalid_argument("eval: n_sv range must lie within [0, env.n_sv_max]");
  }
  if (c.export_curves.window < 1 || c.export_curves.window % 2 == 0 ||
      c.export_curves.order < 0 || c.export_curves.order >= c.export_curves.window) {
    throw std::invalid_argument("export: window must be odd and order in [0, window)");
  }
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("config file '" + path + "' is not valid JSON: " + e.what());
  }
  try {
    return from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config file '" + path + "': " + e.what());
  }
}

// Command-line values that take precedence over the file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> episodes;
  std::optional<std::string> baseline;
  std::optional<std::string> init_weights;
  std::optional<int> n_sv_max;
  std::optional<std::string> out_dir;
};

inline void apply_overrides(RunConfig& c, const Overrides& o) {
  if (o.seed) c.trainer.seed = *o.seed;
  if (o.episodes) c.trainer.episodes = *o.episodes;
  if (o.baseline) c.trainer.baseline = train::parse_baseline(*o.baseline);
  if (o.init_weights) c.trainer.bandit.init = curriculum::parse_init_scheme(*o.init_weights);
  if (o.n_sv_max) c.trainer.env.n_sv_max = *o.n_sv_max;
  if (o.out_dir) c.out_dir = *o.out_dir;
}

}  // namespace rdacppo::config

#endif  // RDACPPO_CONFIG_HPP_
