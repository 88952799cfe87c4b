#ifndef RDACPPO_EVAL_HPP_
#define RDACPPO_EVAL_HPP_

#include <array>
#include <cstdint>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "rdacppo/env/world.hpp"
#include "rdacppo/mdp.hpp"
#include "rdacppo/policy_net.hpp"
#include "rdacppo/random.hpp"

namespace rdacppo::eval {

struct ScenarioReport {
  int n_sv = 0;
  int trials = 0;
  int success = 0;
  int collision = 0;
  int timeout = 0;
  int off_road = 0;
  double completion_time_sum = 0.0;  // over successes

  double rate(int count) const { return static_cast<double>(count) / trials; }
  double success_rate() const { return rate(success); }
  double collision_rate() const { return rate(collision); }
  double timeout_rate() const { return rate(timeout); }
  double off_road_rate() const { return rate(off_road); }
  double mean_completion_time() const { return success > 0 ? completion_time_sum / success : 0.0; }
};

struct EvalReport {
  std::vector<ScenarioReport> scenarios;
};

// Per-trial RNG stream, independent of evaluation order.
inline Rng trial_rng(std::uint64_t seed, int n_sv, int trial) {
  return derive_rng(seed, (static_cast<std::uint64_t>(n_sv) << 32) | static_cast<std::uint32_t>(trial));
}

// Goal assignments cycle straight, left, right so the three exits get equal
// shares of the trials.
inline env::Turn trial_turn(int trial) {
  constexpr std::array<env::Turn, 3> kOrder = {env::Turn::kStraight, env::Turn::kLeft,
                                               env::Turn::kRight};
  return kOrder[static_cast<std::size_t>(trial % 3)];
}

// Greedy rollout of one trial; returns its outcome.
inline mdp::EpisodeOutcome run_trial(const nn::ActorCritic& ac, int n_sv, int trial,
                                     std::uint64_t seed, const env::EnvConfig& env_cfg,
                                     const mdp::MdpConfig& mdp_cfg,
                                     const std::shared_ptr<const env::RoadNetwork>& net) {
  Rng rng = trial_rng(seed, n_sv, trial);
  mdp::Episode ep(env::spawn_scenario(n_sv, rng, env_cfg, net, trial_turn(trial)), env_cfg, mdp_cfg);
  while (!ep.done()) {
    ep.step(static_cast<mdp::Action>(nn::argmax(ac.logits(ep.observe_flat()))));
  }
  return ep.outcome();
}

inline ScenarioReport evaluate_scenario(const nn::ActorCritic& ac, int n_sv, int trials,
                                        std::uint64_t seed, const env::EnvConfig& env_cfg,
                                        const mdp::MdpConfig& mdp_cfg,
                                        const std::shared_ptr<const env::RoadNetwork>& net) {
  if (trials < 1) throw std::invalid_argument("evaluate: trials must be >= 1");
  if (n_sv < 0 || n_sv > env_cfg.n_sv_max) throw std::invalid_argument("evaluate: n_sv out of range");
  if (ac.input_size() != (env_cfg.n_sv_max + 1) * mdp::kFeatureCount) {
    throw std::invalid_argument("evaluate: policy input size does not match n_sv_max");
  }
  ScenarioReport r;
  r.n_sv = n_sv;
  r.trials = trials;
  for (int t = 0; t < trials; ++t) {
    const mdp::EpisodeOutcome o = run_trial(ac, n_sv, t, seed, env_cfg, mdp_cfg, net);
    switch (o.kind) {
      case mdp::Outcome::kSuccess:
        ++r.success;
        r.completion_time_sum += o.completion_time;
        break;
      case mdp::Outcome::kCollision: ++r.collision; break;
      case mdp::Outcome::kTimeout: ++r.timeout; break;
      case mdp::Outcome::kOffRoad: ++r.off_road; break;
      case mdp::Outcome::kRunning: throw std::logic_error("evaluate: episode ended while running");
    }
  }
  return r;
}

inline EvalReport evaluate(const nn::ActorCritic& ac, int n_lo, int n_hi, int trials,
                           std::uint64_t seed, const env::EnvConfig& env_cfg,
                           const mdp::MdpConfig& mdp_cfg) {
  if (n_lo > n_hi) throw std::invalid_argument("evaluate: empty n_sv range");
  const auto net = std::make_shared<const env::RoadNetwork>(env_cfg.geometry);
  EvalReport rep;
  for (int n = n_lo; n <= n_hi; ++n) {
    rep.scenarios.push_back(evaluate_scenario(ac, n, trials, seed, env_cfg, mdp_cfg, net));
  }
  return rep;
}

inline void write_report_csv(std::ostream& os, const EvalReport& rep) {
  os << "n_sv,trials,success_rate,collision_rate,timeout_rate,off_road_rate,mean_t_c\n";
  for (const ScenarioReport& s : rep.scenarios) {
    os << s.n_sv << ',' << s.trials << ',' << s.success_rate() << ',' << s.collision_rate() << ','
       << s.timeout_rate() << ',' << s.off_road_rate() << ',' << s.mean_completion_time() << '\n';
  }
}

}  // namespace rdacppo::eval

#endif  // RDACPPO_EVAL_HPP_
