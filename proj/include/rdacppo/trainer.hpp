#ifndef RDACPPO_TRAINER_HPP_
#define RDACPPO_TRAINER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rdacppo/bandit.hpp"
#include "rdacppo/env/world.hpp"
#include "rdacppo/mdp.hpp"
#include "rdacppo/policy_net.hpp"
#include "rdacppo/ppo.hpp"
#include "rdacppo/random.hpp"

namespace rdacppo::train {

enum class Baseline { kRdAcppo, kFixedPpo, kManualCppo, kRandomCppo };

inline const char* to_string(Baseline b) {
  switch (b) {
    case Baseline::kRdAcppo: return "rd-acppo";
    case Baseline::kFixedPpo: return "fixed-ppo";
    case Baseline::kManualCppo: return "manual-cppo";
    case Baseline::kRandomCppo: return "random-cppo";
  }
  return "?";
}

inline Baseline parse_baseline(const std::string& s) {
  for (Baseline b : {Baseline::kRdAcppo, Baseline::kFixedPpo, Baseline::kManualCppo,
                     Baseline::kRandomCppo}) {
    if (s == to_string(b)) return b;
  }
  throw std::invalid_argument("unknown baseline '" + s +
                              "' (expected rd-acppo|fixed-ppo|manual-cppo|random-cppo)");
}

struct TrainerConfig {
  env::EnvConfig env;
  mdp::MdpConfig mdp;
  ppo::PpoConfig ppo;
  curriculum::BanditConfig bandit;
  Baseline baseline = Baseline::kRdAcppo;
  int episodes = 3000;          // t_max
  std::uint64_t seed = 1;
  int actor_hidden = 128;
  int critic_hidden = 64;
  int checkpoint_every = 500;   // K; 0 disables periodic checkpoints
};

inline void validate(const TrainerConfig& c) {
  env::validate(c.env);
  mdp::validate(c.mdp);
  ppo::validate(c.ppo);
  curriculum::validate(c.bandit);
  if (c.ppo.gamma != c.mdp.reward.gamma) {
    throw std::invalid_argument("trainer: ppo.gamma and reward.gamma disagree");
  }
  if (c.episodes < 0) throw std::invalid_argument("trainer: episodes must be >= 0");
  if (c.actor_hidden < 1 || c.critic_hidden < 1) throw std::invalid_argument("trainer: hidden sizes must be >= 1");
  if (c.checkpoint_every < 0) throw std::invalid_argument("trainer: checkpoint_every must be >= 0");
}

inline int observation_size(const env::EnvConfig& e) { return (e.n_sv_max + 1) * mdp::kFeatureCount; }

// Distribution the scheduler draws the next curriculum from at episode t
// (0-based) of a `budget`-episode run.
inline std::vector<double> selection_distribution(Baseline kind, const curriculum::BanditState& s,
                                                  long long t, long long budget, int n_max) {
  const std::size_t arms = static_cast<std::size_t>(n_max) + 1;
  std::vector<double> p(arms, 0.0);
  switch (kind) {
    case Baseline::kRdAcppo:
      return s.probabilities();
    case Baseline::kFixedPpo:
      p.back() = 1.0;
      break;
    case Baseline::kRandomCppo:
      std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(arms));
      break;
    case Baseline::kManualCppo: {
      // Equal consecutive shares of the budget, easiest first.
      const long long b = std::max<long long>(budget, 1);
      const long long stage = std::min<long long>(n_max, t * static_cast<long long>(arms) / b);
      p[static_cast<std::size_t>(stage)] = 1.0;
      break;
    }
  }
  return p;
}

inline curriculum::CurriculumId select_curriculum(Baseline kind, const curriculum::BanditState& s,
                                                  long long t, long long budget, int n_max,
                                                  Rng& rng) {
  return curriculum::sample_arm(selection_distribution(kind, s, t, budget, n_max), rng);
}

// Runs the stochastic policy on one freshly spawned scene with exactly
// `curriculum` surrounding vehicles until the episode terminates.
inline ppo::RolloutBuffer collect_episode(const nn::ActorCritic& ac,
                                          curriculum::CurriculumId curriculum, Rng& rng,
                                          const env::EnvConfig& env_cfg,
                                          const mdp::MdpConfig& mdp_cfg,
                                          const std::shared_ptr<const env::RoadNetwork>& net) {
  mdp::Episode ep(env::spawn_scenario(curriculum, rng, env_cfg, net), env_cfg, mdp_cfg);
  ppo::RolloutBuffer buf(observation_size(env_cfg));
  buf.curriculum = curriculum;
  while (!ep.done()) {
    const std::vector<double> x = ep.observe_flat();
    const std::vector<double> logits = ac.logits(x);
    const nn::Sample s = nn::categorical_sample(logits, rng);
    const double v = ac.value(x);
    const mdp::StepResult r = ep.step(static_cast<mdp::Action>(s.action));
    buf.push(x, s.action, s.log_prob, r.reward.total, v, r.outcome.terminal());
  }
  buf.outcome = ep.outcome().kind;
  buf.completion_time = ep.outcome().completion_time;
  buf.lane_changes = ep.outcome().lane_changes;
  return buf;
}

struct EpisodeRecord {
  long long episode = 0;  // 0-based
  int arm = 0;
  double reward = 0.0;
  mdp::Outcome outcome = mdp::Outcome::kRunning;
  double completion_time = 0.0;
  int steps = 0;
  std::vector<double> probabilities;  // distribution the arm was drawn from
  ppo::UpdateStats update;
  curriculum::BanditUpdate bandit;
  std::vector<double> weights;        // live bandit weights after the update
};

// Everything needed to continue a run bit-identically.
struct TrainerState {
  nn::ActorCritic ac;
  nn::AdamState actor_opt;
  nn::AdamState critic_opt;
  curriculum::BanditState bandit;
  Rng schedule_rng;  // curriculum draws
  Rng episode_rng;   // spawns and action sampling
  long long episode = 0;
  int aborted_updates = 0;
};

inline TrainerState init_state(const TrainerConfig& cfg) {
  validate(cfg);
  TrainerState s;
  Rng init_rng = derive_rng(cfg.seed, 0);
  s.ac = nn::make_actor_critic(observation_size(cfg.env), mdp::kActionCount, cfg.actor_hidden,
                               cfg.critic_hidden);
  nn::init_actor_critic(s.ac, init_rng);
  s.actor_opt = nn::AdamState(s.ac.actor.params().size(), cfg.ppo.actor_lr);
  s.critic_opt = nn::AdamState(s.ac.critic.params().size(), cfg.ppo.critic_lr);
  s.bandit = curriculum::BanditState(cfg.bandit, cfg.env.n_sv_max);
  s.schedule_rng = derive_rng(cfg.seed, 1);
  s.episode_rng = derive_rng(cfg.seed, 2);
  return s;
}

// One iteration of the training loop: draw a curriculum, collect an episode,
// update the policy, then feed the episode reward to the bandit. The bandit
// is kept up to date for every baseline so its trace is always available; it
// only drives selection for RD-ACPPO.
inline EpisodeRecord run_episode(TrainerState& s, const TrainerConfig& cfg,
                                 const std::shared_ptr<const env::RoadNetwork>& net) {
  EpisodeRecord rec;
  rec.episode = s.episode;
  rec.probabilities =
      selection_distribution(cfg.baseline, s.bandit, s.episode, cfg.episodes, cfg.env.n_sv_max);
  rec.arm = curriculum::sample_arm(rec.probabilities, s.schedule_rng);
  const ppo::RolloutBuffer buf = collect_episode(s.ac, rec.arm, s.episode_rng, cfg.env, cfg.mdp, net);
  rec.reward = buf.total_reward;
  rec.outcome = buf.outcome;
  rec.completion_time = buf.completion_time;
  rec.steps = buf.size();
  rec.update = ppo::ppo_update(s.ac, s.actor_opt, s.critic_opt, std::span(&buf, 1), cfg.ppo);
  if (rec.update.aborted) ++s.aborted_updates;
  rec.bandit = curriculum::observe_episode(rec.reward, rec.arm, s.bandit);
  rec.weights = s.bandit.weights;
  ++s.episode;
  return rec;
}

// ---- CSV logs -------------------------------------------------------------

inline void write_metrics_header(std::ostream& os, int arms) {
  os << "episode,arm,reward,outcome,t_c,steps";
  for (int i = 0; i < arms; ++i) os << ",p_" << i;
  os << ",actor_loss,critic_loss,entropy,approx_kl,clip_fraction,update_aborted\n";
}

inline void write_metrics_row(std::ostream& os, const EpisodeRecord& r) {
  os << r.episode << ',' << r.arm << ',' << r.reward << ',' << mdp::to_string(r.outcome) << ','
     << r.completion_time << ',' << r.steps;
  for (double p : r.probabilities) os << ',' << p;
  os << ',' << r.update.first.actor_loss << ',' << r.update.first.critic_loss << ','
     << r.update.first.entropy << ',' << r.update.last.approx_kl << ','
     << r.update.last.clip_fraction << ',' << (r.update.aborted ? 1 : 0) << '\n';
}

inline void write_bandit_row(std::ostream& os, const EpisodeRecord& r) {
  curriculum::write_trace_row(os, r.episode + 1, r.arm, r.bandit.reward, r.probabilities, r.weights);
}

// ---- persistence ------------------------------------------------------------

inline nlohmann::json adam_to_json(const nn::AdamState& a) {
  return {{"m", a.m}, {"v", a.v}, {"step", a.step}, {"beta1", a.beta1},
          {"beta2", a.beta2}, {"eps", a.eps}, {"lr", a.lr}};
}

inline nn::AdamState adam_from_json(const nlohmann::json& j) {
  nn::AdamState a;
  a.m = j.at("m").get<std::vector<double>>();
  a.v = j.at("v").get<std::vector<double>>();
  a.step = j.at("step").get<long long>();
  a.beta1 = j.at("beta1").get<double>();
  a.beta2 = j.at("beta2").get<double>();
  a.eps = j.at("eps").get<double>();
  a.lr = j.at("lr").get<double>();
  return a;
}

// +-infinity (the empty reward extrema) are not representable in JSON.
inline nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline nlohmann::json state_to_json(const TrainerState& s, const TrainerConfig& cfg) {
  nlohmann::json j;
  j["episode"] = s.episode;
  j["aborted_updates"] = s.aborted_updates;
  j["seed"] = cfg.seed;
  j["baseline"] = to_string(cfg.baseline);
  j["actor_opt"] = adam_to_json(s.actor_opt);
  j["critic_opt"] = adam_to_json(s.critic_opt);
  j["bandit"] = {{"weights", s.bandit.weights},
                 {"target_weights", s.bandit.target_weights},
                 {"reward_max", finite_or_null(s.bandit.reward_max)},
                 {"reward_min", finite_or_null(s.bandit.reward_min)},
                 {"episode", s.bandit.episode}};
  j["schedule_rng"] = serialize_rng(s.schedule_rng);
  j["episode_rng"] = serialize_rng(s.episode_rng);
  return j;
}

inline void checkpoint_meta_into(std::vector<std::pair<std::string, std::string>>& meta,
                                 const TrainerConfig& cfg, long long episode) {
  meta.emplace_back("episode", std::to_string(episode));
  meta.emplace_back("baseline", to_string(cfg.baseline));
  meta.emplace_back("seed", std::to_string(cfg.seed));
  meta.emplace_back("n_sv_max", std::to_string(cfg.env.n_sv_max));
  meta.emplace_back("position_scale", std::to_string(cfg.env.geometry.arm_length));
  meta.emplace_back("speed_scale", std::to_string(cfg.mdp.action.max_speed));
}

// Writes state_params.bin (+ .meta) and state.json into `dir`; the pair is the
// resume point.
inline void save_state(const std::filesystem::path& dir, const TrainerState& s,
                       const TrainerConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> meta;
  checkpoint_meta_into(meta, cfg, s.episode);
  nn::save_checkpoint((dir / "state_params.bin").string(), s.ac, meta);
  std::ofstream os(dir / "state.json");
  if (!os) throw std::runtime_error("cannot write " + (dir / "state.json").string());
  os << state_to_json(s, cfg).dump(1) << '\n';
}

inline TrainerState load_state(const std::filesystem::path& dir, const TrainerConfig& cfg) {
  TrainerState s = init_state(cfg);
  std::ifstream is(dir / "state.json");
  if (!is) throw std::runtime_error("cannot open " + (dir / "state.json").string());
  const nlohmann::json j = nlohmann::json::parse(is);
  if (j.at("seed").get<std::uint64_t>() != cfg.seed ||
      j.at("baseline").get<std::string>() != to_string(cfg.baseline)) {
    throw std::runtime_error("resume: saved state belongs to a different seed or baseline");
  }
  s.ac = nn::load_checkpoint((dir / "state_params.bin").string());
  if (s.ac.input_size() != observation_size(cfg.env)) {
    throw std::runtime_error("resume: checkpoint input size does not match n_sv_max");
  }
  s.episode = j.at("episode").get<long long>();
  s.aborted_updates = j.at("aborted_updates").get<int>();
  s.actor_opt = adam_from_json(j.at("actor_opt"));
  s.critic_opt = adam_from_json(j.at("critic_opt"));
  const auto& b = j.at("bandit");
  s.bandit.weights = b.at("weights").get<std::vector<double>>();
  s.bandit.target_weights = b.at("target_weights").get<std::vector<double>>();
  if (!b.at("reward_max").is_null()) s.bandit.reward_max = b.at("reward_max").get<double>();
  if (!b.at("reward_min").is_null()) s.bandit.reward_min = b.at("reward_min").get<double>();
  s.bandit.episode = b.at("episode").get<long long>();
  s.schedule_rng = deserialize_rng(j.at("schedule_rng").get<std::string>());
  s.episode_rng = deserialize_rng(j.at("episode_rng").get<std::string>());
  return s;
}

// Keeps the header plus the first `rows` data rows of a CSV file.
inline void truncate_csv(const std::filesystem::path& p, long long rows) {
  std::ifstream is(p);
  if (!is) throw std::runtime_error("resume: missing log " + p.string());
  std::ostringstream kept;
  std::string line;
  for (long long k = 0; k <= rows && std::getline(is, line); ++k) kept << line << '\n';
  is.close();
  std::ofstream os(p, std::ios::trunc);
  os << kept.str();
}

struct TrainResult {
  TrainerState state;
  std::vector<EpisodeRecord> log;  // episodes run in this call
};

struct TrainOptions {
  std::filesystem::path out_dir;  // empty: keep everything in memory
  bool resume = false;
  std::function<void(const EpisodeRecord&)> on_episode;
};

// Training loop. With an output directory it appends metrics.csv and
// bandit_trace.csv, writes checkpoint_<episode>.bin every K episodes, and
// final.bin plus the resume state at the end.
inline TrainResult train(const TrainerConfig& cfg, const TrainOptions& opt = {}) {
  validate(cfg);
  const auto net = std::make_shared<const env::RoadNetwork>(cfg.env.geometry);
  const int arms = cfg.env.n_sv_max + 1;
  const bool files = !opt.out_dir.empty();
  TrainResult res;
  res.state = opt.resume ? load_state(opt.out_dir, cfg) : init_state(cfg);

  std::ofstream metrics, trace;
  if (files) {
    std::filesystem::create_directories(opt.out_dir);
    const auto mp = opt.out_dir / "metrics.csv", tp = opt.out_dir / "bandit_trace.csv";
    if (opt.resume) {
      truncate_csv(mp, res.state.episode);
      truncate_csv(tp, res.state.episode);
      metrics.open(mp, std::ios::app);
      trace.open(tp, std::ios::app);
    } else {
      metrics.open(mp, std::ios::trunc);
      trace.open(tp, std::ios::trunc);
      write_metrics_header(metrics, arms);
      curriculum::write_trace_header(trace, arms);
    }
    if (!metrics || !trace) throw std::runtime_error("cannot open logs in " + opt.out_dir.string());
    metrics.precision(10);
    trace.precision(10);
  }

  while (res.state.episode < cfg.episodes) {
    EpisodeRecord rec = run_episode(res.state, cfg, net);
    if (files) {
      write_metrics_row(metrics, rec);
      write_bandit_row(trace, rec);
      if (cfg.checkpoint_every > 0 && res.state.episode % cfg.checkpoint_every == 0) {
        std::vector<std::pair<std::string, std::string>> meta;
        checkpoint_meta_into(meta, cfg, res.state.episode);
        nn::save_checkpoint(
            (opt.out_dir / ("checkpoint_" + std::to_string(res.state.episode) + ".bin")).string(),
            res.state.ac, meta);
        metrics.flush();
        trace.flush();
        save_state(opt.out_dir, res.state, cfg);
      }
    }
    if (opt.on_episode) opt.on_episode(rec);
    res.log.push_back(std::move(rec));
  }

  if (files) {
    metrics.flush();
    trace.flush();
    std::vector<std::pair<std::string, std::string>> meta;
    checkpoint_meta_into(meta, cfg, res.state.episode);
    nn::save_checkpoint((opt.out_dir / "final.bin").string(), res.state.ac, meta);
    save_state(opt.out_dir, res.state, cfg);
  }
  return res;
}

}  // namespace rdacppo::train

#endif  // RDACPPO_TRAINER_HPP_
