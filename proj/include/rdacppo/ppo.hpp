#ifndef RDACPPO_PPO_HPP_
#define RDACPPO_PPO_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdacppo/mdp.hpp"
#include "rdacppo/policy_net.hpp"

namespace rdacppo::ppo {

// One episode of on-policy experience, stored as parallel arrays.
struct RolloutBuffer {
  int obs_dim = 0;
  std::vector<double> observations;  // steps x obs_dim, row-major
  std::vector<int> actions;
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<std::uint8_t> dones;

  int curriculum = 0;
  mdp::Outcome outcome = mdp::Outcome::kRunning;
  double total_reward = 0.0;
  double completion_time = 0.0;
  int lane_changes = 0;

  explicit RolloutBuffer(int dim = 0) : obs_dim(dim) {}

  int size() const { return static_cast<int>(actions.size()); }
  std::span<const double> obs(int t) const {
    return {observations.data() + static_cast<std::size_t>(t) * obs_dim,
            static_cast<std::size_t>(obs_dim)};
  }

  void push(std::span<const double> obs, int action, double log_prob, double reward, double value,
            bool done) {
    if (static_cast<int>(obs.size()) != obs_dim) throw std::invalid_argument("RolloutBuffer: obs length");
    observations.insert(observations.end(), obs.begin(), obs.end());
    actions.push_back(action);
    log_probs.push_back(log_prob);
    rewards.push_back(reward);
    values.push_back(value);
    dones.push_back(done ? 1 : 0);
    total_reward += reward;
  }

  bool bookkeeping_consistent() const {
    const std::size_t n = actions.size();
    return log_probs.size() == n && rewards.size() == n && values.size() == n &&
           dones.size() == n && observations.size() == n * static_cast<std::size_t>(obs_dim);
  }

  // Exactly one done flag, on the final step.
  bool complete() const {
    if (!bookkeeping_consistent() || actions.empty()) return false;
    for (std::size_t t = 0; t + 1 < dones.size(); ++t) {
      if (dones[t]) return false;
    }
    return dones.back() == 1;
  }
};

struct PpoConfig {
  double gamma = 0.9;
  double lambda = 0.95;        // GAE
  double clip = 0.2;
  int epochs = 20;
  double actor_lr = 5e-4;
  double critic_lr = 1e-3;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  bool normalize_advantages = true;
};

inline void validate(const PpoConfig& c) {
  if (!(c.gamma > 0.0 && c.gamma < 1.0)) throw std::invalid_argument("ppo: gamma must lie in (0, 1)");
  if (!(c.lambda > 0.0 && c.lambda < 1.0)) throw std::invalid_argument("ppo: lambda must lie in (0, 1)");
  if (!(c.clip > 0.0)) throw std::invalid_argument("ppo: clip must be > 0");
  if (c.epochs < 1) throw std::invalid_argument("ppo: epochs must be >= 1");
  if (!(c.actor_lr > 0.0) || !(c.critic_lr > 0.0)) throw std::invalid_argument("ppo: learning rates must be > 0");
  if (c.value_coef < 0.0 || c.entropy_coef < 0.0) throw std::invalid_argument("ppo: loss coefficients must be >= 0");
}

struct Advantages {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// delta_t = r_t + gamma V(s_{t+1}) (1 - done_t) - V(s_t)
// A_t     = delta_t + gamma lambda (1 - done_t) A_{t+1}
// The step after the last one is bootstrapped with `last_value`.
inline Advantages compute_gae(std::span<const double> rewards, std::span<const double> values,
                              std::span<const std::uint8_t> dones, double gamma, double lambda,
                              double last_value = 0.0) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) throw std::invalid_argument("compute_gae: length mismatch");
  Advantages out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_value = last_value;
  double next_adv = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double live = dones[k] ? 0.0 : 1.0;
    const double delta = rewards[k] + gamma * next_value * live - values[k];
    next_adv = delta + gamma * lambda * live * next_adv;
    out.advantages[k] = next_adv;
    out.returns[k] = next_adv + values[k];
    next_value = values[k];
  }
  return out;
}

inline Advantages compute_gae(const RolloutBuffer& b, double gamma, double lambda) {
  return compute_gae(b.rewards, b.values, b.dones, gamma, lambda);
}

// Zero mean, unit (population) variance. Batches of one sample, or with no
// spread, are left untouched.
inline void normalize(std::span<double> a) {
  if (a.size() < 2) return;
  const double mean = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
  double var = 0.0;
  for (double v : a) var += (v - mean) * (v - mean);
  var /= static_cast<double>(a.size());
  const double sd = std::sqrt(var);
  if (!(sd > 1e-12)) return;
  for (double& v : a) v = (v - mean) / sd;
}

// Flattened training batch built from one or more complete episodes.
struct Batch {
  int obs_dim = 0;
  std::vector<double> observations;
  std::vector<int> actions;
  std::vector<double> old_log_probs;
  std::vector<double> advantages;
  std::vector<double> returns;

  int size() const { return static_cast<int>(actions.size()); }
  std::span<const double> obs(int t) const {
    return {observations.data() + static_cast<std::size_t>(t) * obs_dim,
            static_cast<std::size_t>(obs_dim)};
  }
};

inline Batch make_batch(std::span<const RolloutBuffer> buffers, const PpoConfig& cfg) {
  if (buffers.empty()) throw std::invalid_argument("make_batch: no buffers");
  Batch b;
  b.obs_dim = buffers.front().obs_dim;
  for (const RolloutBuffer& r : buffers) {
    if (!r.complete()) throw std::invalid_argument("make_batch: incomplete rollout buffer");
    if (r.obs_dim != b.obs_dim) throw std::invalid_argument("make_batch: mixed observation sizes");
    const Advantages a = compute_gae(r, cfg.gamma, cfg.lambda);
    b.observations.insert(b.observations.end(), r.observations.begin(), r.observations.end());
    b.actions.insert(b.actions.end(), r.actions.begin(), r.actions.end());
    b.old_log_probs.insert(b.old_log_probs.end(), r.log_probs.begin(), r.log_probs.end());
    b.advantages.insert(b.advantages.end(), a.advantages.begin(), a.advantages.end());
    b.returns.insert(b.returns.end(), a.returns.begin(), a.returns.end());
  }
  if (cfg.normalize_advantages) normalize(b.advantages);
  return b;
}

// Per-sample clipped surrogate min(rho A, clip(rho, 1-eps, 1+eps) A) and its
// derivative with respect to rho.
struct Surrogate {
  double value = 0.0;
  double d_rho = 0.0;
  bool clipped = false;
};

inline Surrogate clipped_surrogate(double rho, double adv, double eps) {
  const double unclipped = rho * adv;
  const double clipped = std::clamp(rho, 1.0 - eps, 1.0 + eps) * adv;
  if (unclipped <= clipped) return {unclipped, adv, false};
  return {clipped, 0.0, true};
}

struct LossStats {
  double actor_loss = 0.0;   // -mean surrogate - entropy_coef * mean entropy
  double critic_loss = 0.0;  // mean squared error of value vs return
  double total = 0.0;        // actor_loss + value_coef * critic_loss
  double entropy = 0.0;
  double approx_kl = 0.0;    // mean(old log_prob - new log_prob)
  double clip_fraction = 0.0;
};

// Evaluates the losses and, when requested, writes their exact gradients:
// actor_grad = d actor_loss / d theta_actor,
// critic_grad = d (value_coef * critic_loss) / d theta_critic.
inline LossStats ppo_loss(const nn::ActorCritic& ac, const Batch& b, const PpoConfig& cfg,
                          std::vector<double>* actor_grad, std::vector<double>* critic_grad) {
  const int n = b.size();
  if (n == 0) throw std::invalid_argument("ppo_loss: empty batch");
  const nn::MlpShape& as = ac.actor.shape();
  const nn::MlpShape& cs = ac.critic.shape();
  if (actor_grad) actor_grad->assign(as.parameter_count(), 0.0);
  if (critic_grad) critic_grad->assign(cs.parameter_count(), 0.0);
  std::vector<double> h_a(as.hidden), logits(as.outputs), p(as.outputs), d_logits(as.outputs);
  std::vector<double> h_c(cs.hidden), v(1), d_v(1);
  const double inv_n = 1.0 / n;
  LossStats s;
  double surrogate_sum = 0.0;
  for (int t = 0; t < n; ++t) {
    const auto x = b.obs(t);
    ac.actor.forward(x, h_a, logits);
    const double lse = nn::log_sum_exp(logits);
    double ent = 0.0;
    for (int j = 0; j < as.outputs; ++j) {
      p[j] = std::exp(logits[j] - lse);
      ent -= p[j] * (logits[j] - lse);
    }
    const int a = b.actions[static_cast<std::size_t>(t)];
    const double lp = logits[a] - lse;
    const double rho = std::exp(lp - b.old_log_probs[static_cast<std::size_t>(t)]);
    const Surrogate sur = clipped_surrogate(rho, b.advantages[static_cast<std::size_t>(t)], cfg.clip);
    surrogate_sum += sur.value;
    s.entropy += ent;
    s.approx_kl += b.old_log_probs[static_cast<std::size_t>(t)] - lp;
    s.clip_fraction += sur.clipped ? 1.0 : 0.0;
    if (actor_grad) {
      // d(-sur)/dlogit_j = -d_rho * rho * (1[j=a] - p_j)
      // d(-c_e H)/dlogit_j = c_e * p_j (log p_j + H)
      const double g = -sur.d_rho * rho * inv_n;
      for (int j = 0; j < as.outputs; ++j) {
        d_logits[j] = g * ((j == a ? 1.0 : 0.0) - p[j]) +
                      cfg.entropy_coef * inv_n * p[j] * ((logits[j] - lse) + ent);
      }
      ac.actor.backward(x, h_a, d_logits, *actor_grad);
    }

    ac.critic.forward(x, h_c, v);
    const double err = v[0] - b.returns[static_cast<std::size_t>(t)];
    s.critic_loss += err * err;
    if (critic_grad) {
      d_v[0] = cfg.value_coef * 2.0 * err * inv_n;
      ac.critic.backward(x, h_c, d_v, *critic_grad);
    }
  }
  s.entropy *= inv_n;
  s.approx_kl *= inv_n;
  s.clip_fraction *= inv_n;
  s.critic_loss *= inv_n;
  s.actor_loss = -surrogate_sum * inv_n - cfg.entropy_coef * s.entropy;
  s.total = s.actor_loss + cfg.value_coef * s.critic_loss;
  return s;
}

struct UpdateStats {
  LossStats first;  // before the first optimizer step
  LossStats last;   // at the start of the final epoch
  int epochs_run = 0;
  int samples = 0;
  bool aborted = false;
  std::string diagnostic;
};

// `epochs` full-batch passes, each followed by one Adam step per network. A
// non-finite loss or gradient restores the pre-update parameters and
// optimizer state and reports what went wrong.
inline UpdateStats ppo_update(nn::ActorCritic& ac, nn::AdamState& actor_opt,
                              nn::AdamState& critic_opt, std::span<const RolloutBuffer> buffers,
                              const PpoConfig& cfg) {
  const Batch batch = make_batch(buffers, cfg);
  const nn::ActorCritic saved = ac;
  const nn::AdamState saved_actor = actor_opt, saved_critic = critic_opt;
  UpdateStats out;
  out.samples = batch.size();
  std::vector<double> ga, gc;
  for (int e = 0; e < cfg.epochs; ++e) {
    const LossStats s = ppo_loss(ac, batch, cfg, &ga, &gc);
    if (e == 0) out.first = s;
    out.last = s;
    if (!std::isfinite(s.total) || !nn::all_finite(ga) || !nn::all_finite(gc)) {
      ac = saved;
      actor_opt = saved_actor;
      critic_opt = saved_critic;
      out.aborted = true;
      std::ostringstream os;
      os << "non-finite PPO update at epoch " << e << ": actor_loss=" << s.actor_loss
         << " critic_loss=" << s.critic_loss << " entropy=" << s.entropy
         << " samples=" << batch.size();
      out.diagnostic = os.str();
      return out;
    }
    nn::adam_step(ac.actor.params(), ga, actor_opt);
    nn::adam_step(ac.critic.params(), gc, critic_opt);
    ++out.epochs_run;
  }
  if (!nn::all_finite(ac.actor.params()) || !nn::all_finite(ac.critic.params())) {
    ac = saved;
    actor_opt = saved_actor;
    critic_opt = saved_critic;
    out.aborted = true;
    out.diagnostic = "non-finite parameters after PPO update";
  }
  return out;
}

}  // namespace rdacppo::ppo

#endif  // RDACPPO_PPO_HPP_
