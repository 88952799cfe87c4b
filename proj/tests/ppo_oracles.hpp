#ifndef RDACPPO_TESTS_PPO_ORACLES_HPP_
#define RDACPPO_TESTS_PPO_ORACLES_HPP_

// Independent reference computations for advantage estimation and the PPO loss
// gradients. Shared by the unit tests and the acceptance suite.

#include <cmath>
#include <vector>

#include "rdacppo/ppo.hpp"

namespace rdacppo::ppo::oracles {

// A_t = sum_{l >= 0} (gamma lambda)^l delta_{t+l}, truncated at the first done.
inline std::vector<double> gae_direct_sum(const std::vector<double>& r, const std::vector<double>& v,
                                          const std::vector<std::uint8_t>& done, double gamma,
                                          double lambda) {
  const std::size_t n = r.size();
  std::vector<double> a(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double weight = 1.0;
    for (std::size_t k = t; k < n; ++k) {
      const double next_v = (done[k] || k + 1 == n) ? 0.0 : v[k + 1];
      const double delta = r[k] + gamma * next_v - v[k];
      a[t] += weight * delta;
      if (done[k]) break;
      weight *= gamma * lambda;
    }
  }
  return a;
}

// Random rollout with a done flag at the end and, optionally, at interior
// episode boundaries.
inline RolloutBuffer random_buffer(Rng& rng, int obs_dim, int steps, bool interior_dones) {
  RolloutBuffer b(obs_dim);
  std::vector<double> x(static_cast<std::size_t>(obs_dim));
  for (int t = 0; t < steps; ++t) {
    for (double& e : x) e = uniform(rng, -1.0, 1.0);
    const bool done = t + 1 == steps || (interior_dones && uniform01(rng) < 0.1);
    b.push(x, static_cast<int>(uniform_index(rng, 5)), uniform(rng, -3.0, 0.0),
           uniform(rng, -2.0, 2.0), uniform(rng, -3.0, 3.0), done);
  }
  return b;
}

// Batch whose old log-probs put every ratio at least 0.02 away from the clip
// edges, so the loss is smooth within the finite-difference stencil.
inline Batch random_batch(const nn::ActorCritic& ac, Rng& rng, int n, double eps) {
  Batch b;
  b.obs_dim = ac.input_size();
  for (int t = 0; t < n; ++t) {
    std::vector<double> x(static_cast<std::size_t>(b.obs_dim));
    for (double& e : x) e = uniform(rng, -1.0, 1.0);
    const int a = static_cast<int>(uniform_index(rng, ac.action_count()));
    double rho;
    do {
      rho = uniform(rng, 0.5, 1.6);
    } while (std::abs(rho - (1.0 - eps)) < 0.02 || std::abs(rho - (1.0 + eps)) < 0.02);
    b.observations.insert(b.observations.end(), x.begin(), x.end());
    b.actions.push_back(a);
    b.old_log_probs.push_back(nn::log_prob(ac.logits(x), a) - std::log(rho));
    b.advantages.push_back(uniform(rng, -2.0, 2.0));
    b.returns.push_back(uniform(rng, -3.0, 3.0));
  }
  return b;
}

// Random, non-degenerate network: orthogonal init plus noise on every weight.
inline nn::ActorCritic random_actor_critic(Rng& rng, int inputs, int actor_hidden = 128,
                                           int critic_hidden = 64) {
  nn::ActorCritic ac = nn::make_actor_critic(inputs, 5, actor_hidden, critic_hidden);
  nn::init_actor_critic(ac, rng);
  for (double& p : ac.actor.params()) p += uniform(rng, -0.1, 0.1);
  for (double& p : ac.critic.params()) p += uniform(rng, -0.1, 0.1);
  return ac;
}

enum class LossKind { kActor, kCritic, kCombined };

inline double loss_value(const nn::ActorCritic& ac, const Batch& b, const PpoConfig& cfg, LossKind k) {
  const LossStats s = ppo_loss(ac, b, cfg, nullptr, nullptr);
  switch (k) {
    case LossKind::kActor: return s.actor_loss;
    case LossKind::kCritic: return cfg.value_coef * s.critic_loss;
    case LossKind::kCombined: return s.total;
  }
  return 0.0;
}

// Largest relative error |fd - analytic| / max(|fd|, |analytic|, 1e-7) over
// `coords` random parameter coordinates, central differences with step h.
inline double max_gradient_error(nn::ActorCritic ac, const Batch& b, const PpoConfig& cfg,
                                 LossKind kind, int coords, double h, Rng& rng) {
  std::vector<double> ga, gc;
  ppo_loss(ac, b, cfg, &ga, &gc);
  const std::size_t na = ga.size();
  double worst = 0.0;
  for (int c = 0; c < coords; ++c) {
    bool actor_side;
    std::size_t k;
    switch (kind) {
      case LossKind::kActor: actor_side = true; k = uniform_index(rng, na); break;
      case LossKind::kCritic: actor_side = false; k = uniform_index(rng, gc.size()); break;
      default: {
        const std::size_t idx = uniform_index(rng, na + gc.size());
        actor_side = idx < na;
        k = actor_side ? idx : idx - na;
      }
    }
    double& p = actor_side ? ac.actor.params()[k] : ac.critic.params()[k];
    const double orig = p;
    p = orig + h;
    const double up = loss_value(ac, b, cfg, kind);
    p = orig - h;
    const double down = loss_value(ac, b, cfg, kind);
    p = orig;
    const double fd = (up - down) / (2.0 * h);
    const double an = actor_side ? ga[k] : gc[k];
    worst = std::max(worst, std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-7}));
  }
  return worst;
}

}  // namespace rdacppo::ppo::oracles

#endif  // RDACPPO_TESTS_PPO_ORACLES_HPP_
