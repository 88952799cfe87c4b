#ifndef RDACPPO_BANDIT_HPP_
#define RDACPPO_BANDIT_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdacppo/random.hpp"

namespace rdacppo::curriculum {

// Curriculum i places exactly i surrounding vehicles in the scene.
using CurriculumId = int;

enum class InitScheme { kExp, kEqual };

inline InitScheme parse_init_scheme(const std::string& name) {
  if (name == "exp") return InitScheme::kExp;
  if (name == "equal") return InitScheme::kEqual;
  throw std::invalid_argument("unknown init scheme '" + name + "' (expected exp|equal)");
}

inline const char* to_string(InitScheme s) { return s == InitScheme::kExp ? "exp" : "equal"; }

// Exp: w_i = exp(-2 i), favoring the easy curricula. Equal: w_i = 1.
inline std::vector<double> init_weights(InitScheme scheme, int n_max) {
  if (n_max < 0) throw std::invalid_argument("init_weights: n_max must be >= 0");
  std::vector<double> w(static_cast<std::size_t>(n_max) + 1, 1.0);
  if (scheme == InitScheme::kExp) {
    for (int i = 0; i <= n_max; ++i) w[static_cast<std::size_t>(i)] = std::exp(-2.0 * i);
  }
  return w;
}

// Softmax of the weights mixed with a uniform floor eta / (N + 1). The max
// weight is subtracted before exponentiation.
inline std::vector<double> arm_probabilities(std::span<const double> w, double eta) {
  if (w.empty()) throw std::invalid_argument("arm_probabilities: no arms");
  if (!(eta >= 0.0 && eta < 1.0)) throw std::invalid_argument("arm_probabilities: eta outside [0, 1)");
  const double w_max = *std::max_element(w.begin(), w.end());
  std::vector<double> p(w.size());
  double z = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    p[i] = std::exp(w[i] - w_max);
    z += p[i];
  }
  const double floor = eta / static_cast<double>(w.size());
  for (double& pi : p) pi = (1.0 - eta) * pi / z + floor;
  return p;
}

// Inverse-CDF draw; one uniform per call.
inline CurriculumId sample_arm(std::span<const double> p, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  int last_positive = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    acc += p[i];
    if (u < acc) return static_cast<int>(i);
  }
  return last_positive;
}

struct BanditConfig {
  double eta = 0.2;         // uniform exploration mix
  double alpha = 0.1;       // target-weight step size
  double k0 = 1.0;          // rescale constants
  double k1 = 1.0;
  int sync_interval = 1000; // episodes between target -> live copies
  InitScheme init = InitScheme::kExp;
};

inline void validate(const BanditConfig& c) {
  if (!(c.eta > 0.0 && c.eta < 1.0)) throw std::invalid_argument("bandit: eta must lie in (0, 1)");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw std::invalid_argument("bandit: alpha must lie in (0, 1)");
  if (c.sync_interval < 1) throw std::invalid_argument("bandit: sync_interval must be >= 1");
  if (!std::isfinite(c.k0) || !std::isfinite(c.k1)) throw std::invalid_argument("bandit: k0/k1 must be finite");
}

struct BanditState {
  BanditConfig config;
  std::vector<double> weights;         // live bandit, drives sampling
  std::vector<double> target_weights;  // absorbs every update
  double reward_max = -std::numeric_limits<double>::infinity();
  double reward_min = std::numeric_limits<double>::infinity();
  long long episode = 0;               // completed episodes

  BanditState() = default;
  BanditState(const BanditConfig& cfg, int n_max)
      : config(cfg), weights(init_weights(cfg.init, n_max)), target_weights(weights) {
    validate(cfg);
  }

  int arm_count() const { return static_cast<int>(weights.size()); }
  bool has_reward() const { return reward_min <= reward_max; }
  std::vector<double> probabilities() const { return arm_probabilities(weights, config.eta); }
};

struct RescaledReward {
  double raw = 0.0;
  double normalized = 0.0;   // in [-1, 1] when k0 = k1 = 1
  double rescaled = 0.0;     // normalized / p_arm
  double probability = 0.0;  // p_arm under the live weights
};

// Folds r into the running extrema, maps it to [-1, 1] against them and
// importance-weights it by the sampled arm's live probability.
inline RescaledReward record_and_rescale(double r, CurriculumId arm, BanditState& s) {
  if (arm < 0 || arm >= s.arm_count()) throw std::out_of_range("record_and_rescale: arm");
  if (!std::isfinite(r)) throw std::invalid_argument("record_and_rescale: non-finite reward");
  s.reward_max = std::max(s.reward_max, r);
  s.reward_min = std::min(s.reward_min, r);
  const double lo = s.config.k0 * s.reward_min;
  const double range = s.config.k1 * s.reward_max - lo;
  RescaledReward out;
  out.raw = r;
  out.normalized = range == 0.0 ? 0.0 : 2.0 * (r - lo) / range - 1.0;
  out.probability = s.probabilities()[static_cast<std::size_t>(arm)];
  out.rescaled = out.normalized / out.probability;
  return out;
}

inline void update_target(CurriculumId arm, double rescaled, BanditState& s) {
  if (arm < 0 || arm >= s.arm_count()) throw std::out_of_range("update_target: arm");
  s.target_weights[static_cast<std::size_t>(arm)] += s.config.alpha * rescaled;
}

// Copies the target weights into the live bandit after episodes
// N_MAB, 2 N_MAB, ...; returns whether a copy happened.
inline bool sync_if_due(BanditState& s) {
  if (s.episode > 0 && s.episode % s.config.sync_interval == 0) {
    s.weights = s.target_weights;
    return true;
  }
  return false;
}

struct BanditUpdate {
  RescaledReward reward;
  bool synced = false;
};

// Per-episode bookkeeping in order: rescale, target update, count, sync.
inline BanditUpdate observe_episode(double r, CurriculumId arm, BanditState& s) {
  BanditUpdate u;
  u.reward = record_and_rescale(r, arm, s);
  update_target(arm, u.reward.rescaled, s);
  ++s.episode;
  u.synced = sync_if_due(s);
  return u;
}

inline void write_trace_header(std::ostream& os, int arms) {
  os << "t,arm,r,r_norm,r_hat";
  for (int i = 0; i < arms; ++i) os << ",p_" << i;
  for (int i = 0; i < arms; ++i) os << ",w_" << i;
  os << '\n';
}

inline void write_trace_row(std::ostream& os, long long t, CurriculumId arm,
                            const RescaledReward& r, std::span<const double> p,
                            std::span<const double> w) {
  os << t << ',' << arm << ',' << r.raw << ',' << r.normalized << ',' << r.rescaled;
  for (double v : p) os << ',' << v;
  for (double v : w) os << ',' << v;
  os << '\n';
}

}  // namespace rdacppo::curriculum

#endif  // RDACPPO_BANDIT_HPP_
