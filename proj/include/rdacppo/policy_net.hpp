#ifndef RDACPPO_POLICY_NET_HPP_
#define RDACPPO_POLICY_NET_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rdacppo/random.hpp"

namespace rdacppo::nn {

// input -> hidden (tanh) -> output, all weights in one flat vector laid out as
// W1 (hidden x inputs, row-major), b1, W2 (outputs x hidden, row-major), b2.
struct MlpShape {
  int inputs = 0;
  int hidden = 0;
  int outputs = 0;

  std::size_t w1() const { return 0; }
  std::size_t b1() const { return static_cast<std::size_t>(hidden) * inputs; }
  std::size_t w2() const { return b1() + hidden; }
  std::size_t b2() const { return w2() + static_cast<std::size_t>(outputs) * hidden; }
  std::size_t parameter_count() const { return b2() + outputs; }
  bool operator==(const MlpShape&) const = default;
};

inline void validate(const MlpShape& s) {
  if (s.inputs < 1 || s.hidden < 1 || s.outputs < 1) {
    throw std::invalid_argument("MlpShape: all layer sizes must be >= 1");
  }
}

// h receives the tanh activations (needed again by the backward pass).
inline void mlp_forward(const MlpShape& s, std::span<const double> theta,
                        std::span<const double> x, std::span<double> h, std::span<double> y) {
  const double* w1 = theta.data() + s.w1();
  const double* b1 = theta.data() + s.b1();
  const double* w2 = theta.data() + s.w2();
  const double* b2 = theta.data() + s.b2();
  for (int j = 0; j < s.hidden; ++j) {
    const double* row = w1 + static_cast<std::size_t>(j) * s.inputs;
    double a = b1[j];
    for (int i = 0; i < s.inputs; ++i) a += row[i] * x[i];
    h[j] = std::tanh(a);
  }
  for (int k = 0; k < s.outputs; ++k) {
    const double* row = w2 + static_cast<std::size_t>(k) * s.hidden;
    double a = b2[k];
    for (int j = 0; j < s.hidden; ++j) a += row[j] * h[j];
    y[k] = a;
  }
}

// Accumulates dL/dtheta into grad given dL/dy for one sample.
inline void mlp_backward(const MlpShape& s, std::span<const double> theta,
                         std::span<const double> x, std::span<const double> h,
                         std::span<const double> dy, std::span<double> grad) {
  const double* w2 = theta.data() + s.w2();
  double* g_w1 = grad.data() + s.w1();
  double* g_b1 = grad.data() + s.b1();
  double* g_w2 = grad.data() + s.w2();
  double* g_b2 = grad.data() + s.b2();
  thread_local std::vector<double> dh;
  dh.assign(static_cast<std::size_t>(s.hidden), 0.0);
  for (int k = 0; k < s.outputs; ++k) {
    const double d = dy[k];
    if (d == 0.0) continue;
    g_b2[k] += d;
    double* g_row = g_w2 + static_cast<std::size_t>(k) * s.hidden;
    const double* row = w2 + static_cast<std::size_t>(k) * s.hidden;
    for (int j = 0; j < s.hidden; ++j) {
      g_row[j] += d * h[j];
      dh[j] += d * row[j];
    }
  }
  for (int j = 0; j < s.hidden; ++j) {
    const double da = dh[j] * (1.0 - h[j] * h[j]);
    if (da == 0.0) continue;
    g_b1[j] += da;
    double* g_row = g_w1 + static_cast<std::size_t>(j) * s.inputs;
    for (int i = 0; i < s.inputs; ++i) g_row[i] += da * x[i];
  }
}

class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(MlpShape shape) : shape_(shape), theta_(shape.parameter_count(), 0.0) {
    validate(shape);
  }

  const MlpShape& shape() const { return shape_; }
  std::span<const double> params() const { return theta_; }
  std::span<double> params() { return theta_; }

  std::vector<double> forward(std::span<const double> x) const {
    check_input(x);
    std::vector<double> h(static_cast<std::size_t>(shape_.hidden));
    std::vector<double> y(static_cast<std::size_t>(shape_.outputs));
    mlp_forward(shape_, theta_, x, h, y);
    return y;
  }

  // Forward pass keeping the hidden activations for a later backward call.
  void forward(std::span<const double> x, std::span<double> h, std::span<double> y) const {
    check_input(x);
    mlp_forward(shape_, theta_, x, h, y);
  }

  void backward(std::span<const double> x, std::span<const double> h,
                std::span<const double> dy, std::span<double> grad) const {
    mlp_backward(shape_, theta_, x, h, dy, grad);
  }

  void check_input(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != shape_.inputs) {
      throw std::invalid_argument("Mlp: input length " + std::to_string(x.size()) +
                                  " != " + std::to_string(shape_.inputs));
    }
  }

 private:
  MlpShape shape_;
  std::vector<double> theta_;
};

// Rows x cols matrix with orthonormal rows (rows <= cols) or orthonormal
// columns (rows > cols), scaled by gain. Modified Gram-Schmidt on a Gaussian
// draw.
inline std::vector<double> orthogonal_matrix(int rows, int cols, double gain, Rng& rng) {
  const int n = std::max(rows, cols);
  const int m = std::min(rows, cols);
  std::vector<std::vector<double>> q(static_cast<std::size_t>(m), std::vector<double>(n));
  for (auto& v : q) {
    for (double& e : v) e = standard_normal(rng);
  }
  for (int a = 0; a < m; ++a) {
    auto& va = q[static_cast<std::size_t>(a)];
    for (int b = 0; b < a; ++b) {
      const auto& vb = q[static_cast<std::size_t>(b)];
      double d = 0.0;
      for (int i = 0; i < n; ++i) d += va[i] * vb[i];
      for (int i = 0; i < n; ++i) va[i] -= d * vb[i];
    }
    double norm = 0.0;
    for (double e : va) norm += e * e;
    norm = std::sqrt(norm);
    for (double& e : va) e /= norm;
  }
  std::vector<double> out(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double v = rows <= cols ? q[static_cast<std::size_t>(r)][c] : q[static_cast<std::size_t>(c)][r];
      out[static_cast<std::size_t>(r) * cols + c] = gain * v;
    }
  }
  return out;
}

inline void init_orthogonal(Mlp& net, double hidden_gain, double output_gain, Rng& rng) {
  const MlpShape& s = net.shape();
  auto theta = net.params();
  std::fill(theta.begin(), theta.end(), 0.0);
  const auto w1 = orthogonal_matrix(s.hidden, s.inputs, hidden_gain, rng);
  const auto w2 = orthogonal_matrix(s.outputs, s.hidden, output_gain, rng);
  std::copy(w1.begin(), w1.end(), theta.begin() + static_cast<std::ptrdiff_t>(s.w1()));
  std::copy(w2.begin(), w2.end(), theta.begin() + static_cast<std::ptrdiff_t>(s.w2()));
}

struct ActorCritic {
  Mlp actor;
  Mlp critic;

  int input_size() const { return actor.shape().inputs; }
  int action_count() const { return actor.shape().outputs; }
  std::vector<double> logits(std::span<const double> x) const { return actor.forward(x); }
  double value(std::span<const double> x) const { return critic.forward(x)[0]; }
  bool operator==(const ActorCritic& o) const {
    return actor.shape() == o.actor.shape() && critic.shape() == o.critic.shape() &&
           std::ranges::equal(actor.params(), o.actor.params()) &&
           std::ranges::equal(critic.params(), o.critic.params());
  }
};

inline ActorCritic make_actor_critic(int inputs, int actions, int actor_hidden = 128,
                                     int critic_hidden = 64) {
  return {Mlp({inputs, actor_hidden, actions}), Mlp({inputs, critic_hidden, 1})};
}

// Hidden layers gain sqrt(2), actor head 0.01 (near-uniform initial policy),
// critic head 1; biases zero.
inline void init_actor_critic(ActorCritic& ac, Rng& rng) {
  init_orthogonal(ac.actor, std::sqrt(2.0), 0.01, rng);
  init_orthogonal(ac.critic, std::sqrt(2.0), 1.0, rng);
}

inline bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// ---- categorical policy over logits ---------------------------------------

inline double log_sum_exp(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - m);
  return m + std::log(z);
}

inline std::vector<double> softmax(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

inline double log_prob(std::span<const double> logits, int action) {
  if (action < 0 || action >= static_cast<int>(logits.size())) {
    throw std::out_of_range("log_prob: action index");
  }
  return logits[static_cast<std::size_t>(action)] - log_sum_exp(logits);
}

inline double entropy(std::span<const double> logits) {
  const double lse = log_sum_exp(logits);
  double h = 0.0;
  for (double l : logits) {
    const double lp = l - lse;
    h -= std::exp(lp) * lp;
  }
  return h;
}

struct Sample {
  int action = 0;
  double log_prob = 0.0;
};

inline Sample categorical_sample(std::span<const double> logits, Rng& rng) {
  const auto p = softmax(logits);
  const double u = uniform01(rng);
  double acc = 0.0;
  int a = static_cast<int>(p.size()) - 1;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) {
      a = static_cast<int>(i);
      break;
    }
  }
  return {a, log_prob(logits, a)};
}

// Ties go to the lowest index.
inline int argmax(std::span<const double> logits) {
  return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

// ---- Adam -----------------------------------------------------------------

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double lr = 1e-3;

  AdamState() = default;
  AdamState(std::size_t n, double learning_rate) : m(n, 0.0), v(n, 0.0), lr(learning_rate) {}
};

inline void adam_step(std::span<double> params, std::span<const double> grads, AdamState& s) {
  if (params.size() != grads.size() || params.size() != s.m.size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * grads[i];
    s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * grads[i] * grads[i];
    params[i] -= s.lr * (s.m[i] / c1) / (std::sqrt(s.v[i] / c2) + s.eps);
  }
}

// ---- checkpoints ------------------------------------------------------------
//
// Layout: 8-byte magic, u32 version, u32 network count, then per network three
// u32 layer sizes (inputs, hidden, outputs) followed by its parameters as
// little-endian IEEE-754 doubles. All integers little-endian.

inline constexpr std::array<char, 8> kCheckpointMagic = {'R', 'D', 'A', 'C', 'P', 'P', 'O', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_f64(std::ostream& os, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, sizeof v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("checkpoint: truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

inline double get_f64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("checkpoint: truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double d;
  std::memcpy(&d, &v, sizeof d);
  return d;
}

}  // namespace detail

inline void write_checkpoint(std::ostream& os, const ActorCritic& ac) {
  os.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  detail::put_u32(os, kCheckpointVersion);
  detail::put_u32(os, 2);
  for (const Mlp* net : {&ac.actor, &ac.critic}) {
    const MlpShape& s = net->shape();
    detail::put_u32(os, static_cast<std::uint32_t>(s.inputs));
    detail::put_u32(os, static_cast<std::uint32_t>(s.hidden));
    detail::put_u32(os, static_cast<std::uint32_t>(s.outputs));
    for (double p : net->params()) detail::put_f64(os, p);
  }
}

inline ActorCritic read_checkpoint(std::istream& is) {
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kCheckpointMagic) {
    throw std::runtime_error("checkpoint: bad magic");
  }
  if (detail::get_u32(is) != kCheckpointVersion) throw std::runtime_error("checkpoint: unsupported version");
  if (detail::get_u32(is) != 2) throw std::runtime_error("checkpoint: expected two networks");
  ActorCritic ac;
  for (Mlp* net : {&ac.actor, &ac.critic}) {
    MlpShape s;
    s.inputs = static_cast<int>(detail::get_u32(is));
    s.hidden = static_cast<int>(detail::get_u32(is));
    s.outputs = static_cast<int>(detail::get_u32(is));
    constexpr int kMaxLayer = 1 << 16;
    if (s.inputs > kMaxLayer || s.hidden > kMaxLayer || s.outputs > kMaxLayer) {
      throw std::runtime_error("checkpoint: implausible layer size");
    }
    *net = Mlp(s);
    for (double& p : net->params()) p = detail::get_f64(is);
  }
  if (ac.critic.shape().inputs != ac.actor.shape().inputs || ac.critic.shape().outputs != 1) {
    throw std::runtime_error("checkpoint: actor/critic shapes disagree");
  }
  return ac;
}

// Writes `path` and a `path.meta` text sidecar of key=value lines.
inline void save_checkpoint(const std::string& path, const ActorCritic& ac,
                            const std::vector<std::pair<std::string, std::string>>& meta) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write checkpoint " + path);
  write_checkpoint(os, ac);
  std::ofstream ms(path + ".meta");
  if (!ms) throw std::runtime_error("cannot write checkpoint metadata " + path + ".meta");
  ms << "actor=" << ac.actor.shape().inputs << 'x' << ac.actor.shape().hidden << 'x'
     << ac.actor.shape().outputs << '\n';
  ms << "critic=" << ac.critic.shape().inputs << 'x' << ac.critic.shape().hidden << 'x'
     << ac.critic.shape().outputs << '\n';
  for (const auto& [k, v] : meta) ms << k << '=' << v << '\n';
  if (!os || !ms) throw std::runtime_error("checkpoint write failed: " + path);
}

inline ActorCritic load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint " + path);
  return read_checkpoint(is);
}

}  // namespace rdacppo::nn

#endif  // RDACPPO_POLICY_NET_HPP_
