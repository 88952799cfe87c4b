// rdacppo_cli: train / eval / export / smoke entry points.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rdacppo/config.hpp"
#include "rdacppo/eval.hpp"
#include "rdacppo/savgol.hpp"
#include "rdacppo/trainer.hpp"

namespace fs = std::filesystem;
using namespace rdacppo;

namespace {

struct CommonFlags {
  std::string config_path;
  config::Overrides overrides;
  bool print_config = false;
};

void add_common_flags(CLI::App* app, CommonFlags& f, bool config_required) {
  auto* c = app->add_option("--config", f.config_path, "run configuration (JSON)");
  if (config_required) c->required();
  app->add_option("--seed", f.overrides.seed, "master seed");
  app->add_option("--episodes", f.overrides.episodes, "training episodes");
  app->add_option("--baseline", f.overrides.baseline, "rd-acppo|fixed-ppo|manual-cppo|random-cppo");
  app->add_option("--init-weights", f.overrides.init_weights, "bandit weight init")
      ->check(CLI::IsMember({"exp", "equal"}));
  app->add_option("--n-sv-max", f.overrides.n_sv_max, "largest number of surrounding vehicles");
  app->add_option("--out", f.overrides.out_dir, "output directory");
  app->add_flag("--print-config", f.print_config, "print the resolved configuration and exit");
}

// The smoke profile used when `smoke` runs without --config.
config::RunConfig builtin_smoke() {
  config::RunConfig c;
  c.label = "smoke";
  c.out_dir = "runs/smoke";
  c.trainer.seed = 7;
  c.trainer.episodes = 10;
  c.trainer.checkpoint_every = 5;
  c.trainer.env.n_sv_max = 2;
  c.trainer.bandit.sync_interval = 3;
  c.eval.trials = 6;
  c.export_curves = {5, 2};
  return c;
}

config::RunConfig resolve(const CommonFlags& f, const config::RunConfig* fallback = nullptr) {
  config::RunConfig c = (f.config_path.empty() && fallback) ? *fallback
                                                            : config::load_run_config(f.config_path);
  config::apply_overrides(c, f.overrides);
  config::validate(c);
  return c;
}

void print_resolved(const config::RunConfig& c) {
  std::cout << config::to_json(c).dump(2) << '\n';
}

void write_resolved(const config::RunConfig& c) {
  fs::create_directories(c.out_dir);
  std::ofstream os(fs::path(c.out_dir) / "config.json");
  os << config::to_json(c).dump(2) << '\n';
}

std::string fmt_probs(const std::vector<double>& p) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? " " : "") << p[i];
  return os.str();
}

int run_train(const config::RunConfig& c, bool resume) {
  write_resolved(c);
  const train::TrainerConfig& t = c.trainer;
  std::cout << "train " << c.label << ": " << train::to_string(t.baseline) << ", seed " << t.seed
            << ", " << t.episodes << " episodes, N_sv_max " << t.env.n_sv_max << " -> " << c.out_dir
            << '\n';
  const long long every = std::max(1, t.episodes / 20);
  long long window_success = 0, window_n = 0;
  double window_reward = 0.0;
  train::TrainOptions opt;
  opt.out_dir = c.out_dir;
  opt.resume = resume;
  opt.on_episode = [&](const train::EpisodeRecord& r) {
    window_success += r.outcome == mdp::Outcome::kSuccess;
    window_reward += r.reward;
    ++window_n;
    if ((r.episode + 1) % every == 0 || r.episode + 1 == t.episodes) {
      std::printf("  ep %6lld  mean reward %8.3f  success %5.1f%%  p = [%s]\n", r.episode + 1,
                  window_reward / window_n, 100.0 * window_success / window_n,
                  fmt_probs(r.probabilities).c_str());
      std::fflush(stdout);
      window_success = window_n = 0;
      window_reward = 0.0;
    }
  };
  const auto t0 = std::chrono::steady_clock::now();
  const train::TrainResult res = train::train(t, opt);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("done: %lld episodes in %.1f s, %d aborted updates, bandit p = [%s]\n",
              res.state.episode, secs, res.state.aborted_updates,
              fmt_probs(res.state.bandit.probabilities()).c_str());
  std::cout << "artifacts: metrics.csv bandit_trace.csv final.bin in " << c.out_dir << '\n';
  return 0;
}

void print_report(const eval::EvalReport& rep) {
  std::printf("  n_sv  trials  succ%%  coll%%  timeout%%  off-road%%  mean t_c\n");
  for (const auto& s : rep.scenarios) {
    std::printf("  %4d  %6d  %5.1f  %5.1f  %8.1f  %9.1f  %8.2f\n", s.n_sv, s.trials,
                100 * s.success_rate(), 100 * s.collision_rate(), 100 * s.timeout_rate(),
                100 * s.off_road_rate(), s.mean_completion_time());
  }
}

int run_eval(const config::RunConfig& c, std::string checkpoint, int trials) {
  if (checkpoint.empty()) checkpoint = (fs::path(c.out_dir) / "final.bin").string();
  const nn::ActorCritic ac = nn::load_checkpoint(checkpoint);
  const int n_hi = c.eval.n_sv_max < 0 ? c.trainer.env.n_sv_max : c.eval.n_sv_max;
  const int n_trials = trials > 0 ? trials : c.eval.trials;
  if (trials == 0) throw std::invalid_argument("eval: --trials must be >= 1");
  const eval::EvalReport rep =
      eval::evaluate(ac, c.eval.n_sv_min, n_hi, n_trials, c.eval.seed, c.trainer.env, c.trainer.mdp);
  std::cout << "eval " << checkpoint << " (seed " << c.eval.seed << ", greedy)\n";
  print_report(rep);
  fs::create_directories(c.out_dir);
  std::ofstream os(fs::path(c.out_dir) / "eval.csv");
  os << std::setprecision(10);
  eval::write_report_csv(os, rep);
  std::cout << "wrote " << (fs::path(c.out_dir) / "eval.csv").string() << '\n';
  return 0;
}

// Column-wise numeric view of a headered CSV with no quoting.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    throw std::runtime_error("export: column '" + name + "' not found");
  }
  std::vector<double> numbers(int col) const {
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(std::stod(r.at(static_cast<std::size_t>(col))));
    return v;
  }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

Table read_csv(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw std::runtime_error("export: cannot open " + p.string());
  Table t;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("export: empty log " + p.string());
  t.header = split(line);
  while (std::getline(is, line)) {
    if (!line.empty()) t.rows.push_back(split(line));
  }
  return t;
}

int run_export(const config::RunConfig& c, std::string metrics, int window, int order) {
  const fs::path dir = c.out_dir;
  if (metrics.empty()) metrics = (dir / "metrics.csv").string();
  const int w = window > 0 ? window : c.export_curves.window;
  const int k = order >= 0 ? order : c.export_curves.order;
  const Table t = read_csv(metrics);
  fs::create_directories(dir);

  const std::vector<double> episode = t.numbers(t.column("episode"));
  const std::vector<double> reward = t.numbers(t.column("reward"));
  const std::vector<double> smooth = smoothing::savgol(reward, w, k);
  {
    std::ofstream os(dir / "reward_curve.csv");
    os << std::setprecision(10) << "episode,reward,reward_smoothed\n";
    for (std::size_t i = 0; i < reward.size(); ++i) {
      os << episode[i] << ',' << reward[i] << ',' << smooth[i] << '\n';
    }
  }

  std::vector<int> pcols;
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i].rfind("p_", 0) == 0) pcols.push_back(static_cast<int>(i));
  }
  {
    std::ofstream os(dir / "arm_probabilities.csv");
    os << std::setprecision(10) << "episode";
    for (int col : pcols) os << ',' << t.header[static_cast<std::size_t>(col)];
    os << '\n';
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      os << t.rows[r][0];
      for (int col : pcols) os << ',' << t.rows[r][static_cast<std::size_t>(col)];
      os << '\n';
    }
  }
  std::cout << "export: " << reward.size() << " episodes, Savitzky-Golay window " << w << " order "
            << k << " -> reward_curve.csv, arm_probabilities.csv in " << dir.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RD-ACPPO intersection curriculum training"};
  app.require_subcommand(1);

  CommonFlags train_f, eval_f, export_f, smoke_f;
  bool resume = false;
  auto* train_cmd = app.add_subcommand("train", "train a policy");
  add_common_flags(train_cmd, train_f, true);
  train_cmd->add_flag("--resume", resume, "continue from the state saved in the output directory");

  std::string checkpoint;
  int trials = -1;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint greedily");
  add_common_flags(eval_cmd, eval_f, true);
  eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint file (default: <out>/final.bin)");
  eval_cmd->add_option("--trials", trials, "trials per scenario");

  std::string metrics;
  int window = -1, order = -1;
  auto* export_cmd = app.add_subcommand("export", "export raw and smoothed curves");
  add_common_flags(export_cmd, export_f, true);
  export_cmd->add_option("--metrics", metrics, "metrics log (default: <out>/metrics.csv)");
  export_cmd->add_option("--window", window, "Savitzky-Golay window (odd)");
  export_cmd->add_option("--order", order, "Savitzky-Golay polynomial order");

  auto* smoke_cmd = app.add_subcommand("smoke", "tiny train + eval + export run");
  add_common_flags(smoke_cmd, smoke_f, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) {
      const config::RunConfig c = resolve(train_f);
      if (train_f.print_config) return print_resolved(c), 0;
      return run_train(c, resume);
    }
    if (eval_cmd->parsed()) {
      const config::RunConfig c = resolve(eval_f);
      if (eval_f.print_config) return print_resolved(c), 0;
      return run_eval(c, checkpoint, trials);
    }
    if (export_cmd->parsed()) {
      const config::RunConfig c = resolve(export_f);
      if (export_f.print_config) return print_resolved(c), 0;
      return run_export(c, metrics, window, order);
    }
    const config::RunConfig smoke_default = builtin_smoke();
    const config::RunConfig c = resolve(smoke_f, &smoke_default);
    if (smoke_f.print_config) return print_resolved(c), 0;
    run_train(c, false);
    run_eval(c, "", -1);
    return run_export(c, "", -1, -1);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
