#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "rdacppo/config.hpp"

namespace rdacppo::config {
namespace {

TEST(RunConfig, DefaultsRoundTrip) {
  const RunConfig c;
  const nlohmann::json j = to_json(c);
  EXPECT_EQ(to_json(from_json(j)), j);
  EXPECT_EQ(j["reward"]["success_time_coef"], -2.0);
  EXPECT_EQ(j["bandit"]["init"], "exp");
  EXPECT_FALSE(j["ppo"].contains("gamma"));
}

TEST(RunConfig, RandomValuesRoundTripThroughText) {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    RunConfig c;
    c.label = "run-" + std::to_string(i);
    c.trainer.seed = rng();
    c.trainer.episodes = static_cast<int>(uniform_index(rng, 10000));
    c.trainer.mdp.reward.success_time_coef = uniform(rng, -10, 10);
    c.trainer.mdp.reward.gamma = uniform(rng, 0.01, 0.99);
    c.trainer.ppo.gamma = c.trainer.mdp.reward.gamma;
    c.trainer.ppo.lambda = uniform(rng, 0.01, 0.99);
    c.trainer.bandit.eta = uniform(rng, 0.01, 0.99);
    c.trainer.bandit.init = i % 2 ? curriculum::InitScheme::kEqual : curriculum::InitScheme::kExp;
    c.trainer.env.sv.limits.max_steer = uniform(rng, 0.1, 1.0);
    c.trainer.baseline = static_cast<train::Baseline>(i % 4);
    const std::string text = to_json(c).dump(2);
    const RunConfig back = from_json(nlohmann::json::parse(text));
    EXPECT_EQ(to_json(back).dump(2), text);
    EXPECT_EQ(back.trainer.mdp.reward.success_time_coef, c.trainer.mdp.reward.success_time_coef);
    EXPECT_EQ(back.trainer.env.sv.limits.max_steer, c.trainer.env.sv.limits.max_steer);
    EXPECT_EQ(back.trainer.seed, c.trainer.seed);
    EXPECT_EQ(back.trainer.ppo.gamma, c.trainer.mdp.reward.gamma);
  }
}

TEST(RunConfig, PartialFileKeepsDefaults) {
  const RunConfig c = from_json(nlohmann::json::parse(R"({"episodes": 10, "bandit": {"eta": 0.3}})"));
  EXPECT_EQ(c.trainer.episodes, 10);
  EXPECT_EQ(c.trainer.bandit.eta, 0.3);
  EXPECT_EQ(c.trainer.bandit.sync_interval, curriculum::BanditConfig{}.sync_interval);
  EXPECT_EQ(c.trainer.env.n_sv_max, 6);
}

TEST(RunConfig, UnknownKeysRejected) {
  EXPECT_THROW(from_json(nlohmann::json::parse(R"({"episdoes": 10})")), std::invalid_argument);
  EXPECT_THROW(from_json(nlohmann::json::parse(R"({"env": {"geometry": {"lanes": 2}}})")),
               std::invalid_argument);
}

TEST(RunConfig, BadEnumValuesRejected) {
  EXPECT_THROW(from_json(nlohmann::json::parse(R"({"baseline": "ppo"})")), std::invalid_argument);
  EXPECT_THROW(from_json(nlohmann::json::parse(R"({"bandit": {"init": "linear"}})")),
               std::invalid_argument);
}

TEST(RunConfig, ValidationCatchesBadRanges) {
  RunConfig c;
  EXPECT_NO_THROW(validate(c));
  c.eval.trials = 0;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = RunConfig{};
  c.export_curves.window = 10;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = RunConfig{};
  c.trainer.bandit.eta = 1.0;
  EXPECT_THROW(validate(c), std::invalid_argument);
}

TEST(RunConfig, OverridesWin) {
  RunConfig c;
  Overrides o;
  o.seed = 42;
  o.episodes = 7;
  o.baseline = "fixed-ppo";
  o.init_weights = "equal";
  o.n_sv_max = 2;
  o.out_dir = "/tmp/x";
  apply_overrides(c, o);
  EXPECT_EQ(c.trainer.seed, 42u);
  EXPECT_EQ(c.trainer.episodes, 7);
  EXPECT_EQ(c.trainer.baseline, train::Baseline::kFixedPpo);
  EXPECT_EQ(c.trainer.bandit.init, curriculum::InitScheme::kEqual);
  EXPECT_EQ(c.trainer.env.n_sv_max, 2);
  EXPECT_EQ(c.out_dir, "/tmp/x");
  o = Overrides{};
  o.init_weights = "ones";
  EXPECT_THROW(apply_overrides(c, o), std::invalid_argument);
}

TEST(RunConfig, FileErrors) {
  EXPECT_THROW(load_run_config("/nonexistent/config.json"), std::runtime_error);
  const auto p = std::filesystem::temp_directory_path() / "rdacppo_bad_config.json";
  std::ofstream(p) << "{ not json";
  EXPECT_THROW(load_run_config(p.string()), std::runtime_error);
  std::ofstream(p) << R"({"episodes": "many"})";
  EXPECT_THROW(load_run_config(p.string()), std::invalid_argument);
  std::filesystem::remove(p);
}

TEST(RunConfig, ShippedConfigsLoadAndValidate) {
  for (const auto& e : std::filesystem::directory_iterator(RDACPPO_CONFIG_DIR)) {
    if (e.path().extension() != ".json") continue;
    RunConfig c;
    ASSERT_NO_THROW(c = load_run_config(e.path().string())) << e.path();
    EXPECT_NO_THROW(validate(c)) << e.path();
  }
}

}  // namespace
}  // namespace rdacppo::config
