#include <sstream>

#include <gtest/gtest.h>

#include "edgeids/pipeline.hpp"

using namespace edgeids;
using namespace edgeids::pipeline;

namespace {

env::EnvConfig small_env(const char* scenario, std::size_t steps = 300) {
  env::EnvConfig cfg;
  cfg.scenario = env::scenario_preset(scenario, steps);
  return cfg;
}

IdsConfig small_ids(AgentKind kind) {
  IdsConfig c;
  c.kind = kind;
  c.detector.warmup_steps = 90;
  c.detector.ae_epochs = 2;
  c.sequence.pretrain_epochs = 1;
  return c;
}

}  // namespace

TEST(Detector, ThresholdsSeparateBenignFromFlood) {
  const auto cfg = small_env("syn_flood");
  const auto benign = collect_benign_steps(cfg.scenario, 90, 3);
  DetectorConfig dc;
  dc.ae_epochs = 3;
  Rng rng(4);
  const auto det = FlowDetector::fit(benign, dc, rng);
  EXPECT_GT(det.tau_flow(), 0.0);
  EXPECT_GT(det.tau_step(), 0.0);
  EXPECT_EQ(det.latent_dim(), dc.ae_latent);

  Rng trng(5);
  const auto flows = env::generate_step_traffic(cfg.scenario, cfg.scenario.attacks[0].start_step + 1, trng);
  std::size_t attack = 0, flagged = 0;
  for (const auto& f : flows)
    if (f.label == Label::attack) {
      ++attack;
      flagged += det.score(f) > det.tau_flow();
    }
  ASSERT_GT(attack, 0u);
  EXPECT_GT(static_cast<double>(flagged) / attack, 0.9);

  const auto empty = det.step_score({});
  EXPECT_DOUBLE_EQ(empty.anomaly, 0.0);
  EXPECT_EQ(empty.latent, std::vector<double>(dc.ae_latent, 0.0));
}

TEST(Detector, SerializationRoundTrip) {
  const auto cfg = small_env("syn_flood");
  const auto benign = collect_benign_steps(cfg.scenario, 60, 6);
  DetectorConfig dc;
  dc.ae_epochs = 1;
  Rng rng(7);
  const auto det = FlowDetector::fit(benign, dc, rng);
  std::stringstream ss;
  det.write(ss);
  const auto back = FlowDetector::read(ss);
  for (const auto& f : benign[0]) EXPECT_EQ(back.score(f), det.score(f));
  EXPECT_EQ(back.tau_flow(), det.tau_flow());
}

TEST(Reward, ComponentsFromOutcome) {
  env::StepOutcome o;
  o.offered_pkts = {100, 400};
  o.dropped_pkts = {10, 300};
  o.passed_pkts = {90, 100};
  o.resources.latency_s = 0.2;
  o.ledger.energy_j = 3.0;
  o.ledger.memory_ratio = 0.4;
  o.ledger.carbon_g = 0.001;
  const auto de = reward_components(o, sustain::RewardVariant::deepedge);
  EXPECT_DOUBLE_EQ(de.detection_rate, 0.75);
  EXPECT_DOUBLE_EQ(de.error_rate, 0.1);
  const auto ad = reward_components(o, sustain::RewardVariant::autodrl);
  EXPECT_DOUBLE_EQ(ad.error_rate, 0.25);
  EXPECT_DOUBLE_EQ(ad.energy_j, 3.0);
  EXPECT_DOUBLE_EQ(ad.carbon_g, 0.001);
}

TEST(System, StateDimensionMismatchIsRejected) {
  const auto cfg = small_env("syn_flood");
  auto ids = IdsSystem::build(small_ids(AgentKind::deepedge), cfg, 8);
  EXPECT_EQ(ids.state_dim(), 4 + ids.latent_dim());
  Rng rng(1);
  agent::DqnAgent wrong(ids.state_dim() + 1, ids.config().agent, rng);
  EXPECT_THROW(IdsSystem(ids.config(), ids.flow_detector(), std::nullopt, wrong), neural::DimensionError);
}

TEST(System, ShortTrainingEpisode) {
  const auto cfg = small_env("syn_flood");
  auto ids = IdsSystem::build(small_ids(AgentKind::deepedge), cfg, 9);
  env::GatewayEnv env(cfg, 10);
  ids.attach(env);
  Rng rng(11);
  const auto r = run_episode(ids, env, Mode::train, rng);
  EXPECT_EQ(r.steps, 300u);
  EXPECT_EQ(r.offered.total(), r.passed.total() + r.dropped.total());
  EXPECT_EQ(r.ledger.size(), 300u);
  ASSERT_TRUE(r.detection_prob.has_value());
  EXPECT_GE(*r.detection_prob, 0.0);
  EXPECT_LE(*r.detection_prob, 1.0);
  EXPECT_TRUE(env.done());
}

TEST(System, BenignEpisodeHasNoDetectionProbability) {
  const auto cfg = small_env("benign");
  auto ids = IdsSystem::build(small_ids(AgentKind::deepedge), cfg, 12);
  env::GatewayEnv env(cfg, 13);
  ids.attach(env);
  Rng rng(14);
  const auto r = run_episode(ids, env, Mode::evaluate, rng);
  EXPECT_FALSE(r.detection_prob.has_value());
  EXPECT_EQ(r.offered.attack, 0u);
}

TEST(System, AutodrlBuildsSequenceDetector) {
  const auto cfg = small_env("syn_flood");
  auto ids = IdsSystem::build(small_ids(AgentKind::autodrl), cfg, 15);
  ASSERT_NE(ids.sequence(), nullptr);
  EXPECT_EQ(ids.latent_dim(), ids.sequence()->hidden_dim());
  env::GatewayEnv env(cfg, 16);
  ids.attach(env);
  Rng rng(17);
  const auto r = run_episode(ids, env, Mode::train, rng);
  EXPECT_EQ(r.steps, 300u);
}
