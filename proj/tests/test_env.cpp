#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "edgeids/gateway_env.hpp"

using namespace edgeids;
using namespace edgeids::env;

namespace {

std::uint64_t attack_packets(const std::vector<FlowRecord>& flows) {
  std::uint64_t n = 0;
  for (const auto& f : flows)
    if (f.label == Label::attack) n += f.pkts_total;
  return n;
}

std::uint64_t packets(const std::vector<FlowRecord>& flows, std::uint32_t src) {
  std::uint64_t n = 0;
  for (const auto& f : flows)
    if (f.src_id == src) n += f.pkts_total;
  return n;
}

std::uint64_t total_packets(const std::vector<FlowRecord>& flows) {
  std::uint64_t n = 0;
  for (const auto& f : flows) n += f.pkts_total;
  return n;
}

std::vector<FlowRecord> attack_step(std::uint64_t seed) {
  auto cfg = scenario_preset("syn_flood");
  Rng rng(seed);
  return generate_step_traffic(cfg, 300, rng);
}

}  // namespace

TEST(Traffic, NoAttackMeansAllBenign) {
  const auto cfg = scenario_preset("syn_flood");
  Rng rng(1);
  for (std::size_t step : {0u, 50u, 199u, 800u, 999u})
    for (const auto& f : generate_step_traffic(cfg, step, rng)) EXPECT_EQ(f.label, Label::benign);
}

TEST(Traffic, SynFloodPacketCountIsPoisson) {
  auto cfg = scenario_preset("benign");
  AttackScenario a;
  a.intensity_pps = 1000.0;
  a.start_step = 0;
  a.end_step = 10;
  cfg.attacks.push_back(a);
  Rng rng(2);
  const auto n = static_cast<double>(attack_packets(generate_step_traffic(cfg, 0, rng)));
  EXPECT_NEAR(n, 1000.0, 3.0 * std::sqrt(1000.0));
}

TEST(Traffic, SameSeedSameFlows) {
  EXPECT_EQ(attack_step(9), attack_step(9));
}

TEST(Traffic, FlowsAreStructurallyValid) {
  for (const auto* name : {"syn_flood", "udp_flood", "zero_day_mix", "mixed", "severe"}) {
    const auto cfg = scenario_preset(name);
    Rng rng(3);
    for (std::size_t s = 195; s < 215; ++s)
      for (const auto& f : generate_step_traffic(cfg, s, rng)) EXPECT_NO_THROW(f.validate()) << name;
  }
}

TEST(Traffic, PresetScalesToEpisodeLength) {
  const auto c = scenario_preset("syn_flood", 100);
  EXPECT_EQ(c.episode_steps, 100u);
  ASSERT_EQ(c.attacks.size(), 1u);
  EXPECT_EQ(c.attacks[0].start_step, 20u);
  EXPECT_EQ(c.attacks[0].end_step, 80u);
  EXPECT_THROW(scenario_preset("nope"), std::invalid_argument);
}

TEST(Mitigation, NothingActiveIsIdentity) {
  const auto flows = attack_step(4);
  Rng rng(5);
  const std::vector<std::uint8_t> flags(flows.size(), 1);
  const auto r = apply_mitigation(flows, flags, MitigationState{}, 1.0, rng);
  EXPECT_EQ(r.passed, flows);
  EXPECT_TRUE(r.dropped.empty());
}

TEST(Mitigation, BlacklistedSourcePassesNothing) {
  const auto flows = attack_step(6);
  const std::uint32_t victim = flows.back().src_id;
  MitigationState m;
  m.blacklist[victim] = 1000;
  Rng rng(7);
  const std::vector<std::uint8_t> flags(flows.size(), 0);
  const auto r = apply_mitigation(flows, flags, m, 1.0, rng);
  EXPECT_EQ(packets(r.passed, victim), 0u);
  EXPECT_EQ(packets(r.dropped, victim), packets(flows, victim));
}

TEST(Mitigation, RateCapBoundsPassedPackets) {
  auto cfg = scenario_preset("benign");
  cfg.benign.flow_rate = 0.0;
  AttackScenario a;
  a.kind = AttackKind::udp_flood;
  a.intensity_pps = 1000.0;
  a.start_step = 0;
  cfg.attacks.push_back(a);
  Rng rng(8);
  const auto flows = generate_step_traffic(cfg, 0, rng);
  MitigationState m;
  m.rate_cap = 500.0;
  const std::vector<std::uint8_t> flags(flows.size(), 0);
  const auto r = apply_mitigation(flows, flags, m, 1.0, rng);
  EXPECT_LE(total_packets(r.passed), 500u);
  EXPECT_EQ(total_packets(r.passed) + total_packets(r.dropped), total_packets(flows));
}

TEST(Mitigation, AnyMitigationNeverPassesMoreAttackPackets) {
  const auto flows = attack_step(10);
  std::vector<std::uint8_t> flags(flows.size());
  for (std::size_t i = 0; i < flows.size(); ++i) flags[i] = flows[i].label == Label::attack && i % 3 != 0;
  const std::uint64_t base = attack_packets(flows);
  std::vector<MitigationState> states(4);
  states[0].rate_cap = 1000.0;
  states[1].syn_cap = 20.0;
  states[2].drop_filter_active = true;
  states[3].blacklist[flows.back().src_id] = 10;
  for (const auto& m : states) {
    Rng rng(11);
    const auto r = apply_mitigation(flows, flags, m, 1.0, rng);
    EXPECT_LE(attack_packets(r.passed), base);
    EXPECT_EQ(total_packets(r.passed) + total_packets(r.dropped), total_packets(flows));
  }
}

TEST(Blacklist, AttackProbability) {
  EXPECT_DOUBLE_EQ(source_attack_probability(std::vector<std::uint8_t>(10, 1)), 1.0);
  EXPECT_DOUBLE_EQ(source_attack_probability(std::vector<std::uint8_t>(10, 0)), 0.0);
  EXPECT_DOUBLE_EQ(source_attack_probability(std::vector<std::uint8_t>{1, 1, 1, 0, 0, 0, 0, 0, 0, 0}), 0.3);
}

TEST(Blacklist, StrictThresholdAndExpiry) {
  MitigationState m;
  const auto added = blacklist_update(m, {{1, 0.5}, {2, 1.0}}, 0.5, 300, 10);
  EXPECT_EQ(added, (std::vector<std::uint32_t>{2}));
  EXPECT_FALSE(m.blacklist.count(1));
  EXPECT_TRUE(m.blacklist.count(2));
  blacklist_expire(m, 309);
  EXPECT_TRUE(m.blacklist.count(2));
  blacklist_expire(m, 310);
  EXPECT_FALSE(m.blacklist.count(2));
}

TEST(Resources, AffineInLoad) {
  const ResourceConfig rc;
  const auto a = resource_model(rc, 1000.0, 0.0, 1000.0, {}, std::nullopt, 0);
  const auto b = resource_model(rc, 2000.0, 0.0, 2000.0, {}, std::nullopt, 0);
  EXPECT_NEAR(b.cpu_pct - a.cpu_pct, rc.cpu_per_kpps * 1.0, 1e-12);
  const auto zero = resource_model(rc, 0.0, 0.0, 0.0, {}, std::nullopt, 0);
  EXPECT_NEAR(zero.cpu_pct, rc.cpu_base_pct, 1e-12);
  EXPECT_GE(zero.cpu_pct, 10.0);
  EXPECT_LE(zero.cpu_pct, 13.0);
}

TEST(Env, DeterministicTrajectory) {
  EnvConfig cfg;
  cfg.scenario = scenario_preset("syn_flood", 300);
  GatewayEnv a(cfg, 5), b(cfg, 5);
  for (std::size_t t = 0; t < 300; ++t) {
    const std::optional<ActionId> act = t % 7 == 0 ? std::optional(ActionId::source_filter) : std::nullopt;
    const auto x = a.step(act), y = b.step(act);
    ASSERT_EQ(x.passed, y.passed);
    ASSERT_EQ(x.ledger.energy_j, y.ledger.energy_j);
  }
  EXPECT_TRUE(a.done());
  EXPECT_THROW(a.step(std::nullopt), EpisodeOver);
}

TEST(Env, SourceFilterListsFlaggedSourcesNextStep) {
  EnvConfig cfg;
  cfg.scenario = scenario_preset("syn_flood", 300);
  GatewayEnv env(cfg, 12);
  // every attack flow is flagged by this scorer
  env.set_flow_scorer(
      [](std::span<const FlowRecord> flows, std::vector<double>& out) {
        out.resize(flows.size());
        for (std::size_t i = 0; i < flows.size(); ++i) out[i] = flows[i].label == Label::attack ? 1.0 : 0.0;
      },
      0.5);
  while (env.current_step() < 80) env.step(std::nullopt);
  std::vector<std::uint32_t> hot;
  for (const auto& [src, p] : env.history().probabilities())
    if (p > cfg.mitigation.tau_p) hot.push_back(src);
  ASSERT_FALSE(hot.empty());
  env.step(ActionId::source_filter);
  const auto next = env.step(std::nullopt);
  for (auto s : hot) EXPECT_TRUE(next.mitigation.blacklist.count(s)) << s;
  // listed sources stay listed for the rest of the episode window
  for (int i = 0; i < 20; ++i) {
    const auto o = env.step(std::nullopt);
    for (auto s : hot) EXPECT_EQ(packets(o.passed, s), 0u);
  }
}

TEST(Env, BenignEpisodeStaysInNormalCpuBand) {
  EnvConfig cfg;
  cfg.scenario = scenario_preset("benign", 300);
  GatewayEnv env(cfg, 13);
  while (!env.done()) {
    const auto o = env.step(std::nullopt);
    EXPECT_GE(o.resources.cpu_pct, 10.0);
    EXPECT_LE(o.resources.cpu_pct, 15.0);
  }
}

TEST(Env, SevereUnmitigatedAttackCpuBand) {
  EnvConfig cfg;
  cfg.scenario = scenario_preset("severe");
  GatewayEnv env(cfg, 14);
  double sum = 0.0;
  int n = 0;
  while (!env.done()) {
    const auto o = env.step(std::nullopt);
    if (o.attack_active) {
      sum += o.resources.cpu_pct;
      ++n;
    }
  }
  ASSERT_GT(n, 0);
  EXPECT_NEAR(sum / n, 39.6, 1.5);
}

TEST(Env, ResourceSanityAndConservationEveryStep) {
  for (const auto* name : {"syn_flood", "zero_day_mix"}) {
    EnvConfig cfg;
    cfg.scenario = scenario_preset(name, 400);
    GatewayEnv env(cfg, 15);
    std::size_t t = 0;
    while (!env.done()) {
      const std::optional<ActionId> act =
          t % 5 == 0 ? std::optional(agent::action_from_index((t / 5) % 4)) : std::nullopt;
      const auto o = env.step(act);
      EXPECT_GE(o.resources.cpu_pct, 0.0);
      EXPECT_LE(o.resources.cpu_pct, 100.0);
      EXPECT_GE(o.resources.power_w, 0.0);
      EXPECT_LE(o.resources.power_w, cfg.limits.p_max_w);
      EXPECT_EQ(o.offered_pkts.total(), o.passed_pkts.total() + o.dropped_pkts.total());
      EXPECT_LE(o.ledger.energy_j, cfg.limits.p_max_w * o.ledger.dt_s);
      ++t;
    }
    EXPECT_TRUE(sustain::check_bounds(env.ledger()).empty());
  }
}
