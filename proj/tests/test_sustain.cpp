#include <cmath>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "edgeids/sustain.hpp"

using namespace edgeids::sustain;

TEST(Reward, AllZeroComponents) {
  EXPECT_DOUBLE_EQ(compute_reward(RewardWeights{}, RewardComponents{}).total, 0.0);
}

TEST(Reward, DetectionOnly) {
  RewardComponents c;
  c.detection_rate = 1.0;
  EXPECT_DOUBLE_EQ(compute_reward(RewardWeights{}, c).total, 1.0);
}

TEST(Reward, HandArithmeticExample) {
  RewardWeights w;  // 1, 0.5, 0.1, 0.01, 0.1, 0.05
  RewardComponents c;
  c.detection_rate = 0.9;
  c.error_rate = 0.1;
  c.latency_s = 0.5;
  c.energy_j = 2.0;
  c.memory_util = 0.5;
  c.carbon_g = 0.4;
  const auto r = compute_reward(w, c);
  EXPECT_NEAR(r.total, 0.71, 1e-12);
  EXPECT_NEAR(r.per_term[kDetection], 0.9, 1e-15);
  EXPECT_NEAR(r.per_term[kErrorRate], -0.05, 1e-15);
  EXPECT_NEAR(r.per_term[kLatency], -0.05, 1e-15);
  EXPECT_NEAR(r.per_term[kEnergy], -0.02, 1e-15);
  EXPECT_NEAR(r.per_term[kMemory], -0.05, 1e-15);
  EXPECT_NEAR(r.per_term[kCarbon], -0.02, 1e-15);
}

TEST(Reward, TermsSumToTotalAndRespectBound) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const RewardWeights w;
  const double bound = reward_bound(w, 1.0);
  for (int i = 0; i < 1000; ++i) {
    RewardComponents c;
    c.detection_rate = u(rng);
    c.error_rate = u(rng);
    c.latency_s = 10 * u(rng);
    c.energy_j = 10 * u(rng);
    c.memory_util = u(rng);
    c.carbon_g = u(rng);
    const auto r = compute_reward(w, c);
    double s = 0.0;
    for (double t : r.per_term) s += t;
    EXPECT_NEAR(s, r.total, 1e-12);
    EXPECT_LE(std::abs(r.total), bound + 1e-12);
  }
}

TEST(Reward, OutOfRangeComponentsRejected) {
  RewardComponents c;
  c.detection_rate = 1.5;
  EXPECT_THROW(compute_reward(RewardWeights{}, c), RangeError);
  c.detection_rate = 0.5;
  c.energy_j = -1.0;
  EXPECT_THROW(compute_reward(RewardWeights{}, c), RangeError);
}

TEST(Reward, ReturnBoundNeedsDiscount) {
  EXPECT_NEAR(return_bound(2.0, 0.9), 20.0, 1e-12);
  EXPECT_THROW(return_bound(2.0, 1.0), RangeError);
}

TEST(Energy, ProductDefinition) {
  EXPECT_DOUBLE_EQ(energy_overhead(0.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(energy_overhead(2.0, 0.5), 1.0);
  // piecewise-constant power: sum of sub-interval energies equals the integral
  const double p[4] = {1.0, 3.0, 0.5, 2.0};
  double sum = 0.0;
  for (double pw : p) sum += energy_overhead(pw, 0.25);
  EXPECT_NEAR(sum, (1.0 + 3.0 + 0.5 + 2.0) * 0.25, 1e-15);
}

TEST(Memory, Utilization) {
  EXPECT_DOUBLE_EQ(memory_util(0.0, 1024.0), 0.0);
  EXPECT_DOUBLE_EQ(memory_util(1024.0, 1024.0), 1.0);
  EXPECT_DOUBLE_EQ(memory_util(512.0 * 1048576.0, 1024.0 * 1048576.0), 0.5);
}

TEST(Carbon, UnitConversion) {
  EXPECT_DOUBLE_EQ(carbon_emission(10.0, 0.0), 0.0);
  EXPECT_NEAR(carbon_emission(3.6e6, per_joule_from_per_kwh(400.0)), 400.0, 1e-9);
  // time-varying intensity: sub-emissions add up
  const double kappa[3] = {1e-4, 3e-4, 2e-4};
  const double e[3] = {2.0, 1.0, 4.0};
  double total = 0.0, oracle = 0.0;
  for (int i = 0; i < 3; ++i) {
    total += carbon_emission(e[i], kappa[i]);
    oracle += e[i] * kappa[i];
  }
  EXPECT_NEAR(total, oracle, 1e-18);
}

TEST(Ledger, BoundaryPowerIsNotAViolation) {
  LedgerLimits lim;
  SustainabilityLedger l(lim);
  for (std::size_t t = 0; t < 10; ++t) l.record(t, lim.p_max_w, 1.0, per_joule_from_per_kwh(400), 1.0, 10.0);
  EXPECT_TRUE(check_bounds(l).empty());
}

TEST(Ledger, InjectedOverPowerIsExactlyOneViolation) {
  LedgerLimits lim;
  SustainabilityLedger l(lim);
  for (std::size_t t = 0; t < 10; ++t) {
    const double p = t == 4 ? lim.p_max_w * 1.5 : 1.0;
    l.record(t, p, 1.0, per_joule_from_per_kwh(400), 1.0, 10.0);
  }
  const auto v = check_bounds(l);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].step, 4u);
  EXPECT_EQ(v[0].kind, ViolationKind::step_energy);
}

TEST(Ledger, RandomValidTraceHasNoViolations) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  LedgerLimits lim;
  SustainabilityLedger l(lim);
  std::vector<std::tuple<double, double, double>> steps;
  for (std::size_t t = 0; t < 500; ++t) {
    const double p = lim.p_max_w * u(rng), k = per_joule_from_per_kwh(1000.0) * u(rng);
    const auto& r = l.record(t, p, 1.0, k, 0.5 * u(rng), 1.0);
    // per-step scan oracle
    EXPECT_LE(r.energy_j, lim.p_max_w * r.dt_s);
    EXPECT_LE(r.carbon_g, lim.kappa_max_g_per_j * r.energy_j + 1e-18);
    EXPECT_LE(r.memory_ratio, lim.m_max_ratio);
  }
  EXPECT_LE(l.cumulative_energy(), lim.e_max_j);
  EXPECT_LE(l.cumulative_carbon(), lim.c_max_g);
  EXPECT_TRUE(check_bounds(l).empty());
}

TEST(Ledger, CumulativeCarbonBudget) {
  LedgerLimits lim;
  lim.c_max_g = 1e-3;
  SustainabilityLedger l(lim);
  for (std::size_t t = 0; t < 100; ++t) l.record(t, 4.0, 1.0, per_joule_from_per_kwh(400), 1.0, 10.0);
  bool found = false;
  for (const auto& v : check_bounds(l)) found = found || v.kind == ViolationKind::cumulative_carbon;
  EXPECT_TRUE(found);
}

TEST(Kappa, ScheduleFromCsv) {
  const std::string path = testing::TempDir() + "/kappa.csv";
  {
    std::ofstream f(path);
    f << "step,kappa_g_per_joule\n0,0.0001\n10,0.0002\n";
  }
  const auto k = KappaSchedule::from_csv(path);
  EXPECT_DOUBLE_EQ(k.at(0), 1e-4);
  EXPECT_DOUBLE_EQ(k.at(9), 1e-4);
  EXPECT_DOUBLE_EQ(k.at(10), 2e-4);
  EXPECT_DOUBLE_EQ(k.at(1000), 2e-4);
  EXPECT_DOUBLE_EQ(k.max_value(), 2e-4);
  EXPECT_THROW(KappaSchedule(-1.0), RangeError);
}

TEST(Equilibrium, Residuals) {
  RewardWeights w;
  w.delta = 0.02;
  w.zeta = 0.05;
  EXPECT_NEAR(equilibrium_check(w, 0.4), 0.0, 1e-15);
  w.delta = 0.03;
  EXPECT_NEAR(std::abs(equilibrium_check(w, 0.4)), 0.01, 1e-15);
}

TEST(Pareto, SmallCases) {
  EXPECT_EQ(pareto_front({{1, 1}, {2, 2}}), (std::vector<EnergyCarbonPoint>{{1, 1}}));
  auto f = pareto_front({{1, 3}, {2, 2}, {3, 1}});
  EXPECT_EQ(f.size(), 3u);
  EXPECT_THROW(pareto_front({{std::nan(""), 1}}), RangeError);
}

TEST(Pareto, MatchesBruteForceDominance) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<EnergyCarbonPoint> pts(1000);
  for (auto& p : pts) p = {u(rng), u(rng)};
  std::vector<EnergyCarbonPoint> brute;
  for (const auto& p : pts) {
    bool dom = false;
    for (const auto& q : pts)
      if (q.energy <= p.energy && q.carbon <= p.carbon && (q.energy < p.energy || q.carbon < p.carbon)) dom = true;
    if (!dom) brute.push_back(p);
  }
  auto front = pareto_front(pts);
  auto by_e = [](const auto& a, const auto& b) { return a.energy < b.energy; };
  std::sort(front.begin(), front.end(), by_e);
  std::sort(brute.begin(), brute.end(), by_e);
  EXPECT_EQ(front, brute);
}

TEST(Penalty, QuadraticForm) {
  const PenaltyMatrix id({{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}});
  EXPECT_DOUBLE_EQ(penalty_value(id, {0, 0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(penalty_value(id, {1, 2, 3}), 14.0);
  const auto h = PenaltyMatrix::from_coupling(2.0, 3.0, 4.0, 0.5, 0.2, 0.1);
  const std::array<double, 3> z{0.7, -1.1, 2.3};
  double oracle = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) oracle += z[i] * h.values()[i][j] * z[j];
  EXPECT_NEAR(penalty_value(h, z), oracle, 1e-12);
  EXPECT_THROW(PenaltyMatrix({{{1, 2, 0}, {0, 1, 0}, {0, 0, 1}}}), RangeError);
}

TEST(Lagrangian, Cases) {
  EXPECT_DOUBLE_EQ(lagrangian_value(3.0, 10.0, 0.5, 0.0, 0.0, 5.0, 0.4), 3.0);
  EXPECT_DOUBLE_EQ(lagrangian_value(3.0, 5.0, 0.4, 0.7, 0.9, 5.0, 0.4), 3.0);
  EXPECT_DOUBLE_EQ(lagrangian_value(1.0, 7.0, 0.4, 0.5, 0.0, 5.0, 0.4), 0.0);
}
