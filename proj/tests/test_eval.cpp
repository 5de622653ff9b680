#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "edgeids/eval.hpp"

using namespace edgeids::eval;

namespace {

double f_pdf(double x, double d1, double d2) {
  return std::exp(0.5 * d1 * std::log(d1 * x) + 0.5 * d2 * std::log(d2) - 0.5 * (d1 + d2) * std::log(d1 * x + d2) -
                  std::log(x) - (std::lgamma(0.5 * d1) + std::lgamma(0.5 * d2) - std::lgamma(0.5 * (d1 + d2))));
}

// P(F > f) by Simpson's rule on t = f + u / (1 - u), u in [0, 1)
double f_sf_simpson(double f, double d1, double d2) {
  const int n = 200000;
  const double h = 1.0 / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double u = i * h;
    double g = 0.0;
    if (i < n) {
      const double t = f + u / (1.0 - u);
      g = f_pdf(t, d1, d2) / ((1.0 - u) * (1.0 - u));
    }
    s += g * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  return s * h / 3.0;
}

double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] == 1 && y[j] == 0) {
        den += 1.0;
        num += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
  return num / den;
}

}  // namespace

TEST(Stats, FSurvivalAgainstQuadrature) {
  for (auto [f, d1, d2] : {std::tuple{1.5, 1.0, 4.0}, std::tuple{4.0, 1.0, 38.0}, std::tuple{0.7, 3.0, 20.0},
                           std::tuple{9.78, 1.0, 38.0}}) {
    EXPECT_NEAR(f_sf(f, d1, d2), f_sf_simpson(f, d1, d2), 1e-6) << f;
    EXPECT_NEAR(f_sf(f, d1, d2) + f_cdf(f, d1, d2), 1.0, 1e-14);
  }
}

TEST(Stats, FCriticalValues) {
  EXPECT_NEAR(f_sf(4.964602743730711, 1, 10), 0.05, 1e-9);
  EXPECT_NEAR(f_sf(5.848932247, 2, 20), 0.01, 1e-8);
}

TEST(Stats, RocAucMatchesPairwiseCount) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> u(0, 9);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> s(60);
    std::vector<int> y(60);
    for (std::size_t i = 0; i < s.size(); ++i) {
      y[i] = static_cast<int>(rng() % 2);
      s[i] = u(rng) + 2 * y[i];  // coarse scores force ties
    }
    y[0] = 0;
    y[1] = 1;
    EXPECT_NEAR(roc_auc(s, y), pairwise_auc(s, y), 1e-12);
  }
  EXPECT_THROW(roc_auc(std::vector<double>{1, 2}, std::vector<int>{1, 1}), std::invalid_argument);
}

TEST(Stats, MannKendallDirections) {
  std::vector<double> down(40), up(40);
  for (int i = 0; i < 40; ++i) {
    down[i] = 100.0 - i;
    up[i] = i;
  }
  EXPECT_LT(mann_kendall(down).p_decreasing, 1e-6);
  EXPECT_GT(mann_kendall(up).p_decreasing, 0.99);
  const auto flat = mann_kendall(std::vector<double>(20, 3.0));
  EXPECT_DOUBLE_EQ(flat.s, 0.0);
}

TEST(Stats, MannKendallStatisticByPairs) {
  const std::vector<double> x{3, 1, 4, 1, 5, 9, 2, 6};
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) s += (x[j] > x[i]) - (x[j] < x[i]);
  EXPECT_DOUBLE_EQ(mann_kendall(x).s, s);
}

TEST(Metrics, BalancedConfusion) {
  ConfusionCounts c{25, 25, 25, 25};
  const auto m = classification_metrics(c);
  EXPECT_DOUBLE_EQ(*m.accuracy, 0.5);
  EXPECT_DOUBLE_EQ(*m.precision, 0.5);
  EXPECT_DOUBLE_EQ(*m.recall, 0.5);
  EXPECT_DOUBLE_EQ(*m.f1, 0.5);
  EXPECT_DOUBLE_EQ(*m.fpr, 0.5);
  EXPECT_DOUBLE_EQ(*m.fnr, 0.5);
}

TEST(Metrics, TruePositivesOnly) {
  ConfusionCounts c;
  c.tp = 10;
  const auto m = classification_metrics(c);
  EXPECT_DOUBLE_EQ(*m.precision, 1.0);
  EXPECT_DOUBLE_EQ(*m.recall, 1.0);
  EXPECT_FALSE(m.fpr.has_value());
}

TEST(Metrics, NoDecisionsIsAnError) {
  EXPECT_THROW(classification_metrics(ConfusionCounts{}), std::invalid_argument);
}

TEST(Operational, MissedPackets) {
  EXPECT_EQ(missed_packets_per_hour(0.98, 200.0), 14400);
  EXPECT_EQ(missed_packets_per_hour(0.994, 200.0), 4320);
  EXPECT_EQ(missed_packets_per_hour(1.0, 200.0), 0);
  EXPECT_THROW(missed_packets_per_hour(1.2, 200.0), std::invalid_argument);
}

TEST(Operational, FalseAlerts) {
  EXPECT_DOUBLE_EQ(false_alerts_per_100(38, 500), 7.6);
  EXPECT_THROW(false_alerts_per_100(0, 0), std::invalid_argument);
}

TEST(Operational, DetectionProbability) {
  std::vector<std::uint8_t> attack(60, 0), alert(60, 0);
  for (int i = 0; i < 50; ++i) attack[i] = 1;
  for (int i = 1; i < 55; ++i) alert[i] = 1;
  EXPECT_DOUBLE_EQ(detection_probability(attack, alert), 0.98);
}

TEST(Anova, SmallGroups) {
  const auto r = one_way_anova(std::vector<double>{1, 2, 3}, std::vector<double>{2, 3, 4});
  EXPECT_NEAR(r.ss_between, 1.5, 1e-12);
  EXPECT_NEAR(r.ss_within, 4.0, 1e-12);
  EXPECT_NEAR(*r.f, 1.5, 1e-12);
  EXPECT_DOUBLE_EQ(r.df_between, 1.0);
  EXPECT_DOUBLE_EQ(r.df_within, 4.0);
}

TEST(Anova, IdenticalGroupsGiveZero) {
  const std::vector<double> a{1, 4, 2, 8};
  const auto r = one_way_anova(a, a);
  EXPECT_NEAR(*r.f, 0.0, 1e-12);
  EXPECT_NEAR(*r.p, 1.0, 1e-12);
}

TEST(Anova, ConstantGroupsHaveNoStatistic) {
  const auto r = one_way_anova(std::vector<double>{2, 2}, std::vector<double>{2, 2});
  EXPECT_FALSE(r.f.has_value());
  EXPECT_THROW(one_way_anova(std::vector<double>{1}, std::vector<double>{1, 2}), std::invalid_argument);
}

TEST(Anova, PartitionMatchesDirectSums) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> a(20), b(20);
  for (double& v : a) v = d(rng);
  for (double& v : b) v = d(rng) + 0.7;
  const auto r = one_way_anova(a, b);
  double grand = 0.0;
  for (double v : a) grand += v / 40.0;
  for (double v : b) grand += v / 40.0;
  double sst = 0.0;
  for (double v : a) sst += (v - grand) * (v - grand);
  for (double v : b) sst += (v - grand) * (v - grand);
  EXPECT_NEAR(r.ss_between + r.ss_within, sst, 1e-10);
  EXPECT_NEAR(r.ss_total, sst, 1e-10);
}

TEST(Anova, ReportedTablesFromSums) {
  EXPECT_NEAR(*anova_from_sums(20.1427, 78.2034, 1, 38).f, 9.78, 0.02);
  EXPECT_NEAR(*anova_from_sums(8.5923, 8.9506, 1, 38).f, 36.47, 0.02);
  EXPECT_NEAR(*anova_from_sums(0.0124, 0.2163, 1, 38).f, 2.18, 0.01);
  EXPECT_NEAR(anova_from_sums(312.4, 228.5, 1, 58).partial_eta_sq, 0.577, 0.001);
}

TEST(Anova, ReportedDiscrepanciesAreFlagged) {
  std::map<std::string, bool> ok;
  for (const auto& r : reproduce_reported_tables()) ok[r.table.metric] = r.consistent;
  EXPECT_FALSE(ok.at("detection_probability"));
  EXPECT_FALSE(ok.at("response_time"));
  EXPECT_TRUE(ok.at("carbon"));
  EXPECT_TRUE(ok.at("cpu"));
  EXPECT_TRUE(ok.at("memory"));
  EXPECT_TRUE(ok.at("energy"));
}

TEST(Compare, SelfComparisonIsNull) {
  const std::map<std::string, std::vector<double>> a{{"energy_j", {1, 2, 3, 4}}};
  const std::vector<std::string> m{"energy_j"};
  const auto r = compare_models("a", a, "b", a, m);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_NEAR(*r.rows[0].anova.f, 0.0, 1e-12);
  EXPECT_NE(r.to_text().find("F Statistic"), std::string::npos);
}

TEST(Compare, SeparatedGroupsAreSignificant) {
  const std::map<std::string, std::vector<double>> a{{"x", {1.0, 1.1, 0.9, 1.05, 0.95}}};
  const std::map<std::string, std::vector<double>> b{{"x", {3.0, 3.1, 2.9, 3.05, 2.95}}};
  const std::vector<std::string> m{"x"};
  EXPECT_LT(*compare_models("a", a, "b", b, m).rows[0].anova.p, 0.05);
  const std::map<std::string, std::vector<double>> c{{"x", {1.0, 2.0}}};
  EXPECT_THROW(compare_models("a", a, "c", c, m), std::invalid_argument);
}

TEST(Sweep, GreedyVersusRandomOrdering) {
  // toy runner: reward approaches 1 faster when exploration is low
  const SweepRunner run = [](double eps, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> noise(-0.05, 0.05);
    std::vector<double> r(30);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = (1.0 - eps) * (1.0 - std::exp(-0.2 * k)) + noise(rng);
    return r;
  };
  const std::vector<double> eps{1.0, 0.0};
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  const auto a = epsilon_sweep(eps, seeds, run);
  EXPECT_EQ(a.auc_rank, (std::vector<std::size_t>{1, 0}));
  const auto b = epsilon_sweep(eps, seeds, run);
  std::ostringstream sa, sb;
  a.write_csv(sa);
  b.write_csv(sb);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(Sweep, AucOfFlatCurves) {
  const std::vector<double> top(10, 2.0), bottom(10, 0.0);
  EXPECT_DOUBLE_EQ(convergence_auc(top, 0.0, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(convergence_auc(bottom, 0.0, 2.0), 0.0);
}
