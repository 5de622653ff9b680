#pragma once

// Metrics, operational impact, two-group one-way ANOVA, trend tests,
// exploration sweeps and model-comparison reports.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace edgeids::eval {

// ---------------------------------------------------------------------------
// Special functions and basic statistics

double log_beta(double a, double b);
/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double regularized_incomplete_beta(double a, double b, double x);
/// Upper tail P(F > f) of the F(d1, d2) distribution.
double f_sf(double f, double d1, double d2);
double f_cdf(double f, double d1, double d2);

double mean(std::span<const double> x);
/// Sample standard deviation (n - 1); 0 for fewer than two values.
double stddev(std::span<const double> x);
/// Linear-interpolated quantile, q in [0, 1].
double quantile(std::vector<double> x, double q);
double normal_sf(double z);

/// Rank-based ROC-AUC (ties count one half). Needs both classes.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct MannKendall {
  double s = 0.0;
  double variance = 0.0;
  double z = 0.0;
  double p_decreasing = 1.0;  // one-sided p for a downward trend
  double p_two_sided = 1.0;
};

/// Mann-Kendall trend test with the tie-corrected variance.
MannKendall mann_kendall(std::span<const double> series);

// ---------------------------------------------------------------------------
// Classification and operational metrics

struct ConfusionCounts {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::uint64_t total() const { return tp + fp + tn + fn; }
  void add(bool predicted_attack, bool actual_attack);
  ConfusionCounts& operator+=(const ConfusionCounts& o);
};

/// Ratios with a zero denominator are absent, never NaN or 0.
struct ClassificationMetrics {
  std::optional<double> accuracy, precision, recall, f1, fpr, fnr;
};

ClassificationMetrics classification_metrics(const ConfusionCounts& c);

/// Fraction of ground-truth attack steps on which an alert or a mitigation was active.
double detection_probability(std::span<const std::uint8_t> attack_step, std::span<const std::uint8_t> alerted);
/// (1 - p) * M * 3600 rounded to the nearest integer.
long long missed_packets_per_hour(double detection_prob, double packets_per_s);
double false_alerts_per_100(std::uint64_t false_alerts, std::uint64_t alerts);

struct OperationalImpact {
  double detection_prob = 0.0;
  long long missed_packets_per_hour = 0;
  double false_alerts_per_100 = 0.0;
};

// ---------------------------------------------------------------------------
// ANOVA

struct AnovaResult {
  double df_between = 0.0, df_within = 0.0;
  double ss_between = 0.0, ss_within = 0.0, ss_total = 0.0;
  double ms_between = 0.0, ms_within = 0.0;
  std::optional<double> f;  // absent when both mean squares vanish
  std::optional<double> p;
  double partial_eta_sq = 0.0;
};

/// Two-group one-way ANOVA; each group needs at least two samples.
AnovaResult one_way_anova(std::span<const double> a, std::span<const double> b);
/// Derived columns from published sums of squares and degrees of freedom.
AnovaResult anova_from_sums(double ss_between, double ss_within, double df_between, double df_within);

/// A summary table as printed in a report we compare against.
struct ReportedAnova {
  std::string metric;
  double ss_between, ss_within, df_between, df_within;
  double reported_f;
};

/// The published comparison tables (detection probability, response time,
/// latency, energy, carbon, CPU, memory).
const std::vector<ReportedAnova>& reported_anova_tables();

struct ReproducedAnova {
  ReportedAnova table;
  AnovaResult computed;
  bool consistent = false;  // |F_computed - F_reported| <= max(0.02, 0.005 * F_reported)
};

std::vector<ReproducedAnova> reproduce_reported_tables();

// ---------------------------------------------------------------------------
// Reports

struct MetricComparison {
  std::string metric;
  AnovaResult anova;
  double mean_a = 0.0, mean_b = 0.0;
};

struct ComparisonReport {
  std::string name_a, name_b;
  std::vector<MetricComparison> rows;

  std::string to_json() const;
  /// Aligned plain-text tables, one per metric, with columns Source, Degrees
  /// of Freedom, Sum of Squares, Mean Square, F Statistic, P-value.
  std::string to_text() const;
};

/// One ANOVA per metric. Both maps need the same per-seed sample count for
/// every requested metric.
ComparisonReport compare_models(const std::string& name_a, const std::map<std::string, std::vector<double>>& a,
                                const std::string& name_b, const std::map<std::string, std::vector<double>>& b,
                                std::span<const std::string> metrics);

std::string format_anova_text(const std::string& title, const AnovaResult& r);
std::string reproduction_text(std::span<const ReproducedAnova> rows);

// ---------------------------------------------------------------------------
// Exploration sweep

struct SweepCurve {
  double epsilon = 0.0;
  std::vector<std::vector<double>> per_seed;  // [seed][episode]
  std::vector<double> mean;
  std::vector<double> std;
  std::vector<double> auc_per_seed;  // normalized area, see convergence_auc
  double auc_mean = 0.0;
};

struct SweepResult {
  std::vector<SweepCurve> curves;     // in the order the epsilons were given
  std::vector<std::size_t> auc_rank;  // indices into curves, best (largest AUC) first

  void write_csv(std::ostream& os) const;        // epsilon,episode,mean,std
  void write_summary_csv(std::ostream& os) const;  // epsilon,auc_mean,rank
};

/// Mean of a reward curve rescaled by a common (lo, hi) range; larger means
/// the curve reached high reward sooner.
double convergence_auc(std::span<const double> curve, double lo, double hi);

/// Runs `run(epsilon, seed)` for every pair; each call returns one reward per episode.
using SweepRunner = std::function<std::vector<double>(double epsilon, std::uint64_t seed)>;
SweepResult epsilon_sweep(std::span<const double> epsilons, std::span<const std::uint64_t> seeds,
                          const SweepRunner& run);

}  // namespace edgeids::eval
