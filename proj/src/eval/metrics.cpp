#include <cmath>
#include <stdexcept>

#include "edgeids/eval.hpp"

namespace edgeids::eval {

void ConfusionCounts::add(bool predicted_attack, bool actual_attack) {
  if (predicted_attack && actual_attack) ++tp;
  else if (predicted_attack) ++fp;
  else if (actual_attack) ++fn;
  else ++tn;
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  tn += o.tn;
  fn += o.fn;
  return *this;
}

namespace {

std::optional<double> ratio(double num, double den) {
  if (den == 0.0) return std::nullopt;
  return num / den;
}

}  // namespace

ClassificationMetrics classification_metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw std::invalid_argument("classification_metrics: no decisions");
  const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
  const double tn = static_cast<double>(c.tn), fn = static_cast<double>(c.fn);
  ClassificationMetrics m;
  m.accuracy = (tp + tn) / static_cast<double>(c.total());
  m.precision = ratio(tp, tp + fp);
  m.recall = ratio(tp, tp + fn);
  if (m.precision && m.recall) m.f1 = ratio(2.0 * *m.precision * *m.recall, *m.precision + *m.recall);
  m.fpr = ratio(fp, fp + tn);
  m.fnr = ratio(fn, fn + tp);
  return m;
}

double detection_probability(std::span<const std::uint8_t> attack_step, std::span<const std::uint8_t> alerted) {
  if (attack_step.size() != alerted.size()) throw std::invalid_argument("detection_probability: length mismatch");
  std::size_t attacks = 0, hits = 0;
  for (std::size_t i = 0; i < attack_step.size(); ++i) {
    if (!attack_step[i]) continue;
    ++attacks;
    if (alerted[i]) ++hits;
  }
  if (attacks == 0) throw std::invalid_argument("detection_probability: window has no attack steps");
  return static_cast<double>(hits) / static_cast<double>(attacks);
}

long long missed_packets_per_hour(double p, double m) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("missed_packets_per_hour: p must lie in [0, 1]");
  if (!(m > 0.0)) throw std::invalid_argument("missed_packets_per_hour: M must be > 0");
  return std::llround((1.0 - p) * m * 3600.0);
}

double false_alerts_per_100(std::uint64_t false_alerts, std::uint64_t alerts) {
  if (alerts == 0) throw std::invalid_argument("false_alerts_per_100: no alerts");
  if (false_alerts > alerts) throw std::invalid_argument("false_alerts_per_100: more false alerts than alerts");
  return 100.0 * static_cast<double>(false_alerts) / static_cast<double>(alerts);
}

}  // namespace edgeids::eval
