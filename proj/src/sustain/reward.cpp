#include <algorithm>
#include <cmath>
#include <string>

#include "edgeids/sustain.hpp"

namespace edgeids::sustain {

namespace {

void require_nonneg_finite(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) throw RangeError(std::string(name) + " must be finite and >= 0");
}

void require_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw RangeError(std::string(name) + " must lie in [0, 1]");
}

}  // namespace

std::string_view to_string(RewardVariant v) { return v == RewardVariant::autodrl ? "autodrl" : "deepedge"; }

RewardVariant reward_variant_from_string(std::string_view s) {
  if (s == "deepedge") return RewardVariant::deepedge;
  if (s == "autodrl") return RewardVariant::autodrl;
  throw std::invalid_argument("unknown reward variant '" + std::string(s) + "'");
}

void RewardWeights::validate() const {
  const double ws[] = {alpha, beta, lambda_l, delta, epsilon_w, zeta};
  const char* names[] = {"alpha", "beta", "lambda_l", "delta", "epsilon_w", "zeta"};
  bool any_positive = false;
  for (std::size_t i = 0; i < 6; ++i) {
    require_nonneg_finite(ws[i], names[i]);
    any_positive = any_positive || ws[i] > 0.0;
  }
  if (!any_positive) throw RangeError("reward weights: at least one weight must be positive");
  if (!(latency_cap_s > 0.0) || !(energy_cap_j > 0.0)) throw RangeError("reward caps must be positive");
}

void RewardComponents::validate() const {
  require_unit(detection_rate, "detection_rate");
  require_unit(error_rate, "error_rate");
  require_nonneg_finite(latency_s, "latency_s");
  require_nonneg_finite(energy_j, "energy_j");
  require_unit(memory_util, "memory_util");
  require_nonneg_finite(carbon_g, "carbon_g");
}

RewardBreakdown compute_reward(const RewardWeights& w, const RewardComponents& c) {
  c.validate();
  RewardBreakdown b;
  b.per_term[kDetection] = w.alpha * c.detection_rate;
  b.per_term[kErrorRate] = -w.beta * c.error_rate;
  b.per_term[kLatency] = -w.lambda_l * std::min(c.latency_s, w.latency_cap_s);
  b.per_term[kEnergy] = -w.delta * std::min(c.energy_j, w.energy_cap_j);
  b.per_term[kMemory] = -w.epsilon_w * c.memory_util;
  b.per_term[kCarbon] = -w.zeta * c.carbon_g;
  b.total = 0.0;
  for (double t : b.per_term) b.total += t;
  return b;
}

double reward_bound(const RewardWeights& w, double carbon_cap_g) {
  return w.alpha + w.beta + w.lambda_l * w.latency_cap_s + w.delta * w.energy_cap_j + w.epsilon_w +
         w.zeta * carbon_cap_g;
}

double return_bound(double r_max, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw RangeError("gamma must lie in (0, 1)");
  return r_max / (1.0 - gamma);
}

double energy_overhead(double power_w, double dt_s) {
  if (!(power_w >= 0.0)) throw RangeError("power must be >= 0");
  if (!(dt_s > 0.0)) throw RangeError("dt must be > 0");
  return power_w * dt_s;
}

double memory_util(double active_bytes, double total_bytes) {
  if (!(total_bytes > 0.0)) throw RangeError("total memory must be > 0");
  if (!(active_bytes >= 0.0)) throw RangeError("active memory must be >= 0");
  if (active_bytes > total_bytes) throw RangeError("active memory exceeds total");
  return active_bytes / total_bytes;
}

double carbon_emission(double energy_j, double kappa_g_per_j) {
  require_nonneg_finite(energy_j, "energy");
  require_nonneg_finite(kappa_g_per_j, "kappa");
  return energy_j * kappa_g_per_j;
}

double equilibrium_check(const RewardWeights& w, double kappa_g_per_j) {
  w.validate();
  const double dr_de = -w.delta;
  return dr_de + w.zeta * kappa_g_per_j;
}

double lagrangian_value(double objective, double energy_j, double memory_ratio, double lambda_e, double lambda_m,
                        double energy_max, double memory_max) {
  if (!(lambda_e >= 0.0) || !(lambda_m >= 0.0)) throw RangeError("Lagrange multipliers must be >= 0");
  return objective - lambda_e * (energy_j - energy_max) - lambda_m * (memory_ratio - memory_max);
}

}  // namespace edgeids::sustain
