#include <algorithm>
#include <stdexcept>

#include "edgeids/gateway_env.hpp"

namespace edgeids::env {

void ResourceConfig::validate() const {
  if (!(cpu_base_pct >= 0.0 && cpu_per_kpps >= 0.0 && cpu_learn_pct >= 0.0))
    throw std::invalid_argument("cpu coefficients must be >= 0");
  for (double c : cpu_action_pct)
    if (!(c >= 0.0)) throw std::invalid_argument("per-action cpu costs must be >= 0");
  if (!(dropped_cost >= 0.0)) throw std::invalid_argument("dropped_cost must be >= 0");
  if (!(power_idle_w >= 0.0 && power_per_pct_w >= 0.0)) throw std::invalid_argument("power coefficients must be >= 0");
  if (!(mem_total_bytes > 0.0)) throw std::invalid_argument("mem_total_bytes must be > 0");
  if (!(mem_base_ratio >= 0.0 && mem_per_kpps_ratio >= 0.0)) throw std::invalid_argument("memory coefficients must be >= 0");
  if (!(latency_base_s > 0.0)) throw std::invalid_argument("latency_base_s must be > 0");
}

ResourceProxy resource_model(const ResourceConfig& rc, double passed_pps, double dropped_pps, double offered_pps,
                             const AgentActivity& activity, std::optional<ActionId> action,
                             std::size_t blacklist_size) {
  if (!(passed_pps >= 0.0 && dropped_pps >= 0.0 && offered_pps >= 0.0))
    throw std::invalid_argument("resource_model: load must be >= 0");
  ResourceProxy r;
  const double load_kpps = (passed_pps + rc.dropped_cost * dropped_pps) / 1000.0;
  double cpu = rc.cpu_base_pct + rc.cpu_per_kpps * load_kpps;
  if (activity.update_step) cpu += rc.cpu_learn_pct;
  if (action) cpu += rc.cpu_action_pct[agent::index_of(*action)];
  r.cpu_pct = std::clamp(cpu, 0.0, 100.0);
  r.power_w = rc.power_idle_w + rc.power_per_pct_w * r.cpu_pct;
  r.mem_total_bytes = rc.mem_total_bytes;
  const double mem = rc.mem_total_bytes * (rc.mem_base_ratio + rc.mem_per_kpps_ratio * offered_pps / 1000.0) +
                     activity.model_bytes + rc.blacklist_entry_bytes * static_cast<double>(blacklist_size);
  r.mem_active_bytes = std::clamp(mem, 0.0, rc.mem_total_bytes);
  const double u = std::min(r.cpu_pct / 100.0, 0.95);
  r.latency_s = rc.latency_base_s / (1.0 - u);
  return r;
}

}  // namespace edgeids::env
