#include <ostream>
#include <stdexcept>

#include "edgeids/csv.hpp"
#include "edgeids/gateway_env.hpp"

namespace edgeids::env {

void EnvConfig::validate() const {
  scenario.validate();
  mitigation.validate();
  resources.validate();
  if (!(kappa_g_per_j >= 0.0)) throw std::invalid_argument("kappa must be >= 0");
  const double p_peak = resources.power_idle_w + resources.power_per_pct_w * 100.0;
  if (p_peak > limits.p_max_w)
    throw std::invalid_argument("resource model can exceed P_max: peak power " + std::to_string(p_peak) + " W");
}

namespace {

sustain::KappaSchedule make_kappa(const EnvConfig& cfg) {
  if (!cfg.kappa_schedule_path.empty()) return sustain::KappaSchedule::from_csv(cfg.kappa_schedule_path);
  return sustain::KappaSchedule(cfg.kappa_g_per_j);
}

void count(std::span<const FlowRecord> flows, PacketCounts& pk, std::uint64_t& bytes) {
  for (const auto& f : flows) {
    (f.label == Label::attack ? pk.attack : pk.benign) += f.pkts_total;
    bytes += f.bytes_total;
  }
}

}  // namespace

GatewayEnv::GatewayEnv(EnvConfig cfg, std::uint64_t seed)
    : cfg_((cfg.validate(), std::move(cfg))),
      kappa_(make_kappa(cfg_)),
      rng_(seed),
      traffic_(cfg_.scenario),
      history_(cfg_.mitigation.window),
      ledger_(cfg_.limits) {}

void GatewayEnv::set_flow_scorer(FlowScorer scorer, double threshold) {
  scorer_ = std::move(scorer);
  flow_threshold_ = threshold;
}

void GatewayEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  traffic_ = TrafficGenerator(cfg_.scenario);
  mitigation_ = MitigationState{};
  rate_cap_until_ = syn_cap_until_ = drop_filter_until_ = 0;
  history_ = SourceHistory(cfg_.mitigation.window);
  ledger_.clear();
  step_ = 0;
}

void GatewayEnv::apply_action(std::optional<ActionId> action) {
  const auto& mc = cfg_.mitigation;
  blacklist_expire(mitigation_, step_);
  if (action) {
    switch (*action) {
      case ActionId::rate_limit: rate_cap_until_ = step_ + mc.hold_steps; break;
      case ActionId::syn_throttle: syn_cap_until_ = step_ + mc.hold_steps; break;
      case ActionId::block: drop_filter_until_ = step_ + mc.hold_steps; break;
      case ActionId::source_filter:
        blacklist_update(mitigation_, history_.probabilities(), mc.tau_p, mc.blacklist_expiry, step_);
        break;
    }
  }
  mitigation_.rate_cap = step_ < rate_cap_until_ ? std::optional<double>(mc.rate_cap_pps) : std::nullopt;
  mitigation_.syn_cap = step_ < syn_cap_until_ ? std::optional<double>(mc.syn_cap_per_source) : std::nullopt;
  mitigation_.drop_filter_active = step_ < drop_filter_until_;
}

StepOutcome GatewayEnv::step(std::optional<ActionId> action, const AgentActivity& activity) {
  if (done()) throw EpisodeOver("step called after the episode ended");
  const double dt = cfg_.scenario.dt_s;
  StepOutcome o;
  o.step = step_;
  o.action = action;
  o.attack_active = cfg_.scenario.attack_active(step_);

  apply_action(action);
  o.offered = traffic_.generate(step_, rng_);
  if (scorer_) {
    scorer_(o.offered, o.flow_scores);
    if (o.flow_scores.size() != o.offered.size()) throw std::logic_error("flow scorer returned the wrong count");
  } else {
    o.flow_scores.assign(o.offered.size(), 0.0);
  }
  o.flow_flags.resize(o.offered.size());
  for (std::size_t i = 0; i < o.offered.size(); ++i) o.flow_flags[i] = scorer_ && o.flow_scores[i] > flow_threshold_;

  auto mit = apply_mitigation(o.offered, o.flow_flags, mitigation_, dt, rng_);
  o.passed = std::move(mit.passed);
  o.dropped = std::move(mit.dropped);
  o.mitigation = mitigation_;
  count(o.offered, o.offered_pkts, o.offered_bytes);
  count(o.passed, o.passed_pkts, o.passed_bytes);
  count(o.dropped, o.dropped_pkts, o.dropped_bytes);

  std::map<std::uint32_t, bool> seen;
  for (std::size_t i = 0; i < o.offered.size(); ++i) {
    auto& s = seen[o.offered[i].src_id];
    s = s || o.flow_flags[i];
  }
  history_.record(seen);

  o.resources = resource_model(cfg_.resources, static_cast<double>(o.passed_pkts.total()) / dt,
                               static_cast<double>(o.dropped_pkts.total()) / dt,
                               static_cast<double>(o.offered_pkts.total()) / dt, activity, action,
                               mitigation_.blacklist.size());
  o.ledger = ledger_.record(step_, o.resources.power_w, dt, kappa_.at(step_), o.resources.mem_active_bytes,
                            o.resources.mem_total_bytes);
  ++step_;
  return o;
}

void write_trace_header(std::ostream& os) {
  csv::Writer w(os);
  for (const char* h : {"step", "attack_active", "action", "offered_benign_pkts", "offered_attack_pkts",
                        "passed_benign_pkts", "passed_attack_pkts", "dropped_benign_pkts", "dropped_attack_pkts",
                        "rate_cap", "syn_cap", "drop_filter", "blacklist_size", "cpu_pct", "mem_ratio", "power_w",
                        "latency_s", "E_j", "C_g"})
    w.field(std::string_view(h));
  w.end_row();
}

void write_trace_row(std::ostream& os, const StepOutcome& o) {
  csv::Writer w(os);
  w.field(o.step).field(static_cast<std::size_t>(o.attack_active));
  w.field(o.action ? agent::to_string(*o.action) : std::string_view("none"));
  w.field(static_cast<std::size_t>(o.offered_pkts.benign)).field(static_cast<std::size_t>(o.offered_pkts.attack));
  w.field(static_cast<std::size_t>(o.passed_pkts.benign)).field(static_cast<std::size_t>(o.passed_pkts.attack));
  w.field(static_cast<std::size_t>(o.dropped_pkts.benign)).field(static_cast<std::size_t>(o.dropped_pkts.attack));
  w.field(o.mitigation.rate_cap ? *o.mitigation.rate_cap : 0.0);
  w.field(o.mitigation.syn_cap ? *o.mitigation.syn_cap : 0.0);
  w.field(static_cast<std::size_t>(o.mitigation.drop_filter_active));
  w.field(o.mitigation.blacklist.size());
  w.field(o.resources.cpu_pct).field(o.ledger.memory_ratio).field(o.resources.power_w).field(o.resources.latency_s);
  w.field(o.ledger.energy_j).field(o.ledger.carbon_g);
  w.end_row();
}

}  // namespace edgeids::env
