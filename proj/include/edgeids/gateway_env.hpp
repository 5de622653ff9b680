#pragma once

// Discrete-time IoT gateway: benign and attack traffic generation, the four
// mitigation actions, per-source blacklisting and resource proxies.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "edgeids/agent.hpp"
#include "edgeids/flow.hpp"
#include "edgeids/sustain.hpp"

namespace edgeids::env {

using Rng = std::mt19937_64;
using agent::ActionId;

// ---------------------------------------------------------------------------
// Traffic

struct BenignConfig {
  double flow_rate = 50.0;       // Poisson flow arrivals per second
  std::uint32_t sources = 64;    // benign source ids are 0..sources-1
  double pkts_log_mean = 1.9459;  // pkts = 1 + lognormal, median ~ 8
  double pkts_log_sd = 0.7;
  double bpp_log_mean = 5.7038;  // bytes per packet, median 300
  double bpp_log_sd = 0.5;
  double duration_log_mean = 0.0;  // median 1 s
  double duration_log_sd = 0.8;
  double tcp_fraction = 0.8;

  void validate() const;
};

enum class AttackKind : std::uint8_t { syn_flood, udp_flood, zero_day_mix };

std::string_view to_string(AttackKind k);
AttackKind attack_kind_from_string(std::string_view s);

struct ZeroDayKnobs {
  double size_min = 64.0;  // packet-size modulation range, bytes
  double size_max = 1400.0;
  double jitter_min = 0.0;  // relative duration jitter
  double jitter_max = 0.6;
  std::size_t protocol_period = 5;  // steps between TCP/UDP alternation
  double rotation_rate = 0.2;       // per-step probability a source slot takes a fresh id
  double app_flood_fraction = 0.3;  // share of flows that complete handshakes

  void validate() const;
};

struct AttackScenario {
  AttackKind kind = AttackKind::syn_flood;
  double intensity_pps = 5500.0;
  std::size_t start_step = 200;
  std::size_t end_step = 800;  // exclusive
  std::uint32_t sources = 25;
  ZeroDayKnobs zero_day;

  bool active(std::size_t step) const { return step >= start_step && step < end_step; }
  void validate() const;
};

struct ScenarioConfig {
  BenignConfig benign;
  std::vector<AttackScenario> attacks;
  std::size_t episode_steps = 1000;
  double dt_s = 1.0;

  void validate() const;
  bool attack_active(std::size_t step) const;
  /// First step at which any attack is active.
  std::optional<std::size_t> first_onset() const;
};

/// Named presets: benign, syn_flood, udp_flood, zero_day_mix, severe, mixed.
ScenarioConfig scenario_preset(std::string_view name);
/// The same preset with attack windows scaled from 1000 steps to `episode_steps`.
ScenarioConfig scenario_preset(std::string_view name, std::size_t episode_steps);

/// Attack source ids start here; rotated zero-day sources keep counting up.
inline constexpr std::uint32_t kAttackSourceBase = 100'000;

/// Per-episode generator state (zero-day source rotation).
class TrafficGenerator {
 public:
  explicit TrafficGenerator(ScenarioConfig cfg);
  std::vector<FlowRecord> generate(std::size_t step, Rng& rng);
  const ScenarioConfig& config() const { return cfg_; }

 private:
  ScenarioConfig cfg_;
  std::vector<std::vector<std::uint32_t>> slots_;  // per attack scenario, current source ids
  std::uint32_t next_rotated_id_;
};

/// Stateless convenience wrapper: flows for `step` with fresh generator state.
std::vector<FlowRecord> generate_step_traffic(const ScenarioConfig& cfg, std::size_t step, Rng& rng);

// ---------------------------------------------------------------------------
// Mitigation

struct MitigationConfig {
  double rate_cap_pps = 1000.0;       // a1
  double syn_cap_per_source = 20.0;   // a2, SYN packets per second per source
  std::size_t hold_steps = 1;         // a1-a3 stay active this many steps
  double tau_p = 0.5;                 // a4 blacklist threshold on P_attack
  std::size_t blacklist_expiry = 300; // steps
  std::size_t window = 10;            // T for P_attack

  void validate() const;
};

struct MitigationState {
  std::optional<double> rate_cap;  // packets per second
  std::optional<double> syn_cap;   // SYN per second per source
  bool drop_filter_active = false;
  std::map<std::uint32_t, std::size_t> blacklist;  // source -> first step it is no longer listed

  void validate() const;
  bool any_active() const { return rate_cap || syn_cap || drop_filter_active || !blacklist.empty(); }
};

struct MitigationResult {
  std::vector<FlowRecord> passed;
  std::vector<FlowRecord> dropped;
};

/// Applies blacklist, drop filter, per-source SYN cap and the global rate cap
/// in that order. `flagged` is aligned with `flows`. Flows that lose only some
/// packets are split into a passed part and a dropped part.
MitigationResult apply_mitigation(std::span<const FlowRecord> flows, std::span<const std::uint8_t> flagged,
                                  const MitigationState& m, double dt_s, Rng& rng);

/// Fraction of the window in which the source was flagged.
double source_attack_probability(std::span<const std::uint8_t> window);

/// Adds or refreshes every source with probability strictly above tau_p.
/// Returns the sources that were listed or refreshed.
std::vector<std::uint32_t> blacklist_update(MitigationState& m, const std::map<std::uint32_t, double>& probabilities,
                                            double tau_p, std::size_t expiry, std::size_t now);
/// Drops entries whose expiry step has been reached.
void blacklist_expire(MitigationState& m, std::size_t now);

/// Sliding per-source record of flagged steps.
class SourceHistory {
 public:
  explicit SourceHistory(std::size_t window = 10);
  /// Records one step: every source in `seen` gets its flag; known sources
  /// not seen get an unflagged step.
  void record(const std::map<std::uint32_t, bool>& seen);
  std::map<std::uint32_t, double> probabilities() const;
  std::vector<std::uint8_t> window_of(std::uint32_t src) const;
  std::size_t tracked() const { return hist_.size(); }
  std::size_t window() const { return window_; }

 private:
  std::size_t window_;
  std::map<std::uint32_t, std::vector<std::uint8_t>> hist_;  // newest last, at most window_ entries
};

// ---------------------------------------------------------------------------
// Resources

struct ResourceConfig {
  double cpu_base_pct = 10.15;
  double cpu_per_kpps = 4.1667;
  double cpu_learn_pct = 2.0;
  double cpu_action_pct[agent::kActionCount] = {0.5, 0.5, 1.0, 0.3};
  double dropped_cost = 0.25;  // a dropped packet costs this fraction of a passed one
  double power_idle_w = 0.5;
  double power_per_pct_w = 0.03818;
  double mem_total_bytes = 1073741824.0;
  double mem_base_ratio = 0.2135;
  double mem_per_kpps_ratio = 0.05218;
  double blacklist_entry_bytes = 64.0;
  double latency_base_s = 0.05;

  void validate() const;
};

struct ResourceProxy {
  double cpu_pct = 0.0;
  double mem_active_bytes = 0.0;
  double mem_total_bytes = 0.0;
  double power_w = 0.0;
  double latency_s = 0.0;
};

struct AgentActivity {
  bool update_step = false;      // a gradient step happens this step
  double model_bytes = 0.0;      // replay buffer + model parameters
};

/// Affine-plus-saturation map from load to CPU, power, memory and latency.
ResourceProxy resource_model(const ResourceConfig& rc, double passed_pps, double dropped_pps, double offered_pps,
                             const AgentActivity& activity, std::optional<ActionId> action,
                             std::size_t blacklist_size);

// ---------------------------------------------------------------------------
// Environment

struct PacketCounts {
  std::uint64_t benign = 0;
  std::uint64_t attack = 0;
  std::uint64_t total() const { return benign + attack; }
};

struct StepOutcome {
  std::size_t step = 0;
  bool attack_active = false;
  std::optional<ActionId> action;
  std::vector<FlowRecord> offered;
  std::vector<double> flow_scores;      // aligned with offered
  std::vector<std::uint8_t> flow_flags;  // aligned with offered
  std::vector<FlowRecord> passed;
  std::vector<FlowRecord> dropped;
  PacketCounts offered_pkts, passed_pkts, dropped_pkts;
  std::uint64_t offered_bytes = 0, passed_bytes = 0, dropped_bytes = 0;
  MitigationState mitigation;  // state in force during this step
  ResourceProxy resources;
  sustain::LedgerRecord ledger;
};

class EpisodeOver : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Per-flow anomaly score. A flow is flagged when its score exceeds the
/// threshold given alongside the scorer.
using FlowScorer = std::function<void(std::span<const FlowRecord>, std::vector<double>&)>;

struct EnvConfig {
  ScenarioConfig scenario;
  MitigationConfig mitigation;
  ResourceConfig resources;
  sustain::LedgerLimits limits;
  double kappa_g_per_j = sustain::per_joule_from_per_kwh(sustain::kDefaultKappaPerKwh);
  std::string kappa_schedule_path;  // optional CSV overriding the constant

  void validate() const;
};

class GatewayEnv {
 public:
  GatewayEnv(EnvConfig cfg, std::uint64_t seed);

  void set_flow_scorer(FlowScorer scorer, double threshold);
  /// Starts a new episode with its own traffic stream.
  void reset(std::uint64_t seed);

  StepOutcome step(std::optional<ActionId> action, const AgentActivity& activity = {});

  bool done() const { return step_ >= cfg_.scenario.episode_steps; }
  std::size_t current_step() const { return step_; }
  const EnvConfig& config() const { return cfg_; }
  const MitigationState& mitigation() const { return mitigation_; }
  const SourceHistory& history() const { return history_; }
  const sustain::SustainabilityLedger& ledger() const { return ledger_; }

 private:
  void apply_action(std::optional<ActionId> action);

  EnvConfig cfg_;
  sustain::KappaSchedule kappa_;
  Rng rng_;
  TrafficGenerator traffic_;
  MitigationState mitigation_;
  std::size_t rate_cap_until_ = 0, syn_cap_until_ = 0, drop_filter_until_ = 0;
  SourceHistory history_;
  sustain::SustainabilityLedger ledger_;
  FlowScorer scorer_;
  double flow_threshold_ = 0.0;
  std::size_t step_ = 0;
};

/// Per-step trace CSV.
void write_trace_header(std::ostream& os);
void write_trace_row(std::ostream& os, const StepOutcome& o);

}  // namespace edgeids::env
