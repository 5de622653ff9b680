#pragma once

// Detection front ends (autoencoder per flow, LSTM per step) and the closed
// monitor -> decide -> mitigate loop around the gateway simulator.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edgeids/agent.hpp"
#include "edgeids/eval.hpp"
#include "edgeids/features.hpp"
#include "edgeids/gateway_env.hpp"
#include "edgeids/log.hpp"
#include "edgeids/neural.hpp"
#include "edgeids/sustain.hpp"

namespace edgeids::pipeline {

using Rng = std::mt19937_64;

enum class AgentKind : std::uint8_t { deepedge, autodrl, tabular };

std::string_view to_string(AgentKind k);
AgentKind agent_kind_from_string(std::string_view s);

// ---------------------------------------------------------------------------
// Autoencoder front end

struct DetectorConfig {
  std::size_t warmup_steps = 300;  // benign steps; the first 2/3 train, the rest set thresholds
  std::size_t ae_hidden = 16;
  std::size_t ae_latent = 8;
  std::size_t ae_epochs = 6;
  double ae_lr = 0.01;
  std::size_t max_training_flows = 12000;
  double flow_quantile = 0.99;
  double step_quantile = 0.99;
  features::NormKind norm = features::NormKind::zscore;

  void validate() const;
};

/// Offered flows of `steps` benign steps drawn from the scenario's benign model.
std::vector<std::vector<FlowRecord>> collect_benign_steps(const env::ScenarioConfig& scenario, std::size_t steps,
                                                          std::uint64_t seed);

struct StepScore {
  double anomaly = 0.0;         // mean per-flow reconstruction error, 0 without flows
  std::vector<double> latent;   // mean latent code, zeros without flows
};

class FlowDetector {
 public:
  FlowDetector() = default;
  FlowDetector(features::Normalizer norm, neural::AutoencoderModel ae, double tau_flow, double tau_step);

  static FlowDetector fit(std::span<const std::vector<FlowRecord>> benign_steps, const DetectorConfig& cfg, Rng& rng);

  std::vector<double> encode_input(const FlowRecord& f) const;
  double score(const FlowRecord& f) const;
  void score_all(std::span<const FlowRecord> flows, std::vector<double>& out) const;
  StepScore step_score(std::span<const FlowRecord> flows) const;

  double tau_flow() const { return tau_flow_; }
  double tau_step() const { return tau_step_; }
  std::size_t latent_dim() const { return ae_.latent_dim; }
  const neural::AutoencoderModel& model() const { return ae_; }
  const features::Normalizer& normalizer() const { return norm_; }

  void write(std::ostream& os) const;
  static FlowDetector read(std::istream& is);

 private:
  features::Normalizer norm_;
  neural::AutoencoderModel ae_;
  double tau_flow_ = 0.0;
  double tau_step_ = 0.0;
};

// ---------------------------------------------------------------------------
// LSTM front end

struct SequenceConfig {
  std::size_t hidden = 8;
  std::size_t window = 8;
  std::vector<std::string> scenarios{"syn_flood", "udp_flood", "mixed"};  // labelled pre-training traces
  std::size_t pretrain_epochs = 4;
  agent::TwoTimescale rates;
  double alert_threshold = 0.5;

  void validate() const;
};

struct LabeledTrace {
  std::vector<std::vector<double>> summaries;  // raw step summaries
  std::vector<int> labels;                     // attack active on that step
};

/// No-op rollouts of each named scenario; labels come from the simulator.
std::vector<LabeledTrace> collect_labeled_traces(const env::EnvConfig& base, std::span<const std::string> scenarios,
                                                 std::uint64_t seed);

class SequenceDetector {
 public:
  SequenceDetector() = default;
  SequenceDetector(features::Normalizer norm, neural::LstmClassifier model, double alert_threshold,
                   std::size_t supervised_steps);

  /// Fits the summary normalizer on `benign_steps`, then trains with BCE on
  /// every window of every trace using the supervised schedule.
  static SequenceDetector pretrain(std::span<const std::vector<FlowRecord>> benign_steps, double dt_s,
                                   std::span<const LabeledTrace> traces, const SequenceConfig& cfg, Rng& rng);

  void reset() { window_.clear(); }
  /// Appends one raw step summary and classifies the window. Short windows
  /// at the start of an episode are padded with their oldest entry.
  neural::ClassifierOutput push(std::span<const double> raw_summary);
  /// One supervised step on the current window; returns the loss before it.
  double learn(double label, double lr);

  std::size_t hidden_dim() const { return model_.cell.hidden_dim; }
  double alert_threshold() const { return alert_threshold_; }
  std::size_t supervised_steps() const { return k_; }
  const neural::LstmClassifier& model() const { return model_; }
  const features::Normalizer& normalizer() const { return norm_; }

  void write(std::ostream& os) const;
  static SequenceDetector read(std::istream& is);

 private:
  std::vector<neural::Vector> padded_window() const;

  features::Normalizer norm_;
  neural::LstmClassifier model_;
  double alert_threshold_ = 0.5;
  std::size_t k_ = 0;
  std::deque<neural::Vector> window_;
};

// ---------------------------------------------------------------------------
// IDS system

struct IdsConfig {
  AgentKind kind = AgentKind::deepedge;
  DetectorConfig detector;
  SequenceConfig sequence;
  agent::AgentHyperparams agent;
  sustain::RewardWeights reward;

  void validate() const;
};

/// Detector(s) plus the DQN agent. Tabular runs do not use this type.
class IdsSystem {
 public:
  IdsSystem(IdsConfig cfg, FlowDetector flow, std::optional<SequenceDetector> seq, agent::DqnAgent dqn);

  /// Warm-up, detector fitting and (autodrl) supervised pre-training.
  static IdsSystem build(const IdsConfig& cfg, const env::EnvConfig& env_cfg, std::uint64_t seed);

  const IdsConfig& config() const { return cfg_; }
  AgentKind kind() const { return cfg_.kind; }
  std::size_t state_dim() const;
  std::size_t latent_dim() const;

  const FlowDetector& flow_detector() const { return flow_; }
  SequenceDetector* sequence() { return seq_ ? &*seq_ : nullptr; }
  const SequenceDetector* sequence() const { return seq_ ? &*seq_ : nullptr; }
  agent::DqnAgent& agent() { return dqn_; }
  const agent::DqnAgent& agent() const { return dqn_; }

  /// Installs the per-flow scorer on `env`.
  void attach(env::GatewayEnv& env) const;

 private:
  IdsConfig cfg_;
  FlowDetector flow_;
  std::optional<SequenceDetector> seq_;
  agent::DqnAgent dqn_;
};

enum class Mode : std::uint8_t { train, evaluate, noop };

struct EpisodeHooks {
  std::function<void(const env::StepOutcome&)> on_step;
  log::Logger* logger = nullptr;
  double clock_offset_s = 0.0;  // simulated time of this episode's first step
  bool collect_flow_scores = false;
  std::size_t diagnostics_every = 100;  // agent updates between diagnostics rows
  /// Called with every diagnostics row and the network it describes.
  std::function<void(const agent::DiagnosticsRow&, const agent::QNetwork&)> on_diagnostics;
};

struct EpisodeResult {
  std::size_t steps = 0;
  std::size_t agent_decisions = 0;
  double total_reward = 0.0;
  double mean_td_loss = 0.0;
  env::PacketCounts offered, passed, dropped;
  eval::ConfusionCounts step_confusion;  // alert vs attack-active per step
  std::vector<double> step_scores;
  std::vector<int> step_labels;
  std::vector<double> flow_scores;  // only with collect_flow_scores
  std::vector<int> flow_labels;
  std::optional<double> detection_prob;
  std::optional<double> response_time_s;
  std::uint64_t alerts = 0;
  std::uint64_t false_alerts = 0;
  double energy_j = 0.0;
  double carbon_g = 0.0;
  double mean_cpu_pct = 0.0;
  double mean_mem_ratio = 0.0;
  double mean_latency_s = 0.0;
  double epsilon_end = 0.0;
  std::vector<agent::DiagnosticsRow> diagnostics;
  std::vector<sustain::LedgerRecord> ledger;
};

/// Reward components of one step from the environment's outcome.
sustain::RewardComponents reward_components(const env::StepOutcome& o, sustain::RewardVariant variant);

/// Runs the loop from the environment's current state until the episode ends.
/// The agent is consulted only on steps that follow an alert; otherwise the
/// gateway keeps monitoring with no new action.
EpisodeResult run_episode(IdsSystem& ids, env::GatewayEnv& env, Mode mode, Rng& agent_rng,
                          const EpisodeHooks& hooks = {});

/// Alerts, scores and ground truth of a detector-only rollout (no mitigation).
EpisodeResult run_detection_episode(IdsSystem& ids, env::GatewayEnv& env, bool collect_flow_scores);

}  // namespace edgeids::pipeline
