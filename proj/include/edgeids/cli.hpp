#pragma once

// Experiment configuration, checkpoints and the subcommands behind the
// edgeids command-line tool.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgeids/agent.hpp"
#include "edgeids/gateway_env.hpp"
#include "edgeids/pipeline.hpp"

namespace edgeids::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kRuntimeError = 2, kSelftestFailure = 3 };

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SweepSettings {
  std::vector<double> epsilons{0.5, 1.0, 2.0};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::size_t episodes = 60;  // per (epsilon, seed) run
  std::size_t horizon = 50;   // tabular steps per episode
  double eta = 0.2;           // tabular step size
};

struct ExperimentConfig {
  pipeline::AgentKind agent = pipeline::AgentKind::deepedge;
  std::uint64_t seed = 1;
  std::size_t episodes = 5;
  std::size_t eval_episodes = 5;
  std::string scenario = "syn_flood";
  std::vector<std::string> eval_scenarios;  // empty: the training scenario
  std::string out = "runs/default";
  double impact_packets_per_s = 50.0;  // M in missed packets per hour
  double attack_intensity_scale = 1.0;
  double kappa_g_per_kwh = sustain::kDefaultKappaPerKwh;
  double kappa_max_g_per_kwh = 1000.0;
  env::EnvConfig env;  // scenario attacks are filled from `scenario`
  pipeline::IdsConfig ids;
  std::uint64_t tabular_mdp_seed = 7;
  agent::TabularRunConfig tabular;
  SweepSettings sweep;

  /// Every module's preconditions; throws ConfigError.
  void validate() const;
  /// The environment for a named scenario with this config's overrides applied.
  env::EnvConfig env_for(const std::string& scenario_name) const;
};

nlohmann::ordered_json to_json(const ExperimentConfig& cfg);
/// Unknown keys and ill-typed values are config errors.
ExperimentConfig from_json(const nlohmann::ordered_json& j);

/// Loads `path` (empty: defaults), applies `key=value` overrides with dotted
/// keys, then validates. The value is parsed as JSON when possible and taken
/// as a string otherwise.
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides);
void apply_override(nlohmann::ordered_json& j, const std::string& assignment);

/// Byte-exact snapshot text of the effective configuration.
std::string config_snapshot(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Checkpoints

inline constexpr int kCheckpointVersion = 1;

struct ModelSet {
  pipeline::AgentKind kind = pipeline::AgentKind::deepedge;
  std::optional<pipeline::FlowDetector> flow;
  std::optional<pipeline::SequenceDetector> sequence;
  std::optional<agent::QNetwork> q;
  double epsilon = 0.0;
  std::size_t updates = 0;
  std::optional<agent::QTable> table;
};

void save_checkpoint(const ModelSet& m, const std::string& path);
void write_checkpoint(std::ostream& os, const ModelSet& m);
/// Throws neural::CorruptCheckpoint on malformed or truncated input and on a
/// version mismatch.
ModelSet load_checkpoint(const std::string& path);
ModelSet read_checkpoint(std::istream& is);
/// Throws neural::DimensionError naming the first layer whose shape differs
/// from what `cfg` would build.
void check_architecture(const ModelSet& m, const ExperimentConfig& cfg);

ModelSet capture(const pipeline::IdsSystem& ids);
pipeline::IdsSystem restore(const ModelSet& m, const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Commands. Each returns an ExitCode and writes artifacts under cfg.out.

int cmd_train(const ExperimentConfig& cfg, std::ostream& console);
int cmd_evaluate(const ExperimentConfig& cfg, const std::string& checkpoint_path, std::ostream& console);
int cmd_compare(const std::string& dir_a, const std::string& dir_b, const std::vector<std::string>& metrics,
                const std::string& out_dir, std::ostream& console);
int cmd_sweep(const ExperimentConfig& cfg, std::ostream& console);
int cmd_reproduce_tables(const std::string& out_dir, std::ostream& console);
int cmd_select_features(const ExperimentConfig& cfg, const std::string& input_csv, const std::string& mapping_json,
                        std::ostream& console);

/// Default metric columns compared between two runs.
const std::vector<std::string>& default_compare_metrics();

// ---------------------------------------------------------------------------
// Selftest

struct SelftestResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<SelftestResult> run_selftest();
int cmd_selftest(std::ostream& console);

/// Deterministic stream seed for (run seed, purpose, index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index);

}  // namespace edgeids::cli
