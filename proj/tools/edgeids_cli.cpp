// edgeids: train, evaluate, compare and sweep gateway IDS agents.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "edgeids/cli.hpp"

namespace {

using namespace edgeids;

struct RunFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> agent;
  std::optional<std::size_t> episodes;
  std::vector<double> epsilon;
  std::vector<std::string> set;
};

void add_run_flags(CLI::App* sub, RunFlags& f) {
  sub->add_option("--config", f.config, "JSON config file");
  sub->add_option("--seed", f.seed, "Run seed");
  sub->add_option("--out", f.out, "Output directory");
  sub->add_option("--agent", f.agent, "deepedge, autodrl or tabular");
  sub->add_option("--episodes", f.episodes, "Episodes to run");
  sub->add_option("--epsilon", f.epsilon, "Exploration setting (repeatable for sweep)");
  sub->add_option("--set", f.set, "Override key=value with a dotted key (repeatable)");
}

// Flags win over --set, which wins over the file.
cli::ExperimentConfig resolve(const RunFlags& f, bool sweep) {
  std::vector<std::string> ov = f.set;
  if (f.seed) ov.push_back("seed=" + std::to_string(*f.seed));
  if (f.out) ov.push_back("out=" + nlohmann::json(*f.out).dump());
  if (f.agent) ov.push_back("agent=" + nlohmann::json(*f.agent).dump());
  if (f.episodes) ov.push_back("episodes=" + std::to_string(*f.episodes));
  if (!f.epsilon.empty()) {
    if (sweep)
      ov.push_back("sweep.epsilons=" + nlohmann::json(f.epsilon).dump());
    else if (f.epsilon.size() == 1)
      ov.push_back("agent_params.epsilon=" + nlohmann::json(f.epsilon.front()).dump());
    else
      throw cli::ConfigError("--epsilon takes one value outside sweep");
  }
  return cli::load_config(f.config, ov);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sustainable DRL intrusion detection for IoT edge gateways"};
  app.require_subcommand(1);

  RunFlags train_f, eval_f, sweep_f, sel_f;
  auto* train = app.add_subcommand("train", "Train an agent and write run artifacts");
  add_run_flags(train, train_f);

  auto* evaluate = app.add_subcommand("evaluate", "Frozen-policy rollout of a checkpoint");
  add_run_flags(evaluate, eval_f);
  std::string checkpoint;
  evaluate->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();

  auto* compare = app.add_subcommand("compare", "ANOVA comparison of two runs' metrics.csv");
  std::string dir_a, dir_b, cmp_out = "runs/compare";
  std::vector<std::string> metrics;
  compare->add_option("run_a", dir_a, "First run directory")->required();
  compare->add_option("run_b", dir_b, "Second run directory")->required();
  compare->add_option("--metric", metrics, "Metric column (repeatable)");
  compare->add_option("--out", cmp_out, "Output directory");

  auto* sweep = app.add_subcommand("sweep", "Exploration sweep over epsilon values and seeds");
  add_run_flags(sweep, sweep_f);

  auto* selftest = app.add_subcommand("selftest", "Run the built-in oracle checks");

  auto* reproduce = app.add_subcommand("reproduce-tables", "Recompute F statistics of the reported ANOVA tables");
  std::string rep_out;
  reproduce->add_option("--out", rep_out, "Output directory");

  auto* select = app.add_subcommand("select-features", "Feature selection over a flow CSV");
  add_run_flags(select, sel_f);
  std::string input, mapping;
  select->add_option("--input", input, "Flow CSV (default: simulated traffic)");
  select->add_option("--mapping", mapping, "JSON column mapping");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? cli::kOk : cli::kConfigError;
  }

  try {
    if (*train) return cli::cmd_train(resolve(train_f, false), std::cout);
    if (*evaluate) return cli::cmd_evaluate(resolve(eval_f, false), checkpoint, std::cout);
    if (*compare) return cli::cmd_compare(dir_a, dir_b, metrics, cmp_out, std::cout);
    if (*sweep) return cli::cmd_sweep(resolve(sweep_f, true), std::cout);
    if (*selftest) return cli::cmd_selftest(std::cout);
    if (*reproduce) return cli::cmd_reproduce_tables(rep_out, std::cout);
    if (*select) return cli::cmd_select_features(resolve(sel_f, false), input, mapping, std::cout);
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cli::kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kRuntimeError;
  }
  return cli::kRuntimeError;
}
