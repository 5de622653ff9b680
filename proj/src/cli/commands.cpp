#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "edgeids/cli.hpp"
#include "edgeids/csv.hpp"
#include "edgeids/log.hpp"

namespace edgeids::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index) {
  // splitmix64 over a mix of the three inputs
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (purpose + 1) + 0xbf58476d1ce4e5b9ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

enum Purpose : std::uint64_t { kBuild = 1, kTrainEnv, kAgentRng, kTabular, kEvalEnv, kProbe, kSelection };

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
  return f;
}

void write_text(const fs::path& p, const std::string& text) {
  auto f = open_out(p);
  f << text;
}

fs::path prepare_dir(const std::string& out) {
  if (out.empty()) throw ConfigError("output directory must not be empty");
  fs::create_directories(out);
  return fs::path(out);
}

// Maps exceptions to exit codes so every command behaves the same way.
int guarded(std::ostream& console, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    console << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    console << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

// ---------------------------------------------------------------------------
// Shared metrics schema

const std::vector<std::string>& metric_columns() {
  static const std::vector<std::string> cols{
      "episode",   "seed",     "scenario",  "detection_prob", "response_time_s",
      "latency_s", "energy_j", "carbon_g",  "cpu_pct",        "memory_ratio",
      "accuracy",  "precision", "recall",   "f1",             "fpr",
      "fnr",       "roc_auc",  "flow_auc",  "missed_packets_per_hour", "false_alerts_per_100",
      "attack_pass_vs_noop", "benign_pass_vs_noop"};
  return cols;
}

struct MetricsRow {
  std::size_t episode = 0;
  std::uint64_t seed = 0;
  std::string scenario;
  std::map<std::string, std::optional<double>> v;
};

std::optional<double> auc_if_both(std::span<const double> s, std::span<const int> l) {
  bool pos = false, neg = false;
  for (int x : l) (x ? pos : neg) = true;
  if (!pos || !neg) return std::nullopt;
  return eval::roc_auc(s, l);
}

std::optional<double> pass_ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

MetricsRow metrics_row(std::size_t episode, std::uint64_t seed, const std::string& scenario,
                       const pipeline::EpisodeResult& r, const pipeline::EpisodeResult& noop, double impact_pps) {
  MetricsRow m{episode, seed, scenario, {}};
  m.v["detection_prob"] = r.detection_prob;
  m.v["response_time_s"] = r.response_time_s;
  m.v["latency_s"] = r.mean_latency_s;
  m.v["energy_j"] = r.energy_j;
  m.v["carbon_g"] = r.carbon_g;
  m.v["cpu_pct"] = r.mean_cpu_pct;
  m.v["memory_ratio"] = r.mean_mem_ratio;
  const auto cm = eval::classification_metrics(r.step_confusion);
  m.v["accuracy"] = cm.accuracy;
  m.v["precision"] = cm.precision;
  m.v["recall"] = cm.recall;
  m.v["f1"] = cm.f1;
  m.v["fpr"] = cm.fpr;
  m.v["fnr"] = cm.fnr;
  m.v["roc_auc"] = auc_if_both(r.step_scores, r.step_labels);
  m.v["flow_auc"] = auc_if_both(r.flow_scores, r.flow_labels);
  if (r.detection_prob)
    m.v["missed_packets_per_hour"] = static_cast<double>(eval::missed_packets_per_hour(*r.detection_prob, impact_pps));
  if (r.alerts > 0) m.v["false_alerts_per_100"] = eval::false_alerts_per_100(r.false_alerts, r.alerts);
  m.v["attack_pass_vs_noop"] = pass_ratio(r.passed.attack, noop.passed.attack);
  m.v["benign_pass_vs_noop"] = pass_ratio(r.passed.benign, noop.passed.benign);
  return m;
}

void write_metrics_header(std::ostream& os) {
  csv::Writer w(os);
  for (const auto& c : metric_columns()) w.field(c);
  w.end_row();
}

void write_metrics_row(std::ostream& os, const MetricsRow& m) {
  csv::Writer w(os);
  w.field(m.episode).field(std::to_string(m.seed)).field(m.scenario);
  for (std::size_t i = 3; i < metric_columns().size(); ++i) {
    const auto it = m.v.find(metric_columns()[i]);
    if (it != m.v.end() && it->second)
      w.field(*it->second);
    else
      w.field(std::string_view{});
  }
  w.end_row();
}

void write_ledger_header(std::ostream& os) {
  os << "episode,step,power_w,dt_s,kappa_g_per_j,mem_active_bytes,mem_total_bytes,energy_j,memory_ratio,carbon_g\n";
}

void write_ledger_rows(std::ostream& os, std::size_t episode, std::span<const sustain::LedgerRecord> recs) {
  for (const auto& r : recs) {
    csv::Writer w(os);
    w.field(episode).field(r.step).field(r.power_w).field(r.dt_s).field(r.kappa_g_per_j).field(r.mem_active_bytes);
    w.field(r.mem_total_bytes).field(r.energy_j).field(r.memory_ratio).field(r.carbon_g);
    w.end_row();
  }
}

void write_diag_header(std::ostream& os) { os << "episode,step,epsilon,eta,td_error_mean,lyapunov,contraction_ratio\n"; }

void write_diag_row(std::ostream& os, std::size_t episode, const agent::DiagnosticsRow& d) {
  csv::Writer w(os);
  w.field(episode).field(d.step).field(d.epsilon).field(d.eta).field(d.td_error_mean).field(d.lyapunov);
  if (d.contraction_ratio)
    w.field(*d.contraction_ratio);
  else
    w.field(std::string_view{});
  w.end_row();
}

// Trace and ledger CSVs carry an episode column in front of the per-step schema.
void write_prefixed_trace_header(std::ostream& os) {
  os << "episode,";
  env::write_trace_header(os);
}

void write_prefixed_trace_row(std::ostream& os, std::size_t episode, const env::StepOutcome& o) {
  os << episode << ',';
  env::write_trace_row(os, o);
}

std::vector<sustain::BoundViolation> episode_violations(const sustain::LedgerLimits& limits,
                                                        std::span<const sustain::LedgerRecord> recs) {
  sustain::SustainabilityLedger l(limits);
  for (const auto& r : recs) l.append_raw(r);
  return sustain::check_bounds(l);
}

ordered_json violations_json(const std::vector<std::pair<std::size_t, sustain::BoundViolation>>& v) {
  ordered_json arr = ordered_json::array();
  for (std::size_t i = 0; i < v.size() && i < 50; ++i) {
    const auto& [ep, b] = v[i];
    arr.push_back({{"episode", ep}, {"step", b.step}, {"kind", std::string(sustain::to_string(b.kind))},
                   {"value", b.value}, {"limit", b.limit}});
  }
  return arr;
}

ordered_json pareto_json(const std::vector<sustain::EnergyCarbonPoint>& pts) {
  ordered_json arr = ordered_json::array();
  for (const auto& p : sustain::pareto_front(pts)) arr.push_back({{"energy_j", p.energy}, {"carbon_g", p.carbon}});
  return arr;
}

// Deterministic probe states for the Lyapunov diagnostic.
std::vector<GatewayState> probe_states(std::size_t latent_dim, std::uint64_t seed) {
  agent::Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<GatewayState> out(32);
  for (auto& s : out) {
    s.p_rate = std::expm1(u(rng) * 9.0);
    s.syn_count = std::expm1(u(rng) * 9.0);
    s.ack_count = std::expm1(u(rng) * 9.0);
    s.anomaly_score = std::expm1(u(rng) * 3.0);
    s.latent.resize(latent_dim);
    for (double& h : s.latent) h = 2.0 * u(rng) - 1.0;
  }
  return out;
}

// The no-op rollout of the same traffic seed, used for pass ratios.
pipeline::EpisodeResult noop_baseline(pipeline::IdsSystem& ids, const env::EnvConfig& ecfg, std::uint64_t env_seed) {
  env::GatewayEnv env(ecfg, env_seed);
  ids.attach(env);
  agent::Rng unused(0);
  return pipeline::run_episode(ids, env, pipeline::Mode::noop, unused);
}

// ---------------------------------------------------------------------------
// train

int train_tabular(const ExperimentConfig& cfg, const fs::path& dir, log::Logger& logger, std::ostream& console) {
  const auto mdp = agent::TabularMdp::toy(cfg.tabular_mdp_seed);
  auto episodes = open_out(dir / "episodes.csv");
  auto diag = open_out(dir / "diagnostics.csv");
  auto metrics = open_out(dir / "metrics.csv");
  episodes << "episode,seed,updates,final_sup_error,converged\n";
  write_diag_header(diag);
  write_metrics_header(metrics);
  std::optional<agent::QTable> last;
  for (std::size_t ep = 0; ep < cfg.episodes; ++ep) {
    const std::uint64_t s = derive_seed(cfg.seed, kTabular, ep);
    agent::Rng rng(s);
    const auto r = agent::run_tabular_q_learning(mdp, cfg.tabular, rng);
    csv::Writer w(episodes);
    w.field(ep).field(std::to_string(s)).field(r.updates).field(r.final_sup_error);
    w.field(std::string_view(r.converged ? "1" : "0"));
    w.end_row();
    for (const auto& d : r.diagnostics) write_diag_row(diag, ep, d);
    logger.write(r.converged ? log::Level::success : log::Level::warning,
                 "Tabular run " + std::to_string(ep) + ": sup error " + csv::format_double(r.final_sup_error) +
                     " after " + std::to_string(r.updates) + " updates");
    console << "episode " << ep << ": updates " << r.updates << ", sup error " << r.final_sup_error << '\n';
    last = r.q;
  }
  if (last) {
    ModelSet m;
    m.kind = pipeline::AgentKind::tabular;
    m.table = std::move(last);
    save_checkpoint(m, (dir / "checkpoint.txt").string());
  }
  return kOk;
}

int train_dqn(const ExperimentConfig& cfg, const fs::path& dir, log::Logger& logger, std::ostream& console) {
  const auto ecfg = cfg.env_for(cfg.scenario);
  auto episodes = open_out(dir / "episodes.csv");
  auto diag = open_out(dir / "diagnostics.csv");
  auto metrics = open_out(dir / "metrics.csv");
  auto ledger = open_out(dir / "ledger.csv");
  auto trace = open_out(dir / "trace.csv");
  episodes << "episode,seed,steps,decisions,total_reward,mean_td_loss,epsilon_end,energy_j,carbon_g,"
              "offered_attack_pkts,passed_attack_pkts,offered_benign_pkts,passed_benign_pkts\n";
  write_diag_header(diag);
  write_metrics_header(metrics);
  write_ledger_header(ledger);
  write_prefixed_trace_header(trace);

  ordered_json report;
  report["agent"] = std::string(pipeline::to_string(cfg.agent));
  report["scenario"] = cfg.scenario;
  report["episodes"] = cfg.episodes;
  if (cfg.episodes == 0) {
    report["bounds_violations"] = 0;
    report["violations"] = ordered_json::array();
    report["pareto_front"] = ordered_json::array();
    write_text(dir / "report.json", report.dump(2) + "\n");
    console << "no episodes requested\n";
    return kOk;
  }

  logger.write(log::Level::info, "Warm-up: fitting detectors on benign traffic");
  auto ids = pipeline::IdsSystem::build(cfg.ids, ecfg, derive_seed(cfg.seed, kBuild, 0));
  agent::Rng agent_rng(derive_seed(cfg.seed, kAgentRng, 0));
  const auto probes = probe_states(ids.latent_dim(), derive_seed(cfg.seed, kProbe, 0));

  // (episode, row, network) snapshots; Lyapunov values are filled in against the final network.
  std::vector<std::pair<std::size_t, agent::DiagnosticsRow>> diag_rows;
  std::vector<agent::QNetwork> diag_nets;
  std::vector<std::pair<std::size_t, sustain::BoundViolation>> violations;
  std::vector<sustain::EnergyCarbonPoint> points;
  const double dt = ecfg.scenario.dt_s;

  auto dump_diagnostics = [&](const fs::path& p) {
    auto f = open_out(p);
    write_diag_header(f);
    for (const auto& [ep, d] : diag_rows) write_diag_row(f, ep, d);
  };

  for (std::size_t ep = 0; ep < cfg.episodes; ++ep) {
    const std::uint64_t env_seed = derive_seed(cfg.seed, kTrainEnv, ep);
    env::GatewayEnv env(ecfg, env_seed);
    ids.attach(env);
    pipeline::EpisodeHooks hooks;
    hooks.logger = &logger;
    hooks.clock_offset_s = static_cast<double>(ep * ecfg.scenario.episode_steps) * dt;
    hooks.on_step = [&](const env::StepOutcome& o) { write_prefixed_trace_row(trace, ep, o); };
    hooks.on_diagnostics = [&](const agent::DiagnosticsRow& row, const agent::QNetwork& q) {
      diag_rows.emplace_back(ep, row);
      diag_nets.push_back(q);
    };
    pipeline::EpisodeResult r;
    try {
      r = pipeline::run_episode(ids, env, pipeline::Mode::train, agent_rng, hooks);
    } catch (const neural::NonFiniteError&) {
      dump_diagnostics(dir / "diagnostics_dump.csv");
      logger.write(log::Level::critical, "Training aborted: non-finite loss");
      throw;
    }
    const auto noop = noop_baseline(ids, ecfg, env_seed);

    csv::Writer w(episodes);
    w.field(ep).field(std::to_string(env_seed)).field(r.steps).field(r.agent_decisions).field(r.total_reward);
    w.field(r.mean_td_loss).field(r.epsilon_end).field(r.energy_j).field(r.carbon_g);
    w.field(static_cast<std::size_t>(r.offered.attack)).field(static_cast<std::size_t>(r.passed.attack));
    w.field(static_cast<std::size_t>(r.offered.benign)).field(static_cast<std::size_t>(r.passed.benign));
    w.end_row();
    write_metrics_row(metrics, metrics_row(ep, env_seed, cfg.scenario, r, noop, cfg.impact_packets_per_s));
    write_ledger_rows(ledger, ep, r.ledger);
    for (const auto& v : episode_violations(ecfg.limits, r.ledger)) violations.emplace_back(ep, v);
    points.push_back({r.energy_j, r.carbon_g});

    console << "episode " << ep << ": reward " << csv::format_double(r.total_reward) << ", decisions "
            << r.agent_decisions << ", attack passed " << r.passed.attack << "/" << noop.passed.attack
            << " (no-op)\n";
  }

  const auto& final_q = ids.agent().q();
  for (std::size_t i = 0; i < diag_rows.size(); ++i)
    diag_rows[i].second.lyapunov = agent::lyapunov_distance(diag_nets[i], final_q, probes);
  for (const auto& [ep, d] : diag_rows) write_diag_row(diag, ep, d);

  save_checkpoint(capture(ids), (dir / "checkpoint.txt").string());
  report["bounds_violations"] = violations.size();
  report["violations"] = violations_json(violations);
  report["pareto_front"] = pareto_json(points);
  write_text(dir / "report.json", report.dump(2) + "\n");
  return kOk;
}

// ---------------------------------------------------------------------------
// sweep

std::vector<double> dqn_sweep_member(const ExperimentConfig& cfg, double epsilon, std::uint64_t seed) {
  auto ic = cfg.ids;
  ic.agent.epsilon = epsilon;
  const auto ecfg = cfg.env_for(cfg.scenario);
  auto ids = pipeline::IdsSystem::build(ic, ecfg, derive_seed(seed, kBuild, 0));
  agent::Rng rng(derive_seed(seed, kAgentRng, 0));
  std::vector<double> rewards;
  for (std::size_t ep = 0; ep < cfg.sweep.episodes; ++ep) {
    env::GatewayEnv env(ecfg, derive_seed(seed, kTrainEnv, ep));
    ids.attach(env);
    rewards.push_back(pipeline::run_episode(ids, env, pipeline::Mode::train, rng).total_reward);
  }
  return rewards;
}

std::string epsilon_tag(double e) {
  std::string s = csv::format_double(e);
  for (char& c : s)
    if (c == '.') c = 'p';
  return s;
}

std::map<std::string, std::vector<double>> read_metric_columns(const fs::path& dir, std::span<const std::string> names) {
  const auto path = dir / "metrics.csv";
  if (!fs::exists(path)) throw std::invalid_argument("no metrics.csv in '" + dir.string() + "'");
  const auto t = csv::read_file(path.string());
  std::map<std::string, std::vector<double>> out;
  for (const auto& n : names) {
    const auto col = t.column(n);
    if (!col) throw std::invalid_argument("metric '" + n + "' missing from " + path.string());
    auto& v = out[n];
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto x = *col < t.rows[r].size() ? csv::parse_double(t.rows[r][*col]) : std::nullopt;
      if (!x) throw std::invalid_argument("metric '" + n + "' has no value on row " + std::to_string(r + 1) + " of " +
                                          path.string());
      v.push_back(*x);
    }
  }
  return out;
}

}  // namespace

const std::vector<std::string>& default_compare_metrics() {
  static const std::vector<std::string> m{"latency_s", "energy_j", "carbon_g", "cpu_pct", "memory_ratio"};
  return m;
}

int cmd_train(const ExperimentConfig& cfg, std::ostream& console) {
  return guarded(console, [&] {
    cfg.validate();
    const auto dir = prepare_dir(cfg.out);
    write_text(dir / "config.json", config_snapshot(cfg));
    auto log_file = open_out(dir / "run.log");
    log::Logger logger(&log_file, log::kDefaultLogEpoch);
    logger.write(log::Level::info, "Training " + std::string(pipeline::to_string(cfg.agent)) + " on " + cfg.scenario +
                                       " for " + std::to_string(cfg.episodes) + " episodes");
    const int rc = cfg.agent == pipeline::AgentKind::tabular ? train_tabular(cfg, dir, logger, console)
                                                             : train_dqn(cfg, dir, logger, console);
    logger.write(log::Level::success, "Run complete");
    return rc;
  });
}

int cmd_evaluate(const ExperimentConfig& cfg, const std::string& checkpoint_path, std::ostream& console) {
  return guarded(console, [&] {
    cfg.validate();
    auto m = load_checkpoint(checkpoint_path);
    check_architecture(m, cfg);
    const auto dir = prepare_dir(cfg.out);
    write_text(dir / "config.json", config_snapshot(cfg));

    if (m.kind == pipeline::AgentKind::tabular) {
      const auto mdp = agent::TabularMdp::toy(cfg.tabular_mdp_seed);
      const double err = agent::sup_norm_distance(*m.table, agent::value_iteration(mdp));
      ordered_json j{{"agent", "tabular"}, {"sup_error_to_value_iteration", err}};
      write_text(dir / "report.json", j.dump(2) + "\n");
      console << "sup-norm error to value iteration: " << err << '\n';
      return kOk;
    }

    auto ids = restore(m, cfg);
    auto metrics = open_out(dir / "metrics.csv");
    auto ledger = open_out(dir / "ledger.csv");
    auto trace = open_out(dir / "trace.csv");
    auto steps = open_out(dir / "steps.csv");
    auto log_file = open_out(dir / "run.log");
    log::Logger logger(&log_file, log::kDefaultLogEpoch);
    write_metrics_header(metrics);
    write_ledger_header(ledger);
    write_prefixed_trace_header(trace);
    steps << "episode,scenario,step,action,attack_active\n";

    const auto scenarios = cfg.eval_scenarios.empty() ? std::vector<std::string>{cfg.scenario} : cfg.eval_scenarios;
    std::vector<std::pair<std::size_t, sustain::BoundViolation>> violations;
    std::vector<sustain::EnergyCarbonPoint> points;
    ordered_json per_scenario = ordered_json::object();
    std::size_t row = 0;
    double clock = 0.0;
    for (std::size_t si = 0; si < scenarios.size(); ++si) {
      const auto ecfg = cfg.env_for(scenarios[si]);
      std::vector<double> det, resp;
      for (std::size_t ep = 0; ep < cfg.eval_episodes; ++ep, ++row) {
        const std::uint64_t env_seed = derive_seed(cfg.seed, kEvalEnv + 16 * si, ep);
        env::GatewayEnv env(ecfg, env_seed);
        ids.attach(env);
        pipeline::EpisodeHooks hooks;
        hooks.logger = &logger;
        hooks.clock_offset_s = clock;
        hooks.collect_flow_scores = true;
        hooks.on_step = [&](const env::StepOutcome& o) {
          write_prefixed_trace_row(trace, row, o);
          steps << row << ',' << csv::escape(scenarios[si]) << ',' << o.step << ','
                << (o.action ? std::string(agent::to_string(*o.action)) : std::string("none")) << ','
                << (o.attack_active ? 1 : 0) << '\n';
        };
        agent::Rng unused(0);
        const auto r = pipeline::run_episode(ids, env, pipeline::Mode::evaluate, unused, hooks);
        clock += static_cast<double>(ecfg.scenario.episode_steps) * ecfg.scenario.dt_s;
        const auto noop = noop_baseline(ids, ecfg, env_seed);
        write_metrics_row(metrics, metrics_row(row, env_seed, scenarios[si], r, noop, cfg.impact_packets_per_s));
        write_ledger_rows(ledger, row, r.ledger);
        for (const auto& v : episode_violations(ecfg.limits, r.ledger)) violations.emplace_back(row, v);
        points.push_back({r.energy_j, r.carbon_g});
        if (r.detection_prob) det.push_back(*r.detection_prob);
        if (r.response_time_s) resp.push_back(*r.response_time_s);
      }
      ordered_json s;
      s["episodes"] = cfg.eval_episodes;
      if (!det.empty()) {
        const double p = eval::mean(det);
        s["detection_prob_mean"] = p;
        s["missed_packets_per_hour"] = eval::missed_packets_per_hour(p, cfg.impact_packets_per_s);
      }
      s["response_times_s"] = resp;
      per_scenario[scenarios[si]] = s;
      console << scenarios[si] << ": " << cfg.eval_episodes << " episodes";
      if (!det.empty()) console << ", detection probability " << csv::format_double(eval::mean(det));
      console << '\n';
    }
    ordered_json report;
    report["agent"] = std::string(pipeline::to_string(m.kind));
    report["checkpoint"] = checkpoint_path;
    report["scenarios"] = per_scenario;
    report["bounds_violations"] = violations.size();
    report["violations"] = violations_json(violations);
    report["pareto_front"] = pareto_json(points);
    write_text(dir / "report.json", report.dump(2) + "\n");
    return kOk;
  });
}

int cmd_compare(const std::string& dir_a, const std::string& dir_b, const std::vector<std::string>& metrics,
                const std::string& out_dir, std::ostream& console) {
  return guarded(console, [&] {
    const auto& names = metrics.empty() ? default_compare_metrics() : metrics;
    const auto a = read_metric_columns(dir_a, names);
    const auto b = read_metric_columns(dir_b, names);
    const auto rep = eval::compare_models(dir_a, a, dir_b, b, names);
    const auto dir = prepare_dir(out_dir);
    write_text(dir / "report.json", rep.to_json() + "\n");
    write_text(dir / "report.txt", rep.to_text());
    console << rep.to_text();
    return kOk;
  });
}

int cmd_sweep(const ExperimentConfig& cfg, std::ostream& console) {
  return guarded(console, [&] {
    cfg.validate();
    const auto dir = prepare_dir(cfg.out);
    write_text(dir / "config.json", config_snapshot(cfg));
    eval::SweepRunner runner;
    if (cfg.agent == pipeline::AgentKind::tabular) {
      const auto mdp = agent::TabularMdp::toy(cfg.tabular_mdp_seed);
      const double unit = cfg.ids.agent.epsilon_unit;
      runner = [&cfg, mdp, unit](double eps, std::uint64_t seed) {
        agent::Rng rng(seed);
        return agent::tabular_episode_returns(mdp, agent::normalize_epsilon(eps, unit), cfg.sweep.episodes,
                                              cfg.sweep.horizon, cfg.sweep.eta, rng);
      };
    } else {
      runner = [&cfg](double eps, std::uint64_t seed) { return dqn_sweep_member(cfg, eps, seed); };
    }
    const auto res = eval::epsilon_sweep(cfg.sweep.epsilons, cfg.sweep.seeds, runner);
    {
      auto f = open_out(dir / "sweep_curves.csv");
      res.write_csv(f);
    }
    {
      auto f = open_out(dir / "sweep_summary.csv");
      res.write_summary_csv(f);
    }
    for (const auto& c : res.curves) {
      auto f = open_out(dir / ("curve_eps_" + epsilon_tag(c.epsilon) + ".csv"));
      f << "seed,episode,return\n";
      for (std::size_t s = 0; s < c.per_seed.size(); ++s)
        for (std::size_t e = 0; e < c.per_seed[s].size(); ++e) {
          csv::Writer w(f);
          w.field(std::to_string(cfg.sweep.seeds[s])).field(e).field(c.per_seed[s][e]);
          w.end_row();
        }
    }
    console << "epsilon ranking by convergence AUC:";
    for (std::size_t i : res.auc_rank)
      console << ' ' << csv::format_double(res.curves[i].epsilon) << " (" << csv::format_double(res.curves[i].auc_mean)
              << ")";
    console << '\n';
    return kOk;
  });
}

int cmd_reproduce_tables(const std::string& out_dir, std::ostream& console) {
  return guarded(console, [&] {
    const auto rows = eval::reproduce_reported_tables();
    std::string text;
    ordered_json arr = ordered_json::array();
    for (const auto& r : rows) {
      text += eval::format_anova_text(r.table.metric, r.computed) + "\n";
      ordered_json j;
      j["metric"] = r.table.metric;
      j["reported_f"] = r.table.reported_f;
      j["computed_f"] = r.computed.f ? ordered_json(*r.computed.f) : ordered_json(nullptr);
      j["p_value"] = r.computed.p ? ordered_json(*r.computed.p) : ordered_json(nullptr);
      j["partial_eta_sq"] = r.computed.partial_eta_sq;
      j["consistent"] = r.consistent;
      arr.push_back(j);
    }
    text += eval::reproduction_text(rows);
    if (!out_dir.empty()) {
      const auto dir = prepare_dir(out_dir);
      write_text(dir / "reproduction.txt", text);
      write_text(dir / "reproduction.json", arr.dump(2) + "\n");
    }
    console << text;
    return kOk;
  });
}

int cmd_select_features(const ExperimentConfig& cfg, const std::string& input_csv, const std::string& mapping_json,
                        std::ostream& console) {
  return guarded(console, [&] {
    cfg.validate();
    std::vector<FlowRecord> flows;
    std::size_t skipped = 0;
    if (!input_csv.empty()) {
      const auto mapping =
          mapping_json.empty() ? features::ColumnMapping::canonical() : features::ColumnMapping::from_json_file(mapping_json);
      auto ing = features::ingest_flow_csv(input_csv, mapping);
      flows = std::move(ing.flows);
      skipped = ing.rows_skipped;
    } else {
      // No input: offered traffic of a no-op rollout of the configured scenario.
      env::GatewayEnv env(cfg.env_for(cfg.scenario), derive_seed(cfg.seed, kSelection, 0));
      while (!env.done()) {
        auto o = env.step(std::nullopt);
        flows.insert(flows.end(), o.offered.begin(), o.offered.end());
      }
    }
    const auto table = features::candidate_table(flows);
    const auto rep = features::run_selection(table, {}, features::make_mlp_saliency_hook(derive_seed(cfg.seed, kSelection, 1)));
    const auto dir = prepare_dir(cfg.out);
    write_text(dir / "selection.json", rep.to_json() + "\n");
    console << "flows " << flows.size() << " (skipped rows " << skipped << "), selected:";
    for (const auto& f : rep.final_set) console << ' ' << f;
    console << '\n';
    return kOk;
  });
}

}  // namespace edgeids::cli
