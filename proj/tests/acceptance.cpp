// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "edgeids/cli.hpp"
#include "edgeids/csv.hpp"

using namespace edgeids;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  std::function<Outcome()> run;
  double limit_s = 0.0;  // 0: no runtime limit
};

std::string num(double v) { return csv::format_double(v); }

const fs::path& work_dir() {
  static const fs::path p = [] {
    auto d = fs::temp_directory_path() / "edgeids_acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// header name -> column of cells
std::map<std::string, std::vector<std::string>> read_columns(const fs::path& p) {
  std::ifstream f(p);
  std::string line;
  std::vector<std::string> header;
  std::map<std::string, std::vector<std::string>> cols;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(s);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  if (!std::getline(f, line)) throw std::runtime_error("empty csv " + p.string());
  header = split(line);
  while (std::getline(f, line)) {
    const auto cells = split(line);
    for (std::size_t i = 0; i < header.size(); ++i) cols[header[i]].push_back(i < cells.size() ? cells[i] : "");
  }
  return cols;
}

std::vector<double> numbers(const std::vector<std::string>& cells) {
  std::vector<double> out;
  for (const auto& c : cells) {
    if (c.empty()) throw std::runtime_error("missing metric value");
    out.push_back(std::stod(c));
  }
  return out;
}

cli::ExperimentConfig config(const fs::path& out, std::vector<std::string> overrides) {
  overrides.push_back("out=\"" + out.string() + "\"");
  return cli::load_config("", overrides);
}

void run_or_throw(int rc, const std::string& what) {
  if (rc != cli::kOk) throw std::runtime_error(what + " exited with " + std::to_string(rc));
}

// ---------------------------------------------------------------------------

Outcome gradient_check() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    neural::Rng rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    const auto ae = neural::AutoencoderModel::init(8, 16, 8, rng);
    std::vector<double> x(8);
    for (double& v : x) v = n(rng);
    worst = std::max(worst, neural::grad_check(ae, x, 1e-5).max_rel_error);
    const auto clf = neural::LstmClassifier::init(3, 2, 5, rng);
    std::vector<neural::Vector> w(5, neural::Vector(3));
    for (auto& row : w)
      for (double& v : row) v = n(rng);
    worst = std::max(worst, neural::grad_check(clf, w, static_cast<double>(seed % 2), 1e-5).max_rel_error);
  }
  return {worst < 1e-4, "max relative error " + num(worst) + " over 20 seeds"};
}

Outcome bellman_contraction() {
  const double gamma = 0.9;
  const auto mdp = agent::TabularMdp::random(4, 4, 2024, gamma);
  agent::Rng rng(99);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  double worst = 0.0, shift_err = 0.0;
  for (int i = 0; i < 100; ++i) {
    agent::QTable a(4, 4), b(4, 4), c(4, 4);
    for (double& v : a.v) v = u(rng);
    for (double& v : b.v) v = u(rng);
    worst = std::max(worst, agent::empirical_contraction_ratio(mdp, a, b));
    const double k = u(rng);
    for (std::size_t j = 0; j < a.v.size(); ++j) c.v[j] = a.v[j] + k;
    shift_err = std::max(shift_err, std::abs(agent::empirical_contraction_ratio(mdp, a, c) - gamma));
  }
  return {worst <= gamma + 1e-12 && shift_err <= 1e-12,
          "max ratio " + num(worst) + ", constant-shift deviation " + num(shift_err)};
}

Outcome tabular_convergence() {
  const auto mdp = agent::TabularMdp::toy(7);
  agent::TabularRunConfig cfg;  // eta = k^-0.6
  agent::Rng rng(1);
  const auto r = agent::run_tabular_q_learning(mdp, cfg, rng);
  std::vector<double> lyap;
  const std::size_t burn = r.diagnostics.size() / 10;
  for (std::size_t i = burn; i < r.diagnostics.size(); ++i) lyap.push_back(r.diagnostics[i].lyapunov);
  const auto mk = eval::mann_kendall(lyap);
  const bool ok = r.converged && r.final_sup_error < 1e-3 && r.updates <= 200'000 && lyap.size() >= 3 &&
                  mk.p_decreasing < 0.05;
  return {ok, "sup error " + num(r.final_sup_error) + " after " + std::to_string(r.updates) +
                  " updates, Mann-Kendall p " + num(mk.p_decreasing) + " on " + std::to_string(lyap.size()) +
                  " points"};
}

Outcome sustainability_bounds() {
  std::size_t violations = 0, steps = 0, step_breaches = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto cfg = config(work_dir() / "bounds", {"seed=" + std::to_string(seed)});
    const auto ecfg = cfg.env_for(seed % 2 ? "syn_flood" : "mixed");
    auto ids = pipeline::IdsSystem::build(cfg.ids, ecfg, cli::derive_seed(seed, 1, 0));
    env::GatewayEnv env(ecfg, cli::derive_seed(seed, 2, 0));
    ids.attach(env);
    pipeline::Rng rng(cli::derive_seed(seed, 3, 0));
    const auto r = pipeline::run_episode(ids, env, pipeline::Mode::train, rng);
    steps += r.steps;
    violations += sustain::check_bounds(env.ledger()).size();
    const auto& lim = env.ledger().limits();
    for (const auto& rec : env.ledger().records())
      step_breaches += rec.energy_j > lim.p_max_w * rec.dt_s || rec.carbon_g > lim.kappa_max_g_per_j * rec.energy_j;
  }
  return {violations == 0 && step_breaches == 0 && steps == 10'000,
          std::to_string(violations) + " violations, " + std::to_string(step_breaches) +
              " per-step energy/carbon breaches over " + std::to_string(steps) + " steps"};
}

Outcome pareto() {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> size(1, 2000);
  std::uniform_int_distribution<int> grid(0, 200);  // coarse grid forces ties and duplicates
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int matched = 0;
  for (int inst = 0; inst < 50; ++inst) {
    std::vector<sustain::EnergyCarbonPoint> pts(size(rng));
    for (auto& p : pts)
      p = inst % 2 ? sustain::EnergyCarbonPoint{static_cast<double>(grid(rng)), static_cast<double>(grid(rng))}
                   : sustain::EnergyCarbonPoint{u(rng), u(rng)};
    std::vector<sustain::EnergyCarbonPoint> brute;
    for (const auto& p : pts) {
      bool dominated = false;
      for (const auto& q : pts)
        if (q.energy <= p.energy && q.carbon <= p.carbon && (q.energy < p.energy || q.carbon < p.carbon)) {
          dominated = true;
          break;
        }
      if (!dominated) brute.push_back(p);
    }
    auto front = sustain::pareto_front(pts);
    auto key = [](const auto& a, const auto& b) { return a.energy != b.energy ? a.energy < b.energy : a.carbon < b.carbon; };
    std::sort(front.begin(), front.end(), key);
    std::sort(brute.begin(), brute.end(), key);
    front.erase(std::unique(front.begin(), front.end()), front.end());
    brute.erase(std::unique(brute.begin(), brute.end()), brute.end());
    matched += front == brute;
  }
  return {matched == 50, std::to_string(matched) + "/50 instances match brute force"};
}

Outcome reported_anova() {
  std::map<std::string, eval::ReproducedAnova> by;
  for (const auto& r : eval::reproduce_reported_tables()) by.emplace(r.table.metric, r);
  const double carbon = *by.at("carbon").computed.f, cpu = *by.at("cpu").computed.f, mem = *by.at("memory").computed.f;
  const double eta = by.at("latency").computed.partial_eta_sq;
  const bool ok = std::abs(carbon - 36.47) <= 0.02 && std::abs(cpu - 9.78) <= 0.02 && std::abs(mem - 2.18) <= 0.01 &&
                  std::abs(eta - 0.577) <= 0.001 && !by.at("detection_probability").consistent &&
                  !by.at("response_time").consistent;
  std::string flagged;
  for (const auto& [name, r] : by)
    if (!r.consistent) flagged += (flagged.empty() ? "" : " ") + name + "(F " + num(*r.computed.f) + ")";
  return {ok, "carbon F " + num(carbon) + ", cpu F " + num(cpu) + ", memory F " + num(mem) + ", latency eta2 " +
                  num(eta) + "; flagged: " + flagged};
}

Outcome mitigation_effect() {
  std::vector<double> attack, benign;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto dir = work_dir() / ("mitigate_" + std::to_string(seed));
    const auto cfg = config(dir / "train", {"seed=" + std::to_string(seed), "episodes=3", "eval_episodes=1"});
    std::ostringstream console;
    run_or_throw(cli::cmd_train(cfg, console), "train");
    auto ecfg = cfg;
    ecfg.out = (dir / "eval").string();
    run_or_throw(cli::cmd_evaluate(ecfg, (dir / "train" / "checkpoint.txt").string(), console), "evaluate");
    auto cols = read_columns(dir / "eval" / "metrics.csv");
    for (double v : numbers(cols.at("attack_pass_vs_noop"))) attack.push_back(v);
    for (double v : numbers(cols.at("benign_pass_vs_noop"))) benign.push_back(v);
  }
  const double a = eval::mean(attack), b = eval::mean(benign);
  return {attack.size() == 5 && a <= 0.2 && b >= 0.9,
          "mean attack pass ratio " + num(a) + " (worst " + num(*std::max_element(attack.begin(), attack.end())) +
              "), mean benign pass ratio " + num(b) + " (worst " +
              num(*std::min_element(benign.begin(), benign.end())) + ") over 5 seeds"};
}

Outcome detection_quality() {
  double worst_auc = 1.0, worst_acc = 1.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto dir = work_dir() / ("detect_" + std::to_string(seed));
    std::ostringstream console;
    const auto de = config(dir / "de_train", {"seed=" + std::to_string(seed), "episodes=2", "eval_episodes=1",
                                              "eval_scenarios=[\"mixed\",\"zero_day_mix\"]"});
    run_or_throw(cli::cmd_train(de, console), "train");
    auto de_eval = de;
    de_eval.out = (dir / "de_eval").string();
    run_or_throw(cli::cmd_evaluate(de_eval, (dir / "de_train" / "checkpoint.txt").string(), console), "evaluate");
    for (double v : numbers(read_columns(dir / "de_eval" / "metrics.csv").at("flow_auc")))
      worst_auc = std::min(worst_auc, v);

    const auto ad = config(dir / "ad_train", {"seed=" + std::to_string(seed), "agent=\"autodrl\"", "episodes=2",
                                              "eval_episodes=1"});
    run_or_throw(cli::cmd_train(ad, console), "train");
    auto ad_eval = ad;
    ad_eval.out = (dir / "ad_eval").string();
    run_or_throw(cli::cmd_evaluate(ad_eval, (dir / "ad_train" / "checkpoint.txt").string(), console), "evaluate");
    for (double v : numbers(read_columns(dir / "ad_eval" / "metrics.csv").at("accuracy")))
      worst_acc = std::min(worst_acc, v);
  }
  return {worst_auc >= 0.9 && worst_acc >= 0.9,
          "worst DeepEdge flow AUC " + num(worst_auc) + " (mixed, zero_day_mix), worst AutoDRL accuracy " +
              num(worst_acc) + " (syn_flood)"};
}

Outcome epsilon_ordering_for(const std::string& tag, const std::string& set) {
  const auto dir = work_dir() / ("sweep_" + tag);
  const auto cfg = config(dir, {"agent=\"tabular\"", "sweep.epsilons=" + set});
  std::ostringstream console;
  run_or_throw(cli::cmd_sweep(cfg, console), "sweep");
  auto cols = read_columns(dir / "sweep_summary.csv");
  const auto eps = numbers(cols.at("epsilon"));
  const auto auc = numbers(cols.at("auc_mean"));
  std::vector<std::size_t> idx(eps.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return eps[a] < eps[b]; });
  bool ok = idx.size() == 3;
  std::string detail;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (k > 0 && !(auc[idx[k - 1]] > auc[idx[k]])) ok = false;
    detail += (k ? " > " : "") + std::string("eps ") + num(eps[idx[k]]) + ": " + num(auc[idx[k]]);
  }
  return {ok && cfg.sweep.seeds.size() >= 5, "mean AUC " + detail};
}

Outcome epsilon_ordering() {
  const auto a = epsilon_ordering_for("a", "[0.5,1.0,2.0]");
  const auto b = epsilon_ordering_for("b", "[0.1,0.4,0.5]");
  return {a.pass && b.pass, a.detail + "; " + b.detail};
}

Outcome reproducibility() {
  std::size_t compared = 0, differing = 0;
  std::ostringstream console;
  for (int run = 0; run < 2; ++run) {
    const auto base = work_dir() / ("repro_" + std::to_string(run));
    run_or_throw(cli::cmd_train(config(base / "train", {"episodes=2"}), console), "train");
    run_or_throw(cli::cmd_sweep(config(base / "sweep", {"agent=\"tabular\""}), console), "sweep");
  }
  for (const auto& sub : {"train", "sweep"}) {
    for (const auto& e : fs::directory_iterator(work_dir() / "repro_0" / sub)) {
      if (e.path().extension() != ".csv") continue;
      ++compared;
      differing += slurp(e.path()) != slurp(work_dir() / "repro_1" / sub / e.path().filename());
    }
  }
  return {compared > 0 && differing == 0,
          std::to_string(compared) + " csv files compared, " + std::to_string(differing) + " differ"};
}

Outcome replay_defaults() {
  const cli::ExperimentConfig cfg;
  const agent::ReplayBuffer buf;
  const bool ok = cfg.ids.agent.replay_capacity == 50'000 && cfg.ids.agent.batch_size == 64 &&
                  buf.capacity() == 50'000 && buf.batch_size() == 64;
  return {ok, "capacity " + std::to_string(buf.capacity()) + ", batch " + std::to_string(buf.batch_size())};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"gradient_check", gradient_check, 10.0},
      {"bellman_contraction", bellman_contraction, 1.0},
      {"tabular_convergence", tabular_convergence, 30.0},
      {"sustainability_bounds", sustainability_bounds},
      {"pareto_front", pareto, 5.0},
      {"reported_anova", reported_anova},
      {"mitigation_vs_noop", mitigation_effect, 300.0},
      {"detection_quality", detection_quality},
      {"epsilon_sweep_ordering", epsilon_ordering},
      {"reproducible_csv", reproducibility},
      {"replay_defaults", replay_defaults},
  };
  bool all = true;
  for (const auto& [name, fn, limit] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char t[32];
    std::snprintf(t, sizeof t, "%.1f", secs);
    if (limit > 0.0 && secs > limit) {
      o.pass = false;
      o.detail += "; exceeded the " + num(limit) + " s limit";
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " [" << t << " s]" << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
