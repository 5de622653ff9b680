#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>

#include "edgeids/cli.hpp"
#include "edgeids/csv.hpp"

namespace edgeids::cli {

namespace {

std::string num(double v) { return csv::format_double(v); }

SelftestResult check_replay_defaults() {
  const ExperimentConfig defaults;
  const auto& hp = defaults.ids.agent;
  const auto parsed = from_json(to_json(defaults));
  const agent::ReplayBuffer buf;
  const bool ok = hp.replay_capacity == 50'000 && hp.batch_size == 64 && parsed.ids.agent.replay_capacity == 50'000 &&
                  parsed.ids.agent.batch_size == 64 && buf.capacity() == 50'000 && buf.batch_size() == 64;
  return {"replay_defaults", ok,
          "capacity " + std::to_string(hp.replay_capacity) + ", batch " + std::to_string(hp.batch_size)};
}

SelftestResult check_config_roundtrip() {
  const ExperimentConfig defaults;
  const auto a = config_snapshot(defaults);
  const auto b = config_snapshot(from_json(nlohmann::ordered_json::parse(a)));
  return {"config_snapshot_roundtrip", a == b, a == b ? "identical" : "snapshots differ"};
}

SelftestResult check_gradients() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    neural::Rng rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    const auto ae = neural::AutoencoderModel::init(8, 16, 8, rng);
    std::vector<double> x(8);
    for (double& v : x) v = n(rng);
    worst = std::max(worst, neural::grad_check(ae, x, 1e-5).max_rel_error);
    const auto clf = neural::LstmClassifier::init(3, 2, 4, rng);
    std::vector<neural::Vector> w(4, neural::Vector(3));
    for (auto& row : w)
      for (double& v : row) v = n(rng);
    worst = std::max(worst, neural::grad_check(clf, w, 1.0, 1e-5).max_rel_error);
  }
  return {"gradient_check", worst < 1e-4, "max relative error " + num(worst)};
}

SelftestResult check_contraction() {
  const auto mdp = agent::TabularMdp::random(4, 4, 11, 0.9);
  agent::Rng rng(12);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    agent::QTable a(4, 4), b(4, 4);
    for (double& v : a.v) v = u(rng);
    for (double& v : b.v) v = u(rng);
    worst = std::max(worst, agent::empirical_contraction_ratio(mdp, a, b));
  }
  return {"bellman_contraction", worst <= 0.9 + 1e-12, "max ratio " + num(worst)};
}

SelftestResult check_f_distribution() {
  // Upper 5% and 1% points of F(1, 10) and F(2, 20).
  const double e1 = std::abs(eval::f_sf(4.964602743730711, 1, 10) - 0.05);
  const double e2 = std::abs(eval::f_sf(5.848932247, 2, 20) - 0.01);
  return {"f_survival", e1 < 1e-7 && e2 < 1e-7, "errors " + num(e1) + ", " + num(e2)};
}

SelftestResult check_reported_tables() {
  bool ok = true;
  std::string flagged;
  for (const auto& r : eval::reproduce_reported_tables()) {
    const bool expect_flag =
        r.table.metric == "detection_probability" || r.table.metric == "response_time" || r.table.metric == "latency";
    if (expect_flag == r.consistent) ok = false;
    if (!r.consistent) flagged += (flagged.empty() ? "" : ", ") + r.table.metric;
  }
  return {"reported_anova", ok, "inconsistent: " + flagged};
}

SelftestResult check_pareto() {
  agent::Rng rng(3);
  std::uniform_int_distribution<int> u(0, 30);
  bool ok = true;
  for (int trial = 0; trial < 20 && ok; ++trial) {
    std::vector<sustain::EnergyCarbonPoint> pts(60);
    for (auto& p : pts) p = {static_cast<double>(u(rng)), static_cast<double>(u(rng))};
    std::vector<sustain::EnergyCarbonPoint> brute;
    for (const auto& p : pts) {
      bool dominated = false;
      for (const auto& q : pts)
        if (q.energy <= p.energy && q.carbon <= p.carbon && (q.energy < p.energy || q.carbon < p.carbon)) dominated = true;
      if (!dominated && std::find(brute.begin(), brute.end(), p) == brute.end()) brute.push_back(p);
    }
    auto front = sustain::pareto_front(pts);
    auto key = [](const auto& a, const auto& b) { return a.energy != b.energy ? a.energy < b.energy : a.carbon < b.carbon; };
    std::sort(front.begin(), front.end(), key);
    std::sort(brute.begin(), brute.end(), key);
    front.erase(std::unique(front.begin(), front.end()), front.end());
    ok = front == brute;
  }
  return {"pareto_front", ok, ok ? "matches brute force" : "differs from brute force"};
}

SelftestResult check_tabular() {
  const auto mdp = agent::TabularMdp::toy(7);
  agent::Rng rng(1);
  const auto r = agent::run_tabular_q_learning(mdp, {}, rng);
  return {"tabular_convergence", r.converged && r.final_sup_error < 1e-3,
          "sup error " + num(r.final_sup_error) + " after " + std::to_string(r.updates) + " updates"};
}

SelftestResult check_reward_example() {
  sustain::RewardWeights w;
  sustain::RewardComponents c;
  c.detection_rate = 0.9;
  c.error_rate = 0.1;
  c.latency_s = 0.5;
  c.energy_j = 2.0;
  c.memory_util = 0.5;
  c.carbon_g = 0.4;
  const double r = sustain::compute_reward(w, c).total;
  return {"reward_example", std::abs(r - 0.71) < 1e-12, "reward " + num(r)};
}

}  // namespace

std::vector<SelftestResult> run_selftest() {
  std::vector<SelftestResult> out;
  for (auto* f : {check_replay_defaults, check_config_roundtrip, check_gradients, check_contraction,
                  check_f_distribution, check_reported_tables, check_pareto, check_tabular, check_reward_example}) {
    try {
      out.push_back(f());
    } catch (const std::exception& e) {
      out.push_back({"exception", false, e.what()});
    }
  }
  return out;
}

int cmd_selftest(std::ostream& console) {
  bool all = true;
  for (const auto& r : run_selftest()) {
    console << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    all = all && r.passed;
  }
  return all ? kOk : kSelftestFailure;
}

}  // namespace edgeids::cli
