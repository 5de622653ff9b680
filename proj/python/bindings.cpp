#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "edgeids/cli.hpp"

namespace py = pybind11;
using namespace edgeids;

namespace {

py::dict anova_dict(const eval::AnovaResult& r) {
  py::dict d;
  d["df_between"] = r.df_between;
  d["df_within"] = r.df_within;
  d["ss_between"] = r.ss_between;
  d["ss_within"] = r.ss_within;
  d["ms_between"] = r.ms_between;
  d["ms_within"] = r.ms_within;
  d["f"] = r.f ? py::object(py::float_(*r.f)) : py::object(py::none());
  d["p"] = r.p ? py::object(py::float_(*r.p)) : py::object(py::none());
  d["partial_eta_sq"] = r.partial_eta_sq;
  return d;
}

sustain::RewardComponents components_from(const py::dict& d) {
  sustain::RewardComponents c;
  auto get = [&](const char* k, double& dst) {
    if (d.contains(k)) dst = d[k].cast<double>();
  };
  get("detection_rate", c.detection_rate);
  get("error_rate", c.error_rate);
  get("latency_s", c.latency_s);
  get("energy_j", c.energy_j);
  get("memory_util", c.memory_util);
  get("carbon_g", c.carbon_g);
  return c;
}

std::vector<std::vector<double>> rows(const agent::QTable& q) {
  std::vector<std::vector<double>> out(q.states, std::vector<double>(q.actions));
  for (std::size_t s = 0; s < q.states; ++s)
    for (std::size_t a = 0; a < q.actions; ++a) out[s][a] = q(s, a);
  return out;
}

}  // namespace

PYBIND11_MODULE(_edgeids, m) {
  m.doc() = "Gateway IDS simulator, agents and evaluation statistics";

  py::register_exception<cli::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<sustain::RangeError>(m, "RangeError", PyExc_ValueError);

  m.def("compute_reward", [](const py::dict& components) {
    const auto r = sustain::compute_reward(sustain::RewardWeights{}, components_from(components));
    return py::make_tuple(r.total, std::vector<double>(r.per_term.begin(), r.per_term.end()));
  }, py::arg("components"), "Total reward and per-term contributions under the default weights.");

  m.def("pareto_front", [](const std::vector<std::pair<double, double>>& pts) {
    std::vector<sustain::EnergyCarbonPoint> in;
    for (const auto& [e, c] : pts) in.push_back({e, c});
    std::vector<std::pair<double, double>> out;
    for (const auto& p : sustain::pareto_front(in)) out.emplace_back(p.energy, p.carbon);
    return out;
  }, py::arg("points"));

  m.def("one_way_anova", [](const std::vector<double>& a, const std::vector<double>& b) {
    return anova_dict(eval::one_way_anova(a, b));
  });
  m.def("anova_from_sums", [](double ssb, double ssw, double dfb, double dfw) {
    return anova_dict(eval::anova_from_sums(ssb, ssw, dfb, dfw));
  });
  m.def("reproduce_reported_tables", [] {
    py::list out;
    for (const auto& r : eval::reproduce_reported_tables()) {
      auto d = anova_dict(r.computed);
      d["metric"] = r.table.metric;
      d["reported_f"] = r.table.reported_f;
      d["consistent"] = r.consistent;
      out.append(d);
    }
    return out;
  });
  m.def("f_sf", &eval::f_sf, py::arg("f"), py::arg("d1"), py::arg("d2"));
  m.def("roc_auc", [](const std::vector<double>& s, const std::vector<int>& y) { return eval::roc_auc(s, y); });
  m.def("mann_kendall", [](const std::vector<double>& x) {
    const auto r = eval::mann_kendall(x);
    py::dict d;
    d["s"] = r.s;
    d["z"] = r.z;
    d["p_decreasing"] = r.p_decreasing;
    d["p_two_sided"] = r.p_two_sided;
    return d;
  });
  m.def("missed_packets_per_hour", &eval::missed_packets_per_hour);

  m.def("extract_features", [](std::uint64_t pkts_in, std::uint64_t pkts_out, std::uint64_t bytes, double duration,
                               std::uint8_t flags) {
    FlowRecord f;
    f.pkts_in = pkts_in;
    f.pkts_out = pkts_out;
    f.pkts_total = pkts_in + pkts_out;
    f.bytes_total = bytes;
    f.duration = duration;
    f.flags = flags;
    f.validate();
    const auto v = features::extract_features(f);
    py::dict d;
    for (std::size_t i = 0; i < v.size(); ++i) d[py::str(std::string(features::feature_names()[i]))] = v[i];
    return d;
  }, py::arg("pkts_in"), py::arg("pkts_out"), py::arg("bytes"), py::arg("duration"), py::arg("flags") = 0);

  m.def("toy_value_iteration", [](std::uint64_t seed) { return rows(agent::value_iteration(agent::TabularMdp::toy(seed))); },
        py::arg("seed") = 7);
  m.def("tabular_q_learning", [](std::uint64_t mdp_seed, std::uint64_t seed, std::size_t max_updates) {
    agent::TabularRunConfig cfg;
    cfg.max_updates = max_updates;
    agent::Rng rng(seed);
    const auto r = agent::run_tabular_q_learning(agent::TabularMdp::toy(mdp_seed), cfg, rng);
    py::dict d;
    d["q"] = rows(r.q);
    d["q_star"] = rows(r.q_star);
    d["updates"] = r.updates;
    d["final_sup_error"] = r.final_sup_error;
    d["converged"] = r.converged;
    return d;
  }, py::arg("mdp_seed") = 7, py::arg("seed") = 1, py::arg("max_updates") = 200'000);

  m.def("simulate", [](const std::string& scenario, std::size_t steps, std::uint64_t seed,
                       const std::vector<int>& actions) {
    env::EnvConfig cfg;
    cfg.scenario = env::scenario_preset(scenario, steps);
    env::GatewayEnv e(cfg, seed);
    py::dict d;
    std::uint64_t offered_attack = 0, passed_attack = 0, offered_benign = 0, passed_benign = 0;
    std::vector<double> cpu;
    for (std::size_t t = 0; !e.done(); ++t) {
      std::optional<agent::ActionId> a;
      if (t < actions.size() && actions[t] >= 0) a = agent::action_from_index(static_cast<std::size_t>(actions[t]));
      const auto o = e.step(a);
      offered_attack += o.offered_pkts.attack;
      passed_attack += o.passed_pkts.attack;
      offered_benign += o.offered_pkts.benign;
      passed_benign += o.passed_pkts.benign;
      cpu.push_back(o.resources.cpu_pct);
    }
    d["offered_attack"] = offered_attack;
    d["passed_attack"] = passed_attack;
    d["offered_benign"] = offered_benign;
    d["passed_benign"] = passed_benign;
    d["cpu_pct"] = cpu;
    d["energy_j"] = e.ledger().cumulative_energy();
    d["carbon_g"] = e.ledger().cumulative_carbon();
    d["bounds_violations"] = sustain::check_bounds(e.ledger()).size();
    return d;
  }, py::arg("scenario"), py::arg("steps") = 1000, py::arg("seed") = 1, py::arg("actions") = std::vector<int>{},
     "Rolls out the gateway; actions[t] is an action index or -1 for none.");

  m.def("derive_seed", &cli::derive_seed);
  m.def("selftest", [] {
    py::list out;
    for (const auto& r : cli::run_selftest()) out.append(py::make_tuple(r.name, r.passed, r.detail));
    return out;
  });
  m.def("train", [](const std::vector<std::string>& overrides) {
    const auto cfg = cli::load_config("", overrides);
    std::ostringstream console;
    const int rc = cli::cmd_train(cfg, console);
    return py::make_tuple(rc, console.str());
  }, py::arg("overrides"), "Runs the train subcommand with key=value overrides.");
}
