#include <fstream>
#include <sstream>

#include "edgeids/cli.hpp"

namespace edgeids::cli {

using json = nlohmann::ordered_json;

namespace {

json schedule_json(const agent::PowerSchedule& s) { return json{{"eta0", s.eta0}, {"k0", s.k0}, {"p", s.p}}; }

agent::PowerSchedule schedule_from(const json& j) {
  agent::PowerSchedule s;
  s.eta0 = j.at("eta0").get<double>();
  s.k0 = j.at("k0").get<double>();
  s.p = j.at("p").get<double>();
  return s;
}

// Every key in `user` must already exist in `base`; objects merge, anything
// else replaces.
void merge_into(json& base, const json& user, const std::string& path) {
  if (!user.is_object()) throw ConfigError("config section '" + path + "' must be an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
    json& slot = base[it.key()];
    if (slot.is_object())
      merge_into(slot, it.value(), key);
    else
      slot = it.value();
  }
}

std::size_t get_count(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(std::string("config key '") + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

}  // namespace

json to_json(const ExperimentConfig& c) {
  const auto& sc = c.env.scenario;
  const auto& b = sc.benign;
  const auto& m = c.env.mitigation;
  const auto& r = c.env.resources;
  const auto& l = c.env.limits;
  const auto& w = c.ids.reward;
  const auto& a = c.ids.agent;
  const auto& d = c.ids.detector;
  const auto& s = c.ids.sequence;
  json j;
  j["agent"] = std::string(pipeline::to_string(c.agent));
  j["seed"] = c.seed;
  j["episodes"] = c.episodes;
  j["eval_episodes"] = c.eval_episodes;
  j["scenario"] = c.scenario;
  j["eval_scenarios"] = c.eval_scenarios;
  j["out"] = c.out;
  j["impact"] = {{"packets_per_s", c.impact_packets_per_s}};
  j["env"] = {
      {"episode_steps", sc.episode_steps},
      {"dt_s", sc.dt_s},
      {"attack_intensity_scale", c.attack_intensity_scale},
      {"benign",
       {{"flow_rate", b.flow_rate},
        {"sources", b.sources},
        {"pkts_log_mean", b.pkts_log_mean},
        {"pkts_log_sd", b.pkts_log_sd},
        {"bpp_log_mean", b.bpp_log_mean},
        {"bpp_log_sd", b.bpp_log_sd},
        {"duration_log_mean", b.duration_log_mean},
        {"duration_log_sd", b.duration_log_sd},
        {"tcp_fraction", b.tcp_fraction}}},
      {"mitigation",
       {{"rate_cap_pps", m.rate_cap_pps},
        {"syn_cap_per_source", m.syn_cap_per_source},
        {"hold_steps", m.hold_steps},
        {"tau_p", m.tau_p},
        {"blacklist_expiry", m.blacklist_expiry},
        {"window", m.window}}},
      {"resources",
       {{"cpu_base_pct", r.cpu_base_pct},
        {"cpu_per_kpps", r.cpu_per_kpps},
        {"cpu_learn_pct", r.cpu_learn_pct},
        {"cpu_action_pct", std::vector<double>(std::begin(r.cpu_action_pct), std::end(r.cpu_action_pct))},
        {"dropped_cost", r.dropped_cost},
        {"power_idle_w", r.power_idle_w},
        {"power_per_pct_w", r.power_per_pct_w},
        {"mem_total_bytes", r.mem_total_bytes},
        {"mem_base_ratio", r.mem_base_ratio},
        {"mem_per_kpps_ratio", r.mem_per_kpps_ratio},
        {"blacklist_entry_bytes", r.blacklist_entry_bytes},
        {"latency_base_s", r.latency_base_s}}},
      {"limits",
       {{"p_max_w", l.p_max_w},
        {"kappa_max_g_per_kwh", c.kappa_max_g_per_kwh},
        {"e_max_j", l.e_max_j},
        {"m_max_ratio", l.m_max_ratio},
        {"c_max_g", l.c_max_g}}},
      {"kappa_g_per_kwh", c.kappa_g_per_kwh},
      {"kappa_schedule", c.env.kappa_schedule_path}};
  j["reward"] = {{"alpha", w.alpha},         {"beta", w.beta},       {"lambda_l", w.lambda_l},
                 {"delta", w.delta},         {"epsilon_w", w.epsilon_w}, {"zeta", w.zeta},
                 {"latency_cap_s", w.latency_cap_s}, {"energy_cap_j", w.energy_cap_j}};
  j["agent_params"] = {{"gamma", a.gamma},
                       {"epsilon", a.epsilon},
                       {"epsilon_unit", a.epsilon_unit},
                       {"epsilon_min", a.epsilon_min},
                       {"epsilon_decay", a.epsilon_decay},
                       {"lr", a.lr},
                       {"target_sync_every", a.target_sync_every},
                       {"replay_capacity", a.replay_capacity},
                       {"batch_size", a.batch_size},
                       {"carbon_xi", a.carbon_xi},
                       {"hidden", a.hidden}};
  j["detector"] = {{"warmup_steps", d.warmup_steps},
                   {"ae_hidden", d.ae_hidden},
                   {"ae_latent", d.ae_latent},
                   {"ae_epochs", d.ae_epochs},
                   {"ae_lr", d.ae_lr},
                   {"max_training_flows", d.max_training_flows},
                   {"flow_quantile", d.flow_quantile},
                   {"step_quantile", d.step_quantile},
                   {"norm", std::string(features::to_string(d.norm))}};
  j["sequence"] = {{"hidden", s.hidden},
                   {"window", s.window},
                   {"scenarios", s.scenarios},
                   {"pretrain_epochs", s.pretrain_epochs},
                   {"supervised", schedule_json(s.rates.supervised)},
                   {"reinforcement", schedule_json(s.rates.reinforcement)},
                   {"alert_threshold", s.alert_threshold}};
  j["tabular"] = {{"mdp_seed", c.tabular_mdp_seed},
                  {"max_updates", c.tabular.max_updates},
                  {"p", c.tabular.p},
                  {"epsilon", c.tabular.epsilon},
                  {"tolerance", c.tabular.tolerance},
                  {"log_every", c.tabular.log_every}};
  j["sweep"] = {{"epsilons", c.sweep.epsilons},
                {"seeds", c.sweep.seeds},
                {"episodes", c.sweep.episodes},
                {"horizon", c.sweep.horizon},
                {"eta", c.sweep.eta}};
  return j;
}

ExperimentConfig from_json(const json& user) {
  json j = to_json(ExperimentConfig{});
  merge_into(j, user, "");
  try {
    ExperimentConfig c;
    c.agent = pipeline::agent_kind_from_string(j.at("agent").get<std::string>());
    c.seed = j.at("seed").get<std::uint64_t>();
    c.episodes = get_count(j, "episodes");
    c.eval_episodes = get_count(j, "eval_episodes");
    c.scenario = j.at("scenario").get<std::string>();
    c.eval_scenarios = j.at("eval_scenarios").get<std::vector<std::string>>();
    c.out = j.at("out").get<std::string>();
    c.impact_packets_per_s = j.at("impact").at("packets_per_s").get<double>();

    const auto& e = j.at("env");
    auto& sc = c.env.scenario;
    sc.episode_steps = get_count(e, "episode_steps");
    sc.dt_s = e.at("dt_s").get<double>();
    c.attack_intensity_scale = e.at("attack_intensity_scale").get<double>();
    const auto& b = e.at("benign");
    sc.benign.flow_rate = b.at("flow_rate").get<double>();
    sc.benign.sources = b.at("sources").get<std::uint32_t>();
    sc.benign.pkts_log_mean = b.at("pkts_log_mean").get<double>();
    sc.benign.pkts_log_sd = b.at("pkts_log_sd").get<double>();
    sc.benign.bpp_log_mean = b.at("bpp_log_mean").get<double>();
    sc.benign.bpp_log_sd = b.at("bpp_log_sd").get<double>();
    sc.benign.duration_log_mean = b.at("duration_log_mean").get<double>();
    sc.benign.duration_log_sd = b.at("duration_log_sd").get<double>();
    sc.benign.tcp_fraction = b.at("tcp_fraction").get<double>();
    const auto& m = e.at("mitigation");
    c.env.mitigation.rate_cap_pps = m.at("rate_cap_pps").get<double>();
    c.env.mitigation.syn_cap_per_source = m.at("syn_cap_per_source").get<double>();
    c.env.mitigation.hold_steps = get_count(m, "hold_steps");
    c.env.mitigation.tau_p = m.at("tau_p").get<double>();
    c.env.mitigation.blacklist_expiry = get_count(m, "blacklist_expiry");
    c.env.mitigation.window = get_count(m, "window");
    const auto& r = e.at("resources");
    auto& rc = c.env.resources;
    rc.cpu_base_pct = r.at("cpu_base_pct").get<double>();
    rc.cpu_per_kpps = r.at("cpu_per_kpps").get<double>();
    rc.cpu_learn_pct = r.at("cpu_learn_pct").get<double>();
    const auto costs = r.at("cpu_action_pct").get<std::vector<double>>();
    if (costs.size() != agent::kActionCount) throw ConfigError("env.resources.cpu_action_pct needs 4 entries");
    for (std::size_t i = 0; i < costs.size(); ++i) rc.cpu_action_pct[i] = costs[i];
    rc.dropped_cost = r.at("dropped_cost").get<double>();
    rc.power_idle_w = r.at("power_idle_w").get<double>();
    rc.power_per_pct_w = r.at("power_per_pct_w").get<double>();
    rc.mem_total_bytes = r.at("mem_total_bytes").get<double>();
    rc.mem_base_ratio = r.at("mem_base_ratio").get<double>();
    rc.mem_per_kpps_ratio = r.at("mem_per_kpps_ratio").get<double>();
    rc.blacklist_entry_bytes = r.at("blacklist_entry_bytes").get<double>();
    rc.latency_base_s = r.at("latency_base_s").get<double>();
    const auto& l = e.at("limits");
    c.env.limits.p_max_w = l.at("p_max_w").get<double>();
    c.kappa_max_g_per_kwh = l.at("kappa_max_g_per_kwh").get<double>();
    c.env.limits.e_max_j = l.at("e_max_j").get<double>();
    c.env.limits.m_max_ratio = l.at("m_max_ratio").get<double>();
    c.env.limits.c_max_g = l.at("c_max_g").get<double>();
    c.kappa_g_per_kwh = e.at("kappa_g_per_kwh").get<double>();
    c.env.kappa_schedule_path = e.at("kappa_schedule").get<std::string>();

    const auto& w = j.at("reward");
    auto& rw = c.ids.reward;
    rw.alpha = w.at("alpha").get<double>();
    rw.beta = w.at("beta").get<double>();
    rw.lambda_l = w.at("lambda_l").get<double>();
    rw.delta = w.at("delta").get<double>();
    rw.epsilon_w = w.at("epsilon_w").get<double>();
    rw.zeta = w.at("zeta").get<double>();
    rw.latency_cap_s = w.at("latency_cap_s").get<double>();
    rw.energy_cap_j = w.at("energy_cap_j").get<double>();

    const auto& a = j.at("agent_params");
    auto& hp = c.ids.agent;
    hp.gamma = a.at("gamma").get<double>();
    hp.epsilon = a.at("epsilon").get<double>();
    hp.epsilon_unit = a.at("epsilon_unit").get<double>();
    hp.epsilon_min = a.at("epsilon_min").get<double>();
    hp.epsilon_decay = a.at("epsilon_decay").get<double>();
    hp.lr = a.at("lr").get<double>();
    hp.target_sync_every = get_count(a, "target_sync_every");
    hp.replay_capacity = get_count(a, "replay_capacity");
    hp.batch_size = get_count(a, "batch_size");
    hp.carbon_xi = a.at("carbon_xi").get<double>();
    hp.hidden = a.at("hidden").get<std::vector<std::size_t>>();

    const auto& d = j.at("detector");
    auto& dc = c.ids.detector;
    dc.warmup_steps = get_count(d, "warmup_steps");
    dc.ae_hidden = get_count(d, "ae_hidden");
    dc.ae_latent = get_count(d, "ae_latent");
    dc.ae_epochs = get_count(d, "ae_epochs");
    dc.ae_lr = d.at("ae_lr").get<double>();
    dc.max_training_flows = get_count(d, "max_training_flows");
    dc.flow_quantile = d.at("flow_quantile").get<double>();
    dc.step_quantile = d.at("step_quantile").get<double>();
    dc.norm = features::norm_kind_from_string(d.at("norm").get<std::string>());

    const auto& s = j.at("sequence");
    auto& sq = c.ids.sequence;
    sq.hidden = get_count(s, "hidden");
    sq.window = get_count(s, "window");
    sq.scenarios = s.at("scenarios").get<std::vector<std::string>>();
    sq.pretrain_epochs = get_count(s, "pretrain_epochs");
    sq.rates.supervised = schedule_from(s.at("supervised"));
    sq.rates.reinforcement = schedule_from(s.at("reinforcement"));
    sq.alert_threshold = s.at("alert_threshold").get<double>();

    const auto& t = j.at("tabular");
    c.tabular_mdp_seed = t.at("mdp_seed").get<std::uint64_t>();
    c.tabular.max_updates = get_count(t, "max_updates");
    c.tabular.p = t.at("p").get<double>();
    c.tabular.epsilon = t.at("epsilon").get<double>();
    c.tabular.tolerance = t.at("tolerance").get<double>();
    c.tabular.log_every = get_count(t, "log_every");

    const auto& sw = j.at("sweep");
    c.sweep.epsilons = sw.at("epsilons").get<std::vector<double>>();
    c.sweep.seeds = sw.at("seeds").get<std::vector<std::uint64_t>>();
    c.sweep.episodes = get_count(sw, "episodes");
    c.sweep.horizon = get_count(sw, "horizon");
    c.sweep.eta = sw.at("eta").get<double>();

    c.ids.kind = c.agent == pipeline::AgentKind::tabular ? pipeline::AgentKind::deepedge : c.agent;
    return c;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
}

env::EnvConfig ExperimentConfig::env_for(const std::string& scenario_name) const {
  env::EnvConfig e = env;
  const auto preset = env::scenario_preset(scenario_name, env.scenario.episode_steps);
  e.scenario.attacks = preset.attacks;
  for (auto& a : e.scenario.attacks) a.intensity_pps *= attack_intensity_scale;
  e.kappa_g_per_j = sustain::per_joule_from_per_kwh(kappa_g_per_kwh);
  e.limits.kappa_max_g_per_j = sustain::per_joule_from_per_kwh(kappa_max_g_per_kwh);
  return e;
}

void ExperimentConfig::validate() const {
  try {
    if (out.empty()) throw ConfigError("out must name a directory");
    if (!(impact_packets_per_s > 0.0)) throw ConfigError("impact.packets_per_s must be > 0");
    if (!(attack_intensity_scale > 0.0)) throw ConfigError("env.attack_intensity_scale must be > 0");
    if (!(kappa_g_per_kwh >= 0.0) || kappa_g_per_kwh > kappa_max_g_per_kwh)
      throw ConfigError("env.kappa_g_per_kwh must lie in [0, env.limits.kappa_max_g_per_kwh]");
    env_for(scenario).validate();
    for (const auto& s : eval_scenarios) env_for(s).validate();
    ids.validate();
    if (agent == pipeline::AgentKind::autodrl)
      for (const auto& s : ids.sequence.scenarios) env::scenario_preset(s);
    if (!(tabular.p > 0.5 && tabular.p <= 1.0)) throw ConfigError("tabular.p must lie in (0.5, 1]");
    if (!(tabular.epsilon >= 0.0 && tabular.epsilon <= 1.0)) throw ConfigError("tabular.epsilon must lie in [0, 1]");
    if (!(tabular.tolerance > 0.0)) throw ConfigError("tabular.tolerance must be > 0");
    if (tabular.log_every == 0) throw ConfigError("tabular.log_every must be >= 1");
    if (sweep.epsilons.size() < 2) throw ConfigError("sweep.epsilons needs at least 2 values");
    for (double e : sweep.epsilons)
      if (!(e >= 0.0)) throw ConfigError("sweep.epsilons must be >= 0");
    if (sweep.seeds.size() < 3) throw ConfigError("sweep.seeds needs at least 3 seeds");
    if (sweep.episodes == 0 || sweep.horizon == 0) throw ConfigError("sweep.episodes and sweep.horizon must be >= 1");
    if (!(sweep.eta > 0.0 && sweep.eta <= 1.0)) throw ConfigError("sweep.eta must lie in (0, 1]");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part)) throw ConfigError("unknown config key '" + key + "'");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  *node = std::move(value);
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  json j = to_json(ExperimentConfig{});
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json user = json::parse(in, nullptr, false);
    if (user.is_discarded()) throw ConfigError("config file '" + path + "' is not valid JSON");
    merge_into(j, user, "");
  }
  for (const auto& o : overrides) apply_override(j, o);
  auto cfg = from_json(j);
  cfg.validate();
  return cfg;
}

std::string config_snapshot(const ExperimentConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

}  // namespace edgeids::cli
