#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "edgeids/pipeline.hpp"

namespace edgeids::pipeline {

namespace {

std::string_view policy_message(agent::ActionId a) {
  switch (a) {
    case agent::ActionId::rate_limit: return "Packet Rate Limiting Activated";
    case agent::ActionId::syn_throttle: return "SYN Request Throttling Activated";
    case agent::ActionId::block: return "Anomalous Packet Dropping Activated";
    case agent::ActionId::source_filter: return "Source Blacklist Evaluation Activated";
  }
  return "";
}

double ratio(std::uint64_t num, std::uint64_t den) {
  return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

std::string fmt(const char* spec, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, spec, a, b, c);
  return buf;
}

}  // namespace

void IdsConfig::validate() const {
  detector.validate();
  if (kind == AgentKind::autodrl) sequence.validate();
  agent.validate();
  reward.validate();
}

IdsSystem::IdsSystem(IdsConfig cfg, FlowDetector flow, std::optional<SequenceDetector> seq, agent::DqnAgent dqn)
    : cfg_(std::move(cfg)), flow_(std::move(flow)), seq_(std::move(seq)), dqn_(std::move(dqn)) {
  if (cfg_.kind == AgentKind::tabular) throw std::invalid_argument("IdsSystem does not host the tabular agent");
  if (cfg_.kind == AgentKind::autodrl && !seq_) throw std::invalid_argument("autodrl needs a sequence detector");
  cfg_.reward.variant = cfg_.kind == AgentKind::autodrl ? sustain::RewardVariant::autodrl : sustain::RewardVariant::deepedge;
  if (dqn_.q().state_dim() != state_dim())
    throw neural::DimensionError("layer q.0: input width " + std::to_string(dqn_.q().state_dim()) +
                                 " differs from state dimension " + std::to_string(state_dim()));
}

IdsSystem IdsSystem::build(const IdsConfig& cfg, const env::EnvConfig& env_cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  const auto benign = collect_benign_steps(env_cfg.scenario, cfg.detector.warmup_steps, seed ^ 0x5eedbe11ULL);
  auto flow = FlowDetector::fit(benign, cfg.detector, rng);
  std::optional<SequenceDetector> seq;
  std::size_t latent = flow.latent_dim();
  if (cfg.kind == AgentKind::autodrl) {
    const auto traces = collect_labeled_traces(env_cfg, cfg.sequence.scenarios, seed ^ 0x1abe1ULL);
    seq = SequenceDetector::pretrain(benign, env_cfg.scenario.dt_s, traces, cfg.sequence, rng);
    latent = seq->hidden_dim();
  }
  agent::DqnAgent dqn(4 + latent, cfg.agent, rng);
  return IdsSystem(cfg, std::move(flow), std::move(seq), std::move(dqn));
}

std::size_t IdsSystem::latent_dim() const { return seq_ ? seq_->hidden_dim() : flow_.latent_dim(); }

std::size_t IdsSystem::state_dim() const { return 4 + latent_dim(); }

void IdsSystem::attach(env::GatewayEnv& env) const {
  env.set_flow_scorer([det = flow_](std::span<const FlowRecord> flows, std::vector<double>& out) { det.score_all(flows, out); },
                      flow_.tau_flow());
}

sustain::RewardComponents reward_components(const env::StepOutcome& o, sustain::RewardVariant variant) {
  sustain::RewardComponents c;
  c.detection_rate = ratio(o.dropped_pkts.attack, o.offered_pkts.attack);
  c.error_rate = variant == sustain::RewardVariant::deepedge ? ratio(o.dropped_pkts.benign, o.offered_pkts.benign)
                                                             : ratio(o.passed_pkts.attack, o.offered_pkts.attack);
  c.latency_s = o.resources.latency_s;
  c.energy_j = o.ledger.energy_j;
  c.memory_util = o.ledger.memory_ratio;
  c.carbon_g = o.ledger.carbon_g;
  return c;
}

EpisodeResult run_episode(IdsSystem& ids, env::GatewayEnv& env, Mode mode, Rng& agent_rng, const EpisodeHooks& hooks) {
  const auto& ecfg = env.config();
  const double dt = ecfg.scenario.dt_s;
  const std::size_t total = ecfg.scenario.episode_steps;
  const auto onset = ecfg.scenario.first_onset();
  const auto& icfg = ids.config();
  auto* seq = ids.sequence();
  if (seq) seq->reset();
  auto& dqn = ids.agent();
  const std::size_t ldim = ids.latent_dim();
  const double param_bytes = 16.0 * static_cast<double>(neural::param_count(dqn.q().net));
  log::Logger* logger = hooks.logger;

  EpisodeResult res;
  const std::vector<double> zeros(ldim, 0.0);
  GatewayState s = features::build_state({}, dt, 0.0, zeros, ldim);
  bool alert_prev = false;
  std::optional<agent::ActionId> last_action;
  double loss_sum = 0.0;
  std::size_t loss_n = 0, attack_steps = 0, detected_steps = 0;
  double cpu_sum = 0.0, mem_sum = 0.0, lat_sum = 0.0;

  while (!env.done()) {
    const std::size_t t = env.current_step();
    if (logger) logger->advance_to(hooks.clock_offset_s + static_cast<double>(t) * dt);

    std::optional<agent::ActionId> action;
    if (mode != Mode::noop && alert_prev) action = mode == Mode::train ? dqn.act(s, agent_rng) : dqn.act_greedy(s);

    env::AgentActivity activity;
    activity.update_step = mode == Mode::train && action && dqn.buffer().size() + 1 >= dqn.buffer().batch_size();
    activity.model_bytes = mode == Mode::noop ? 0.0 : dqn.buffer().approx_bytes() + param_bytes;
    const auto out = env.step(action, activity);

    double score = 0.0;
    std::vector<double> latent;
    bool alert = false;
    if (seq) {
      const auto co = seq->push(features::step_summary(out.offered, dt));
      score = co.probability;
      latent = co.hidden;
      alert = score > seq->alert_threshold();
      if (mode == Mode::train)
        seq->learn(out.attack_active ? 1.0 : 0.0, icfg.sequence.rates.supervised.at(seq->supervised_steps()));
    } else {
      auto ss = ids.flow_detector().step_score(out.offered);
      score = ss.anomaly;
      latent = std::move(ss.latent);
      alert = score > ids.flow_detector().tau_step();
    }
    GatewayState s_next = features::build_state(out.passed, dt, score, latent, ldim);

    if (action) {
      ++res.agent_decisions;
      const auto br = sustain::compute_reward(icfg.reward, reward_components(out, icfg.reward.variant));
      res.total_reward += br.total;
      if (mode == Mode::train) {
        if (ids.kind() == AgentKind::autodrl) dqn.set_learning_rate(icfg.sequence.rates.reinforcement.at(dqn.updates()));
        agent::Transition tr;
        tr.s = s;
        tr.a = *action;
        tr.r = br.total;
        tr.breakdown = br;
        tr.carbon_g = out.ledger.carbon_g;
        tr.s_next = s_next;
        tr.step_index = t;
        tr.terminal = t + 1 == total;
        if (const auto loss = dqn.observe(std::move(tr), agent_rng)) {
          if (!std::isfinite(*loss)) throw neural::NonFiniteError("TD loss is not finite at step " + std::to_string(t));
          loss_sum += *loss;
          ++loss_n;
          if (hooks.diagnostics_every > 0 && dqn.updates() % hooks.diagnostics_every == 0) {
            agent::DiagnosticsRow row;
            row.step = dqn.updates();
            row.epsilon = dqn.epsilon();
            row.eta = dqn.hyperparams().lr;
            row.td_error_mean = *loss;
            res.diagnostics.push_back(row);
            if (hooks.on_diagnostics) hooks.on_diagnostics(row, dqn.q());
          }
        }
        dqn.decay();
      }
    }

    if (logger) {
      if (alert && !alert_prev)
        logger->write(log::Level::critical, "Anomaly detected: score " + fmt("%.4g", score) + " above threshold");
      if (action && action != last_action) logger->write(log::Level::policy, policy_message(*action));
      if (!alert && alert_prev) logger->write(log::Level::success, "Traffic normalized, passive monitoring resumed");
      if (t % 100 == 0) {
        const auto lvl = out.resources.cpu_pct > 30.0 ? log::Level::warning : log::Level::info;
        logger->write(lvl, "CPU Usage: " + fmt("%.1f", out.resources.cpu_pct) + "%, Memory Usage: " +
                               fmt("%.1f", 100.0 * out.ledger.memory_ratio) + "%, Energy: " +
                               fmt("%.3f", out.ledger.energy_j) + " J");
      }
    }
    if (action) last_action = action;

    ++res.steps;
    res.offered.benign += out.offered_pkts.benign;
    res.offered.attack += out.offered_pkts.attack;
    res.passed.benign += out.passed_pkts.benign;
    res.passed.attack += out.passed_pkts.attack;
    res.dropped.benign += out.dropped_pkts.benign;
    res.dropped.attack += out.dropped_pkts.attack;
    res.step_confusion.add(alert, out.attack_active);
    res.step_scores.push_back(score);
    res.step_labels.push_back(out.attack_active ? 1 : 0);
    if (alert) {
      ++res.alerts;
      if (!out.attack_active) ++res.false_alerts;
    }
    if (out.attack_active) {
      ++attack_steps;
      if (alert || out.mitigation.any_active()) ++detected_steps;
    }
    if (onset && !res.response_time_s && action && t >= *onset)
      res.response_time_s = static_cast<double>(t - *onset) * dt;
    if (hooks.collect_flow_scores)
      for (std::size_t i = 0; i < out.offered.size(); ++i) {
        res.flow_scores.push_back(out.flow_scores[i]);
        res.flow_labels.push_back(out.offered[i].label == Label::attack ? 1 : 0);
      }
    res.energy_j += out.ledger.energy_j;
    res.carbon_g += out.ledger.carbon_g;
    cpu_sum += out.resources.cpu_pct;
    mem_sum += out.ledger.memory_ratio;
    lat_sum += out.resources.latency_s;
    if (hooks.on_step) hooks.on_step(out);

    s = std::move(s_next);
    alert_prev = alert;
  }

  if (res.steps > 0) {
    const double n = static_cast<double>(res.steps);
    res.mean_cpu_pct = cpu_sum / n;
    res.mean_mem_ratio = mem_sum / n;
    res.mean_latency_s = lat_sum / n;
  }
  if (attack_steps > 0) res.detection_prob = static_cast<double>(detected_steps) / static_cast<double>(attack_steps);
  // An attack that never drew a response is censored at the episode end.
  if (onset && !res.response_time_s && mode != Mode::noop) res.response_time_s = static_cast<double>(total - *onset) * dt;
  res.mean_td_loss = loss_n ? loss_sum / static_cast<double>(loss_n) : 0.0;
  res.epsilon_end = dqn.epsilon();
  res.ledger = env.ledger().records();
  return res;
}

EpisodeResult run_detection_episode(IdsSystem& ids, env::GatewayEnv& env, bool collect_flow_scores) {
  Rng unused(0);
  EpisodeHooks hooks;
  hooks.collect_flow_scores = collect_flow_scores;
  return run_episode(ids, env, Mode::noop, unused, hooks);
}

}  // namespace edgeids::pipeline
