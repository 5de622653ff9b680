#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "edgeids/gateway_env.hpp"

namespace edgeids {

void FlowRecord::validate() const {
  if (pkts_in + pkts_out != pkts_total) throw std::invalid_argument("flow: pkts_in + pkts_out != pkts_total");
  if (!(duration >= 0.0) || !std::isfinite(duration)) throw std::invalid_argument("flow: duration must be >= 0");
  if (bytes_total < pkts_total) throw std::invalid_argument("flow: fewer bytes than packets");
  if (syn_pkts > pkts_total || ack_pkts > pkts_total) throw std::invalid_argument("flow: flag counts exceed packets");
}

std::string_view to_string(Label l) { return l == Label::attack ? "attack" : "benign"; }
std::string_view to_string(Protocol p) { return p == Protocol::udp ? "udp" : "tcp"; }

}  // namespace edgeids

namespace edgeids::env {

void BenignConfig::validate() const {
  if (!(flow_rate >= 0.0) || !std::isfinite(flow_rate)) throw std::invalid_argument("benign.flow_rate must be >= 0");
  if (sources == 0) throw std::invalid_argument("benign.sources must be > 0");
  if (!(pkts_log_sd >= 0.0 && bpp_log_sd >= 0.0 && duration_log_sd >= 0.0))
    throw std::invalid_argument("benign log-normal spreads must be >= 0");
  if (!(tcp_fraction >= 0.0 && tcp_fraction <= 1.0)) throw std::invalid_argument("benign.tcp_fraction must lie in [0, 1]");
}

std::string_view to_string(AttackKind k) {
  switch (k) {
    case AttackKind::syn_flood: return "syn_flood";
    case AttackKind::udp_flood: return "udp_flood";
    case AttackKind::zero_day_mix: return "zero_day_mix";
  }
  return "unknown";
}

AttackKind attack_kind_from_string(std::string_view s) {
  if (s == "syn_flood") return AttackKind::syn_flood;
  if (s == "udp_flood") return AttackKind::udp_flood;
  if (s == "zero_day_mix") return AttackKind::zero_day_mix;
  throw std::invalid_argument("unknown attack kind '" + std::string(s) + "'");
}

void ZeroDayKnobs::validate() const {
  if (!(size_min >= 1.0 && size_max >= size_min)) throw std::invalid_argument("zero_day size range invalid");
  if (!(jitter_min >= 0.0 && jitter_max >= jitter_min)) throw std::invalid_argument("zero_day jitter range invalid");
  if (protocol_period == 0) throw std::invalid_argument("zero_day protocol_period must be > 0");
  if (!(rotation_rate >= 0.0 && rotation_rate <= 1.0)) throw std::invalid_argument("zero_day rotation_rate must lie in [0, 1]");
  if (!(app_flood_fraction >= 0.0 && app_flood_fraction <= 1.0))
    throw std::invalid_argument("zero_day app_flood_fraction must lie in [0, 1]");
}

void AttackScenario::validate() const {
  if (!(start_step < end_step)) throw std::invalid_argument("attack start_step must be < end_step");
  if (!(intensity_pps > 0.0) || !std::isfinite(intensity_pps)) throw std::invalid_argument("attack intensity must be > 0");
  if (sources == 0) throw std::invalid_argument("attack sources must be > 0");
  zero_day.validate();
}

void ScenarioConfig::validate() const {
  benign.validate();
  for (const auto& a : attacks) a.validate();
  if (!(dt_s > 0.0)) throw std::invalid_argument("dt_s must be > 0");
}

bool ScenarioConfig::attack_active(std::size_t step) const {
  return std::any_of(attacks.begin(), attacks.end(), [&](const AttackScenario& a) { return a.active(step); });
}

std::optional<std::size_t> ScenarioConfig::first_onset() const {
  std::optional<std::size_t> first;
  for (const auto& a : attacks)
    if (a.start_step < episode_steps && (!first || a.start_step < *first)) first = a.start_step;
  return first;
}

ScenarioConfig scenario_preset(std::string_view name) {
  ScenarioConfig c;
  if (name == "benign") return c;
  AttackScenario a;
  if (name == "syn_flood") {
    c.attacks.push_back(a);
  } else if (name == "severe") {
    a.intensity_pps = 6600.0;
    a.sources = 30;
    c.attacks.push_back(a);
  } else if (name == "udp_flood") {
    a.kind = AttackKind::udp_flood;
    c.attacks.push_back(a);
  } else if (name == "zero_day_mix") {
    a.kind = AttackKind::zero_day_mix;
    a.intensity_pps = 4000.0;
    a.sources = 40;
    c.attacks.push_back(a);
  } else if (name == "mixed") {
    a.start_step = 150;
    a.end_step = 450;
    c.attacks.push_back(a);
    AttackScenario u;
    u.kind = AttackKind::udp_flood;
    u.intensity_pps = 4500.0;
    u.start_step = 550;
    u.end_step = 850;
    c.attacks.push_back(u);
  } else {
    throw std::invalid_argument("unknown scenario preset '" + std::string(name) + "'");
  }
  return c;
}

ScenarioConfig scenario_preset(std::string_view name, std::size_t episode_steps) {
  ScenarioConfig c = scenario_preset(name);
  if (episode_steps == 0) throw std::invalid_argument("episode_steps must be >= 1");
  const std::size_t base = c.episode_steps;
  c.episode_steps = episode_steps;
  if (episode_steps == base) return c;
  for (auto& a : c.attacks) {
    a.start_step = a.start_step * episode_steps / base;
    a.end_step = std::max(a.start_step + 1, a.end_step * episode_steps / base);
    a.end_step = std::min(a.end_step, episode_steps);
    if (a.start_step >= a.end_step) a.start_step = a.end_step - 1;
  }
  return c;
}

namespace {

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

std::uint64_t bytes_for(std::uint64_t pkts, double bpp) {
  const auto b = static_cast<std::uint64_t>(std::llround(static_cast<double>(pkts) * bpp));
  return std::max(b, pkts);
}

FlowRecord benign_flow(const BenignConfig& b, Rng& rng) {
  FlowRecord f;
  f.label = Label::benign;
  f.src_id = std::uniform_int_distribution<std::uint32_t>(0, b.sources - 1)(rng);
  std::lognormal_distribution<double> pk(b.pkts_log_mean, b.pkts_log_sd);
  std::lognormal_distribution<double> bp(b.bpp_log_mean, b.bpp_log_sd);
  std::lognormal_distribution<double> du(b.duration_log_mean, b.duration_log_sd);
  f.pkts_total = 1 + static_cast<std::uint64_t>(std::floor(std::min(pk(rng), 1e6)));
  f.bytes_total = bytes_for(f.pkts_total, std::clamp(bp(rng), 60.0, 1500.0));
  f.duration = std::clamp(du(rng), 0.001, 30.0);
  const bool tcp = uniform(rng, 0.0, 1.0) < b.tcp_fraction;
  if (tcp) {
    f.protocol = Protocol::tcp;
    f.pkts_in = (f.pkts_total + 1) / 2;
    f.pkts_out = f.pkts_total - f.pkts_in;
    f.syn_pkts = 1;
    f.ack_pkts = f.pkts_total - 1;
    f.flags = flag::syn;
    if (f.ack_pkts > 0) f.flags |= flag::ack;
    if (f.pkts_total >= 3) f.flags |= uniform(rng, 0.0, 1.0) < 0.03 ? flag::rst : flag::fin;
  } else {
    f.protocol = Protocol::udp;
    f.pkts_in = (f.pkts_total * 3 + 4) / 5;
    f.pkts_out = f.pkts_total - f.pkts_in;
  }
  return f;
}

FlowRecord flood_flow(std::uint32_t src, std::uint64_t n, Protocol proto, double bpp, double duration) {
  FlowRecord f;
  f.label = Label::attack;
  f.src_id = src;
  f.pkts_total = n;
  f.pkts_in = n;
  f.pkts_out = 0;
  f.bytes_total = bytes_for(n, bpp);
  f.duration = duration;
  f.protocol = proto;
  if (proto == Protocol::tcp) {
    f.flags = flag::syn;
    f.syn_pkts = n;
  }
  return f;
}

}  // namespace

TrafficGenerator::TrafficGenerator(ScenarioConfig cfg) : cfg_(std::move(cfg)), next_rotated_id_(kAttackSourceBase) {
  cfg_.validate();
  // Scenario k owns ids kAttackSourceBase + k*10000 + slot initially;
  // rotated ids are handed out above all of those.
  for (std::size_t k = 0; k < cfg_.attacks.size(); ++k) {
    std::vector<std::uint32_t> ids(cfg_.attacks[k].sources);
    for (std::uint32_t i = 0; i < ids.size(); ++i) ids[i] = kAttackSourceBase + static_cast<std::uint32_t>(k) * 10'000 + i;
    slots_.push_back(std::move(ids));
  }
  next_rotated_id_ = kAttackSourceBase + static_cast<std::uint32_t>(cfg_.attacks.size()) * 10'000;
}

std::vector<FlowRecord> TrafficGenerator::generate(std::size_t step, Rng& rng) {
  const double dt = cfg_.dt_s;
  std::vector<FlowRecord> flows;
  const auto n_benign = std::poisson_distribution<std::uint64_t>(cfg_.benign.flow_rate * dt)(rng);
  flows.reserve(n_benign + 64);
  for (std::uint64_t i = 0; i < n_benign; ++i) flows.push_back(benign_flow(cfg_.benign, rng));

  for (std::size_t k = 0; k < cfg_.attacks.size(); ++k) {
    const auto& a = cfg_.attacks[k];
    if (!a.active(step)) continue;
    const double per_source = a.intensity_pps * dt / static_cast<double>(a.sources);
    std::poisson_distribution<std::uint64_t> count(per_source);
    auto& ids = slots_[k];
    for (std::uint32_t slot = 0; slot < a.sources; ++slot) {
      if (a.kind == AttackKind::zero_day_mix && uniform(rng, 0.0, 1.0) < a.zero_day.rotation_rate)
        ids[slot] = next_rotated_id_++;
      const std::uint64_t n = count(rng);
      if (n == 0) continue;
      switch (a.kind) {
        case AttackKind::syn_flood:
          flows.push_back(flood_flow(ids[slot], n, Protocol::tcp, uniform(rng, 54.0, 66.0), dt * uniform(rng, 0.8, 1.0)));
          break;
        case AttackKind::udp_flood:
          flows.push_back(
              flood_flow(ids[slot], n, Protocol::udp, uniform(rng, 512.0, 1024.0), dt * uniform(rng, 0.8, 1.0)));
          break;
        case AttackKind::zero_day_mix: {
          const auto& z = a.zero_day;
          const bool tcp_phase = (step / z.protocol_period) % 2 == 0;
          const double bpp = uniform(rng, z.size_min, z.size_max);
          const double jitter = uniform(rng, z.jitter_min, z.jitter_max);
          const double duration = std::min(30.0, dt * uniform(rng, 0.5, 1.0) * (1.0 + jitter));
          if (uniform(rng, 0.0, 1.0) < z.app_flood_fraction) {
            FlowRecord f = flood_flow(ids[slot], n, Protocol::tcp, bpp, duration);
            f.pkts_in = (n * 3 + 4) / 5;
            f.pkts_out = n - f.pkts_in;
            f.syn_pkts = 1;
            f.ack_pkts = n - 1;
            f.flags = f.ack_pkts > 0 ? (flag::syn | flag::ack) : flag::syn;
            flows.push_back(f);
          } else {
            flows.push_back(flood_flow(ids[slot], n, tcp_phase ? Protocol::tcp : Protocol::udp, bpp, duration));
          }
          break;
        }
      }
    }
  }
  return flows;
}

std::vector<FlowRecord> generate_step_traffic(const ScenarioConfig& cfg, std::size_t step, Rng& rng) {
  TrafficGenerator g(cfg);
  return g.generate(step, rng);
}

}  // namespace edgeids::env
