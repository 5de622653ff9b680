#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "edgeids/gateway_env.hpp"

namespace edgeids::env {

void MitigationConfig::validate() const {
  if (!(rate_cap_pps > 0.0)) throw std::invalid_argument("mitigation.rate_cap_pps must be > 0");
  if (!(syn_cap_per_source > 0.0)) throw std::invalid_argument("mitigation.syn_cap_per_source must be > 0");
  if (hold_steps == 0) throw std::invalid_argument("mitigation.hold_steps must be > 0");
  if (!(tau_p > 0.0 && tau_p < 1.0)) throw std::invalid_argument("mitigation.tau_p must lie in (0, 1)");
  if (blacklist_expiry == 0) throw std::invalid_argument("mitigation.blacklist_expiry must be > 0");
  if (window == 0) throw std::invalid_argument("mitigation.window must be > 0");
}

void MitigationState::validate() const {
  if (rate_cap && !(*rate_cap > 0.0)) throw std::invalid_argument("rate cap must be > 0");
  if (syn_cap && !(*syn_cap > 0.0)) throw std::invalid_argument("syn cap must be > 0");
}

namespace {

/// Splits `f` into a part keeping `k` packets, `k_syn` of them SYN, and the remainder.
std::pair<FlowRecord, FlowRecord> split_flow(const FlowRecord& f, std::uint64_t k, std::uint64_t k_syn) {
  FlowRecord kept = f, rest = f;
  const std::uint64_t n = f.pkts_total;
  const double frac = n ? static_cast<double>(k) / static_cast<double>(n) : 0.0;
  kept.pkts_total = k;
  kept.syn_pkts = k_syn;
  const std::uint64_t nonsyn_total = n - f.syn_pkts;
  const std::uint64_t nonsyn_kept = k - k_syn;
  std::uint64_t ack = 0;
  if (nonsyn_total > 0)
    ack = static_cast<std::uint64_t>(std::llround(static_cast<double>(f.ack_pkts) * static_cast<double>(nonsyn_kept) /
                                                  static_cast<double>(nonsyn_total)));
  kept.ack_pkts = std::min({ack, f.ack_pkts, k});
  std::uint64_t in = static_cast<std::uint64_t>(std::llround(static_cast<double>(f.pkts_in) * frac));
  in = std::min(in, f.pkts_in);
  if (k - std::min(in, k) > f.pkts_out) in = k - f.pkts_out;
  in = std::min(in, k);
  kept.pkts_in = in;
  kept.pkts_out = k - in;
  std::uint64_t bytes = static_cast<std::uint64_t>(std::llround(static_cast<double>(f.bytes_total) * frac));
  bytes = std::clamp<std::uint64_t>(bytes, k, f.bytes_total - (n - k));
  kept.bytes_total = bytes;

  rest.pkts_total = n - k;
  rest.syn_pkts = f.syn_pkts - k_syn;
  rest.ack_pkts = f.ack_pkts - kept.ack_pkts;
  rest.pkts_in = f.pkts_in - kept.pkts_in;
  rest.pkts_out = f.pkts_out - kept.pkts_out;
  rest.bytes_total = f.bytes_total - kept.bytes_total;
  return {kept, rest};
}

void push_split(const FlowRecord& f, std::uint64_t k, std::uint64_t k_syn, std::vector<FlowRecord>& passed,
                std::vector<FlowRecord>& dropped) {
  if (k == f.pkts_total) {
    passed.push_back(f);
  } else if (k == 0) {
    dropped.push_back(f);
  } else {
    auto [kept, rest] = split_flow(f, k, k_syn);
    passed.push_back(kept);
    dropped.push_back(rest);
  }
}

/// Selection sampling: keeps exactly `need` of `remaining` items, each subset equally likely.
struct Selector {
  std::uint64_t need;
  std::uint64_t remaining;
  bool take(Rng& rng) {
    const bool keep = need > 0 && std::uniform_int_distribution<std::uint64_t>(0, remaining - 1)(rng) < need;
    --remaining;
    if (keep) --need;
    return keep;
  }
  std::uint64_t take_n(std::uint64_t n, Rng& rng) {
    std::uint64_t kept = 0;
    for (std::uint64_t i = 0; i < n; ++i) kept += take(rng) ? 1 : 0;
    return kept;
  }
};

}  // namespace

MitigationResult apply_mitigation(std::span<const FlowRecord> flows, std::span<const std::uint8_t> flagged,
                                  const MitigationState& m, double dt_s, Rng& rng) {
  if (flagged.size() != flows.size()) throw std::invalid_argument("apply_mitigation: flags not aligned with flows");
  m.validate();
  MitigationResult res;
  std::vector<FlowRecord> current;
  current.reserve(flows.size());
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const auto& f = flows[i];
    const bool listed = m.blacklist.count(f.src_id) > 0;
    const bool filtered = m.drop_filter_active && flagged[i];
    if (listed || filtered)
      res.dropped.push_back(f);
    else
      current.push_back(f);
  }

  if (m.syn_cap) {
    const auto allowed = static_cast<std::uint64_t>(std::floor(*m.syn_cap * dt_s));
    std::map<std::uint32_t, std::uint64_t> syn_by_src;
    for (const auto& f : current) syn_by_src[f.src_id] += f.syn_pkts;
    std::map<std::uint32_t, Selector> sel;
    for (const auto& [src, s] : syn_by_src)
      if (s > allowed) sel.emplace(src, Selector{allowed, s});
    std::vector<FlowRecord> next;
    next.reserve(current.size());
    for (const auto& f : current) {
      auto it = sel.find(f.src_id);
      if (it == sel.end() || f.syn_pkts == 0) {
        next.push_back(f);
        continue;
      }
      const std::uint64_t k_syn = it->second.take_n(f.syn_pkts, rng);
      push_split(f, f.pkts_total - f.syn_pkts + k_syn, k_syn, next, res.dropped);
    }
    current = std::move(next);
  }

  if (m.rate_cap) {
    const auto allowed = static_cast<std::uint64_t>(std::floor(*m.rate_cap * dt_s));
    std::uint64_t total = 0;
    for (const auto& f : current) total += f.pkts_total;
    if (total > allowed) {
      Selector sel{allowed, total};
      std::vector<FlowRecord> next;
      next.reserve(current.size());
      for (const auto& f : current) {
        const std::uint64_t k_syn = sel.take_n(f.syn_pkts, rng);
        const std::uint64_t k_other = sel.take_n(f.pkts_total - f.syn_pkts, rng);
        push_split(f, k_syn + k_other, k_syn, next, res.dropped);
      }
      current = std::move(next);
    }
  }
  res.passed = std::move(current);
  return res;
}

double source_attack_probability(std::span<const std::uint8_t> window) {
  if (window.empty()) throw std::invalid_argument("source_attack_probability: empty window");
  const auto flagged = std::count_if(window.begin(), window.end(), [](std::uint8_t v) { return v != 0; });
  return static_cast<double>(flagged) / static_cast<double>(window.size());
}

std::vector<std::uint32_t> blacklist_update(MitigationState& m, const std::map<std::uint32_t, double>& probabilities,
                                            double tau_p, std::size_t expiry, std::size_t now) {
  if (!(tau_p > 0.0 && tau_p < 1.0)) throw std::invalid_argument("blacklist_update: tau_p must lie in (0, 1)");
  std::vector<std::uint32_t> listed;
  for (const auto& [src, p] : probabilities) {
    if (p > tau_p) {
      m.blacklist[src] = now + expiry;
      listed.push_back(src);
    }
  }
  return listed;
}

void blacklist_expire(MitigationState& m, std::size_t now) {
  for (auto it = m.blacklist.begin(); it != m.blacklist.end();) {
    if (it->second <= now)
      it = m.blacklist.erase(it);
    else
      ++it;
  }
}

SourceHistory::SourceHistory(std::size_t window) : window_(window) {
  if (window == 0) throw std::invalid_argument("source history window must be > 0");
}

void SourceHistory::record(const std::map<std::uint32_t, bool>& seen) {
  for (auto& [src, w] : hist_)
    if (!seen.count(src)) w.push_back(0);
  for (const auto& [src, flagged] : seen) hist_[src].push_back(flagged ? 1 : 0);
  for (auto it = hist_.begin(); it != hist_.end();) {
    auto& w = it->second;
    if (w.size() > window_) w.erase(w.begin(), w.end() - static_cast<std::ptrdiff_t>(window_));
    // A window with no flags carries no information beyond absence.
    if (std::none_of(w.begin(), w.end(), [](std::uint8_t v) { return v != 0; }))
      it = hist_.erase(it);
    else
      ++it;
  }
}

std::map<std::uint32_t, double> SourceHistory::probabilities() const {
  std::map<std::uint32_t, double> out;
  for (const auto& [src, w] : hist_) {
    const auto flagged = std::count_if(w.begin(), w.end(), [](std::uint8_t v) { return v != 0; });
    out[src] = static_cast<double>(flagged) / static_cast<double>(window_);
  }
  return out;
}

std::vector<std::uint8_t> SourceHistory::window_of(std::uint32_t src) const {
  std::vector<std::uint8_t> w(window_, 0);
  auto it = hist_.find(src);
  if (it != hist_.end()) std::copy(it->second.begin(), it->second.end(), w.end() - static_cast<std::ptrdiff_t>(it->second.size()));
  return w;
}

}  // namespace edgeids::env
