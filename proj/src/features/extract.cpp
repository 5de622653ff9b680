#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "edgeids/features.hpp"

namespace edgeids::features {

const std::array<std::string_view, kFeatureCount>& feature_names() {
  static const std::array<std::string_view, kFeatureCount> names{
      "pkts_total", "bytes_total", "duration", "pkt_rate", "pkts_in", "pkts_out", "bytes_per_pkt", "flags_encoded"};
  return names;
}

double encode_flags(std::uint8_t flags) {
  double v = 0.0;
  if (flags & flag::syn) v += 1.0;
  if (flags & flag::ack) v += 2.0;
  if (flags & flag::fin) v += 4.0;
  if (flags & flag::rst) v += 8.0;
  return v;
}

FeatureVector extract_features(const FlowRecord& f) {
  FeatureVector v{};
  const double pkts = static_cast<double>(f.pkts_total);
  const double duration = std::isfinite(f.duration) ? std::max(f.duration, 0.0) : 0.0;
  v[kPktsTotal] = pkts;
  v[kBytesTotal] = static_cast<double>(f.bytes_total);
  v[kDuration] = duration;
  v[kPktRate] = pkts / std::max(duration, kMinDuration);
  v[kPktsIn] = static_cast<double>(f.pkts_in);
  v[kPktsOut] = static_cast<double>(f.pkts_out);
  v[kBytesPerPkt] = f.pkts_total > 0 ? static_cast<double>(f.bytes_total) / pkts : 0.0;
  v[kFlagsEncoded] = encode_flags(f.flags);
  return v;
}

std::vector<double> log_features(const FeatureVector& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::log1p(v[i]);
  return out;
}

std::vector<double> step_summary(std::span<const FlowRecord> flows, double dt_s) {
  if (!(dt_s > 0.0)) throw std::invalid_argument("step_summary: dt must be > 0");
  double pkts = 0.0, bytes = 0.0, syn = 0.0, ack = 0.0, rate_sum = 0.0, bpp_sum = 0.0;
  std::set<std::uint32_t> sources;
  for (const auto& f : flows) {
    const auto v = extract_features(f);
    pkts += v[kPktsTotal];
    bytes += v[kBytesTotal];
    syn += static_cast<double>(f.syn_pkts);
    ack += static_cast<double>(f.ack_pkts);
    rate_sum += std::log1p(v[kPktRate]);
    bpp_sum += std::log1p(v[kBytesPerPkt]);
    sources.insert(f.src_id);
  }
  const double n = static_cast<double>(flows.size());
  return {std::log1p(n / dt_s),
          std::log1p(pkts / dt_s),
          std::log1p(bytes / dt_s),
          std::log1p(syn / dt_s),
          std::log1p(ack / dt_s),
          std::log1p(static_cast<double>(sources.size())),
          n > 0 ? rate_sum / n : 0.0,
          n > 0 ? bpp_sum / n : 0.0};
}

GatewayState build_state(std::span<const FlowRecord> window, double dt_s, double anomaly_score,
                         std::span<const double> latent, std::size_t expected_latent_dim) {
  if (!(dt_s > 0.0)) throw std::invalid_argument("build_state: dt must be > 0");
  if (latent.size() != expected_latent_dim)
    throw std::invalid_argument("build_state: expected a latent vector of dim " + std::to_string(expected_latent_dim) +
                                ", got " + std::to_string(latent.size()));
  if (!(anomaly_score >= 0.0) || !std::isfinite(anomaly_score))
    throw std::invalid_argument("build_state: anomaly score must be finite and >= 0");
  GatewayState s;
  double pkts = 0.0;
  for (const auto& f : window) {
    pkts += static_cast<double>(f.pkts_total);
    s.syn_count += static_cast<double>(f.syn_pkts);
    s.ack_count += static_cast<double>(f.ack_pkts);
  }
  s.p_rate = pkts / dt_s;
  s.anomaly_score = anomaly_score;
  s.latent.assign(latent.begin(), latent.end());
  return s;
}

}  // namespace edgeids::features
