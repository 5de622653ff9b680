#pragma once

#include <cstddef>
#include <vector>

namespace edgeids {

/// MDP state observed by the agents at one step.
struct GatewayState {
  double p_rate = 0.0;         // passed packets per second
  double syn_count = 0.0;      // SYN packets in the window
  double ack_count = 0.0;      // ACK packets in the window
  double anomaly_score = 0.0;  // A_s >= 0
  std::vector<double> latent;  // h_t, empty in tabular mode

  std::size_t dim() const { return 4 + latent.size(); }
  void validate() const;

  /// Network input: [log1p(P_rate), log1p(SYN), log1p(ACK), log1p(A_s), h...].
  /// Counts span several decades, so they enter on a log scale.
  std::vector<double> encode() const;
};

}  // namespace edgeids
