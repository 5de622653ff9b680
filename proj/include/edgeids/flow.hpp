#pragma once

#include <cstdint>
#include <string_view>

namespace edgeids {

enum class Label : std::uint8_t { benign = 0, attack = 1 };
enum class Protocol : std::uint8_t { tcp = 0, udp = 1 };

namespace flag {
inline constexpr std::uint8_t syn = 1;
inline constexpr std::uint8_t ack = 2;
inline constexpr std::uint8_t fin = 4;
inline constexpr std::uint8_t rst = 8;
}  // namespace flag

/// One bidirectional flow as seen by the gateway within a step. `pkts_in`
/// travel from the source to the gateway, `pkts_out` are responses.
struct FlowRecord {
  std::uint32_t src_id = 0;
  std::uint64_t pkts_total = 0;
  std::uint64_t bytes_total = 0;
  double duration = 0.0;  // seconds
  std::uint64_t pkts_in = 0;
  std::uint64_t pkts_out = 0;
  std::uint8_t flags = 0;  // OR of flag::*
  Label label = Label::benign;
  Protocol protocol = Protocol::tcp;
  std::uint64_t syn_pkts = 0;  // packets carrying SYN
  std::uint64_t ack_pkts = 0;  // packets carrying ACK

  /// Throws std::invalid_argument when a structural invariant is broken.
  void validate() const;
  bool operator==(const FlowRecord&) const = default;
};

std::string_view to_string(Label l);
std::string_view to_string(Protocol p);

}  // namespace edgeids
