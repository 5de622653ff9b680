#pragma once

// Operational log lines: "YYYY-MM-DD HH:MM:SS - LEVEL: message".
// Timestamps follow the simulated clock so repeated runs write identical logs.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace edgeids::log {

enum class Level : std::uint8_t { info, warning, critical, success, policy };

std::string_view to_string(Level l);

/// UTC rendering of a unix time.
std::string format_timestamp(std::int64_t unix_seconds);
std::string format_line(std::int64_t unix_seconds, Level l, std::string_view message);

class Logger {
 public:
  /// `sink` may be null, in which case lines are dropped.
  Logger(std::ostream* sink, std::int64_t epoch_unix_s);

  void advance_to(double sim_seconds) { sim_s_ = sim_seconds; }
  void write(Level l, std::string_view message);
  std::size_t lines_written() const { return lines_; }

 private:
  std::ostream* sink_;
  std::int64_t epoch_;
  double sim_s_ = 0.0;
  std::size_t lines_ = 0;
};

// 2025-01-01 00:00:00 UTC
inline constexpr std::int64_t kDefaultLogEpoch = 1735689600;

}  // namespace edgeids::log
