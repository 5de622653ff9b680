#include "edgeids/log.hpp"

#include <cmath>
#include <ctime>
#include <ostream>

namespace edgeids::log {

std::string_view to_string(Level l) {
  switch (l) {
    case Level::info: return "INFO";
    case Level::warning: return "WARNING";
    case Level::critical: return "CRITICAL";
    case Level::success: return "SUCCESS";
    case Level::policy: return "POLICY";
  }
  return "INFO";
}

std::string format_timestamp(std::int64_t unix_seconds) {
  const std::time_t t = static_cast<std::time_t>(unix_seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%d %H:%M:%S", &tm);
  return buf;
}

std::string format_line(std::int64_t unix_seconds, Level l, std::string_view message) {
  std::string out = format_timestamp(unix_seconds);
  out += " - ";
  out += to_string(l);
  out += ": ";
  out += message;
  return out;
}

Logger::Logger(std::ostream* sink, std::int64_t epoch_unix_s) : sink_(sink), epoch_(epoch_unix_s) {}

void Logger::write(Level l, std::string_view message) {
  if (!sink_) return;
  *sink_ << format_line(epoch_ + static_cast<std::int64_t>(std::floor(sim_s_)), l, message) << '\n';
  ++lines_;
}

}  // namespace edgeids::log
