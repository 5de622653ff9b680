#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace edgeids::csv {

/// Splits one CSV line. Handles double-quoted fields with "" escapes.
std::vector<std::string> split_line(std::string_view line);

/// Quotes a field when it contains a comma, quote or newline.
std::string escape(std::string_view field);

/// Shortest decimal text that reads back to exactly `v`.
std::string format_double(double v);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index for `name`, or nullopt.
  std::optional<std::size_t> column(std::string_view name) const;
};

/// Reads a whole CSV file; the first non-empty line is the header.
Table read_file(const std::string& path);
Table read_stream(std::istream& is);

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}
  Writer& field(std::string_view s);
  Writer& field(double v);
  Writer& field(long long v);
  Writer& field(std::size_t v);
  void end_row();

 private:
  std::ostream& os_;
  bool first_ = true;
};

}  // namespace edgeids::csv
