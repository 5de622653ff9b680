#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "edgeids/csv.hpp"
#include "edgeids/features.hpp"

namespace edgeids::features {

namespace {

const char* const kRequired[] = {"src_id", "pkts_total", "bytes_total", "duration", "pkts_in", "pkts_out"};
const char* const kOptional[] = {"flags", "label", "protocol", "syn_pkts", "ack_pkts"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trimmed(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::optional<std::uint64_t> parse_count(std::string_view s) {
  auto v = csv::parse_int(s);
  if (!v || *v < 0) return std::nullopt;
  return static_cast<std::uint64_t>(*v);
}

std::optional<std::uint8_t> parse_flags(std::string_view s) {
  const std::string t = trimmed(s);
  if (t.empty()) return std::uint8_t{0};
  if (auto v = csv::parse_int(t)) {
    if (*v < 0 || *v > 15) return std::nullopt;
    return static_cast<std::uint8_t>(*v);
  }
  std::uint8_t f = 0;
  for (char c : lower(t)) {
    switch (c) {
      case 's': f |= flag::syn; break;
      case 'a': f |= flag::ack; break;
      case 'f': f |= flag::fin; break;
      case 'r': f |= flag::rst; break;
      case '_': case '|': case ' ': break;
      default: return std::nullopt;
    }
  }
  return f;
}

std::optional<Label> parse_label(std::string_view s) {
  const std::string t = lower(trimmed(s));
  if (t == "0" || t == "benign" || t == "normal") return Label::benign;
  if (t == "1" || t == "attack" || t == "malicious") return Label::attack;
  return std::nullopt;
}

std::optional<Protocol> parse_protocol(std::string_view s) {
  const std::string t = lower(trimmed(s));
  if (t == "tcp" || t == "6") return Protocol::tcp;
  if (t == "udp" || t == "17") return Protocol::udp;
  return std::nullopt;
}

}  // namespace

ColumnMapping ColumnMapping::canonical() {
  ColumnMapping m;
  for (const char* f : kRequired) m.fields[f] = f;
  for (const char* f : kOptional) m.fields[f] = f;
  return m;
}

ColumnMapping ColumnMapping::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("column mapping: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("column mapping must be a JSON object");
  ColumnMapping m;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_string()) throw std::invalid_argument("column mapping: value for '" + it.key() + "' must be a string");
    const bool known = std::any_of(std::begin(kRequired), std::end(kRequired), [&](const char* f) { return it.key() == f; }) ||
                       std::any_of(std::begin(kOptional), std::end(kOptional), [&](const char* f) { return it.key() == f; });
    if (!known) throw std::invalid_argument("column mapping: unknown field '" + it.key() + "'");
    m.fields[it.key()] = it.value().get<std::string>();
  }
  return m;
}

ColumnMapping ColumnMapping::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open column mapping '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

IngestResult ingest_flow_stream(std::istream& is, const ColumnMapping& mapping) {
  std::string line;
  std::vector<std::string> header;
  std::size_t line_no = 0;
  while (header.empty() && std::getline(is, line)) {
    ++line_no;
    if (!trimmed(line).empty()) {
      header = csv::split_line(line);
      for (auto& h : header) h = trimmed(h);
    }
  }
  if (header.empty()) throw std::invalid_argument("flow CSV has no header");

  std::map<std::string, std::size_t> col;
  auto resolve = [&](const char* field, bool required) {
    auto it = mapping.fields.find(field);
    if (it == mapping.fields.end()) {
      if (required) throw std::invalid_argument(std::string("column mapping lacks required field '") + field + "'");
      return;
    }
    auto pos = std::find(header.begin(), header.end(), it->second);
    if (pos == header.end()) {
      if (required)
        throw std::invalid_argument("CSV has no column '" + it->second + "' mapped to required field '" + field + "'");
      return;
    }
    col[field] = static_cast<std::size_t>(pos - header.begin());
  };
  for (const char* f : kRequired) resolve(f, true);
  for (const char* f : kOptional) resolve(f, false);

  IngestResult res;
  std::map<std::string, std::uint32_t> interned;
  const std::uint32_t intern_base = 1u << 31;
  while (std::getline(is, line)) {
    ++line_no;
    if (trimmed(line).empty()) continue;
    ++res.rows_in;
    const auto cells = csv::split_line(line);
    auto skip = [&](const std::string& why) {
      ++res.rows_skipped;
      res.skip_reasons.push_back("line " + std::to_string(line_no) + ": " + why);
    };
    auto cell = [&](const char* field) -> std::optional<std::string_view> {
      auto it = col.find(field);
      if (it == col.end()) return std::nullopt;
      if (it->second >= cells.size()) return std::string_view{};
      return std::string_view(cells[it->second]);
    };

    FlowRecord f;
    const std::string src = trimmed(*cell("src_id"));
    if (src.empty()) {
      skip("empty src_id");
      continue;
    }
    if (auto v = csv::parse_int(src); v && *v >= 0 && *v < static_cast<long long>(intern_base)) {
      f.src_id = static_cast<std::uint32_t>(*v);
    } else {
      auto [it, inserted] = interned.emplace(src, intern_base + static_cast<std::uint32_t>(interned.size()));
      f.src_id = it->second;
    }
    const auto pkts = parse_count(*cell("pkts_total"));
    const auto bytes = parse_count(*cell("bytes_total"));
    const auto dur = csv::parse_double(*cell("duration"));
    const auto in = parse_count(*cell("pkts_in"));
    const auto out = parse_count(*cell("pkts_out"));
    if (!pkts) { skip("non-numeric pkts_total"); continue; }
    if (!bytes) { skip("non-numeric bytes_total"); continue; }
    if (!dur || !std::isfinite(*dur) || *dur < 0.0) { skip("invalid duration"); continue; }
    if (!in || !out) { skip("non-numeric pkts_in/pkts_out"); continue; }
    f.pkts_total = *pkts;
    f.bytes_total = *bytes;
    f.duration = *dur;
    f.pkts_in = *in;
    f.pkts_out = *out;
    if (auto c = cell("flags")) {
      auto fl = parse_flags(*c);
      if (!fl) { skip("unparseable flags"); continue; }
      f.flags = *fl;
    }
    if (auto c = cell("label")) {
      auto l = parse_label(*c);
      if (!l) { skip("unknown label"); continue; }
      f.label = *l;
    }
    if (auto c = cell("protocol")) {
      auto p = parse_protocol(*c);
      if (!p) { skip("unsupported protocol"); continue; }
      f.protocol = *p;
    }
    if (auto c = cell("syn_pkts")) {
      auto v = parse_count(*c);
      if (!v) { skip("non-numeric syn_pkts"); continue; }
      f.syn_pkts = *v;
    } else {
      f.syn_pkts = (f.flags & flag::syn) && f.pkts_total > 0 ? 1 : 0;
    }
    if (auto c = cell("ack_pkts")) {
      auto v = parse_count(*c);
      if (!v) { skip("non-numeric ack_pkts"); continue; }
      f.ack_pkts = *v;
    } else {
      f.ack_pkts = (f.flags & flag::ack) ? f.pkts_total - f.syn_pkts : 0;
    }
    try {
      f.validate();
    } catch (const std::invalid_argument& e) {
      skip(e.what());
      continue;
    }
    res.flows.push_back(f);
  }
  return res;
}

IngestResult ingest_flow_csv(const std::string& path, const ColumnMapping& mapping) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open flow CSV '" + path + "'");
  return ingest_flow_stream(in, mapping);
}

void write_flow_csv(std::ostream& os, std::span<const FlowRecord> flows) {
  csv::Writer w(os);
  for (const char* f : kRequired) w.field(std::string_view(f));
  for (const char* f : kOptional) w.field(std::string_view(f));
  w.end_row();
  for (const auto& f : flows) {
    w.field(static_cast<std::size_t>(f.src_id)).field(static_cast<std::size_t>(f.pkts_total));
    w.field(static_cast<std::size_t>(f.bytes_total)).field(f.duration);
    w.field(static_cast<std::size_t>(f.pkts_in)).field(static_cast<std::size_t>(f.pkts_out));
    w.field(static_cast<std::size_t>(f.flags)).field(to_string(f.label)).field(to_string(f.protocol));
    w.field(static_cast<std::size_t>(f.syn_pkts)).field(static_cast<std::size_t>(f.ack_pkts));
    w.end_row();
  }
}

}  // namespace edgeids::features
