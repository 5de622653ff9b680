#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "edgeids/eval.hpp"

namespace edgeids::eval {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string fmt_p(const std::optional<double>& p) {
  if (!p) return "-";
  if (*p < 1e-4) return fmt("%.3e", *p);
  return fmt("%.4f", *p);
}

nlohmann::ordered_json anova_json(const AnovaResult& r) {
  nlohmann::ordered_json j;
  j["df_between"] = r.df_between;
  j["df_within"] = r.df_within;
  j["ss_between"] = r.ss_between;
  j["ss_within"] = r.ss_within;
  j["ss_total"] = r.ss_total;
  j["ms_between"] = r.ms_between;
  j["ms_within"] = r.ms_within;
  j["F"] = r.f ? nlohmann::ordered_json(*r.f) : nlohmann::ordered_json(nullptr);
  j["p"] = r.p ? nlohmann::ordered_json(*r.p) : nlohmann::ordered_json(nullptr);
  j["partial_eta_sq"] = r.partial_eta_sq;
  return j;
}

}  // namespace

std::string format_anova_text(const std::string& title, const AnovaResult& r) {
  const std::vector<std::vector<std::string>> rows{
      {"Source", "Degrees of Freedom", "Sum of Squares", "Mean Square", "F Statistic", "P-value"},
      {"Between Groups", fmt("%.0f", r.df_between), fmt("%.6g", r.ss_between), fmt("%.6g", r.ms_between),
       r.f ? fmt("%.4f", *r.f) : "-", fmt_p(r.p)},
      {"Within Groups", fmt("%.0f", r.df_within), fmt("%.6g", r.ss_within), fmt("%.6g", r.ms_within), "-", "-"},
      {"Total", fmt("%.0f", r.df_between + r.df_within), fmt("%.6g", r.ss_total), "-", "-", "-"},
  };
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::ostringstream os;
  os << title << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      os << rows[i][c] << std::string(width[c] - rows[i][c].size(), ' ');
      os << (c + 1 < rows[i].size() ? " | " : "\n");
    }
    if (i == 0) {
      for (std::size_t c = 0; c < width.size(); ++c) os << std::string(width[c], '-') << (c + 1 < width.size() ? "-+-" : "\n");
    }
  }
  os << "partial eta^2 = " << fmt("%.4f", r.partial_eta_sq) << '\n';
  return os.str();
}

std::string reproduction_text(std::span<const ReproducedAnova> rows) {
  std::ostringstream os;
  os << "metric                 F_reported  F_computed  p_computed  partial_eta2  status\n";
  for (const auto& r : rows) {
    char line[200];
    std::snprintf(line, sizeof line, "%-22s %10.4f  %10.4f  %10.3e  %12.4f  %s\n", r.table.metric.c_str(),
                  r.table.reported_f, r.computed.f.value_or(0.0), r.computed.p.value_or(1.0), r.computed.partial_eta_sq,
                  r.consistent ? "consistent" : "DISCREPANCY (reported F does not follow from its SS/df)");
    os << line;
  }
  return os.str();
}

ComparisonReport compare_models(const std::string& name_a, const std::map<std::string, std::vector<double>>& a,
                                const std::string& name_b, const std::map<std::string, std::vector<double>>& b,
                                std::span<const std::string> metrics) {
  ComparisonReport rep;
  rep.name_a = name_a;
  rep.name_b = name_b;
  for (const auto& m : metrics) {
    auto ia = a.find(m);
    auto ib = b.find(m);
    if (ia == a.end()) throw std::invalid_argument("compare_models: '" + name_a + "' lacks metric '" + m + "'");
    if (ib == b.end()) throw std::invalid_argument("compare_models: '" + name_b + "' lacks metric '" + m + "'");
    if (ia->second.size() != ib->second.size())
      throw std::invalid_argument("compare_models: metric '" + m + "' has mismatched sample counts");
    MetricComparison row;
    row.metric = m;
    row.anova = one_way_anova(ia->second, ib->second);
    row.mean_a = mean(ia->second);
    row.mean_b = mean(ib->second);
    rep.rows.push_back(row);
  }
  return rep;
}

std::string ComparisonReport::to_json() const {
  nlohmann::ordered_json j;
  j["model_a"] = name_a;
  j["model_b"] = name_b;
  j["metrics"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json m;
    m["metric"] = r.metric;
    m["mean_a"] = r.mean_a;
    m["mean_b"] = r.mean_b;
    m["anova"] = anova_json(r.anova);
    j["metrics"].push_back(m);
  }
  return j.dump(2);
}

std::string ComparisonReport::to_text() const {
  std::ostringstream os;
  for (const auto& r : rows) {
    os << format_anova_text("ANOVA: " + r.metric + " (" + name_a + " vs " + name_b + ")", r.anova);
    os << "mean " << name_a << " = " << fmt("%.6g", r.mean_a) << ", mean " << name_b << " = " << fmt("%.6g", r.mean_b)
       << "\n\n";
  }
  return os.str();
}

}  // namespace edgeids::eval
