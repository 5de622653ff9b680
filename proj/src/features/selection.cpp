#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "edgeids/features.hpp"
#include "edgeids/neural.hpp"

namespace edgeids::features {

void Dataset::validate() const {
  if (names.size() != columns.size()) throw std::invalid_argument("dataset: names and columns differ in count");
  for (const auto& c : columns)
    if (c.size() != rows()) throw std::invalid_argument("dataset: ragged columns");
  if (!labels.empty() && labels.size() != rows()) throw std::invalid_argument("dataset: label count mismatch");
}

Dataset candidate_table(std::span<const FlowRecord> flows) {
  Dataset d;
  d.names = {"pkts_total",   "bytes_total",   "duration",     "pkt_rate",  "pkts_in",       "pkts_out",
             "bytes_per_pkt", "flags_encoded", "log_pkts_total", "mean_iat",  "syn_ratio",     "ack_ratio",
             "is_tcp",        "in_out_ratio",  "bytes_per_sec",  "ip_version"};
  d.columns.assign(d.names.size(), {});
  for (auto& c : d.columns) c.reserve(flows.size());
  for (const auto& f : flows) {
    const auto v = extract_features(f);
    for (std::size_t j = 0; j < kFeatureCount; ++j) d.columns[j].push_back(v[j]);
    const double pkts = static_cast<double>(f.pkts_total);
    const double safe_pkts = std::max(pkts, 1.0);
    d.columns[8].push_back(std::log1p(pkts));
    d.columns[9].push_back(v[kDuration] / std::max(pkts - 1.0, 1.0));
    d.columns[10].push_back(static_cast<double>(f.syn_pkts) / safe_pkts);
    d.columns[11].push_back(static_cast<double>(f.ack_pkts) / safe_pkts);
    d.columns[12].push_back(f.protocol == Protocol::tcp ? 1.0 : 0.0);
    d.columns[13].push_back(static_cast<double>(f.pkts_in) / (static_cast<double>(f.pkts_out) + 1.0));
    d.columns[14].push_back(v[kBytesTotal] / std::max(v[kDuration], kMinDuration));
    d.columns[15].push_back(4.0);
    d.labels.push_back(f.label == Label::attack ? 1 : 0);
  }
  return d;
}

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("sample_variance: need at least 2 values");
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(x.size() - 1);
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("pearson: need two equal-length series");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw std::invalid_argument("pearson: zero-variance column");
  return sab / std::sqrt(saa * sbb);
}

std::vector<std::size_t> variance_filter(const Dataset& d, double threshold) {
  d.validate();
  if (d.rows() < 2) throw std::invalid_argument("variance_filter: need at least 2 rows");
  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < d.columns.size(); ++j)
    if (sample_variance(d.columns[j]) > threshold) kept.push_back(j);
  return kept;
}

std::vector<std::size_t> pearson_filter(const Dataset& d, std::span<const std::size_t> candidates, double rho_max) {
  d.validate();
  for (std::size_t j : candidates)
    if (sample_variance(d.columns.at(j)) == 0.0)
      throw std::invalid_argument("pearson_filter: zero-variance column '" + d.names[j] + "'");
  std::vector<std::size_t> kept;
  for (std::size_t j : candidates) {
    bool redundant = false;
    for (std::size_t k : kept) {
      if (std::abs(pearson(d.columns[j], d.columns[k])) > rho_max) {
        redundant = true;
        break;
      }
    }
    if (!redundant) kept.push_back(j);
  }
  return kept;
}

std::vector<double> mutual_information_scores(const Dataset& d, std::span<const std::size_t> cols, std::size_t bins) {
  d.validate();
  if (bins < 2) throw std::invalid_argument("mutual_information_scores: need at least 2 bins");
  if (d.labels.size() != d.rows() || d.rows() == 0) throw std::invalid_argument("mutual_information_scores: no labels");
  const auto positives = std::count(d.labels.begin(), d.labels.end(), 1);
  if (positives == 0 || static_cast<std::size_t>(positives) == d.rows())
    throw std::invalid_argument("mutual_information_scores: label has a single class");
  const double n = static_cast<double>(d.rows());
  std::vector<double> out;
  for (std::size_t j : cols) {
    const auto& c = d.columns.at(j);
    const auto [lo_it, hi_it] = std::minmax_element(c.begin(), c.end());
    const double lo = *lo_it, hi = *hi_it;
    std::vector<double> joint(bins * 2, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      std::size_t b = 0;
      if (hi > lo) b = std::min(bins - 1, static_cast<std::size_t>((c[i] - lo) / (hi - lo) * static_cast<double>(bins)));
      joint[b * 2 + (d.labels[i] ? 1 : 0)] += 1.0;
    }
    const double py1 = static_cast<double>(positives) / n;
    const double py[2] = {1.0 - py1, py1};
    double mi = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
      const double px = (joint[b * 2] + joint[b * 2 + 1]) / n;
      for (int y = 0; y < 2; ++y) {
        const double pxy = joint[b * 2 + static_cast<std::size_t>(y)] / n;
        if (pxy > 0.0) mi += pxy * std::log(pxy / (px * py[y]));
      }
    }
    out.push_back(std::max(mi, 0.0));
  }
  return out;
}

SaliencyHook make_mlp_saliency_hook(std::uint64_t seed, std::size_t epochs, std::size_t hidden, double lr,
                                    std::size_t max_rows) {
  return [=](const Dataset& d, std::span<const std::size_t> cols) {
    d.validate();
    if (d.labels.size() != d.rows()) throw std::invalid_argument("saliency hook: labels required");
    const std::size_t stride = std::max<std::size_t>(1, (d.rows() + max_rows - 1) / max_rows);
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < d.rows(); i += stride) rows.push_back(i);

    std::vector<double> mean(cols.size(), 0.0), sd(cols.size(), 1.0);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const auto& c = d.columns[cols[k]];
      double m = 0.0;
      for (auto i : rows) m += c[i];
      m /= static_cast<double>(rows.size());
      double ss = 0.0;
      for (auto i : rows) ss += (c[i] - m) * (c[i] - m);
      mean[k] = m;
      sd[k] = ss > 0.0 ? std::sqrt(ss / static_cast<double>(rows.size())) : 1.0;
    }
    auto row_vec = [&](std::size_t i) {
      std::vector<double> x(cols.size());
      for (std::size_t k = 0; k < cols.size(); ++k) x[k] = (d.columns[cols[k]][i] - mean[k]) / sd[k];
      return x;
    };

    neural::Rng rng(seed);
    const std::size_t sizes[] = {cols.size(), hidden, 1};
    auto mlp = neural::Mlp::init(sizes, neural::Activation::tanh, neural::Activation::sigmoid, rng);
    std::vector<std::size_t> order = rows;
    for (std::size_t e = 0; e < epochs; ++e) {
      std::shuffle(order.begin(), order.end(), rng);
      for (auto i : order) {
        const double y = d.labels[i] ? 1.0 : 0.0;
        const auto lg = neural::mlp_gradients(mlp, row_vec(i), std::span<const double>(&y, 1),
                                              neural::LossKind::binary_cross_entropy);
        neural::apply_gradients(mlp, lg.grads, lr);
      }
    }
    std::vector<double> sal(cols.size(), 0.0);
    for (auto i : rows) {
      const double y = d.labels[i] ? 1.0 : 0.0;
      const auto g = neural::mlp_input_gradient(mlp, row_vec(i), std::span<const double>(&y, 1),
                                                neural::LossKind::binary_cross_entropy);
      for (std::size_t k = 0; k < cols.size(); ++k) sal[k] += std::abs(g[k]);
    }
    for (auto& s : sal) s /= static_cast<double>(rows.size());
    return sal;
  };
}

RfeResult saliency_rfe(const Dataset& d, std::span<const std::size_t> cols, std::size_t target_count,
                       const SaliencyHook& hook) {
  if (target_count == 0) throw std::invalid_argument("saliency_rfe: target_count must be > 0");
  if (target_count > cols.size()) throw std::invalid_argument("saliency_rfe: target_count exceeds available columns");
  RfeResult res;
  std::vector<std::size_t> current(cols.begin(), cols.end());
  while (current.size() > target_count) {
    const auto sal = hook(d, current);
    if (sal.size() != current.size()) throw std::logic_error("saliency hook returned the wrong count");
    const auto worst = static_cast<std::size_t>(std::distance(sal.begin(), std::min_element(sal.begin(), sal.end())));
    res.elimination.push_back(current[worst]);
    current.erase(current.begin() + static_cast<std::ptrdiff_t>(worst));
  }
  res.final_set = current;
  // Survivors are ranked by their saliency in the final model.
  std::vector<std::size_t> survivors = current;
  if (survivors.size() > 1) {
    const auto sal = hook(d, current);
    std::vector<std::size_t> idx(current.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return sal[a] > sal[b]; });
    for (std::size_t k = 0; k < idx.size(); ++k) survivors[k] = current[idx[k]];
  }
  res.ranking = survivors;
  res.ranking.insert(res.ranking.end(), res.elimination.rbegin(), res.elimination.rend());
  return res;
}

std::string SelectionReport::to_json() const {
  nlohmann::ordered_json j;
  j["variance_kept"] = variance_kept;
  j["correlation_kept"] = correlation_kept;
  j["mi_scores_nats"] = mi_scores;
  j["rfe_ranking"] = rfe_ranking;
  j["final_set"] = final_set;
  return j.dump(2);
}

SelectionReport run_selection(const Dataset& d, const SelectionConfig& cfg, const SaliencyHook& hook) {
  SelectionReport r;
  const auto var_kept = variance_filter(d, cfg.variance_threshold);
  const auto corr_kept = pearson_filter(d, var_kept, cfg.rho_max);
  if (corr_kept.size() < cfg.target_count)
    throw std::invalid_argument("feature selection: only " + std::to_string(corr_kept.size()) +
                                " columns survive correlation filtering, need " + std::to_string(cfg.target_count));
  const auto mi = mutual_information_scores(d, corr_kept, cfg.mi_bins);
  const auto rfe = saliency_rfe(d, corr_kept, cfg.target_count, hook);
  for (auto j : var_kept) r.variance_kept.push_back(d.names[j]);
  for (std::size_t k = 0; k < corr_kept.size(); ++k) {
    r.correlation_kept.push_back(d.names[corr_kept[k]]);
    r.mi_scores[d.names[corr_kept[k]]] = mi[k];
  }
  for (auto j : rfe.ranking) r.rfe_ranking.push_back(d.names[j]);
  for (auto j : rfe.final_set) r.final_set.push_back(d.names[j]);
  return r;
}

}  // namespace edgeids::features
