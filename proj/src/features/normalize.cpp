#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>

#include "edgeids/features.hpp"
#include "edgeids/neural.hpp"

namespace edgeids::features {

std::string_view to_string(NormKind k) { return k == NormKind::minmax ? "minmax" : "zscore"; }

NormKind norm_kind_from_string(std::string_view s) {
  if (s == "minmax") return NormKind::minmax;
  if (s == "zscore") return NormKind::zscore;
  throw std::invalid_argument("unknown normalizer kind '" + std::string(s) + "'");
}

void Normalizer::fit(std::span<const std::vector<double>> rows) {
  if (rows.empty()) throw std::invalid_argument("Normalizer::fit: no rows");
  const std::size_t d = rows.front().size();
  if (d == 0) throw std::invalid_argument("Normalizer::fit: zero-dimensional rows");
  for (const auto& r : rows)
    if (r.size() != d) throw std::invalid_argument("Normalizer::fit: ragged rows");
  offset_.assign(d, 0.0);
  scale_.assign(d, 1.0);
  const double n = static_cast<double>(rows.size());
  for (std::size_t j = 0; j < d; ++j) {
    if (kind_ == NormKind::minmax) {
      double lo = rows.front()[j], hi = rows.front()[j];
      for (const auto& r : rows) {
        lo = std::min(lo, r[j]);
        hi = std::max(hi, r[j]);
      }
      offset_[j] = lo;
      scale_[j] = hi > lo ? hi - lo : 1.0;
    } else {
      double mean = 0.0;
      for (const auto& r : rows) mean += r[j];
      mean /= n;
      double ss = 0.0;
      for (const auto& r : rows) ss += (r[j] - mean) * (r[j] - mean);
      const double sd = std::sqrt(ss / n);
      offset_[j] = mean;
      scale_[j] = sd > 0.0 ? sd : 1.0;
    }
  }
}

std::vector<double> Normalizer::transform(std::span<const double> x) const {
  if (!fitted()) throw NotFitted("normalizer used before fit");
  if (x.size() != dim()) throw std::invalid_argument("normalizer: dimension mismatch");
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    out[j] = (x[j] - offset_[j]) / scale_[j];
    if (kind_ == NormKind::minmax) out[j] = std::clamp(out[j], 0.0, 1.0);
  }
  return out;
}

void Normalizer::write(std::ostream& os, std::string_view name) const {
  if (!fitted()) throw NotFitted("cannot serialize an unfitted normalizer");
  const auto old = os.precision(17);
  os << "normalizer " << name << ' ' << to_string(kind_) << ' ' << dim() << '\n';
  for (std::size_t j = 0; j < dim(); ++j) os << (j ? " " : "") << offset_[j];
  os << '\n';
  for (std::size_t j = 0; j < dim(); ++j) os << (j ? " " : "") << scale_[j];
  os << '\n';
  os.precision(old);
}

Normalizer Normalizer::read(std::istream& is, std::string_view expected_name) {
  std::string tag, name, kind;
  std::size_t d = 0;
  if (!(is >> tag >> name >> kind >> d) || tag != "normalizer")
    throw neural::CorruptCheckpoint("expected normalizer record '" + std::string(expected_name) + "'");
  if (name != expected_name)
    throw neural::CorruptCheckpoint("expected normalizer '" + std::string(expected_name) + "', found '" + name + "'");
  Normalizer n(norm_kind_from_string(kind));
  n.offset_.resize(d);
  n.scale_.resize(d);
  for (auto& v : n.offset_)
    if (!(is >> v)) throw neural::CorruptCheckpoint("truncated normalizer '" + name + "'");
  for (auto& v : n.scale_)
    if (!(is >> v) || !(v > 0.0)) throw neural::CorruptCheckpoint("truncated or invalid normalizer '" + name + "'");
  return n;
}

FeatureVector normalize(const Normalizer& n, const FeatureVector& v) {
  const auto out = n.transform(v);
  FeatureVector r{};
  std::copy(out.begin(), out.end(), r.begin());
  return r;
}

}  // namespace edgeids::features
