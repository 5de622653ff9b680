#include <algorithm>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "edgeids/csv.hpp"
#include "edgeids/eval.hpp"

namespace edgeids::eval {

double convergence_auc(std::span<const double> curve, double lo, double hi) {
  if (curve.empty()) throw std::invalid_argument("convergence_auc: empty curve");
  const double span = hi > lo ? hi - lo : 1.0;
  double s = 0.0;
  for (double v : curve) s += (v - lo) / span;
  return s / static_cast<double>(curve.size());
}

SweepResult epsilon_sweep(std::span<const double> epsilons, std::span<const std::uint64_t> seeds,
                          const SweepRunner& run) {
  if (epsilons.size() < 2) throw std::invalid_argument("epsilon_sweep: need at least 2 epsilon values");
  if (seeds.empty()) throw std::invalid_argument("epsilon_sweep: need at least one seed");
  SweepResult res;
  for (double eps : epsilons) {
    SweepCurve c;
    c.epsilon = eps;
    for (auto seed : seeds) c.per_seed.push_back(run(eps, seed));
    const std::size_t len = c.per_seed.front().size();
    for (const auto& s : c.per_seed)
      if (s.size() != len || len == 0) throw std::invalid_argument("epsilon_sweep: runs returned unequal curve lengths");
    c.mean.assign(len, 0.0);
    c.std.assign(len, 0.0);
    for (std::size_t e = 0; e < len; ++e) {
      std::vector<double> col;
      for (const auto& s : c.per_seed) col.push_back(s[e]);
      c.mean[e] = mean(col);
      c.std[e] = stddev(col);
    }
    res.curves.push_back(std::move(c));
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& c : res.curves)
    for (const auto& s : c.per_seed)
      for (double v : s) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  for (auto& c : res.curves) {
    for (const auto& s : c.per_seed) c.auc_per_seed.push_back(convergence_auc(s, lo, hi));
    c.auc_mean = mean(c.auc_per_seed);
  }
  res.auc_rank.resize(res.curves.size());
  std::iota(res.auc_rank.begin(), res.auc_rank.end(), 0);
  std::stable_sort(res.auc_rank.begin(), res.auc_rank.end(),
                   [&](std::size_t a, std::size_t b) { return res.curves[a].auc_mean > res.curves[b].auc_mean; });
  return res;
}

void SweepResult::write_csv(std::ostream& os) const {
  csv::Writer w(os);
  w.field("epsilon").field("episode").field("mean").field("std").end_row();
  for (const auto& c : curves)
    for (std::size_t e = 0; e < c.mean.size(); ++e) w.field(c.epsilon).field(e).field(c.mean[e]).field(c.std[e]).end_row();
}

void SweepResult::write_summary_csv(std::ostream& os) const {
  csv::Writer w(os);
  w.field("epsilon").field("auc_mean").field("rank").end_row();
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto rank = static_cast<std::size_t>(std::find(auc_rank.begin(), auc_rank.end(), i) - auc_rank.begin()) + 1;
    w.field(curves[i].epsilon).field(curves[i].auc_mean).field(rank).end_row();
  }
}

}  // namespace edgeids::eval
