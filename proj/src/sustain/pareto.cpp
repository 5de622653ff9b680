#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "edgeids/sustain.hpp"

namespace edgeids::sustain {

std::vector<EnergyCarbonPoint> pareto_front(const std::vector<EnergyCarbonPoint>& points) {
  for (const auto& p : points)
    if (!std::isfinite(p.energy) || !std::isfinite(p.carbon)) throw RangeError("pareto_front: non-finite point");

  // Sweep in (energy, carbon) order: a point survives iff its carbon is below
  // every carbon seen at strictly smaller energy, and it is the minimum carbon
  // among points sharing its energy.
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].energy != points[b].energy) return points[a].energy < points[b].energy;
    return points[a].carbon < points[b].carbon;
  });

  std::vector<bool> keep(points.size(), false);
  double best_before = std::numeric_limits<double>::infinity();  // min carbon at strictly smaller energy
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    const double e = points[order[i]].energy;
    while (j < order.size() && points[order[j]].energy == e) ++j;
    const double group_min = points[order[i]].carbon;
    if (group_min < best_before) {
      // Every member equal to the group minimum survives; strictly larger
      // carbon at equal energy is dominated.
      for (std::size_t k = i; k < j && points[order[k]].carbon == group_min; ++k) keep[order[k]] = true;
    }
    best_before = std::min(best_before, group_min);
    i = j;
  }

  std::vector<EnergyCarbonPoint> out;
  for (std::size_t k = 0; k < points.size(); ++k)
    if (keep[k]) out.push_back(points[k]);
  return out;
}

PenaltyMatrix::PenaltyMatrix(const std::array<std::array<double, 3>, 3>& h) : h_(h) {
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) {
      if (!std::isfinite(h[r][c])) throw RangeError("penalty matrix: non-finite entry");
      if (h[r][c] != h[c][r]) throw RangeError("penalty matrix: not symmetric");
    }
  const double m1 = h[0][0];
  const double m2 = h[0][0] * h[1][1] - h[0][1] * h[1][0];
  const double m3 = h[0][0] * (h[1][1] * h[2][2] - h[1][2] * h[2][1]) -
                    h[0][1] * (h[1][0] * h[2][2] - h[1][2] * h[2][0]) +
                    h[0][2] * (h[1][0] * h[2][1] - h[1][1] * h[2][0]);
  if (!(m1 > 0.0 && m2 > 0.0 && m3 > 0.0)) throw RangeError("penalty matrix: not positive definite");
}

PenaltyMatrix PenaltyMatrix::from_coupling(double a4, double a5, double a6, double a45, double a46, double a56) {
  return PenaltyMatrix({{{a4, a45 / 2.0, a46 / 2.0}, {a45 / 2.0, a5, a56 / 2.0}, {a46 / 2.0, a56 / 2.0, a6}}});
}

double penalty_value(const PenaltyMatrix& h, const std::array<double, 3>& z) {
  const auto& m = h.values();
  double v = 0.0;
  for (std::size_t r = 0; r < 3; ++r) {
    double row = 0.0;
    for (std::size_t c = 0; c < 3; ++c) row += m[r][c] * z[c];
    v += z[r] * row;
  }
  return v;
}

}  // namespace edgeids::sustain
