#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "edgeids/agent.hpp"

namespace edgeids::agent {

double QTable::max_row(std::size_t s) const {
  const auto* row = v.data() + s * actions;
  return *std::max_element(row, row + actions);
}

double TabularMdp::max_abs_reward() const {
  double m = 0.0;
  for (double x : r) m = std::max(m, std::abs(x));
  return m;
}

void TabularMdp::validate() const {
  if (states == 0 || actions == 0) throw std::invalid_argument("mdp: empty state or action set");
  if (p.size() != states * actions * states || r.size() != states * actions)
    throw std::invalid_argument("mdp: kernel or reward table has the wrong size");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("mdp: gamma must lie in (0, 1)");
  for (std::size_t sa = 0; sa < states * actions; ++sa) {
    double total = 0.0;
    for (std::size_t s2 = 0; s2 < states; ++s2) {
      const double pr = p[sa * states + s2];
      if (!(pr >= 0.0)) throw std::invalid_argument("mdp: negative transition probability");
      total += pr;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("mdp: transition row does not sum to 1");
    if (!std::isfinite(r[sa])) throw std::invalid_argument("mdp: non-finite reward");
  }
}

std::size_t TabularMdp::sample_next(std::size_t s, std::size_t a, Rng& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x = u(rng);
  const double* row = p.data() + (s * actions + a) * states;
  for (std::size_t s2 = 0; s2 < states; ++s2) {
    x -= row[s2];
    if (x < 0.0) return s2;
  }
  // Rounding slack: fall back to the last state with positive mass.
  for (std::size_t s2 = states; s2-- > 0;)
    if (row[s2] > 0.0) return s2;
  return states - 1;
}

TabularMdp TabularMdp::toy(std::uint64_t seed, double gamma) {
  Rng rng(seed);
  TabularMdp m;
  m.states = 4;
  m.actions = 4;
  m.gamma = gamma;
  m.p.assign(64, 0.0);
  m.r.assign(16, 0.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t s = 0; s < 4; ++s) {
    // Each state's actions lead to a permutation of all states, so every
    // state is one step from every other.
    std::array<std::size_t, 4> perm{0, 1, 2, 3};
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t a = 0; a < 4; ++a) {
      m.p[(s * 4 + a) * 4 + perm[a]] = 1.0;
      m.r[s * 4 + a] = u(rng);
    }
  }
  return m;
}

TabularMdp TabularMdp::random(std::size_t states, std::size_t actions, std::uint64_t seed, double gamma) {
  Rng rng(seed);
  TabularMdp m;
  m.states = states;
  m.actions = actions;
  m.gamma = gamma;
  m.p.assign(states * actions * states, 0.0);
  m.r.assign(states * actions, 0.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t sa = 0; sa < states * actions; ++sa) {
    double total = 0.0;
    for (std::size_t s2 = 0; s2 < states; ++s2) total += (m.p[sa * states + s2] = u(rng) + 1e-3);
    for (std::size_t s2 = 0; s2 < states; ++s2) m.p[sa * states + s2] /= total;
    m.r[sa] = 2.0 * u(rng) - 1.0;
  }
  return m;
}

QTable bellman_operator(const TabularMdp& mdp, const QTable& q) {
  if (q.states != mdp.states || q.actions != mdp.actions) throw std::invalid_argument("bellman_operator: shape mismatch");
  std::vector<double> vmax(mdp.states);
  for (std::size_t s = 0; s < mdp.states; ++s) vmax[s] = q.max_row(s);
  QTable out(mdp.states, mdp.actions);
  for (std::size_t s = 0; s < mdp.states; ++s)
    for (std::size_t a = 0; a < mdp.actions; ++a) {
      double ev = 0.0;
      for (std::size_t s2 = 0; s2 < mdp.states; ++s2) ev += mdp.prob(s, a, s2) * vmax[s2];
      out(s, a) = mdp.reward(s, a) + mdp.gamma * ev;
    }
  return out;
}

double sup_norm_distance(const QTable& a, const QTable& b) {
  if (a.states != b.states || a.actions != b.actions) throw std::invalid_argument("sup_norm_distance: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i) m = std::max(m, std::abs(a.v[i] - b.v[i]));
  return m;
}

QTable value_iteration(const TabularMdp& mdp, double tol, std::size_t max_iter) {
  mdp.validate();
  QTable q(mdp.states, mdp.actions);
  for (std::size_t it = 0; it < max_iter; ++it) {
    QTable next = bellman_operator(mdp, q);
    const double diff = sup_norm_distance(next, q);
    q = std::move(next);
    if (diff <= tol) break;
  }
  return q;
}

void q_update_tabular(QTable& q, std::size_t s, std::size_t a, double target, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("q_update_tabular: eta must lie in [0, 1]");
  if (s >= q.states || a >= q.actions) throw std::out_of_range("q_update_tabular: index out of range");
  q(s, a) = (1.0 - eta) * q(s, a) + eta * target;
}

double lyapunov_distance(const QTable& q, const QTable& q_ref) {
  if (q.states != q_ref.states || q.actions != q_ref.actions)
    throw std::invalid_argument("lyapunov_distance: shape mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < q.v.size(); ++i) sum += (q.v[i] - q_ref.v[i]) * (q.v[i] - q_ref.v[i]);
  return 0.5 * sum;
}

double empirical_contraction_ratio(const TabularMdp& mdp, const QTable& q1, const QTable& q2) {
  const double denom = sup_norm_distance(q1, q2);
  if (denom == 0.0) throw std::invalid_argument("empirical_contraction_ratio: Q1 equals Q2");
  return sup_norm_distance(bellman_operator(mdp, q1), bellman_operator(mdp, q2)) / denom;
}

namespace {

std::size_t epsilon_greedy_row(const QTable& q, std::size_t s, double epsilon, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (epsilon > 0.0 && u(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, q.actions - 1);
    return pick(rng);
  }
  std::size_t best = 0;
  for (std::size_t a = 1; a < q.actions; ++a)
    if (q(s, a) > q(s, best)) best = a;
  return best;
}

}  // namespace

TabularRunResult run_tabular_q_learning(const TabularMdp& mdp, const TabularRunConfig& cfg, Rng& rng) {
  mdp.validate();
  if (cfg.log_every == 0) throw std::invalid_argument("log_every must be > 0");
  TabularRunResult res;
  res.q_star = value_iteration(mdp);
  res.q = QTable(mdp.states, mdp.actions);
  std::vector<std::size_t> visits(mdp.states * mdp.actions, 0);
  std::size_t s = 0;
  double td_abs_sum = 0.0;
  std::size_t td_count = 0;
  double last_eta = 0.0;

  auto log_row = [&](std::size_t step) {
    DiagnosticsRow row;
    row.step = step;
    row.epsilon = cfg.epsilon;
    row.eta = last_eta;
    row.td_error_mean = td_count ? td_abs_sum / static_cast<double>(td_count) : 0.0;
    row.lyapunov = lyapunov_distance(res.q, res.q_star);
    if (sup_norm_distance(res.q, res.q_star) > 0.0)
      row.contraction_ratio = empirical_contraction_ratio(mdp, res.q, res.q_star);
    res.diagnostics.push_back(row);
    td_abs_sum = 0.0;
    td_count = 0;
  };

  for (std::size_t k = 1; k <= cfg.max_updates; ++k) {
    const std::size_t a = epsilon_greedy_row(res.q, s, cfg.epsilon, rng);
    const std::size_t s2 = mdp.sample_next(s, a, rng);
    const double target = mdp.reward(s, a) + mdp.gamma * res.q.max_row(s2);
    td_abs_sum += std::abs(target - res.q(s, a));
    ++td_count;
    last_eta = robbins_monro_eta(++visits[s * mdp.actions + a], cfg.p);
    q_update_tabular(res.q, s, a, target, last_eta);
    s = s2;
    res.updates = k;
    if (k % cfg.log_every == 0) log_row(k);
    if (cfg.stop_at_tolerance && sup_norm_distance(res.q, res.q_star) < cfg.tolerance) break;
  }
  if (td_count > 0) log_row(res.updates);
  res.final_sup_error = sup_norm_distance(res.q, res.q_star);
  res.converged = res.final_sup_error < cfg.tolerance;
  return res;
}

std::vector<double> tabular_episode_returns(const TabularMdp& mdp, double epsilon, std::size_t episodes,
                                            std::size_t horizon, double eta, Rng& rng) {
  mdp.validate();
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
  QTable q(mdp.states, mdp.actions);
  std::vector<double> returns;
  returns.reserve(episodes);
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    std::size_t s = 0;
    double ret = 0.0;
    for (std::size_t t = 0; t < horizon; ++t) {
      const std::size_t a = epsilon_greedy_row(q, s, epsilon, rng);
      const std::size_t s2 = mdp.sample_next(s, a, rng);
      const double r = mdp.reward(s, a);
      ret += r;
      q_update_tabular(q, s, a, r + mdp.gamma * q.max_row(s2), eta);
      s = s2;
    }
    returns.push_back(ret);
  }
  return returns;
}

}  // namespace edgeids::agent
