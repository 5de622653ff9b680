#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "edgeids/agent.hpp"

namespace edgeids {

void GatewayState::validate() const {
  const double scalars[] = {p_rate, syn_count, ack_count, anomaly_score};
  for (double v : scalars)
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("gateway state: fields must be finite and >= 0");
  for (double v : latent)
    if (!std::isfinite(v)) throw std::invalid_argument("gateway state: non-finite latent entry");
}

std::vector<double> GatewayState::encode() const {
  std::vector<double> x;
  x.reserve(dim());
  x.push_back(std::log1p(p_rate));
  x.push_back(std::log1p(syn_count));
  x.push_back(std::log1p(ack_count));
  x.push_back(std::log1p(anomaly_score));
  x.insert(x.end(), latent.begin(), latent.end());
  return x;
}

}  // namespace edgeids

namespace edgeids::agent {

std::string_view to_string(ActionId a) {
  switch (a) {
    case ActionId::rate_limit: return "a1_rate_limit";
    case ActionId::syn_throttle: return "a2_syn_throttle";
    case ActionId::block: return "a3_block";
    case ActionId::source_filter: return "a4_source_filter";
  }
  return "unknown";
}

ActionId action_from_index(std::size_t i) {
  if (i >= kActionCount) throw std::out_of_range("action index " + std::to_string(i) + " out of range");
  return static_cast<ActionId>(i);
}

QNetwork QNetwork::init(std::size_t state_dim, std::span<const std::size_t> hidden, Rng& rng) {
  std::vector<std::size_t> sizes{state_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(kActionCount);
  return QNetwork{neural::Mlp::init(sizes, neural::Activation::relu, neural::Activation::identity, rng)};
}

std::vector<double> QNetwork::q_values(const GatewayState& s) const {
  if (s.dim() != state_dim())
    throw neural::DimensionError("q-network expects state dim " + std::to_string(state_dim()) + ", got " +
                                 std::to_string(s.dim()));
  return q_values_encoded(s.encode());
}

std::vector<double> QNetwork::q_values_encoded(std::span<const double> x) const { return neural::mlp_forward(net, x); }

ActionId greedy_action(std::span<const double> q) {
  if (q.size() != kActionCount) throw neural::DimensionError("greedy_action: expected 4 Q-values");
  std::size_t best = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!std::isfinite(q[i])) throw neural::NonFiniteError("greedy_action: non-finite Q-value");
    if (q[i] > q[best]) best = i;
  }
  return action_from_index(best);
}

ActionId select_action(std::span<const double> q, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("select_action: epsilon must lie in [0, 1]");
  const ActionId greedy = greedy_action(q);
  if (epsilon > 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < epsilon) {
      std::uniform_int_distribution<std::size_t> pick(0, kActionCount - 1);
      return action_from_index(pick(rng));
    }
  }
  return greedy;
}

ActionId select_action(const QNetwork& q, const GatewayState& s, double epsilon, Rng& rng) {
  const auto values = q.q_values(s);
  return select_action(values, epsilon, rng);
}

double td_target(const Transition& t, const QNetwork& q_target, double gamma, double carbon_xi) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("td_target: gamma must lie in (0, 1)");
  const double base = t.r - carbon_xi * t.carbon_g;
  if (t.terminal) return base;
  const auto next = q_target.q_values(t.s_next);
  return base + gamma * *std::max_element(next.begin(), next.end());
}

double td_loss(const QNetwork& q, std::span<const Transition> batch, const QNetwork& q_target, double gamma,
               double carbon_xi) {
  if (batch.empty()) throw std::invalid_argument("td_loss: empty batch");
  double loss = 0.0;
  for (const auto& t : batch) {
    const double y = td_target(t, q_target, gamma, carbon_xi);
    const double d = q.q_values(t.s)[index_of(t.a)] - y;
    loss += d * d;
  }
  return loss / static_cast<double>(batch.size());
}

double q_update_network(QNetwork& q, std::span<const Transition> batch, const QNetwork& q_target, double gamma,
                        double lr, double carbon_xi) {
  if (batch.empty()) throw std::invalid_argument("q_update_network: empty batch");
  const double n = static_cast<double>(batch.size());
  auto grads = neural::zeros_like(q.net);
  double loss = 0.0;
  std::vector<double> upstream(kActionCount);
  for (const auto& t : batch) {
    const double y = td_target(t, q_target, gamma, carbon_xi);
    const auto trace = neural::mlp_forward_trace(q.net, t.s.encode());
    const double d = trace.output()[index_of(t.a)] - y;
    loss += d * d;
    std::fill(upstream.begin(), upstream.end(), 0.0);
    upstream[index_of(t.a)] = 2.0 * d / n;
    neural::mlp_backward(q.net, trace, upstream, grads);
  }
  loss /= n;
  if (!std::isfinite(loss)) throw neural::NonFiniteError("q_update_network: non-finite TD loss");
  neural::apply_gradients(q.net, grads, lr);
  return loss;
}

DqnAgent::DqnAgent(std::size_t state_dim, AgentHyperparams hp, Rng& init_rng)
    : hp_(std::move(hp)),
      q_(QNetwork::init(state_dim, hp_.hidden, init_rng)),
      target_(q_),
      buffer_(hp_.replay_capacity, hp_.batch_size),
      epsilon_(normalize_epsilon(hp_.epsilon, hp_.epsilon_unit)) {
  hp_.validate();
}

ActionId DqnAgent::act(const GatewayState& s, Rng& rng) const { return select_action(q_, s, epsilon_, rng); }

ActionId DqnAgent::act_greedy(const GatewayState& s) const { return greedy_action(q_.q_values(s)); }

std::optional<double> DqnAgent::observe(Transition t, Rng& rng) {
  buffer_.push(std::move(t));
  if (buffer_.size() < buffer_.batch_size()) return std::nullopt;
  const auto batch = buffer_.sample(rng);
  const double loss = q_update_network(q_, batch, target_, hp_.gamma, hp_.lr, hp_.carbon_xi);
  ++updates_;
  if (updates_ % hp_.target_sync_every == 0) sync_target();
  return loss;
}

void DqnAgent::set_learning_rate(double lr) {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw std::invalid_argument("learning rate must be > 0");
  hp_.lr = lr;
}

void DqnAgent::decay() {
  if (hp_.epsilon_decay < 1.0) epsilon_ = decay_epsilon(epsilon_, std::min(hp_.epsilon_min, epsilon_), hp_.epsilon_decay);
}

double lyapunov_distance(const QNetwork& q, const QNetwork& q_ref, std::span<const GatewayState> probes) {
  if (probes.empty()) throw std::invalid_argument("lyapunov_distance: no probe states");
  if (q.state_dim() != q_ref.state_dim()) throw neural::DimensionError("lyapunov_distance: network shape mismatch");
  double sum = 0.0;
  for (const auto& s : probes) {
    const auto a = q.q_values(s);
    const auto b = q_ref.q_values(s);
    for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
  }
  return 0.5 * sum;
}

}  // namespace edgeids::agent
