#pragma once

// DQN learner shared by both detectors, plus the tabular Q-learning suite used
// to check contraction and convergence behaviour against value iteration.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "edgeids/gateway_state.hpp"
#include "edgeids/neural.hpp"
#include "edgeids/sustain.hpp"

namespace edgeids::agent {

using Rng = std::mt19937_64;

enum class ActionId : std::uint8_t { rate_limit = 0, syn_throttle = 1, block = 2, source_filter = 3 };
inline constexpr std::size_t kActionCount = 4;

std::string_view to_string(ActionId a);
ActionId action_from_index(std::size_t i);
inline std::size_t index_of(ActionId a) { return static_cast<std::size_t>(a); }

struct Transition {
  GatewayState s;
  ActionId a = ActionId::rate_limit;
  double r = 0.0;
  sustain::RewardBreakdown breakdown;
  double carbon_g = 0.0;  // C_t for the carbon-penalized target
  GatewayState s_next;
  std::size_t step_index = 0;
  bool terminal = false;
};

class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultReplayCapacity = 50'000;
inline constexpr std::size_t kDefaultBatchSize = 64;

/// Fixed-capacity ring; once full, each push evicts the oldest transition.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = kDefaultReplayCapacity, std::size_t batch_size = kDefaultBatchSize);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t batch_size() const { return batch_size_; }
  bool empty() const { return items_.empty(); }
  void clear() { items_.clear(); }

  /// Uniform sampling with replacement; throws InsufficientData below batch_size.
  std::vector<Transition> sample(Rng& rng) const;
  /// Survivors, oldest first.
  const std::deque<Transition>& contents() const { return items_; }
  /// Rough resident size, used by the memory proxy.
  double approx_bytes() const;

 private:
  std::size_t capacity_;
  std::size_t batch_size_;
  std::deque<Transition> items_;
};

struct QNetwork {
  neural::Mlp net;

  /// state_dim -> hidden... -> 4 with relu hidden layers and identity output.
  static QNetwork init(std::size_t state_dim, std::span<const std::size_t> hidden, Rng& rng);
  std::size_t state_dim() const { return net.in_dim(); }
  std::vector<double> q_values(const GatewayState& s) const;
  std::vector<double> q_values_encoded(std::span<const double> x) const;
};

/// Lowest index wins ties; throws on non-finite entries.
ActionId greedy_action(std::span<const double> q);
ActionId select_action(std::span<const double> q, double epsilon, Rng& rng);
ActionId select_action(const QNetwork& q, const GatewayState& s, double epsilon, Rng& rng);

/// r - xi*C + gamma * max_a Q_target(s', a); terminal transitions drop the bootstrap.
double td_target(const Transition& t, const QNetwork& q_target, double gamma, double carbon_xi = 0.0);

/// One SGD step on mean_b (Q(s_b, a_b) - y_b)^2. Returns the loss before the step.
double q_update_network(QNetwork& q, std::span<const Transition> batch, const QNetwork& q_target, double gamma,
                        double lr, double carbon_xi = 0.0);
/// The same loss without updating anything.
double td_loss(const QNetwork& q, std::span<const Transition> batch, const QNetwork& q_target, double gamma,
               double carbon_xi = 0.0);

// ---------------------------------------------------------------------------
// Schedules

/// k^(-p) with p in (0.5, 1).
double robbins_monro_eta(std::size_t k, double p);
double decay_epsilon(double eps, double eps_min, double decay);
/// Maps an exploration setting (possibly > 1) to a probability: min(1, eps * unit).
double normalize_epsilon(double eps, double unit);

/// eta(k) = eta0 / (1 + k / k0)^p, one instance per timescale.
struct PowerSchedule {
  double eta0 = 1e-2;
  double k0 = 100.0;
  double p = 0.6;
  double at(std::size_t k) const;
  void validate() const;
};

/// Supervised (slow-decaying) and reinforcement (fast-decaying) learning
/// rates; the ratio fast/slow tends to zero because p_fast > p_slow.
struct TwoTimescale {
  PowerSchedule supervised{1e-2, 200.0, 0.55};
  PowerSchedule reinforcement{1e-3, 200.0, 0.9};
  void validate() const;
  double ratio(std::size_t k) const { return reinforcement.at(k) / supervised.at(k); }
};

// ---------------------------------------------------------------------------
// DQN agent

struct AgentHyperparams {
  double gamma = 0.9;
  double epsilon = 1.0;  // exploration setting before normalization
  double epsilon_unit = 0.5;
  double epsilon_min = 0.02;
  double epsilon_decay = 0.995;
  double lr = 1e-3;
  std::size_t target_sync_every = 500;
  std::size_t replay_capacity = kDefaultReplayCapacity;
  std::size_t batch_size = kDefaultBatchSize;
  double carbon_xi = 1.0;
  std::vector<std::size_t> hidden{32, 32};

  void validate() const;
};

class DqnAgent {
 public:
  DqnAgent(std::size_t state_dim, AgentHyperparams hp, Rng& init_rng);

  ActionId act(const GatewayState& s, Rng& rng) const;
  ActionId act_greedy(const GatewayState& s) const;
  /// Stores the transition and, once the buffer holds a batch, takes one
  /// gradient step. Returns the TD loss when an update happened.
  std::optional<double> observe(Transition t, Rng& rng);
  void decay();

  double epsilon() const { return epsilon_; }
  void set_epsilon(double eps) { epsilon_ = eps; }
  /// Used by the two-timescale schedule, which moves the rate every update.
  void set_learning_rate(double lr);
  std::size_t updates() const { return updates_; }
  void set_updates(std::size_t n) { updates_ = n; }  // checkpoint restore
  const AgentHyperparams& hyperparams() const { return hp_; }
  const QNetwork& q() const { return q_; }
  QNetwork& q() { return q_; }
  const QNetwork& target() const { return target_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  void sync_target() { target_ = q_; }

 private:
  AgentHyperparams hp_;
  QNetwork q_;
  QNetwork target_;
  ReplayBuffer buffer_;
  double epsilon_;
  std::size_t updates_ = 0;
};

// ---------------------------------------------------------------------------
// Tabular suite

struct QTable {
  std::size_t states = 0;
  std::size_t actions = 0;
  std::vector<double> v;  // row-major [state][action]

  QTable() = default;
  QTable(std::size_t s, std::size_t a, double fill = 0.0) : states(s), actions(a), v(s * a, fill) {}
  double& operator()(std::size_t s, std::size_t a) { return v[s * actions + a]; }
  double operator()(std::size_t s, std::size_t a) const { return v[s * actions + a]; }
  double max_row(std::size_t s) const;
};

/// Finite MDP with a known kernel. p[(s*A + a)*S + s'] is the transition
/// probability and r[s*A + a] the expected immediate reward.
struct TabularMdp {
  std::size_t states = 0;
  std::size_t actions = 0;
  std::vector<double> p;
  std::vector<double> r;
  double gamma = 0.9;

  double prob(std::size_t s, std::size_t a, std::size_t s2) const { return p[(s * actions + a) * states + s2]; }
  double reward(std::size_t s, std::size_t a) const { return r[s * actions + a]; }
  double max_abs_reward() const;
  void validate() const;

  /// Draws s' from the kernel.
  std::size_t sample_next(std::size_t s, std::size_t a, Rng& rng) const;

  /// 4-state / 4-action synthetic MDP with deterministic transitions and
  /// rewards in [0, 1], generated from `seed`.
  static TabularMdp toy(std::uint64_t seed, double gamma = 0.9);
  /// Random stochastic kernel, used for contraction checks.
  static TabularMdp random(std::size_t states, std::size_t actions, std::uint64_t seed, double gamma = 0.9);
};

QTable bellman_operator(const TabularMdp& mdp, const QTable& q);
QTable value_iteration(const TabularMdp& mdp, double tol = 1e-14, std::size_t max_iter = 100'000);
double sup_norm_distance(const QTable& a, const QTable& b);

/// Q(s,a) <- (1 - eta) Q(s,a) + eta * target.
void q_update_tabular(QTable& q, std::size_t s, std::size_t a, double target, double eta);

/// 1/2 * sum (Q - Q_ref)^2 over all entries.
double lyapunov_distance(const QTable& q, const QTable& q_ref);
/// 1/2 * sum over probe states and actions of the squared Q difference.
double lyapunov_distance(const QNetwork& q, const QNetwork& q_ref, std::span<const GatewayState> probes);

/// ||T Q1 - T Q2||_inf / ||Q1 - Q2||_inf.
double empirical_contraction_ratio(const TabularMdp& mdp, const QTable& q1, const QTable& q2);

struct DiagnosticsRow {
  std::size_t step = 0;
  double epsilon = 0.0;
  double eta = 0.0;
  double td_error_mean = 0.0;
  double lyapunov = 0.0;
  std::optional<double> contraction_ratio;
};

/// Columns: step,epsilon,eta,td_error_mean,lyapunov,contraction_ratio
void write_diagnostics_csv(std::ostream& os, std::span<const DiagnosticsRow> rows);

struct TabularRunConfig {
  std::size_t max_updates = 200'000;
  double p = 0.6;                // eta = n(s,a)^(-p) with n the visit count
  double epsilon = 1.0;          // behaviour policy exploration
  double tolerance = 1e-3;       // stop once sup-norm error to Q* is below this
  std::size_t log_every = 1'000;
  bool stop_at_tolerance = true;
};

struct TabularRunResult {
  QTable q;
  QTable q_star;
  std::size_t updates = 0;
  double final_sup_error = 0.0;
  bool converged = false;
  std::vector<DiagnosticsRow> diagnostics;
};

TabularRunResult run_tabular_q_learning(const TabularMdp& mdp, const TabularRunConfig& cfg, Rng& rng);

/// Per-episode returns for an epsilon-greedy learner on `mdp`, used by the
/// exploration sweep. Each episode runs `horizon` steps from state 0.
std::vector<double> tabular_episode_returns(const TabularMdp& mdp, double epsilon, std::size_t episodes,
                                            std::size_t horizon, double eta, Rng& rng);

}  // namespace edgeids::agent
