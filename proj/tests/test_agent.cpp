#include <cmath>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "edgeids/agent.hpp"
#include "edgeids/eval.hpp"

using namespace edgeids;
using namespace edgeids::agent;

namespace {

Transition make_transition(std::size_t idx) {
  Transition t;
  t.step_index = idx;
  t.r = static_cast<double>(idx);
  return t;
}

GatewayState state(double rate, double syn, double ack, double score) {
  GatewayState s;
  s.p_rate = rate;
  s.syn_count = syn;
  s.ack_count = ack;
  s.anomaly_score = score;
  return s;
}

// 2-state, 2-action MDP with deterministic transitions.
TabularMdp two_state() {
  TabularMdp m;
  m.states = 2;
  m.actions = 2;
  m.gamma = 0.9;
  m.p.assign(8, 0.0);
  m.r = {0.0, 1.0, 0.5, 0.0};
  // s0: a0 -> s0, a1 -> s1; s1: a0 -> s0, a1 -> s1
  m.p[(0 * 2 + 0) * 2 + 0] = 1.0;
  m.p[(0 * 2 + 1) * 2 + 1] = 1.0;
  m.p[(1 * 2 + 0) * 2 + 0] = 1.0;
  m.p[(1 * 2 + 1) * 2 + 1] = 1.0;
  return m;
}

}  // namespace

TEST(ActionSelection, GreedyAndTieBreak) {
  Rng rng(1);
  EXPECT_EQ(select_action(std::vector<double>{1, 5, 2, 0}, 0.0, rng), ActionId::syn_throttle);
  EXPECT_EQ(select_action(std::vector<double>{3, 3, 1, 1}, 0.0, rng), ActionId::rate_limit);
  EXPECT_THROW(greedy_action(std::vector<double>{1, std::nan(""), 0, 0}), edgeids::neural::NonFiniteError);
}

TEST(ActionSelection, UniformWhenFullyExploring) {
  Rng rng(2);
  std::array<int, 4> counts{};
  const int n = 10000;
  for (int i = 0; i < n; ++i) ++counts[index_of(select_action(std::vector<double>{9, 0, 0, 0}, 1.0, rng))];
  const double sigma = std::sqrt(n * 0.25 * 0.75);
  for (int c : counts) EXPECT_NEAR(c, n * 0.25, 3 * sigma);
}

TEST(Replay, RingEvictsOldest) {
  ReplayBuffer b(50'000, 64);
  for (std::size_t i = 0; i < 50'001; ++i) b.push(make_transition(i));
  EXPECT_EQ(b.size(), 50'000u);
  EXPECT_EQ(b.contents().front().step_index, 1u);
  EXPECT_EQ(b.contents().back().step_index, 50'000u);
}

TEST(Replay, OnePush) {
  ReplayBuffer b;
  EXPECT_TRUE(b.empty());
  b.push(make_transition(3));
  EXPECT_EQ(b.size(), 1u);
}

TEST(Replay, SurvivorsKeepInsertionOrder) {
  ReplayBuffer b(7, 2);
  std::deque<std::size_t> ref;
  for (std::size_t i = 0; i < 30; ++i) {
    const std::size_t idx = (i * 37) % 101;
    b.push(make_transition(idx));
    ref.push_back(idx);
    if (ref.size() > 7) ref.pop_front();
  }
  ASSERT_EQ(b.size(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_EQ(b.contents()[i].step_index, ref[i]);
}

TEST(Replay, SamplingPreconditionsAndMembership) {
  ReplayBuffer b(100, 64);
  for (std::size_t i = 0; i < 63; ++i) b.push(make_transition(i));
  Rng rng(3);
  EXPECT_THROW(b.sample(rng), InsufficientData);
  b.push(make_transition(63));
  const auto batch = b.sample(rng);
  EXPECT_EQ(batch.size(), 64u);
  for (const auto& t : batch) EXPECT_LT(t.step_index, 64u);
}

TEST(Replay, SamplingIsUniform) {
  ReplayBuffer b(10, 10);
  for (std::size_t i = 0; i < 10; ++i) b.push(make_transition(i));
  Rng rng(5);
  std::array<int, 10> counts{};
  for (int draw = 0; draw < 1000; ++draw)
    for (const auto& t : b.sample(rng)) ++counts[t.step_index];
  const double n = 10000, sigma = std::sqrt(n * 0.1 * 0.9);
  for (int c : counts) EXPECT_NEAR(c, n * 0.1, 3 * sigma);
}

TEST(Replay, Defaults) {
  EXPECT_EQ(kDefaultReplayCapacity, 50'000u);
  EXPECT_EQ(kDefaultBatchSize, 64u);
  AgentHyperparams hp;
  EXPECT_EQ(hp.replay_capacity, 50'000u);
  EXPECT_EQ(hp.batch_size, 64u);
}

TEST(TdTarget, Arithmetic) {
  // zero-weight target network with bias 2 on every action: max Q(s') = 2
  QNetwork target;
  target.net.layers.push_back(neural::DenseParams::zeros(4, 4, neural::Activation::identity));
  target.net.layers[0].bias.assign(4, 2.0);
  Transition t;
  t.r = 1.0;
  EXPECT_NEAR(td_target(t, target, 0.9), 2.8, 1e-15);
  t.terminal = true;
  EXPECT_DOUBLE_EQ(td_target(t, target, 0.9), 1.0);
  t.terminal = false;
  t.carbon_g = 0.5;
  EXPECT_NEAR(td_target(t, target, 0.9, 1.0), 2.3, 1e-15);
}

TEST(TdTarget, MatchesScalarRecomputation) {
  Rng rng(6);
  const std::vector<std::size_t> hidden{5};
  const auto target = QNetwork::init(4, hidden, rng);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  for (int i = 0; i < 20; ++i) {
    Transition t;
    t.r = u(rng) / 50.0;
    t.s_next = state(u(rng), u(rng), u(rng), u(rng) / 50.0);
    const auto x = t.s_next.encode();
    // forward pass by hand
    const auto& l0 = target.net.layers[0];
    const auto& l1 = target.net.layers[1];
    std::vector<double> h(5);
    for (int j = 0; j < 5; ++j) {
      double z = l0.bias[j];
      for (int k = 0; k < 4; ++k) z += l0.weights(j, k) * x[k];
      h[j] = std::max(0.0, z);
    }
    double best = -1e300;
    for (int a = 0; a < 4; ++a) {
      double z = l1.bias[a];
      for (int j = 0; j < 5; ++j) z += l1.weights(a, j) * h[j];
      best = std::max(best, z);
    }
    EXPECT_NEAR(td_target(t, target, 0.9), t.r + 0.9 * best, 1e-12);
  }
}

TEST(QNetworkUpdate, ZeroErrorLeavesParametersUnchanged) {
  Rng rng(7);
  const std::vector<std::size_t> hidden{6};
  auto q = QNetwork::init(4, hidden, rng);
  const auto target = q;
  Transition t;
  t.s = state(10, 2, 3, 0.1);
  t.a = ActionId::block;
  t.terminal = true;
  t.r = q.q_values(t.s)[2];
  const auto before = q.net.layers[0].weights.data;
  q_update_network(q, std::span<const Transition>(&t, 1), target, 0.9, 0.1, 0.0);
  EXPECT_EQ(q.net.layers[0].weights.data, before);
}

TEST(QNetworkUpdate, LinearHandGradient) {
  QNetwork q;
  Rng rng(8);
  q.net = neural::Mlp::init(std::vector<std::size_t>{4, 4}, neural::Activation::identity, neural::Activation::identity, rng);
  const QNetwork target = q;
  Transition t;
  t.s = state(100, 5, 7, 0.3);
  t.a = ActionId::syn_throttle;
  t.r = 0.4;
  t.terminal = true;
  const auto x = t.s.encode();
  const double pred = q.q_values(t.s)[1];
  const double lr = 0.05;
  auto expect = q.net.layers[0];
  for (int k = 0; k < 4; ++k) expect.weights(1, k) -= lr * 2.0 * (pred - t.r) * x[k];
  expect.bias[1] -= lr * 2.0 * (pred - t.r);
  q_update_network(q, std::span<const Transition>(&t, 1), target, 0.9, lr, 0.0);
  for (std::size_t i = 0; i < expect.weights.data.size(); ++i)
    EXPECT_NEAR(q.net.layers[0].weights.data[i], expect.weights.data[i], 1e-14);
  EXPECT_NEAR(q.net.layers[0].bias[1], expect.bias[1], 1e-14);
}

TEST(Schedules, RobbinsMonro) {
  EXPECT_DOUBLE_EQ(robbins_monro_eta(1, 0.7), 1.0);
  EXPECT_NEAR(robbins_monro_eta(100, 0.6), std::pow(100.0, -0.6), 1e-15);
  EXPECT_NEAR(robbins_monro_eta(100, 0.6), 0.0630957, 1e-6);
  EXPECT_THROW(robbins_monro_eta(10, 0.4), std::invalid_argument);
}

TEST(Schedules, EpsilonDecay) {
  EXPECT_DOUBLE_EQ(decay_epsilon(0.02, 0.02, 0.99), 0.02);
  EXPECT_DOUBLE_EQ(decay_epsilon(1.0, 0.02, 0.99), 0.99);
  double eps = 1.0;
  for (int n = 1; n <= 500; ++n) {
    const double next = decay_epsilon(eps, 0.02, 0.99);
    EXPECT_LE(next, eps);
    EXPECT_NEAR(next, std::max(0.02, std::pow(0.99, n)), 1e-12);
    eps = next;
  }
}

TEST(Schedules, EpsilonNormalization) {
  EXPECT_DOUBLE_EQ(normalize_epsilon(0.5, 0.5), 0.25);
  EXPECT_DOUBLE_EQ(normalize_epsilon(2.0, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(normalize_epsilon(3.0, 0.5), 1.0);
}

TEST(Schedules, TwoTimescaleRatioVanishes) {
  TwoTimescale ts;
  double prev = ts.ratio(0);
  for (std::size_t k : {10u, 100u, 1000u, 100000u, 10000000u}) {
    EXPECT_LT(ts.ratio(k), prev);
    prev = ts.ratio(k);
  }
  EXPECT_LT(prev, 0.05 * ts.ratio(0));
}

TEST(Tabular, UpdateEndpoints) {
  QTable q(2, 2, 3.0);
  q_update_tabular(q, 0, 1, 7.0, 1.0);
  EXPECT_DOUBLE_EQ(q(0, 1), 7.0);
  q_update_tabular(q, 1, 0, 7.0, 0.0);
  EXPECT_DOUBLE_EQ(q(1, 0), 3.0);
}

TEST(Tabular, PolynomialStepsConvergeOnTwoStateMdp) {
  const auto mdp = two_state();
  const auto q_star = value_iteration(mdp);
  QTable q(2, 2);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> visits;
  // synchronous sweeps, eta = k^-0.6 per pair
  for (int sweep = 0; sweep < 200000 && sup_norm_distance(q, q_star) > 1e-3; ++sweep)
    for (std::size_t s = 0; s < 2; ++s)
      for (std::size_t a = 0; a < 2; ++a) {
        const std::size_t k = ++visits[{s, a}];
        const std::size_t s2 = mdp.prob(s, a, 0) > 0.5 ? 0 : 1;
        q_update_tabular(q, s, a, mdp.reward(s, a) + mdp.gamma * q.max_row(s2), std::pow(static_cast<double>(k), -0.6));
      }
  EXPECT_LE(sup_norm_distance(q, q_star), 1e-3);
}

TEST(Tabular, ValueIterationIsFixedPoint) {
  const auto mdp = TabularMdp::toy(7);
  const auto q = value_iteration(mdp);
  EXPECT_LT(sup_norm_distance(bellman_operator(mdp, q), q), 1e-12);
}

TEST(Lyapunov, Cases) {
  const QTable a(2, 2, 1.0);
  EXPECT_DOUBLE_EQ(lyapunov_distance(a, a), 0.0);
  QTable b = a;
  b(1, 1) += 2.0;
  EXPECT_DOUBLE_EQ(lyapunov_distance(a, b), 2.0);
}

TEST(Contraction, ConstantShiftGivesGamma) {
  const auto mdp = TabularMdp::random(4, 4, 3, 0.9);
  QTable q1(4, 4);
  Rng rng(4);
  std::uniform_real_distribution<double> u(-5, 5);
  for (double& v : q1.v) v = u(rng);
  QTable q2 = q1;
  for (double& v : q2.v) v += 1.7;
  EXPECT_NEAR(empirical_contraction_ratio(mdp, q1, q2), 0.9, 1e-12);
}

TEST(Contraction, RandomPairsNeverExceedGamma) {
  const auto mdp = TabularMdp::random(4, 4, 5, 0.9);
  Rng rng(6);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 100; ++i) {
    QTable q1(4, 4), q2(4, 4);
    for (double& v : q1.v) v = u(rng);
    for (double& v : q2.v) v = u(rng);
    EXPECT_LE(empirical_contraction_ratio(mdp, q1, q2), 0.9 + 1e-12);
  }
}

TEST(Tabular, ToyRunConvergesAndLyapunovDecreases) {
  const auto mdp = TabularMdp::toy(7);
  Rng rng(1);
  const auto r = run_tabular_q_learning(mdp, {}, rng);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.final_sup_error, 1e-3);
  EXPECT_LE(r.updates, 200'000u);
  std::vector<double> v;
  for (std::size_t i = r.diagnostics.size() / 10; i < r.diagnostics.size(); ++i) v.push_back(r.diagnostics[i].lyapunov);
  ASSERT_GE(v.size(), 10u);
  const auto mk = eval::mann_kendall(v);
  EXPECT_LT(mk.p_decreasing, 0.05);
}

TEST(Tabular, EpisodeReturnsAreDeterministic) {
  const auto mdp = TabularMdp::toy(7);
  Rng a(3), b(3);
  EXPECT_EQ(tabular_episode_returns(mdp, 0.3, 20, 30, 0.2, a), tabular_episode_returns(mdp, 0.3, 20, 30, 0.2, b));
}

TEST(Dqn, BufferFillsBeforeUpdates) {
  AgentHyperparams hp;
  hp.batch_size = 4;
  hp.hidden = {8};
  Rng rng(9);
  DqnAgent agent(4, hp, rng);
  for (std::size_t i = 0; i < 3; ++i) {
    Transition t;
    t.s = state(1, 1, 1, 0);
    t.s_next = t.s;
    EXPECT_FALSE(agent.observe(t, rng).has_value());
  }
  Transition t;
  t.s = state(1, 1, 1, 0);
  t.s_next = t.s;
  EXPECT_TRUE(agent.observe(t, rng).has_value());
  EXPECT_EQ(agent.updates(), 1u);
  EXPECT_THROW(agent.set_learning_rate(0.0), std::invalid_argument);
}
