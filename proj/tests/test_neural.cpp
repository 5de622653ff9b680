#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "edgeids/neural.hpp"

using namespace edgeids::neural;

namespace {

Vector random_vec(std::size_t n, Rng& rng, double sd = 1.0) {
  std::normal_distribution<double> d(0.0, sd);
  Vector v(n);
  for (double& x : v) x = d(rng);
  return v;
}

double sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Scalar re-evaluation of one LSTM step, written independently of the library.
LstmStep scalar_lstm(const LstmParams& p, const Vector& x, const Vector& h, const Vector& c) {
  const std::size_t H = p.hidden_dim, I = p.input_dim;
  LstmStep out{Vector(H), Vector(H)};
  for (std::size_t j = 0; j < H; ++j) {
    double zi = p.b_i[j], zf = p.b_f[j], zo = p.b_o[j], zg = p.b_g[j];
    for (std::size_t k = 0; k < I + H; ++k) {
      const double in = k < I ? x[k] : h[k - I];
      zi += p.w_i(j, k) * in;
      zf += p.w_f(j, k) * in;
      zo += p.w_o(j, k) * in;
      zg += p.w_g(j, k) * in;
    }
    out.c[j] = sig(zf) * c[j] + sig(zi) * std::tanh(zg);
    out.h[j] = sig(zo) * std::tanh(out.c[j]);
  }
  return out;
}

// Independent central-difference oracle over every parameter block.
template <class Model, class Loss>
double fd_max_rel_error(Model model, const Model& analytic, Loss loss, double eps) {
  double worst = 0.0;
  auto blocks = param_blocks(model);
  auto grads = param_blocks(const_cast<Model&>(analytic));
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (std::size_t k = 0; k < blocks[b].size(); ++k) {
      const double keep = blocks[b][k];
      blocks[b][k] = keep + eps;
      const double up = loss(model);
      blocks[b][k] = keep - eps;
      const double down = loss(model);
      blocks[b][k] = keep;
      const double num = (up - down) / (2 * eps);
      const double a = grads[b][k];
      worst = std::max(worst, std::abs(a - num) / std::max({std::abs(a), std::abs(num), 1e-3}));
    }
  return worst;
}

}  // namespace

TEST(Dense, IdentityWeightsPassInputThrough) {
  DenseParams p = DenseParams::zeros(2, 2, Activation::identity);
  p.weights = Matrix::identity(2);
  const auto y = dense_forward(p, Vector{3, -1});
  EXPECT_EQ(y, (Vector{3, -1}));
}

TEST(Dense, ZeroWeightsGiveBias) {
  DenseParams p = DenseParams::zeros(2, 2, Activation::identity);
  p.bias = {0.5, 0.5};
  EXPECT_EQ(dense_forward(p, Vector{7, -9}), (Vector{0.5, 0.5}));
}

TEST(Dense, HandMatrixMultiply) {
  DenseParams p = DenseParams::zeros(2, 2, Activation::identity);
  p.weights.data = {1, 2, 3, 4};
  EXPECT_EQ(dense_forward(p, Vector{1, 1}), (Vector{3, 7}));
}

TEST(Dense, WrongInputWidthIsDimensionError) {
  const DenseParams p = DenseParams::zeros(3, 2, Activation::relu);
  EXPECT_THROW(dense_forward(p, Vector{1, 2}), DimensionError);
}

TEST(Lstm, ZeroParamsZeroState) {
  const auto p = LstmParams::zeros(1, 1);
  const auto s = lstm_cell_step(p, Vector{0}, Vector{0}, Vector{0});
  EXPECT_DOUBLE_EQ(s.h[0], 0.0);
  EXPECT_DOUBLE_EQ(s.c[0], 0.0);
}

TEST(Lstm, ZeroParamsCarryHalfTheCell) {
  const auto p = LstmParams::zeros(1, 1);
  const auto s = lstm_cell_step(p, Vector{0}, Vector{0}, Vector{1});
  EXPECT_DOUBLE_EQ(s.c[0], 0.5);
  EXPECT_DOUBLE_EQ(s.h[0], 0.5 * std::tanh(0.5));
}

TEST(Lstm, MatchesScalarReEvaluation) {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = LstmParams::init(3, 2, rng);
    const auto x = random_vec(3, rng), h = random_vec(2, rng), c = random_vec(2, rng);
    const auto got = lstm_cell_step(p, x, h, c);
    const auto want = scalar_lstm(p, x, h, c);
    for (std::size_t j = 0; j < 2; ++j) {
      EXPECT_NEAR(got.h[j], want.h[j], 1e-14);
      EXPECT_NEAR(got.c[j], want.c[j], 1e-14);
    }
  }
}

TEST(Loss, SquaredReconstruction) {
  EXPECT_DOUBLE_EQ(mse_loss(Vector{1, 2}, Vector{1, 2}), 0.0);
  EXPECT_DOUBLE_EQ(mse_loss(Vector{1, 0}, Vector{0, 0}), 1.0);
  Rng rng(9);
  const auto a = random_vec(8, rng), b = random_vec(8, rng);
  double s = 0.0;
  for (int i = 0; i < 8; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  EXPECT_NEAR(mse_loss(a, b), s, 1e-14);
}

TEST(Loss, BinaryCrossEntropy) {
  EXPECT_NEAR(bce_loss(0.5, 1.0), std::log(2.0), 1e-12);
  EXPECT_NEAR(bce_loss(1.0, 1.0), 0.0, 1e-6);
  EXPECT_NEAR(bce_loss(0.9, 0.0), -std::log(0.1), 1e-12);
  EXPECT_THROW(bce_loss(1.5, 1.0), std::invalid_argument);
}

TEST(Gradients, QuadraticToy) {
  // single linear unit: d/dw (w x - t)^2 at w = 1, x = 2, t = 0 is 8
  Mlp m;
  m.layers.push_back(DenseParams::zeros(1, 1, Activation::identity));
  m.layers[0].weights(0, 0) = 1.0;
  const auto g = mlp_gradients(m, Vector{2}, Vector{0}, LossKind::squared_error);
  EXPECT_DOUBLE_EQ(g.grads.layers[0].weights(0, 0), 8.0);
}

TEST(Gradients, AutoencoderMatchesFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    const auto ae = AutoencoderModel::init(8, 16, 8, rng);
    const auto x = random_vec(8, rng);
    const auto g = autoencoder_gradients(ae, x);
    const double err =
        fd_max_rel_error(ae, g.grads, [&](const AutoencoderModel& m) { return reconstruction_error(m, x); }, 1e-5);
    EXPECT_LT(err, 1e-4) << "seed " << seed;
  }
}

TEST(Gradients, ClassifierMatchesFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    const auto clf = LstmClassifier::init(4, 2, 5, rng);
    std::vector<Vector> w;
    for (int t = 0; t < 5; ++t) w.push_back(random_vec(4, rng));
    const double label = seed % 2;
    const auto g = classifier_gradients(clf, w, label);
    const double err = fd_max_rel_error(
        clf, g.grads, [&](const LstmClassifier& m) { return bce_loss(classifier_forward(m, w).probability, label); },
        1e-5);
    EXPECT_LT(err, 1e-4) << "seed " << seed;
  }
}

TEST(GradCheck, LinearModelIsExact) {
  Rng rng(2);
  const auto m = Mlp::init(std::vector<std::size_t>{3, 2}, Activation::identity, Activation::identity, rng);
  const auto r = grad_check(m, Vector{0.3, -1.2, 2.0}, Vector{1.0, 0.0}, LossKind::squared_error, 1e-5);
  EXPECT_LT(r.max_rel_error, 1e-8);
  EXPECT_EQ(r.param_count, 8u);
}

TEST(GradCheck, DetectsCorruptedGradient) {
  Rng rng(3);
  const auto ae = AutoencoderModel::init(8, 16, 8, rng);
  const auto x = random_vec(8, rng);
  auto g = autoencoder_gradients(ae, x).grads;
  g.decoder.layers[0].bias[0] += 1.0;
  const auto r = grad_check_against<AutoencoderModel>(
      ae, g, [&](const AutoencoderModel& m) { return reconstruction_error(m, x); }, 1e-5);
  EXPECT_GT(r.max_rel_error, 0.1);
}

TEST(GradCheck, RejectsEpsilonOutsideRange) {
  Rng rng(3);
  const auto ae = AutoencoderModel::init(8, 16, 8, rng);
  EXPECT_THROW(grad_check(ae, Vector(8, 0.1), 1e-1), std::invalid_argument);
}

TEST(Sgd, StepArithmetic) {
  Mlp m;
  m.layers.push_back(DenseParams::zeros(1, 1, Activation::identity));
  m.layers[0].weights(0, 0) = 1.0;
  auto g = zeros_like(m);
  g.layers[0].weights(0, 0) = 2.0;
  auto same = m;
  apply_gradients(same, g, 0.0);
  EXPECT_EQ(same.layers[0].weights.data, m.layers[0].weights.data);
  apply_gradients(m, g, 0.1);
  EXPECT_DOUBLE_EQ(m.layers[0].weights(0, 0), 0.8);
}

TEST(Sgd, NonFiniteGradientRejected) {
  Mlp m;
  m.layers.push_back(DenseParams::zeros(1, 1, Activation::identity));
  auto g = zeros_like(m);
  g.layers[0].bias[0] = std::nan("");
  EXPECT_THROW(apply_gradients(m, g, 0.1), NonFiniteError);
}

TEST(Autoencoder, DefaultShapes) {
  Rng rng(1);
  const auto ae = AutoencoderModel::init(8, 16, 8, rng);
  ASSERT_EQ(ae.encoder.layers.size(), 2u);
  EXPECT_EQ(ae.encoder.layers[0].out_dim(), 16u);
  EXPECT_EQ(ae.encoder.layers[1].out_dim(), 8u);
  EXPECT_EQ(ae.decoder.layers[0].out_dim(), 16u);
  EXPECT_EQ(ae.decoder.layers[1].out_dim(), 8u);
  EXPECT_EQ(ae.encoder.layers[0].activation, Activation::relu);
  EXPECT_EQ(ae.decoder.layers[1].activation, Activation::identity);
}

TEST(Determinism, SameInputsSameOutputs) {
  Rng a(5), b(5);
  const auto m1 = AutoencoderModel::init(8, 16, 8, a);
  const auto m2 = AutoencoderModel::init(8, 16, 8, b);
  const Vector x{1, 2, 3, 4, 5, 6, 7, 8};
  EXPECT_EQ(autoencoder_forward(m1, x).reconstruction, autoencoder_forward(m2, x).reconstruction);
}

TEST(Serialize, MlpRoundTripIsExact) {
  Rng rng(8);
  const auto m = Mlp::init(std::vector<std::size_t>{5, 7, 3}, Activation::tanh, Activation::sigmoid, rng);
  std::stringstream ss;
  write_mlp(ss, "net", m);
  const auto back = read_mlp(ss, "net");
  ASSERT_EQ(back.layers.size(), m.layers.size());
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    EXPECT_EQ(back.layers[i].weights.data, m.layers[i].weights.data);
    EXPECT_EQ(back.layers[i].bias, m.layers[i].bias);
    EXPECT_EQ(back.layers[i].activation, m.layers[i].activation);
  }
}

TEST(Serialize, LstmRoundTripIsExact) {
  Rng rng(8);
  const auto p = LstmParams::init(3, 2, rng);
  std::stringstream ss;
  write_lstm(ss, "cell", p);
  const auto back = read_lstm(ss, "cell");
  EXPECT_EQ(back.w_f.data, p.w_f.data);
  EXPECT_EQ(back.b_g, p.b_g);
}

TEST(Serialize, TruncatedOrMisnamedInputIsCorrupt) {
  Rng rng(8);
  const auto m = Mlp::init(std::vector<std::size_t>{5, 7, 3}, Activation::relu, Activation::identity, rng);
  std::stringstream ss;
  write_mlp(ss, "net", m);
  const std::string text = ss.str();
  std::stringstream cut(text.substr(0, text.size() / 2));
  EXPECT_THROW(read_mlp(cut, "net"), CorruptCheckpoint);
  std::stringstream other(text);
  EXPECT_THROW(read_mlp(other, "q"), CorruptCheckpoint);
}

TEST(Smoothness, LinearTrajectoryHasOnlyLagTerm) {
  // h_t = t: second and third differences vanish, lag-3 difference is 3
  const std::vector<Vector> hist{{0.0}, {1.0}, {2.0}, {3.0}};
  SmoothnessWeights w;
  EXPECT_NEAR(temporal_smoothness(hist, w), 9.0, 1e-12);
  w.lag3 = 0.0;
  EXPECT_NEAR(temporal_smoothness(hist, w), 0.0, 1e-12);
}
