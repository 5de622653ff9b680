#pragma once

// Small deterministic neural primitives: dense layers, an LSTM cell, the
// autoencoder and sequence classifier built from them, losses, plain SGD and
// a central-difference gradient checker. All arithmetic is double precision.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace edgeids::neural {

using Vector = std::vector<double>;
using Rng = std::mt19937_64;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  static Matrix identity(std::size_t n);
};

enum class Activation : std::uint8_t { identity, relu, sigmoid, tanh };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

double activate(Activation a, double z);
// Derivative expressed through the activation's output y = act(z).
double activation_grad_from_output(Activation a, double y);

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct DenseParams {
  Matrix weights;  // [out x in]
  Vector bias;     // [out]
  Activation activation = Activation::identity;

  std::size_t in_dim() const { return weights.cols; }
  std::size_t out_dim() const { return weights.rows; }

  static DenseParams zeros(std::size_t in, std::size_t out, Activation act);
  // uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases
  static DenseParams init(std::size_t in, std::size_t out, Activation act, Rng& rng);

  void validate() const;
};

Vector dense_forward(const DenseParams& params, std::span<const double> x);

/// Stack of dense layers. Hidden activations are whatever each layer declares.
struct Mlp {
  std::vector<DenseParams> layers;

  std::size_t in_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }
  std::size_t out_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }

  static Mlp init(std::span<const std::size_t> sizes, Activation hidden, Activation output, Rng& rng);
  void validate() const;
};

/// Per-layer activations recorded during a forward pass; activations[0] is the input.
struct MlpTrace {
  std::vector<Vector> activations;
  const Vector& output() const { return activations.back(); }
};

Vector mlp_forward(const Mlp& mlp, std::span<const double> x);
MlpTrace mlp_forward_trace(const Mlp& mlp, std::span<const double> x);
/// Accumulates parameter gradients into `grads` (same shape as `mlp`) and
/// returns dL/dx for the network input.
Vector mlp_backward(const Mlp& mlp, const MlpTrace& trace, std::span<const double> dl_dout, Mlp& grads);

// ---------------------------------------------------------------------------
// LSTM

struct LstmParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  // Gate blocks act on the concatenation [x, h_prev]: shape [hidden x (input+hidden)].
  Matrix w_i, w_f, w_o, w_g;
  Vector b_i, b_f, b_o, b_g;

  static LstmParams zeros(std::size_t input, std::size_t hidden);
  static LstmParams init(std::size_t input, std::size_t hidden, Rng& rng);
  void validate() const;
};

struct LstmStep {
  Vector h;
  Vector c;
};

/// Everything a single cell step needs for backpropagation through time.
struct LstmStepCache {
  Vector xh;  // [x, h_prev]
  Vector c_prev;
  Vector i, f, o, g;
  Vector c;
  Vector tanh_c;
  Vector h;
};

LstmStep lstm_cell_step(const LstmParams& p, std::span<const double> x, std::span<const double> h_prev,
                        std::span<const double> c_prev);
LstmStepCache lstm_cell_step_cached(const LstmParams& p, std::span<const double> x,
                                    std::span<const double> h_prev, std::span<const double> c_prev);

// ---------------------------------------------------------------------------
// Models

struct AutoencoderModel {
  Mlp encoder;
  Mlp decoder;
  std::size_t input_dim = 8;
  std::size_t latent_dim = 8;

  /// input -> hidden -> latent -> hidden -> input, relu hidden and identity outputs.
  static AutoencoderModel init(std::size_t input_dim, std::size_t hidden_dim, std::size_t latent_dim, Rng& rng);
  void validate() const;
};

struct AutoencoderOutput {
  Vector latent;
  Vector reconstruction;
};

AutoencoderOutput autoencoder_forward(const AutoencoderModel& model, std::span<const double> x);
/// Squared reconstruction distance ||x - decode(encode(x))||^2.
double reconstruction_error(const AutoencoderModel& model, std::span<const double> x);

struct LstmClassifier {
  LstmParams cell;
  Vector head_w;
  double head_b = 0.0;
  std::size_t window_len = 1;

  static LstmClassifier init(std::size_t input_dim, std::size_t hidden_dim, std::size_t window_len, Rng& rng);
  void validate() const;
};

struct ClassifierOutput {
  Vector hidden;  // h_T after the last window element
  double probability = 0.5;
};

ClassifierOutput classifier_forward(const LstmClassifier& model, std::span<const Vector> window);

// ---------------------------------------------------------------------------
// Losses and gradients

inline constexpr double kProbabilityClamp = 1e-7;

double mse_loss(std::span<const double> x, std::span<const double> x_hat);
double bce_loss(double y_hat, double y);

enum class LossKind : std::uint8_t { squared_error, binary_cross_entropy };

template <class Model>
struct LossAndGrad {
  double loss = 0.0;
  Model grads;
};

LossAndGrad<AutoencoderModel> autoencoder_gradients(const AutoencoderModel& model, std::span<const double> x);
LossAndGrad<LstmClassifier> classifier_gradients(const LstmClassifier& model, std::span<const Vector> window,
                                                 double label);
/// For squared_error the target is a vector matching the output; for
/// binary_cross_entropy the network must have a single sigmoid output and
/// target[0] is the label.
LossAndGrad<Mlp> mlp_gradients(const Mlp& mlp, std::span<const double> x, std::span<const double> target,
                               LossKind kind);
/// Gradient of the loss with respect to the network input.
Vector mlp_input_gradient(const Mlp& mlp, std::span<const double> x, std::span<const double> target, LossKind kind);

// Parameter views: every model exposes its parameters as a list of flat blocks
// in a fixed order, which is what SGD and the gradient checker iterate over.
std::vector<std::span<double>> param_blocks(DenseParams& p);
std::vector<std::span<double>> param_blocks(Mlp& m);
std::vector<std::span<double>> param_blocks(LstmParams& p);
std::vector<std::span<double>> param_blocks(AutoencoderModel& m);
std::vector<std::span<double>> param_blocks(LstmClassifier& m);

template <class Model>
std::size_t param_count(const Model& m) {
  std::size_t n = 0;
  for (auto block : param_blocks(const_cast<Model&>(m))) n += block.size();
  return n;
}

template <class Model>
Model zeros_like(const Model& m) {
  Model z = m;
  for (auto block : param_blocks(z))
    for (double& v : block) v = 0.0;
  return z;
}

/// p <- p - lr * g for every parameter.
template <class Model>
void apply_gradients(Model& model, const Model& grads, double lr) {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw std::invalid_argument("apply_gradients: learning rate must be >= 0");
  auto pm = param_blocks(model);
  auto pg = param_blocks(const_cast<Model&>(grads));
  if (pm.size() != pg.size()) throw DimensionError("apply_gradients: gradient block count mismatch");
  for (std::size_t b = 0; b < pm.size(); ++b) {
    if (pm[b].size() != pg[b].size()) throw DimensionError("apply_gradients: gradient block size mismatch");
    for (double g : pg[b])
      if (!std::isfinite(g)) throw NonFiniteError("apply_gradients: non-finite gradient");
  }
  for (std::size_t b = 0; b < pm.size(); ++b)
    for (std::size_t k = 0; k < pm[b].size(); ++k) pm[b][k] -= lr * pg[b][k];
}

/// Accumulate `src` into `dst`, scaled.
template <class Model>
void add_scaled(Model& dst, const Model& src, double scale) {
  auto pd = param_blocks(dst);
  auto ps = param_blocks(const_cast<Model&>(src));
  for (std::size_t b = 0; b < pd.size(); ++b)
    for (std::size_t k = 0; k < pd[b].size(); ++k) pd[b][k] += scale * ps[b][k];
}

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t param_count = 0;
  double epsilon_used = 0.0;
};

// Relative error is |a - n| / max(|a|, |n|, kGradCheckFloor); the floor turns
// the comparison into an absolute one for gradients that are essentially zero.
inline constexpr double kGradCheckFloor = 1e-3;

/// Compares `analytic` against central differences of `loss` around `model`.
template <class Model>
GradCheckReport grad_check_against(Model model, const Model& analytic, const std::function<double(const Model&)>& loss,
                                   double epsilon) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-3)) throw std::invalid_argument("grad_check: epsilon outside [1e-7, 1e-3]");
  GradCheckReport report;
  report.epsilon_used = epsilon;
  auto blocks = param_blocks(model);
  auto grads = param_blocks(const_cast<Model&>(analytic));
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (std::size_t k = 0; k < blocks[b].size(); ++k) {
      const double saved = blocks[b][k];
      blocks[b][k] = saved + epsilon;
      const double up = loss(model);
      blocks[b][k] = saved - epsilon;
      const double down = loss(model);
      blocks[b][k] = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = grads[b][k];
      const double denom = std::max({std::abs(a), std::abs(numeric), kGradCheckFloor});
      report.max_rel_error = std::max(report.max_rel_error, std::abs(a - numeric) / denom);
      ++report.param_count;
    }
  }
  return report;
}

GradCheckReport grad_check(const AutoencoderModel& model, std::span<const double> x, double epsilon);
GradCheckReport grad_check(const LstmClassifier& model, std::span<const Vector> window, double label, double epsilon);
GradCheckReport grad_check(const Mlp& mlp, std::span<const double> x, std::span<const double> target, LossKind kind,
                           double epsilon);

// ---------------------------------------------------------------------------
// Temporal smoothness of a latent trajectory:
//   lambda2*||h_t - 2h_{t-1} + h_{t-2}||^2
// + lambda3*||h_t - 3h_{t-1} + 3h_{t-2} - h_{t-3}||^2
// + lambda_lag*||h_t - h_{t-3}||^2
struct SmoothnessWeights {
  double second_order = 1.0;
  double third_order = 1.0;
  double lag3 = 1.0;
};

/// `history` holds at least the last four latent vectors, oldest first.
double temporal_smoothness(std::span<const Vector> history, const SmoothnessWeights& w);

// ---------------------------------------------------------------------------
// Text serialization. Format (one record per line, whitespace separated):
//   dense <name> <out> <in> <activation>
//   <out rows of `in` weights>
//   <bias row>
//   lstm <name> <input> <hidden>
//   then w_i, w_f, w_o, w_g (hidden rows each) and b_i, b_f, b_o, b_g rows
// Numbers are written with 17 significant digits.
void write_dense(std::ostream& os, std::string_view name, const DenseParams& p);
DenseParams read_dense(std::istream& is, std::string_view expected_name);
void write_mlp(std::ostream& os, std::string_view name, const Mlp& m);
Mlp read_mlp(std::istream& is, std::string_view expected_name);
void write_lstm(std::ostream& os, std::string_view name, const LstmParams& p);
LstmParams read_lstm(std::istream& is, std::string_view expected_name);

class CorruptCheckpoint : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace edgeids::neural
