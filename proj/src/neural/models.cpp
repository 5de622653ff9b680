#include <algorithm>
#include <string>

#include "edgeids/neural.hpp"

namespace edgeids::neural {

namespace {

void require_same_size(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size())
    throw DimensionError(std::string(what) + ": length " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
}

// dL/dp for the clamped binary cross-entropy; zero where the clamp is active.
double bce_grad_wrt_prob(double p, double y) {
  if (p < kProbabilityClamp || p > 1.0 - kProbabilityClamp) return 0.0;
  return -y / p + (1.0 - y) / (1.0 - p);
}

void check_label(double y) {
  if (y != 0.0 && y != 1.0) throw std::invalid_argument("label must be 0 or 1");
}

}  // namespace

// ---------------------------------------------------------------------------

double mse_loss(std::span<const double> x, std::span<const double> x_hat) {
  require_same_size(x, x_hat, "mse_loss");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - x_hat[i];
    s += d * d;
  }
  return s;
}

double bce_loss(double y_hat, double y) {
  if (!(y_hat >= 0.0 && y_hat <= 1.0)) throw std::invalid_argument("bce_loss: probability outside [0, 1]");
  check_label(y);
  const double p = std::clamp(y_hat, kProbabilityClamp, 1.0 - kProbabilityClamp);
  return -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
}

// ---------------------------------------------------------------------------
// Autoencoder

AutoencoderModel AutoencoderModel::init(std::size_t input_dim, std::size_t hidden_dim, std::size_t latent_dim,
                                        Rng& rng) {
  AutoencoderModel m;
  m.input_dim = input_dim;
  m.latent_dim = latent_dim;
  const std::size_t enc[] = {input_dim, hidden_dim, latent_dim};
  const std::size_t dec[] = {latent_dim, hidden_dim, input_dim};
  m.encoder = Mlp::init(enc, Activation::relu, Activation::identity, rng);
  m.decoder = Mlp::init(dec, Activation::relu, Activation::identity, rng);
  return m;
}

void AutoencoderModel::validate() const {
  encoder.validate();
  decoder.validate();
  if (encoder.in_dim() != input_dim) throw DimensionError("autoencoder: encoder input differs from input_dim");
  if (encoder.out_dim() != latent_dim) throw DimensionError("autoencoder: encoder output differs from latent_dim");
  if (decoder.in_dim() != latent_dim) throw DimensionError("autoencoder: decoder input differs from latent_dim");
  if (decoder.out_dim() != input_dim) throw DimensionError("autoencoder: decoder output differs from input_dim");
}

AutoencoderOutput autoencoder_forward(const AutoencoderModel& model, std::span<const double> x) {
  AutoencoderOutput out;
  out.latent = mlp_forward(model.encoder, x);
  out.reconstruction = mlp_forward(model.decoder, out.latent);
  return out;
}

double reconstruction_error(const AutoencoderModel& model, std::span<const double> x) {
  return mse_loss(x, autoencoder_forward(model, x).reconstruction);
}

LossAndGrad<AutoencoderModel> autoencoder_gradients(const AutoencoderModel& model, std::span<const double> x) {
  const auto enc = mlp_forward_trace(model.encoder, x);
  const auto dec = mlp_forward_trace(model.decoder, enc.output());
  const Vector& x_hat = dec.output();
  LossAndGrad<AutoencoderModel> r{mse_loss(x, x_hat), zeros_like(model)};
  Vector dl(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) dl[i] = 2.0 * (x_hat[i] - x[i]);
  const Vector dlatent = mlp_backward(model.decoder, dec, dl, r.grads.decoder);
  mlp_backward(model.encoder, enc, dlatent, r.grads.encoder);
  return r;
}

std::vector<std::span<double>> param_blocks(AutoencoderModel& m) {
  auto out = param_blocks(m.encoder);
  for (auto b : param_blocks(m.decoder)) out.push_back(b);
  return out;
}

// ---------------------------------------------------------------------------
// LSTM classifier

LstmClassifier LstmClassifier::init(std::size_t input_dim, std::size_t hidden_dim, std::size_t window_len, Rng& rng) {
  if (window_len == 0) throw DimensionError("LstmClassifier: window_len must be >= 1");
  LstmClassifier m;
  m.cell = LstmParams::init(input_dim, hidden_dim, rng);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  std::uniform_real_distribution<double> dist(-bound, bound);
  m.head_w.resize(hidden_dim);
  for (double& w : m.head_w) w = dist(rng);
  m.head_b = 0.0;
  m.window_len = window_len;
  return m;
}

void LstmClassifier::validate() const {
  cell.validate();
  if (head_w.size() != cell.hidden_dim) throw DimensionError("classifier: head width differs from hidden size");
  if (window_len == 0) throw DimensionError("classifier: window_len must be >= 1");
}

namespace {

std::vector<LstmStepCache> run_window(const LstmClassifier& model, std::span<const Vector> window) {
  if (window.size() != model.window_len)
    throw DimensionError("classifier: window has " + std::to_string(window.size()) + " steps, model expects " +
                         std::to_string(model.window_len));
  std::vector<LstmStepCache> caches;
  caches.reserve(window.size());
  Vector h(model.cell.hidden_dim, 0.0), c(model.cell.hidden_dim, 0.0);
  for (const auto& x : window) {
    caches.push_back(lstm_cell_step_cached(model.cell, x, h, c));
    h = caches.back().h;
    c = caches.back().c;
  }
  return caches;
}

double head_logit(const LstmClassifier& model, const Vector& h) {
  double z = model.head_b;
  for (std::size_t k = 0; k < h.size(); ++k) z += model.head_w[k] * h[k];
  return z;
}

}  // namespace

ClassifierOutput classifier_forward(const LstmClassifier& model, std::span<const Vector> window) {
  auto caches = run_window(model, window);
  ClassifierOutput out;
  out.hidden = caches.back().h;
  out.probability = sigmoid(head_logit(model, out.hidden));
  return out;
}

LossAndGrad<LstmClassifier> classifier_gradients(const LstmClassifier& model, std::span<const Vector> window,
                                                 double label) {
  check_label(label);
  const auto caches = run_window(model, window);
  const Vector& h_last = caches.back().h;
  const double p = sigmoid(head_logit(model, h_last));
  LossAndGrad<LstmClassifier> r{bce_loss(p, label), zeros_like(model)};

  const double dz = bce_grad_wrt_prob(p, label) * p * (1.0 - p);
  const std::size_t n = model.cell.hidden_dim;
  const std::size_t in = model.cell.input_dim;
  auto& g = r.grads;
  g.head_b = dz;
  Vector dh(n), dc(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    g.head_w[k] = dz * h_last[k];
    dh[k] = dz * model.head_w[k];
  }

  const auto& P = model.cell;
  for (std::size_t t = caches.size(); t-- > 0;) {
    const auto& s = caches[t];
    Vector dzi(n), dzf(n), dzo(n), dzg(n), dc_prev(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double d_o = dh[k] * s.tanh_c[k];
      const double d_c = dc[k] + dh[k] * s.o[k] * (1.0 - s.tanh_c[k] * s.tanh_c[k]);
      const double d_i = d_c * s.g[k];
      const double d_g = d_c * s.i[k];
      const double d_f = d_c * s.c_prev[k];
      dc_prev[k] = d_c * s.f[k];
      dzi[k] = d_i * s.i[k] * (1.0 - s.i[k]);
      dzf[k] = d_f * s.f[k] * (1.0 - s.f[k]);
      dzo[k] = d_o * s.o[k] * (1.0 - s.o[k]);
      dzg[k] = d_g * (1.0 - s.g[k] * s.g[k]);
    }
    Vector dxh(in + n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      g.cell.b_i[k] += dzi[k];
      g.cell.b_f[k] += dzf[k];
      g.cell.b_o[k] += dzo[k];
      g.cell.b_g[k] += dzg[k];
      for (std::size_t j = 0; j < in + n; ++j) {
        const double v = s.xh[j];
        g.cell.w_i(k, j) += dzi[k] * v;
        g.cell.w_f(k, j) += dzf[k] * v;
        g.cell.w_o(k, j) += dzo[k] * v;
        g.cell.w_g(k, j) += dzg[k] * v;
        dxh[j] += P.w_i(k, j) * dzi[k] + P.w_f(k, j) * dzf[k] + P.w_o(k, j) * dzo[k] + P.w_g(k, j) * dzg[k];
      }
    }
    for (std::size_t k = 0; k < n; ++k) dh[k] = dxh[in + k];
    dc = std::move(dc_prev);
  }
  return r;
}

std::vector<std::span<double>> param_blocks(LstmClassifier& m) {
  auto out = param_blocks(m.cell);
  out.emplace_back(m.head_w);
  out.emplace_back(&m.head_b, 1);
  return out;
}

// ---------------------------------------------------------------------------
// Plain MLP losses

namespace {

Vector output_gradient(const Vector& y, std::span<const double> target, LossKind kind, double& loss) {
  if (kind == LossKind::squared_error) {
    require_same_size(y, target, "mlp loss");
    loss = mse_loss(y, target);
    Vector d(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) d[i] = 2.0 * (y[i] - target[i]);
    return d;
  }
  if (y.size() != 1 || target.empty()) throw DimensionError("binary cross-entropy needs a single output");
  loss = bce_loss(std::clamp(y[0], 0.0, 1.0), target[0]);
  return {bce_grad_wrt_prob(y[0], target[0])};
}

}  // namespace

LossAndGrad<Mlp> mlp_gradients(const Mlp& mlp, std::span<const double> x, std::span<const double> target,
                               LossKind kind) {
  const auto trace = mlp_forward_trace(mlp, x);
  LossAndGrad<Mlp> r{0.0, zeros_like(mlp)};
  const Vector d = output_gradient(trace.output(), target, kind, r.loss);
  mlp_backward(mlp, trace, d, r.grads);
  return r;
}

Vector mlp_input_gradient(const Mlp& mlp, std::span<const double> x, std::span<const double> target, LossKind kind) {
  const auto trace = mlp_forward_trace(mlp, x);
  Mlp scratch = zeros_like(mlp);
  double loss = 0.0;
  const Vector d = output_gradient(trace.output(), target, kind, loss);
  return mlp_backward(mlp, trace, d, scratch);
}

// ---------------------------------------------------------------------------
// Gradient checks

GradCheckReport grad_check(const AutoencoderModel& model, std::span<const double> x, double epsilon) {
  const auto analytic = autoencoder_gradients(model, x).grads;
  const Vector input(x.begin(), x.end());
  return grad_check_against<AutoencoderModel>(
      model, analytic, [&](const AutoencoderModel& m) { return reconstruction_error(m, input); }, epsilon);
}

GradCheckReport grad_check(const LstmClassifier& model, std::span<const Vector> window, double label, double epsilon) {
  const auto analytic = classifier_gradients(model, window, label).grads;
  return grad_check_against<LstmClassifier>(
      model, analytic,
      [&](const LstmClassifier& m) { return bce_loss(classifier_forward(m, window).probability, label); }, epsilon);
}

GradCheckReport grad_check(const Mlp& mlp, std::span<const double> x, std::span<const double> target, LossKind kind,
                           double epsilon) {
  const auto analytic = mlp_gradients(mlp, x, target, kind).grads;
  return grad_check_against<Mlp>(
      mlp, analytic, [&](const Mlp& m) { return mlp_gradients(m, x, target, kind).loss; }, epsilon);
}

// ---------------------------------------------------------------------------

double temporal_smoothness(std::span<const Vector> history, const SmoothnessWeights& w) {
  if (history.size() < 4) throw DimensionError("temporal_smoothness: need at least four latent vectors");
  const std::size_t t = history.size() - 1;
  const Vector& h0 = history[t];
  const Vector& h1 = history[t - 1];
  const Vector& h2 = history[t - 2];
  const Vector& h3 = history[t - 3];
  for (const Vector* h : {&h1, &h2, &h3}) require_same_size(h0, *h, "temporal_smoothness");
  double second = 0.0, third = 0.0, lag = 0.0;
  for (std::size_t k = 0; k < h0.size(); ++k) {
    const double d2 = h0[k] - 2.0 * h1[k] + h2[k];
    const double d3 = h0[k] - 3.0 * h1[k] + 3.0 * h2[k] - h3[k];
    const double dl = h0[k] - h3[k];
    second += d2 * d2;
    third += d3 * d3;
    lag += dl * dl;
  }
  return w.second_order * second + w.third_order * third + w.lag3 * lag;
}

}  // namespace edgeids::neural
