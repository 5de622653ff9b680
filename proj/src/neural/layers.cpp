#include <string>

#include "edgeids/neural.hpp"

namespace edgeids::neural {

namespace {

bool all_finite(std::span<const double> xs) {
  for (double v : xs)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

DenseParams DenseParams::zeros(std::size_t in, std::size_t out, Activation act) {
  DenseParams p;
  p.weights = Matrix(out, in);
  p.bias.assign(out, 0.0);
  p.activation = act;
  return p;
}

DenseParams DenseParams::init(std::size_t in, std::size_t out, Activation act, Rng& rng) {
  if (in == 0 || out == 0) throw DimensionError("DenseParams::init: zero dimension");
  DenseParams p = zeros(in, out, act);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& w : p.weights.data) w = dist(rng);
  for (double& b : p.bias) b = dist(rng);
  return p;
}

void DenseParams::validate() const {
  if (weights.data.size() != weights.rows * weights.cols) throw DimensionError("dense: weight storage mismatch");
  if (bias.size() != weights.rows) throw DimensionError("dense: bias length differs from output dimension");
  if (!all_finite(weights.data) || !all_finite(bias)) throw NonFiniteError("dense: non-finite parameter");
}

Vector dense_forward(const DenseParams& params, std::span<const double> x) {
  if (x.size() != params.in_dim())
    throw DimensionError("dense_forward: input has " + std::to_string(x.size()) + " entries, layer expects " +
                         std::to_string(params.in_dim()));
  Vector y(params.out_dim());
  for (std::size_t r = 0; r < params.out_dim(); ++r) {
    double z = params.bias[r];
    const auto row = params.weights.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) z += row[c] * x[c];
    y[r] = activate(params.activation, z);
  }
  return y;
}

Mlp Mlp::init(std::span<const std::size_t> sizes, Activation hidden, Activation output, Rng& rng) {
  if (sizes.size() < 2) throw DimensionError("Mlp::init: need at least input and output sizes");
  Mlp m;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const bool last = i + 2 == sizes.size();
    m.layers.push_back(DenseParams::init(sizes[i], sizes[i + 1], last ? output : hidden, rng));
  }
  return m;
}

void Mlp::validate() const {
  if (layers.empty()) throw DimensionError("mlp: no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].validate();
    if (i > 0 && layers[i].in_dim() != layers[i - 1].out_dim())
      throw DimensionError("mlp: layer " + std::to_string(i) + " input does not match previous output");
  }
}

Vector mlp_forward(const Mlp& mlp, std::span<const double> x) {
  Vector cur(x.begin(), x.end());
  for (const auto& layer : mlp.layers) cur = dense_forward(layer, cur);
  return cur;
}

MlpTrace mlp_forward_trace(const Mlp& mlp, std::span<const double> x) {
  MlpTrace trace;
  trace.activations.reserve(mlp.layers.size() + 1);
  trace.activations.emplace_back(x.begin(), x.end());
  for (const auto& layer : mlp.layers) trace.activations.push_back(dense_forward(layer, trace.activations.back()));
  return trace;
}

Vector mlp_backward(const Mlp& mlp, const MlpTrace& trace, std::span<const double> dl_dout, Mlp& grads) {
  if (dl_dout.size() != mlp.out_dim()) throw DimensionError("mlp_backward: upstream gradient size mismatch");
  Vector upstream(dl_dout.begin(), dl_dout.end());
  for (std::size_t li = mlp.layers.size(); li-- > 0;) {
    const auto& layer = mlp.layers[li];
    auto& g = grads.layers[li];
    const Vector& in = trace.activations[li];
    const Vector& out = trace.activations[li + 1];
    Vector dz(layer.out_dim());
    for (std::size_t r = 0; r < dz.size(); ++r) dz[r] = upstream[r] * activation_grad_from_output(layer.activation, out[r]);
    Vector dx(layer.in_dim(), 0.0);
    for (std::size_t r = 0; r < layer.out_dim(); ++r) {
      if (dz[r] == 0.0) continue;
      g.bias[r] += dz[r];
      for (std::size_t c = 0; c < layer.in_dim(); ++c) {
        g.weights(r, c) += dz[r] * in[c];
        dx[c] += dz[r] * layer.weights(r, c);
      }
    }
    upstream = std::move(dx);
  }
  return upstream;
}

std::vector<std::span<double>> param_blocks(DenseParams& p) {
  return {std::span<double>(p.weights.data), std::span<double>(p.bias)};
}

std::vector<std::span<double>> param_blocks(Mlp& m) {
  std::vector<std::span<double>> out;
  for (auto& layer : m.layers)
    for (auto block : param_blocks(layer)) out.push_back(block);
  return out;
}

}  // namespace edgeids::neural
