#include <string>

#include "edgeids/neural.hpp"

namespace edgeids::neural {

LstmParams LstmParams::zeros(std::size_t input, std::size_t hidden) {
  LstmParams p;
  p.input_dim = input;
  p.hidden_dim = hidden;
  const std::size_t cols = input + hidden;
  p.w_i = p.w_f = p.w_o = p.w_g = Matrix(hidden, cols);
  p.b_i = p.b_f = p.b_o = p.b_g = Vector(hidden, 0.0);
  return p;
}

LstmParams LstmParams::init(std::size_t input, std::size_t hidden, Rng& rng) {
  if (input == 0 || hidden == 0) throw DimensionError("LstmParams::init: zero dimension");
  LstmParams p = zeros(input, hidden);
  const double bound = 1.0 / std::sqrt(static_cast<double>(input + hidden));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto block : param_blocks(p))
    for (double& v : block) v = dist(rng);
  return p;
}

void LstmParams::validate() const {
  const std::size_t cols = input_dim + hidden_dim;
  for (const Matrix* w : {&w_i, &w_f, &w_o, &w_g})
    if (w->rows != hidden_dim || w->cols != cols || w->data.size() != hidden_dim * cols)
      throw DimensionError("lstm: gate weight block has inconsistent shape");
  for (const Vector* b : {&b_i, &b_f, &b_o, &b_g})
    if (b->size() != hidden_dim) throw DimensionError("lstm: gate bias has inconsistent length");
  for (auto block : param_blocks(const_cast<LstmParams&>(*this)))
    for (double v : block)
      if (!std::isfinite(v)) throw NonFiniteError("lstm: non-finite parameter");
}

LstmStepCache lstm_cell_step_cached(const LstmParams& p, std::span<const double> x, std::span<const double> h_prev,
                                    std::span<const double> c_prev) {
  if (x.size() != p.input_dim)
    throw DimensionError("lstm_cell_step: input has " + std::to_string(x.size()) + " entries, cell expects " +
                         std::to_string(p.input_dim));
  if (h_prev.size() != p.hidden_dim || c_prev.size() != p.hidden_dim)
    throw DimensionError("lstm_cell_step: recurrent state size mismatch");
  LstmStepCache s;
  s.xh.reserve(p.input_dim + p.hidden_dim);
  s.xh.insert(s.xh.end(), x.begin(), x.end());
  s.xh.insert(s.xh.end(), h_prev.begin(), h_prev.end());
  s.c_prev.assign(c_prev.begin(), c_prev.end());
  const std::size_t n = p.hidden_dim;
  s.i.resize(n);
  s.f.resize(n);
  s.o.resize(n);
  s.g.resize(n);
  s.c.resize(n);
  s.tanh_c.resize(n);
  s.h.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    double zi = p.b_i[k], zf = p.b_f[k], zo = p.b_o[k], zg = p.b_g[k];
    for (std::size_t j = 0; j < s.xh.size(); ++j) {
      const double v = s.xh[j];
      zi += p.w_i(k, j) * v;
      zf += p.w_f(k, j) * v;
      zo += p.w_o(k, j) * v;
      zg += p.w_g(k, j) * v;
    }
    s.i[k] = sigmoid(zi);
    s.f[k] = sigmoid(zf);
    s.o[k] = sigmoid(zo);
    s.g[k] = std::tanh(zg);
    s.c[k] = s.f[k] * c_prev[k] + s.i[k] * s.g[k];
    s.tanh_c[k] = std::tanh(s.c[k]);
    s.h[k] = s.o[k] * s.tanh_c[k];
  }
  return s;
}

LstmStep lstm_cell_step(const LstmParams& p, std::span<const double> x, std::span<const double> h_prev,
                        std::span<const double> c_prev) {
  auto s = lstm_cell_step_cached(p, x, h_prev, c_prev);
  return {std::move(s.h), std::move(s.c)};
}

std::vector<std::span<double>> param_blocks(LstmParams& p) {
  return {std::span<double>(p.w_i.data), std::span<double>(p.w_f.data), std::span<double>(p.w_o.data),
          std::span<double>(p.w_g.data), std::span<double>(p.b_i),      std::span<double>(p.b_f),
          std::span<double>(p.b_o),      std::span<double>(p.b_g)};
}

}  // namespace edgeids::neural
