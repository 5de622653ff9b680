#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "edgeids/pipeline.hpp"

namespace edgeids::pipeline {

std::string_view to_string(AgentKind k) {
  switch (k) {
    case AgentKind::deepedge: return "deepedge";
    case AgentKind::autodrl: return "autodrl";
    case AgentKind::tabular: return "tabular";
  }
  return "deepedge";
}

AgentKind agent_kind_from_string(std::string_view s) {
  if (s == "deepedge") return AgentKind::deepedge;
  if (s == "autodrl") return AgentKind::autodrl;
  if (s == "tabular") return AgentKind::tabular;
  throw std::invalid_argument("unknown agent kind '" + std::string(s) + "' (expected deepedge, autodrl or tabular)");
}

void DetectorConfig::validate() const {
  if (warmup_steps < 3) throw std::invalid_argument("detector.warmup_steps must be >= 3");
  if (ae_hidden == 0 || ae_latent == 0) throw std::invalid_argument("detector: autoencoder sizes must be >= 1");
  if (!(ae_lr > 0.0) || !std::isfinite(ae_lr)) throw std::invalid_argument("detector.ae_lr must be > 0");
  if (max_training_flows == 0) throw std::invalid_argument("detector.max_training_flows must be >= 1");
  for (double q : {flow_quantile, step_quantile})
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("detector quantiles must lie in (0, 1)");
}

std::vector<std::vector<FlowRecord>> collect_benign_steps(const env::ScenarioConfig& scenario, std::size_t steps,
                                                          std::uint64_t seed) {
  env::ScenarioConfig benign = scenario;
  benign.attacks.clear();
  benign.episode_steps = std::max<std::size_t>(steps, 1);
  env::TrafficGenerator gen(benign);
  Rng rng(seed);
  std::vector<std::vector<FlowRecord>> out;
  out.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) out.push_back(gen.generate(t, rng));
  return out;
}

// ---------------------------------------------------------------------------

FlowDetector::FlowDetector(features::Normalizer norm, neural::AutoencoderModel ae, double tau_flow, double tau_step)
    : norm_(std::move(norm)), ae_(std::move(ae)), tau_flow_(tau_flow), tau_step_(tau_step) {
  ae_.validate();
  if (norm_.dim() != ae_.input_dim) throw neural::DimensionError("flow detector: normalizer and autoencoder widths differ");
  if (!(tau_flow_ >= 0.0 && tau_step_ >= 0.0)) throw std::invalid_argument("flow detector: thresholds must be >= 0");
}

FlowDetector FlowDetector::fit(std::span<const std::vector<FlowRecord>> benign_steps, const DetectorConfig& cfg,
                               Rng& rng) {
  cfg.validate();
  if (benign_steps.size() < 3) throw std::invalid_argument("flow detector: need at least 3 warm-up steps");
  const std::size_t n_train = std::max<std::size_t>(1, benign_steps.size() * 2 / 3);

  std::vector<std::vector<double>> rows;
  for (std::size_t t = 0; t < n_train && rows.size() < cfg.max_training_flows; ++t)
    for (const auto& f : benign_steps[t]) {
      if (rows.size() >= cfg.max_training_flows) break;
      rows.push_back(features::log_features(features::extract_features(f)));
    }
  if (rows.size() < 2) throw std::invalid_argument("flow detector: warm-up produced fewer than 2 flows");

  features::Normalizer norm(cfg.norm);
  norm.fit(rows);
  for (auto& r : rows) r = norm.transform(r);

  auto ae = neural::AutoencoderModel::init(features::kFeatureCount, cfg.ae_hidden, cfg.ae_latent, rng);
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t e = 0; e < cfg.ae_epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      auto g = neural::autoencoder_gradients(ae, rows[i]);
      if (!std::isfinite(g.loss)) throw neural::NonFiniteError("autoencoder training diverged");
      neural::apply_gradients(ae, g.grads, cfg.ae_lr);
    }
  }

  FlowDetector det(std::move(norm), std::move(ae), 0.0, 0.0);
  std::vector<double> flow_err, step_err;
  for (std::size_t t = n_train; t < benign_steps.size(); ++t) {
    const auto s = det.step_score(benign_steps[t]);
    step_err.push_back(s.anomaly);
    for (const auto& f : benign_steps[t]) flow_err.push_back(det.score(f));
  }
  if (flow_err.empty()) throw std::invalid_argument("flow detector: threshold steps contain no flows");
  det.tau_flow_ = eval::quantile(flow_err, cfg.flow_quantile);
  det.tau_step_ = eval::quantile(step_err, cfg.step_quantile);
  return det;
}

std::vector<double> FlowDetector::encode_input(const FlowRecord& f) const {
  return norm_.transform(features::log_features(features::extract_features(f)));
}

double FlowDetector::score(const FlowRecord& f) const { return neural::reconstruction_error(ae_, encode_input(f)); }

void FlowDetector::score_all(std::span<const FlowRecord> flows, std::vector<double>& out) const {
  out.resize(flows.size());
  for (std::size_t i = 0; i < flows.size(); ++i) out[i] = score(flows[i]);
}

StepScore FlowDetector::step_score(std::span<const FlowRecord> flows) const {
  StepScore s;
  s.latent.assign(ae_.latent_dim, 0.0);
  if (flows.empty()) return s;
  for (const auto& f : flows) {
    const auto x = encode_input(f);
    const auto out = neural::autoencoder_forward(ae_, x);
    double err = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) err += (x[j] - out.reconstruction[j]) * (x[j] - out.reconstruction[j]);
    s.anomaly += err;
    for (std::size_t j = 0; j < s.latent.size(); ++j) s.latent[j] += out.latent[j];
  }
  const double n = static_cast<double>(flows.size());
  s.anomaly /= n;
  for (double& v : s.latent) v /= n;
  return s;
}

void FlowDetector::write(std::ostream& os) const {
  const auto old = os.precision(17);
  os << "flow_detector " << tau_flow_ << ' ' << tau_step_ << '\n';
  os.precision(old);
  norm_.write(os, "flow");
  neural::write_mlp(os, "ae_encoder", ae_.encoder);
  neural::write_mlp(os, "ae_decoder", ae_.decoder);
}

FlowDetector FlowDetector::read(std::istream& is) {
  std::string tag;
  double tf = 0.0, ts = 0.0;
  if (!(is >> tag >> tf >> ts) || tag != "flow_detector") throw neural::CorruptCheckpoint("expected flow_detector record");
  auto norm = features::Normalizer::read(is, "flow");
  neural::AutoencoderModel ae;
  ae.encoder = neural::read_mlp(is, "ae_encoder");
  ae.decoder = neural::read_mlp(is, "ae_decoder");
  ae.input_dim = ae.encoder.in_dim();
  ae.latent_dim = ae.encoder.out_dim();
  if (ae.decoder.in_dim() != ae.latent_dim) throw neural::DimensionError("layer ae_decoder.0: input width differs from latent size");
  if (ae.decoder.out_dim() != ae.input_dim) throw neural::DimensionError("layer ae_decoder: output width differs from input size");
  return FlowDetector(std::move(norm), std::move(ae), tf, ts);
}

// ---------------------------------------------------------------------------

void SequenceConfig::validate() const {
  if (hidden == 0 || window == 0) throw std::invalid_argument("sequence: hidden and window must be >= 1");
  if (scenarios.empty()) throw std::invalid_argument("sequence.scenarios must name at least one scenario");
  rates.validate();
  if (!(alert_threshold > 0.0 && alert_threshold < 1.0)) throw std::invalid_argument("sequence.alert_threshold must lie in (0, 1)");
}

std::vector<LabeledTrace> collect_labeled_traces(const env::EnvConfig& base, std::span<const std::string> scenarios,
                                                 std::uint64_t seed) {
  std::vector<LabeledTrace> out;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    env::EnvConfig cfg = base;
    auto preset = env::scenario_preset(scenarios[i], cfg.scenario.episode_steps);
    cfg.scenario.attacks = preset.attacks;
    env::GatewayEnv env(cfg, seed + 7919 * (i + 1));
    LabeledTrace tr;
    while (!env.done()) {
      auto o = env.step(std::nullopt);
      tr.summaries.push_back(features::step_summary(o.offered, cfg.scenario.dt_s));
      tr.labels.push_back(o.attack_active ? 1 : 0);
    }
    out.push_back(std::move(tr));
  }
  return out;
}

SequenceDetector::SequenceDetector(features::Normalizer norm, neural::LstmClassifier model, double alert_threshold,
                                   std::size_t supervised_steps)
    : norm_(std::move(norm)), model_(std::move(model)), alert_threshold_(alert_threshold), k_(supervised_steps) {
  model_.validate();
  if (norm_.dim() != model_.cell.input_dim) throw neural::DimensionError("sequence detector: normalizer and LSTM widths differ");
}

SequenceDetector SequenceDetector::pretrain(std::span<const std::vector<FlowRecord>> benign_steps, double dt_s,
                                            std::span<const LabeledTrace> traces, const SequenceConfig& cfg, Rng& rng) {
  cfg.validate();
  std::vector<std::vector<double>> benign;
  for (const auto& flows : benign_steps) benign.push_back(features::step_summary(flows, dt_s));
  if (benign.size() < 2) throw std::invalid_argument("sequence detector: need at least 2 benign steps");
  features::Normalizer norm(features::NormKind::zscore);
  norm.fit(benign);

  auto model = neural::LstmClassifier::init(features::kStepSummaryDim, cfg.hidden, cfg.window, rng);
  std::vector<std::vector<neural::Vector>> normed(traces.size());
  std::vector<std::pair<std::size_t, std::size_t>> samples;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    if (traces[i].summaries.size() != traces[i].labels.size()) throw std::invalid_argument("labelled trace is ragged");
    for (const auto& s : traces[i].summaries) normed[i].push_back(norm.transform(s));
    for (std::size_t t = 0; t < normed[i].size(); ++t) samples.emplace_back(i, t);
  }
  std::size_t k = 0;
  std::vector<neural::Vector> window(cfg.window);
  for (std::size_t e = 0; e < cfg.pretrain_epochs; ++e) {
    std::shuffle(samples.begin(), samples.end(), rng);
    for (auto [i, t] : samples) {
      for (std::size_t j = 0; j < cfg.window; ++j) {
        const std::size_t back = cfg.window - 1 - j;
        window[j] = normed[i][t >= back ? t - back : 0];
      }
      auto g = neural::classifier_gradients(model, window, traces[i].labels[t]);
      if (!std::isfinite(g.loss)) throw neural::NonFiniteError("sequence pre-training diverged");
      neural::apply_gradients(model, g.grads, cfg.rates.supervised.at(k));
      ++k;
    }
  }
  return SequenceDetector(std::move(norm), std::move(model), cfg.alert_threshold, k);
}

std::vector<neural::Vector> SequenceDetector::padded_window() const {
  std::vector<neural::Vector> w;
  w.reserve(model_.window_len);
  for (std::size_t i = window_.size(); i < model_.window_len; ++i) w.push_back(window_.front());
  w.insert(w.end(), window_.begin(), window_.end());
  return w;
}

neural::ClassifierOutput SequenceDetector::push(std::span<const double> raw_summary) {
  window_.push_back(norm_.transform(raw_summary));
  while (window_.size() > model_.window_len) window_.pop_front();
  return neural::classifier_forward(model_, padded_window());
}

double SequenceDetector::learn(double label, double lr) {
  if (window_.empty()) throw std::logic_error("sequence detector: learn() before any push()");
  auto g = neural::classifier_gradients(model_, padded_window(), label);
  if (!std::isfinite(g.loss)) throw neural::NonFiniteError("sequence detector loss is not finite");
  neural::apply_gradients(model_, g.grads, lr);
  ++k_;
  return g.loss;
}

void SequenceDetector::write(std::ostream& os) const {
  const auto old = os.precision(17);
  os << "sequence_detector " << alert_threshold_ << ' ' << k_ << ' ' << model_.window_len << '\n';
  norm_.write(os, "sequence");
  neural::write_lstm(os, "lstm_cell", model_.cell);
  os << "head " << model_.head_w.size();
  for (double w : model_.head_w) os << ' ' << w;
  os << ' ' << model_.head_b << '\n';
  os.precision(old);
}

SequenceDetector SequenceDetector::read(std::istream& is) {
  std::string tag;
  double thr = 0.0;
  std::size_t k = 0, window = 0;
  if (!(is >> tag >> thr >> k >> window) || tag != "sequence_detector")
    throw neural::CorruptCheckpoint("expected sequence_detector record");
  auto norm = features::Normalizer::read(is, "sequence");
  neural::LstmClassifier m;
  m.cell = neural::read_lstm(is, "lstm_cell");
  m.window_len = window;
  std::size_t n = 0;
  if (!(is >> tag >> n) || tag != "head") throw neural::CorruptCheckpoint("expected classifier head record");
  if (n != m.cell.hidden_dim) throw neural::DimensionError("layer head: width " + std::to_string(n) + " differs from LSTM hidden size " + std::to_string(m.cell.hidden_dim));
  m.head_w.resize(n);
  for (double& w : m.head_w)
    if (!(is >> w)) throw neural::CorruptCheckpoint("truncated classifier head");
  if (!(is >> m.head_b)) throw neural::CorruptCheckpoint("truncated classifier head");
  return SequenceDetector(std::move(norm), std::move(m), thr, k);
}

}  // namespace edgeids::pipeline
