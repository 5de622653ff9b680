#include <fstream>
#include <sstream>

#include "edgeids/cli.hpp"

namespace edgeids::cli {

namespace {

std::string shape(std::size_t out, std::size_t in) { return std::to_string(out) + "x" + std::to_string(in); }

void check_mlp(const neural::Mlp& m, std::string_view name, const std::vector<std::size_t>& sizes) {
  if (m.layers.size() + 1 != sizes.size())
    throw neural::DimensionError("layer " + std::string(name) + ": checkpoint has " + std::to_string(m.layers.size()) +
                                 " layers, config expects " + std::to_string(sizes.size() - 1));
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    const auto& l = m.layers[i];
    if (l.in_dim() != sizes[i] || l.out_dim() != sizes[i + 1])
      throw neural::DimensionError("layer " + std::string(name) + "." + std::to_string(i) + ": checkpoint shape " +
                                   shape(l.out_dim(), l.in_dim()) + ", config expects " + shape(sizes[i + 1], sizes[i]));
  }
}

}  // namespace

void write_checkpoint(std::ostream& os, const ModelSet& m) {
  const auto old = os.precision(17);
  os << "edgeids-checkpoint " << kCheckpointVersion << '\n';
  os << "agent " << pipeline::to_string(m.kind) << '\n';
  if (m.kind == pipeline::AgentKind::tabular) {
    if (!m.table) throw std::invalid_argument("tabular checkpoint needs a Q table");
    os << "qtable " << m.table->states << ' ' << m.table->actions << '\n';
    for (std::size_t s = 0; s < m.table->states; ++s) {
      for (std::size_t a = 0; a < m.table->actions; ++a) os << (a ? " " : "") << (*m.table)(s, a);
      os << '\n';
    }
  } else {
    if (!m.flow || !m.q) throw std::invalid_argument("checkpoint needs a flow detector and a Q network");
    if (m.kind == pipeline::AgentKind::autodrl && !m.sequence) throw std::invalid_argument("autodrl checkpoint needs a sequence detector");
    os << "dqn " << m.epsilon << ' ' << m.updates << '\n';
    os.precision(old);
    m.flow->write(os);
    if (m.sequence) m.sequence->write(os);
    neural::write_mlp(os, "q", m.q->net);
  }
  os << "end\n";
  os.precision(old);
}

void save_checkpoint(const ModelSet& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
  write_checkpoint(out, m);
  if (!out) throw std::runtime_error("failed writing checkpoint '" + path + "'");
}

ModelSet read_checkpoint(std::istream& is) {
  std::string tag;
  int version = 0;
  if (!(is >> tag >> version) || tag != "edgeids-checkpoint") throw neural::CorruptCheckpoint("not an edgeids checkpoint");
  if (version != kCheckpointVersion)
    throw neural::CorruptCheckpoint("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                                    std::to_string(kCheckpointVersion) + ")");
  std::string kind;
  if (!(is >> tag >> kind) || tag != "agent") throw neural::CorruptCheckpoint("missing agent record");
  ModelSet m;
  try {
    m.kind = pipeline::agent_kind_from_string(kind);
  } catch (const std::invalid_argument& e) {
    throw neural::CorruptCheckpoint(e.what());
  }
  if (m.kind == pipeline::AgentKind::tabular) {
    std::size_t s = 0, a = 0;
    if (!(is >> tag >> s >> a) || tag != "qtable" || s == 0 || a == 0) throw neural::CorruptCheckpoint("missing qtable record");
    agent::QTable q(s, a);
    for (double& v : q.v)
      if (!(is >> v)) throw neural::CorruptCheckpoint("truncated qtable");
    m.table = std::move(q);
  } else {
    if (!(is >> tag >> m.epsilon >> m.updates) || tag != "dqn") throw neural::CorruptCheckpoint("missing dqn record");
    m.flow = pipeline::FlowDetector::read(is);
    if (m.kind == pipeline::AgentKind::autodrl) m.sequence = pipeline::SequenceDetector::read(is);
    agent::QNetwork q;
    q.net = neural::read_mlp(is, "q");
    q.net.validate();
    m.q = std::move(q);
  }
  if (!(is >> tag) || tag != "end") throw neural::CorruptCheckpoint("checkpoint is truncated (missing end marker)");
  return m;
}

ModelSet load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  return read_checkpoint(in);
}

void check_architecture(const ModelSet& m, const ExperimentConfig& cfg) {
  if (m.kind != cfg.agent)
    throw neural::DimensionError("checkpoint holds a " + std::string(pipeline::to_string(m.kind)) +
                                 " agent, config asks for " + std::string(pipeline::to_string(cfg.agent)));
  if (m.kind == pipeline::AgentKind::tabular) {
    const auto mdp = agent::TabularMdp::toy(cfg.tabular_mdp_seed);
    if (m.table->states != mdp.states || m.table->actions != mdp.actions)
      throw neural::DimensionError("layer qtable: checkpoint shape " + shape(m.table->states, m.table->actions) +
                                   ", config expects " + shape(mdp.states, mdp.actions));
    return;
  }
  const auto& d = cfg.ids.detector;
  check_mlp(m.flow->model().encoder, "ae_encoder", {features::kFeatureCount, d.ae_hidden, d.ae_latent});
  check_mlp(m.flow->model().decoder, "ae_decoder", {d.ae_latent, d.ae_hidden, features::kFeatureCount});
  std::size_t latent = d.ae_latent;
  if (m.sequence) {
    const auto& s = cfg.ids.sequence;
    const auto& cell = m.sequence->model().cell;
    if (cell.input_dim != features::kStepSummaryDim || cell.hidden_dim != s.hidden)
      throw neural::DimensionError("layer lstm_cell: checkpoint shape " + shape(cell.hidden_dim, cell.input_dim) +
                                   ", config expects " + shape(s.hidden, features::kStepSummaryDim));
    if (m.sequence->model().window_len != s.window)
      throw neural::DimensionError("layer lstm_cell: checkpoint window " + std::to_string(m.sequence->model().window_len) +
                                   ", config expects " + std::to_string(s.window));
    latent = s.hidden;
  }
  std::vector<std::size_t> sizes{4 + latent};
  sizes.insert(sizes.end(), cfg.ids.agent.hidden.begin(), cfg.ids.agent.hidden.end());
  sizes.push_back(agent::kActionCount);
  check_mlp(m.q->net, "q", sizes);
}

ModelSet capture(const pipeline::IdsSystem& ids) {
  ModelSet m;
  m.kind = ids.kind();
  m.flow = ids.flow_detector();
  if (const auto* s = ids.sequence()) m.sequence = *s;
  m.q = ids.agent().q();
  m.epsilon = ids.agent().epsilon();
  m.updates = ids.agent().updates();
  return m;
}

pipeline::IdsSystem restore(const ModelSet& m, const ExperimentConfig& cfg) {
  if (m.kind == pipeline::AgentKind::tabular) throw std::invalid_argument("tabular checkpoints have no IDS system");
  check_architecture(m, cfg);
  pipeline::IdsConfig ic = cfg.ids;
  ic.kind = m.kind;
  agent::Rng rng(0);
  agent::DqnAgent dqn(m.q->state_dim(), ic.agent, rng);
  dqn.q() = *m.q;
  dqn.sync_target();
  dqn.set_epsilon(m.epsilon);
  dqn.set_updates(m.updates);
  return pipeline::IdsSystem(ic, *m.flow, m.sequence, std::move(dqn));
}

}  // namespace edgeids::cli
