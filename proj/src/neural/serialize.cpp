#include <iomanip>
#include <istream>
#include <ostream>
#include <string>

#include "edgeids/neural.hpp"

namespace edgeids::neural {

namespace {

void write_row(std::ostream& os, std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) os << ' ';
    os << values[i];
  }
  os << '\n';
}

void expect_token(std::istream& is, std::string_view expected) {
  std::string tok;
  if (!(is >> tok)) throw CorruptCheckpoint("checkpoint truncated: expected '" + std::string(expected) + "'");
  if (tok != expected)
    throw CorruptCheckpoint("checkpoint corrupt: expected '" + std::string(expected) + "', found '" + tok + "'");
}

std::size_t read_count(std::istream& is, std::string_view what) {
  long long v = -1;
  if (!(is >> v) || v < 0) throw CorruptCheckpoint("checkpoint corrupt: bad " + std::string(what));
  return static_cast<std::size_t>(v);
}

void read_values(std::istream& is, std::span<double> out, std::string_view where) {
  for (double& v : out) {
    if (!(is >> v)) throw CorruptCheckpoint("checkpoint truncated inside " + std::string(where));
    if (!std::isfinite(v)) throw CorruptCheckpoint("checkpoint has non-finite value in " + std::string(where));
  }
}

class PrecisionGuard {
 public:
  explicit PrecisionGuard(std::ostream& os) : os_(os), prec_(os.precision()) { os_ << std::setprecision(17); }
  ~PrecisionGuard() { os_.precision(prec_); }

 private:
  std::ostream& os_;
  std::streamsize prec_;
};

}  // namespace

void write_dense(std::ostream& os, std::string_view name, const DenseParams& p) {
  PrecisionGuard guard(os);
  os << "dense " << name << ' ' << p.out_dim() << ' ' << p.in_dim() << ' ' << to_string(p.activation) << '\n';
  for (std::size_t r = 0; r < p.out_dim(); ++r) write_row(os, p.weights.row(r));
  write_row(os, p.bias);
}

DenseParams read_dense(std::istream& is, std::string_view expected_name) {
  expect_token(is, "dense");
  expect_token(is, expected_name);
  const std::size_t out = read_count(is, "row count");
  const std::size_t in = read_count(is, "column count");
  std::string act;
  if (!(is >> act)) throw CorruptCheckpoint("checkpoint truncated: missing activation");
  DenseParams p;
  try {
    p = DenseParams::zeros(in, out, activation_from_string(act));
  } catch (const std::invalid_argument& e) {
    throw CorruptCheckpoint(std::string("checkpoint corrupt: ") + e.what());
  }
  read_values(is, p.weights.data, expected_name);
  read_values(is, p.bias, expected_name);
  return p;
}

void write_mlp(std::ostream& os, std::string_view name, const Mlp& m) {
  os << "mlp " << name << ' ' << m.layers.size() << '\n';
  for (std::size_t i = 0; i < m.layers.size(); ++i) write_dense(os, std::string(name) + "." + std::to_string(i), m.layers[i]);
}

Mlp read_mlp(std::istream& is, std::string_view expected_name) {
  expect_token(is, "mlp");
  expect_token(is, expected_name);
  const std::size_t n = read_count(is, "layer count");
  Mlp m;
  for (std::size_t i = 0; i < n; ++i) m.layers.push_back(read_dense(is, std::string(expected_name) + "." + std::to_string(i)));
  return m;
}

void write_lstm(std::ostream& os, std::string_view name, const LstmParams& p) {
  PrecisionGuard guard(os);
  os << "lstm " << name << ' ' << p.input_dim << ' ' << p.hidden_dim << '\n';
  for (const Matrix* w : {&p.w_i, &p.w_f, &p.w_o, &p.w_g})
    for (std::size_t r = 0; r < w->rows; ++r) write_row(os, w->row(r));
  for (const Vector* b : {&p.b_i, &p.b_f, &p.b_o, &p.b_g}) write_row(os, *b);
}

LstmParams read_lstm(std::istream& is, std::string_view expected_name) {
  expect_token(is, "lstm");
  expect_token(is, expected_name);
  const std::size_t in = read_count(is, "input size");
  const std::size_t hidden = read_count(is, "hidden size");
  LstmParams p = LstmParams::zeros(in, hidden);
  for (auto block : param_blocks(p)) read_values(is, block, expected_name);
  return p;
}

}  // namespace edgeids::neural
