#pragma once

// Flow features, state assembly, normalization, the feature-selection
// pipeline and a CSV ingestion adapter for externally captured flows.

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "edgeids/flow.hpp"
#include "edgeids/gateway_state.hpp"

namespace edgeids::features {

inline constexpr std::size_t kFeatureCount = 8;
inline constexpr double kMinDuration = 1e-3;  // guard for instantaneous flows, seconds

enum FeatureIndex : std::size_t {
  kPktsTotal = 0,
  kBytesTotal,
  kDuration,
  kPktRate,
  kPktsIn,
  kPktsOut,
  kBytesPerPkt,
  kFlagsEncoded,
};

using FeatureVector = std::array<double, kFeatureCount>;

const std::array<std::string_view, kFeatureCount>& feature_names();

/// SYN*1 + ACK*2 + FIN*4 + RST*8.
double encode_flags(std::uint8_t flags);
FeatureVector extract_features(const FlowRecord& f);
/// log1p on every component; counts and rates span several decades.
std::vector<double> log_features(const FeatureVector& v);

/// Step-level summary of the offered traffic, fed to the sequence model:
/// log1p of flow count, packets, bytes, SYN packets, ACK packets, distinct
/// sources, mean log1p packet rate and mean log1p bytes per packet.
inline constexpr std::size_t kStepSummaryDim = 8;
std::vector<double> step_summary(std::span<const FlowRecord> flows, double dt_s);

/// P_rate, SYN and ACK from `window` (the passed flows of the last step).
/// Throws when `latent` does not have `expected_latent_dim` entries.
GatewayState build_state(std::span<const FlowRecord> window, double dt_s, double anomaly_score,
                         std::span<const double> latent, std::size_t expected_latent_dim);

// ---------------------------------------------------------------------------

class NotFitted : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class NormKind : std::uint8_t { minmax, zscore };

std::string_view to_string(NormKind k);
NormKind norm_kind_from_string(std::string_view s);

/// Per-dimension scaling fitted on benign warm-up data. Dimensions with no
/// spread get scale 1 so the transform stays finite.
class Normalizer {
 public:
  explicit Normalizer(NormKind kind = NormKind::zscore) : kind_(kind) {}

  void fit(std::span<const std::vector<double>> rows);
  bool fitted() const { return !offset_.empty(); }
  std::size_t dim() const { return offset_.size(); }
  NormKind kind() const { return kind_; }

  /// minmax clamps to [0, 1]; zscore does not clamp.
  std::vector<double> transform(std::span<const double> x) const;

  const std::vector<double>& offset() const { return offset_; }
  const std::vector<double>& scale() const { return scale_; }

  void write(std::ostream& os, std::string_view name) const;
  static Normalizer read(std::istream& is, std::string_view expected_name);

 private:
  NormKind kind_;
  std::vector<double> offset_;  // min or mean
  std::vector<double> scale_;   // max - min or standard deviation
};

FeatureVector normalize(const Normalizer& n, const FeatureVector& v);

// ---------------------------------------------------------------------------
// Selection

struct Dataset {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;  // column-major
  std::vector<int> labels;                   // 0 benign, 1 attack

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  void validate() const;
};

/// Candidate table: the 8 flow features plus redundant, derived and constant
/// columns, one row per flow.
Dataset candidate_table(std::span<const FlowRecord> flows);

double sample_variance(std::span<const double> x);
double pearson(std::span<const double> a, std::span<const double> b);

/// Columns with sample variance strictly above `threshold`.
std::vector<std::size_t> variance_filter(const Dataset& d, double threshold = 1e-6);
/// Greedy in the order given: keeps a column unless |r| with an already kept
/// column exceeds rho_max.
std::vector<std::size_t> pearson_filter(const Dataset& d, std::span<const std::size_t> candidates,
                                        double rho_max = 0.85);
/// Histogram estimate (equal-width bins) of I(column; label) in nats.
std::vector<double> mutual_information_scores(const Dataset& d, std::span<const std::size_t> cols,
                                              std::size_t bins = 16);

/// Returns mean |dLoss/dInput| for each of `cols` (same order) after training
/// some model on them.
using SaliencyHook = std::function<std::vector<double>(const Dataset&, std::span<const std::size_t> cols)>;

/// Standardizes the columns, trains a cols -> hidden -> 1 sigmoid MLP with BCE
/// and averages absolute input gradients over the rows.
SaliencyHook make_mlp_saliency_hook(std::uint64_t seed, std::size_t epochs = 3, std::size_t hidden = 8,
                                    double lr = 0.05, std::size_t max_rows = 2000);

struct RfeResult {
  std::vector<std::size_t> ranking;      // most important first, one entry per initial column
  std::vector<std::size_t> elimination;  // columns in the order they were removed
  std::vector<std::size_t> final_set;    // survivors in input order
};

RfeResult saliency_rfe(const Dataset& d, std::span<const std::size_t> cols, std::size_t target_count,
                       const SaliencyHook& hook);

struct SelectionReport {
  std::vector<std::string> variance_kept;
  std::vector<std::string> correlation_kept;
  std::map<std::string, double> mi_scores;
  std::vector<std::string> rfe_ranking;
  std::vector<std::string> final_set;

  std::string to_json() const;
};

struct SelectionConfig {
  double variance_threshold = 1e-6;
  double rho_max = 0.85;
  std::size_t mi_bins = 16;
  std::size_t target_count = kFeatureCount;
};

SelectionReport run_selection(const Dataset& d, const SelectionConfig& cfg, const SaliencyHook& hook);

// ---------------------------------------------------------------------------
// Ingestion

/// Field name -> CSV header. Required fields: src_id, pkts_total,
/// bytes_total, duration, pkts_in, pkts_out. Optional: flags, label,
/// protocol, syn_pkts, ack_pkts. When syn_pkts/ack_pkts are not mapped they
/// are derived from the flags: one SYN packet if SYN is set, and every other
/// packet counted as ACK if ACK is set.
struct ColumnMapping {
  std::map<std::string, std::string> fields;

  static ColumnMapping canonical();
  static ColumnMapping from_json(std::string_view text);
  static ColumnMapping from_json_file(const std::string& path);
};

struct IngestResult {
  std::vector<FlowRecord> flows;
  std::size_t rows_in = 0;
  std::size_t rows_skipped = 0;
  std::vector<std::string> skip_reasons;  // one per skipped row, "line N: reason"
};

/// Non-numeric source identifiers (e.g. IP addresses) are interned to ids in
/// order of first appearance.
IngestResult ingest_flow_csv(const std::string& path, const ColumnMapping& mapping);
IngestResult ingest_flow_stream(std::istream& is, const ColumnMapping& mapping);

/// Writes flows with the canonical header.
void write_flow_csv(std::ostream& os, std::span<const FlowRecord> flows);

}  // namespace edgeids::features
