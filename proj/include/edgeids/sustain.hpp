#pragma once

// Carbon-aware reward, per-step energy/memory/carbon accounting and the
// sustainability analysis helpers (Pareto front, penalty matrix, Lagrangian).

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace edgeids::sustain {

class RangeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// gCO2 per joule for a grid intensity given in gCO2 per kWh.
constexpr double per_joule_from_per_kwh(double g_per_kwh) { return g_per_kwh / 3.6e6; }

inline constexpr double kDefaultKappaPerKwh = 400.0;

enum class RewardVariant : std::uint8_t { deepedge, autodrl };

std::string_view to_string(RewardVariant v);
RewardVariant reward_variant_from_string(std::string_view s);

/// Weights of the six reward terms. For the autodrl variant the second term
/// penalizes the false-negative rate instead of the false-positive rate.
struct RewardWeights {
  double alpha = 1.0;      // detection rate
  double beta = 0.5;       // false-positive (or false-negative) rate
  double lambda_l = 0.1;   // response latency
  double delta = 0.01;     // energy
  double epsilon_w = 0.1;  // memory utilization
  double zeta = 0.05;      // carbon
  RewardVariant variant = RewardVariant::deepedge;
  double latency_cap_s = 5.0;  // L is clipped here before weighting
  double energy_cap_j = 5.0;   // E is clipped here before weighting

  void validate() const;
};

struct RewardComponents {
  double detection_rate = 0.0;  // [0,1]
  double error_rate = 0.0;      // FPR for deepedge, FNR for autodrl; [0,1]
  double latency_s = 0.0;       // >= 0
  double energy_j = 0.0;        // >= 0
  double memory_util = 0.0;     // [0,1]
  double carbon_g = 0.0;        // >= 0

  void validate() const;
};

enum RewardTerm : std::size_t { kDetection = 0, kErrorRate, kLatency, kEnergy, kMemory, kCarbon, kTermCount };

struct RewardBreakdown {
  double total = 0.0;
  std::array<double, kTermCount> per_term{};  // signed contributions; total is their sum
};

RewardBreakdown compute_reward(const RewardWeights& w, const RewardComponents& c);

/// Largest |R| attainable with in-range components: alpha + beta + lambda_L*L_cap
/// + delta*E_cap + epsilon_w + zeta*C_cap.
double reward_bound(const RewardWeights& w, double carbon_cap_g);
/// Bound on the discounted return, R_max / (1 - gamma).
double return_bound(double r_max, double gamma);

double energy_overhead(double power_w, double dt_s);
double memory_util(double active_bytes, double total_bytes);
double carbon_emission(double energy_j, double kappa_g_per_j);

/// Residual of the steady-state condition dR/dE + zeta*kappa = 0 for the
/// linear reward, where dR/dE = -delta.
double equilibrium_check(const RewardWeights& w, double kappa_g_per_j);

/// Constrained-objective Lagrangian J - lambda_E (E - E_max) - lambda_M (M - M_max).
double lagrangian_value(double objective, double energy_j, double memory_ratio, double lambda_e, double lambda_m,
                        double energy_max, double memory_max);

// ---------------------------------------------------------------------------
// Ledger

struct LedgerLimits {
  double p_max_w = 5.0;
  double kappa_max_g_per_j = per_joule_from_per_kwh(1000.0);
  double e_max_j = 5000.0;    // cumulative energy budget per run
  double m_max_ratio = 0.95;  // per-step memory utilization ceiling
  double c_max_g = 1.0;       // cumulative carbon budget per run
};

struct LedgerRecord {
  std::size_t step = 0;
  double power_w = 0.0;
  double dt_s = 0.0;
  double kappa_g_per_j = 0.0;
  double mem_active_bytes = 0.0;
  double mem_total_bytes = 0.0;
  double energy_j = 0.0;
  double memory_ratio = 0.0;
  double carbon_g = 0.0;
};

enum class ViolationKind : std::uint8_t { step_energy, step_carbon, cumulative_energy, memory, cumulative_carbon };

std::string_view to_string(ViolationKind k);

struct BoundViolation {
  std::size_t step = 0;
  ViolationKind kind = ViolationKind::step_energy;
  double value = 0.0;
  double limit = 0.0;
};

class SustainabilityLedger {
 public:
  explicit SustainabilityLedger(LedgerLimits limits = {});

  const LedgerRecord& record(std::size_t step, double power_w, double dt_s, double kappa_g_per_j,
                             double mem_active_bytes, double mem_total_bytes);
  /// Appends a pre-computed record without recomputing its derived columns.
  void append_raw(const LedgerRecord& r);

  const std::vector<LedgerRecord>& records() const { return records_; }
  const LedgerLimits& limits() const { return limits_; }
  double cumulative_energy() const { return cum_energy_; }
  double cumulative_carbon() const { return cum_carbon_; }
  void clear();

  /// CSV columns: step,P_w,dt_s,E_j,M_ratio,C_g
  void write_csv(std::ostream& os) const;

 private:
  LedgerLimits limits_;
  std::vector<LedgerRecord> records_;
  double cum_energy_ = 0.0;
  double cum_carbon_ = 0.0;
};

std::vector<BoundViolation> check_bounds(const SustainabilityLedger& ledger);

/// Per-step carbon intensity. Steps beyond the schedule reuse the last entry.
class KappaSchedule {
 public:
  KappaSchedule() = default;
  explicit KappaSchedule(double constant_g_per_j);
  /// CSV with header step,kappa_g_per_joule; rows must have increasing steps.
  static KappaSchedule from_csv(const std::string& path);

  double at(std::size_t step) const;
  double max_value() const;
  bool empty() const { return steps_.empty(); }

 private:
  std::vector<std::size_t> steps_;
  std::vector<double> values_;
};

// ---------------------------------------------------------------------------

struct EnergyCarbonPoint {
  double energy = 0.0;
  double carbon = 0.0;
  bool operator==(const EnergyCarbonPoint&) const = default;
};

/// Non-dominated subset under component-wise <= with at least one strict
/// inequality. Survivors keep their input order.
std::vector<EnergyCarbonPoint> pareto_front(const std::vector<EnergyCarbonPoint>& points);

/// Symmetric positive-definite quadratic penalty over z = [E, M, C].
class PenaltyMatrix {
 public:
  explicit PenaltyMatrix(const std::array<std::array<double, 3>, 3>& h);
  /// Diagonal weights a4, a5, a6 with coupling terms a45, a46, a56 placed
  /// as halves on the off-diagonals.
  static PenaltyMatrix from_coupling(double a4, double a5, double a6, double a45, double a46, double a56);

  const std::array<std::array<double, 3>, 3>& values() const { return h_; }

 private:
  std::array<std::array<double, 3>, 3> h_;
};

double penalty_value(const PenaltyMatrix& h, const std::array<double, 3>& z);

}  // namespace edgeids::sustain
