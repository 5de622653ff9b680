#include <algorithm>
#include <cmath>
#include <ostream>

#include "edgeids/csv.hpp"
#include "edgeids/sustain.hpp"

namespace edgeids::sustain {

std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::step_energy: return "step_energy";
    case ViolationKind::step_carbon: return "step_carbon";
    case ViolationKind::cumulative_energy: return "cumulative_energy";
    case ViolationKind::memory: return "memory";
    case ViolationKind::cumulative_carbon: return "cumulative_carbon";
  }
  return "unknown";
}

SustainabilityLedger::SustainabilityLedger(LedgerLimits limits) : limits_(limits) {}

const LedgerRecord& SustainabilityLedger::record(std::size_t step, double power_w, double dt_s, double kappa_g_per_j,
                                                 double mem_active_bytes, double mem_total_bytes) {
  LedgerRecord r;
  r.step = step;
  r.power_w = power_w;
  r.dt_s = dt_s;
  r.kappa_g_per_j = kappa_g_per_j;
  r.mem_active_bytes = mem_active_bytes;
  r.mem_total_bytes = mem_total_bytes;
  r.energy_j = energy_overhead(power_w, dt_s);
  r.memory_ratio = memory_util(mem_active_bytes, mem_total_bytes);
  r.carbon_g = carbon_emission(r.energy_j, kappa_g_per_j);
  append_raw(r);
  return records_.back();
}

void SustainabilityLedger::append_raw(const LedgerRecord& r) {
  records_.push_back(r);
  cum_energy_ += r.energy_j;
  cum_carbon_ += r.carbon_g;
}

void SustainabilityLedger::clear() {
  records_.clear();
  cum_energy_ = 0.0;
  cum_carbon_ = 0.0;
}

void SustainabilityLedger::write_csv(std::ostream& os) const {
  csv::Writer w(os);
  w.field("step").field("P_w").field("dt_s").field("E_j").field("M_ratio").field("C_g").end_row();
  for (const auto& r : records_)
    w.field(r.step).field(r.power_w).field(r.dt_s).field(r.energy_j).field(r.memory_ratio).field(r.carbon_g).end_row();
}

std::vector<BoundViolation> check_bounds(const SustainabilityLedger& ledger) {
  const auto& lim = ledger.limits();
  std::vector<BoundViolation> out;
  double cum_e = 0.0, cum_c = 0.0;
  bool cum_e_reported = false, cum_c_reported = false;
  for (const auto& r : ledger.records()) {
    const double e_limit = lim.p_max_w * r.dt_s;
    if (r.energy_j > e_limit) out.push_back({r.step, ViolationKind::step_energy, r.energy_j, e_limit});
    const double c_limit = lim.kappa_max_g_per_j * r.energy_j;
    if (r.carbon_g > c_limit) out.push_back({r.step, ViolationKind::step_carbon, r.carbon_g, c_limit});
    if (r.memory_ratio > lim.m_max_ratio) out.push_back({r.step, ViolationKind::memory, r.memory_ratio, lim.m_max_ratio});
    cum_e += r.energy_j;
    cum_c += r.carbon_g;
    if (!cum_e_reported && cum_e > lim.e_max_j) {
      out.push_back({r.step, ViolationKind::cumulative_energy, cum_e, lim.e_max_j});
      cum_e_reported = true;
    }
    if (!cum_c_reported && cum_c > lim.c_max_g) {
      out.push_back({r.step, ViolationKind::cumulative_carbon, cum_c, lim.c_max_g});
      cum_c_reported = true;
    }
  }
  return out;
}

KappaSchedule::KappaSchedule(double constant_g_per_j) {
  if (!(constant_g_per_j >= 0.0)) throw RangeError("kappa must be >= 0");
  steps_.push_back(0);
  values_.push_back(constant_g_per_j);
}

KappaSchedule KappaSchedule::from_csv(const std::string& path) {
  const auto table = csv::read_file(path);
  const auto step_col = table.column("step");
  const auto kappa_col = table.column("kappa_g_per_joule");
  if (!step_col || !kappa_col) throw std::runtime_error(path + ": expected columns step,kappa_g_per_joule");
  KappaSchedule s;
  for (const auto& row : table.rows) {
    if (row.size() <= std::max(*step_col, *kappa_col)) throw std::runtime_error(path + ": short row");
    const auto step = csv::parse_int(row[*step_col]);
    const auto kappa = csv::parse_double(row[*kappa_col]);
    if (!step || *step < 0 || !kappa || !(*kappa >= 0.0)) throw std::runtime_error(path + ": malformed row");
    if (!s.steps_.empty() && static_cast<std::size_t>(*step) <= s.steps_.back())
      throw std::runtime_error(path + ": steps must be strictly increasing");
    s.steps_.push_back(static_cast<std::size_t>(*step));
    s.values_.push_back(*kappa);
  }
  if (s.steps_.empty()) throw std::runtime_error(path + ": empty kappa schedule");
  return s;
}

double KappaSchedule::at(std::size_t step) const {
  if (steps_.empty()) return per_joule_from_per_kwh(kDefaultKappaPerKwh);
  auto it = std::upper_bound(steps_.begin(), steps_.end(), step);
  if (it == steps_.begin()) return values_.front();
  return values_[static_cast<std::size_t>(std::distance(steps_.begin(), it)) - 1];
}

double KappaSchedule::max_value() const {
  if (values_.empty()) return per_joule_from_per_kwh(kDefaultKappaPerKwh);
  return *std::max_element(values_.begin(), values_.end());
}

}  // namespace edgeids::sustain
