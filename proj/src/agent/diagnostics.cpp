#include <ostream>

#include "edgeids/agent.hpp"
#include "edgeids/csv.hpp"

namespace edgeids::agent {

void write_diagnostics_csv(std::ostream& os, std::span<const DiagnosticsRow> rows) {
  csv::Writer w(os);
  w.field("step").field("epsilon").field("eta").field("td_error_mean").field("lyapunov").field("contraction_ratio");
  w.end_row();
  for (const auto& r : rows) {
    w.field(r.step).field(r.epsilon).field(r.eta).field(r.td_error_mean).field(r.lyapunov);
    if (r.contraction_ratio)
      w.field(*r.contraction_ratio);
    else
      w.field(std::string_view{});
    w.end_row();
  }
}

}  // namespace edgeids::agent
