#pragma once

#include "ddet/engine.hpp"

#include <iosfwd>
#include <string>

namespace ddet {

// k,agent,y,u,e_abc,e_y,e_y_tilde,delta,h,triggered,ppd_hat,theta with a
// 1-based agent column.
void write_trace_csv(std::ostream& out, const SimResult& result);

// Reads a trace written by write_trace_csv. The reference and gauge are not
// part of the file, so the result has empty reference/delta/scale.
SimResult read_trace_csv(std::istream& in, const std::string& source = "<trace>");
SimResult load_trace_csv(const std::string& path);

void write_metrics_csv(std::ostream& out, const Metrics& metrics);

struct SummaryInfo {
  std::string title;
  std::string partition_v1;  // "{1,2,4}"
  std::string partition_v2;
  double theta_final = 0.0;
};

void write_summary(std::ostream& out, const SummaryInfo& info, const SimResult& result,
                   const Metrics& metrics);

// Outputs against k with the scaled reference overlays m*y_d and -n*y_d.
void write_outputs_svg(std::ostream& out, const SimResult& result, double m, double n);

// Event-function values per agent with a tick at every trigger.
void write_events_svg(std::ostream& out, const SimResult& result);

}  // namespace ddet
