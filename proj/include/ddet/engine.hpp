#pragma once

#include "ddet/attack.hpp"
#include "ddet/controller.hpp"
#include "ddet/plant.hpp"
#include "ddet/signed_graph.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace ddet {

enum class TriggerMode {
  Event,     // event-triggered updates
  Periodic,  // every step is an event
};

struct InitialValues {
  std::vector<double> y;
  std::vector<double> u;
  std::vector<double> ppd;
  double theta = 0.0;  // threshold before the first step
};

struct SimConfig {
  SignedDigraph graph;
  double m = 1.0;
  double n = 1.0;
  std::vector<PlantModel> plants;
  ReferenceSignal reference;
  long horizon = 0;
  std::vector<ControllerGains> gains;
  InitialValues init;
  // Empty: no attacks. One schedule: shared by every agent. Otherwise one per agent.
  std::vector<DosSchedule> attacks;
  PsiPinning psi_pinning = PsiPinning::Signed;
  bool skip_estimator_on_attack = false;
  TriggerMode trigger = TriggerMode::Event;
  std::uint64_t seed = 0;
  unsigned threads = 1;  // 0 = hardware concurrency
};

struct TraceRow {
  long k = 0;
  std::size_t agent = 0;  // 0-based
  double y = 0.0;
  double u = 0.0;
  double e_abc = 0.0;
  double e_y = 0.0;
  double e_y_tilde = 0.0;
  double delta = 0.0;
  int h = 1;
  bool triggered = false;
  double ppd_hat = 0.0;
  double theta = 0.0;
  // Event function evaluated from step k-1 data; -inf on the forced first event.
  double event_value = 0.0;
};

struct SimResult {
  std::size_t agents = 0;
  long horizon = 0;
  std::vector<TraceRow> rows;  // row (k, i) at index k * agents + i
  std::vector<double> reference;
  std::vector<double> delta;   // gauge signs, empty when unknown
  std::vector<double> scale;   // gauge scales, empty when unknown
  std::vector<std::pair<long, long>> reference_segments;

  const TraceRow& at(long k, std::size_t i) const {
    return rows[static_cast<std::size_t>(k) * agents + i];
  }
};

// Validates the configuration and the graph assumptions (structural balance,
// spanning tree) and returns the derived gauge and coupling matrices.
struct PreparedNetwork {
  Partition partition;
  BalanceGauge gauge;
  CouplingMatrices coupling;
};
PreparedNetwork prepare(const SimConfig& config);

// Closed-loop run. Per step k:
//   1. availability h(k);
//   2. each agent evaluates the event function on step k-1 data (k = 0 always
//      fires) and, if it fires, broadcasts y(k);
//   3. fired agents update the PPD estimate (+ reset) and the held input
//      from the triggered error; the input only moves when h = 1;
//   4. the step is logged with theta(k) and every plant advances.
SimResult run(const SimConfig& config);

struct LyapunovTrace {
  std::vector<double> v;   // V(k) = e_y(k)^T e_y(k)
  std::vector<double> dv;  // dv[k] = V(k+1) - V(k)

  long increases(long from_step = 0) const;
};

LyapunovTrace lyapunov_trace(const SimResult& result);

struct SegmentStats {
  long start = 0;
  long end = 0;
  std::size_t agent = 0;
  double mean_abs_e_abc = 0.0;
  double max_abs_e_abc = 0.0;
  // mean |y_i - delta_i s_i y_d|; NaN when the gauge is unknown
  double mean_abs_tracking = std::numeric_limits<double>::quiet_NaN();
  long attacked_steps = 0;
  long triggers = 0;
};

struct Metrics {
  std::vector<SegmentStats> segments;
  std::vector<long> trigger_counts;
  std::vector<double> trigger_rates;  // count / horizon
  double max_abs_e_abc = 0.0;
  long attacked_steps = 0;  // steps where any agent had h = 0
  long lyapunov_increases = 0;
};

// Throws ErrorKind::OutOfRange for segments outside [0, horizon) or empty ones.
Metrics summarize(const SimResult& result, const std::vector<std::pair<long, long>>& segments);

// Last `length` steps of every reference segment.
std::vector<std::pair<long, long>> steady_state_windows(
    const std::vector<std::pair<long, long>>& segments, long length = 200);

// Offline data diagnostics for quantities the controller never uses online.
struct DiagnosticsReport {
  std::vector<double> output_ppd_bound;  // b_i^y: max |Dy(k+1)/Du(k)|
  std::vector<double> error_ppd_bound;   // b_i:   max |De_y(k+1)/Du(k)|
  std::vector<double> min_abs_input;     // epsilon_i: min |u_i(k)|
  Matrix input_ratio;                    // sigma_ij: max |Du_j(k)| / |Du_i(k)|
};

DiagnosticsReport diagnostics(const SimResult& result);

}  // namespace ddet
