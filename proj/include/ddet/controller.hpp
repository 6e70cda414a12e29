#pragma once

#include "ddet/signed_graph.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace ddet {

struct ControllerGains {
  double eta1 = 0.1;    // estimator step
  double eta2 = 0.1;    // controller step
  double mu = 1.0;      // estimator regularizer, > 0
  double varpi = -0.1;  // controller regularizer
  double gamma = 1e-5;  // reset threshold, > 0
};

void validate(const ControllerGains& gains);

// Per-agent controller state. Everything here changes only at event instants
// except ebar_last_step, which tracks the attack-filtered error of the
// previous step for the estimator's difference term.
struct AgentRuntime {
  double ppd_hat = 1.0;
  double ppd_init = 1.0;
  double u_held = 0.0;
  double du_last_event = 0.0;  // input increment applied at the latest event
  double y_at_trigger = 0.0;
  long last_trigger = -1;
  long trigger_count = 0;
  double ebar_last_step = 0.0;
};

// Neighbourhood error in compact form:
//   sum_j (a_ij y_j - delta_i a_ij s_j delta_j y_i / s_i)
//     + g_i (y_d - delta_i y_i / s_i)
double neighborhood_error(std::size_t i, std::span<const double> outputs, double y_d,
                          const SignedDigraph& graph, const BalanceGauge& gauge);

// Same expression on the outputs each agent broadcast at its latest event.
inline double triggered_error(std::size_t i, std::span<const double> held_outputs,
                              double y_d, const SignedDigraph& graph,
                              const BalanceGauge& gauge) {
  return neighborhood_error(i, held_outputs, y_d, graph, gauge);
}

// y_d - delta_i y_i / s_i
double local_abc_error(std::size_t i, double y_i, double y_d, const BalanceGauge& gauge);

// delta_i (y_i - y_i(last trigger)) / s_i
double triggered_output_error(std::size_t i, double y_i, double y_at_trigger,
                              const BalanceGauge& gauge);

// g = |e_tilde(k-1)| - theta(k-1) |Delta(k-1)|; an event fires when g < 0.
inline double event_function(double e_tilde_prev, double delta_prev, double theta_prev) {
  return std::abs(e_tilde_prev) - theta_prev * std::abs(delta_prev);
}

inline bool trigger_decision(double e_tilde_prev, double delta_prev, double theta_prev) {
  return event_function(e_tilde_prev, delta_prev, theta_prev) < 0.0;
}

// Estimator step at an event:
//   M - eta1 M du^2 / (du^2 + mu) + eta1 du (ebar_now - ebar_prev_step) / (du^2 + mu)
double update_ppd(double ppd_hat, const ControllerGains& gains, double du_prev_event,
                  double ebar_now, double ebar_prev_step);

// Falls back to the initial estimate when |M| < gamma, |du| < gamma, or the
// sign of M drifted away from the initial sign.
double reset_ppd(double ppd_hat, double ppd_init, double du, double gamma);

// u + eta2 M / (M^2 + varpi) h e_tilde. Throws ErrorKind::DegenerateGain
// when |M^2 + varpi| <= 1e-9.
double control_update(double u_held, double ppd_hat, const ControllerGains& gains,
                      double e_tilde, int h);

struct ThresholdState {
  double theta = 0.0;
  std::vector<double> p_diag;
};

// Diagonal of P = -diag(eta2_i M_i Mhat_i / (Mhat_i^2 + varpi_i)).
std::vector<double> threshold_weights(std::span<const double> ppd_true,
                                      std::span<const double> ppd_hat,
                                      std::span<const ControllerGains> gains);

// theta = 2 sigma_max(Psi^T P) / (2 sigma_min(P) + sigma_max(P^2)); 0 when the
// denominator is <= 1e-12 or P is not finite.
ThresholdState compute_theta(std::vector<double> p_diag, const Matrix& psi);

// Certainty-equivalence threshold: the true PPD in P is replaced by the
// estimate.
ThresholdState compute_theta(std::span<const double> ppd_hat,
                             std::span<const ControllerGains> gains, const Matrix& psi);

}  // namespace ddet
