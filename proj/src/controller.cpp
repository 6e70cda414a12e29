#include "ddet/controller.hpp"

#include "ddet/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace ddet {

namespace {

constexpr double kMinGainDenominator = 1e-9;
constexpr double kMinThetaDenominator = 1e-12;

}  // namespace

void validate(const ControllerGains& g) {
  const bool finite = std::isfinite(g.eta1) && std::isfinite(g.eta2) && std::isfinite(g.mu) &&
                      std::isfinite(g.varpi) && std::isfinite(g.gamma);
  if (!finite) throw Error(ErrorKind::InvalidArgument, "controller gains must be finite");
  if (!(g.eta1 > 0.0 && g.eta1 <= 2.0) || !(g.eta2 > 0.0 && g.eta2 <= 2.0)) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("step sizes must lie in (0, 2] (eta1={}, eta2={})", g.eta1, g.eta2));
  }
  if (!(g.mu > 0.0)) throw Error(ErrorKind::InvalidArgument, "mu must be positive");
  if (!(g.gamma > 0.0)) throw Error(ErrorKind::InvalidArgument, "gamma must be positive");
}

double neighborhood_error(std::size_t i, std::span<const double> outputs, double y_d,
                          const SignedDigraph& graph, const BalanceGauge& gauge) {
  const double di = gauge.delta[i];
  const double si = gauge.s[i];
  const double yi = outputs[i];
  double e = 0.0;
  for (std::size_t j : graph.neighbors(i)) {
    const double a = graph.weight(i, j);
    e += a * outputs[j] - di / si * a * gauge.s[j] * gauge.delta[j] * yi;
  }
  e += graph.pin(i) * (y_d - di / si * yi);
  return e;
}

double local_abc_error(std::size_t i, double y_i, double y_d, const BalanceGauge& gauge) {
  return y_d - gauge.delta[i] * y_i / gauge.s[i];
}

double triggered_output_error(std::size_t i, double y_i, double y_at_trigger,
                              const BalanceGauge& gauge) {
  return gauge.delta[i] * (y_i - y_at_trigger) / gauge.s[i];
}

double update_ppd(double ppd_hat, const ControllerGains& gains, double du_prev_event,
                  double ebar_now, double ebar_prev_step) {
  const double du2 = du_prev_event * du_prev_event;
  const double den = du2 + gains.mu;
  return ppd_hat - gains.eta1 * ppd_hat * du2 / den +
         gains.eta1 * du_prev_event * (ebar_now - ebar_prev_step) / den;
}

double reset_ppd(double ppd_hat, double ppd_init, double du, double gamma) {
  const bool sign_flipped = std::signbit(ppd_hat) != std::signbit(ppd_init) || ppd_hat == 0.0;
  if (std::abs(ppd_hat) < gamma || std::abs(du) < gamma || sign_flipped) return ppd_init;
  return ppd_hat;
}

double control_update(double u_held, double ppd_hat, const ControllerGains& gains,
                      double e_tilde, int h) {
  const double den = ppd_hat * ppd_hat + gains.varpi;
  if (std::abs(den) <= kMinGainDenominator) {
    throw Error(ErrorKind::DegenerateGain,
                fmt::format("control gain denominator M^2 + varpi = {} (M = {})", den, ppd_hat));
  }
  return u_held + gains.eta2 * ppd_hat / den * h * e_tilde;
}

std::vector<double> threshold_weights(std::span<const double> ppd_true,
                                      std::span<const double> ppd_hat,
                                      std::span<const ControllerGains> gains) {
  if (ppd_true.size() != ppd_hat.size() || gains.size() != ppd_hat.size()) {
    throw Error(ErrorKind::DimensionMismatch, "threshold inputs differ in length");
  }
  std::vector<double> p(ppd_hat.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double mh = ppd_hat[i];
    p[i] = -gains[i].eta2 * ppd_true[i] * mh / (mh * mh + gains[i].varpi);
  }
  return p;
}

ThresholdState compute_theta(std::vector<double> p_diag, const Matrix& psi) {
  ThresholdState out;
  out.p_diag = std::move(p_diag);
  const auto n = static_cast<Eigen::Index>(out.p_diag.size());
  if (psi.rows() != n || psi.cols() != n) {
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("Psi is {}x{} for {} agents", psi.rows(), psi.cols(), n));
  }
  if (n == 0) return out;
  const auto& p = out.p_diag;
  if (!std::all_of(p.begin(), p.end(), [](double v) { return std::isfinite(v); })) return out;

  double p_min = std::abs(p[0]);
  double p_sq_max = 0.0;
  for (double v : p) {
    p_min = std::min(p_min, std::abs(v));
    p_sq_max = std::max(p_sq_max, v * v);
  }
  const double den = 2.0 * p_min + p_sq_max;
  if (den <= kMinThetaDenominator) return out;

  const Vector pv = Eigen::Map<const Vector>(p.data(), n);
  const Matrix weighted = psi.transpose() * pv.asDiagonal();
  Eigen::JacobiSVD<Matrix> svd(weighted);
  out.theta = 2.0 * svd.singularValues()(0) / den;
  return out;
}

ThresholdState compute_theta(std::span<const double> ppd_hat,
                             std::span<const ControllerGains> gains, const Matrix& psi) {
  return compute_theta(threshold_weights(ppd_hat, ppd_hat, gains), psi);
}

}  // namespace ddet
