#include "ddet/engine.hpp"

#include "ddet/error.hpp"

#include <fmt/format.h>
#include <oneapi/tbb/parallel_for.h>
#include <oneapi/tbb/task_arena.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace ddet {

namespace {

// Runs fn(i) for every agent, serially or on the arena. Errors are collected
// per agent and the lowest-indexed one is rethrown, so failures do not depend
// on scheduling.
class AgentLoop {
 public:
  AgentLoop(std::size_t agents, unsigned threads) : agents_(agents), errors_(agents) {
    if (threads != 1) {
      arena_.emplace(threads == 0 ? tbb::task_arena::automatic : static_cast<int>(threads));
    }
  }

  template <class Fn>
  void operator()(long step, Fn&& fn) {
    auto guarded = [&](std::size_t i) {
      try {
        fn(i);
      } catch (const Error& e) {
        errors_[i] = e.with_context(step, i);
      }
    };
    if (arena_) {
      arena_->execute([&] {
        tbb::parallel_for(std::size_t{0}, agents_, [&](std::size_t i) { guarded(i); });
      });
    } else {
      for (std::size_t i = 0; i < agents_; ++i) guarded(i);
    }
    for (auto& err : errors_) {
      if (err) throw *err;
    }
  }

 private:
  std::size_t agents_;
  std::vector<std::optional<Error>> errors_;
  std::optional<tbb::task_arena> arena_;
};

void require(bool ok, ErrorKind kind, const std::string& msg) {
  if (!ok) throw Error(kind, msg);
}

}  // namespace

PreparedNetwork prepare(const SimConfig& cfg) {
  const auto n = cfg.graph.size();
  require(cfg.horizon >= 2, ErrorKind::InvalidArgument,
          fmt::format("horizon must be at least 2 (got {})", cfg.horizon));
  require(cfg.plants.size() == n, ErrorKind::DimensionMismatch,
          fmt::format("{} plant models for {} agents", cfg.plants.size(), n));
  require(cfg.gains.size() == n, ErrorKind::DimensionMismatch,
          fmt::format("{} gain sets for {} agents", cfg.gains.size(), n));
  for (const auto& g : cfg.gains) validate(g);
  require(cfg.init.y.size() == n && cfg.init.u.size() == n && cfg.init.ppd.size() == n,
          ErrorKind::DimensionMismatch, "initial values must cover every agent");
  for (std::size_t i = 0; i < n; ++i) {
    require(std::isfinite(cfg.init.y[i]) && std::isfinite(cfg.init.u[i]),
            ErrorKind::InvalidArgument, "initial outputs and inputs must be finite");
    require(std::isfinite(cfg.init.ppd[i]) && cfg.init.ppd[i] != 0.0,
            ErrorKind::InvalidArgument,
            fmt::format("initial PPD estimate of agent {} must be finite and nonzero", i + 1));
  }
  require(std::isfinite(cfg.init.theta) && cfg.init.theta >= 0.0, ErrorKind::InvalidArgument,
          "initial threshold must be finite and >= 0");
  require(cfg.reference.horizon() >= cfg.horizon - 1, ErrorKind::InvalidArgument,
          "reference signal is shorter than the simulation horizon");
  require(cfg.attacks.empty() || cfg.attacks.size() == 1 || cfg.attacks.size() == n,
          ErrorKind::DimensionMismatch,
          fmt::format("expected 0, 1 or {} attack schedules, got {}", n, cfg.attacks.size()));
  for (const auto& s : cfg.attacks) {
    require(s.horizon() >= cfg.horizon, ErrorKind::InvalidArgument,
            "attack schedule is shorter than the simulation horizon");
  }

  PreparedNetwork net;
  net.partition = check_structural_balance(cfg.graph);
  require(has_spanning_tree(cfg.graph), ErrorKind::NoSpanningTree,
          "graph has no spanning tree rooted at the leader");
  net.gauge = build_gauge(net.partition, cfg.m, cfg.n);
  net.coupling = coupling_matrices(cfg.graph, net.gauge, cfg.psi_pinning);
  return net;
}

SimResult run(const SimConfig& cfg) {
  const PreparedNetwork net = prepare(cfg);
  const auto& graph = cfg.graph;
  const auto& gauge = net.gauge;
  const auto n = graph.size();
  const long horizon = cfg.horizon;

  std::vector<AgentRuntime> rt(n);
  std::vector<double> y = cfg.init.y;
  std::vector<double> held = cfg.init.y;
  for (std::size_t i = 0; i < n; ++i) {
    rt[i].ppd_hat = rt[i].ppd_init = cfg.init.ppd[i];
    rt[i].u_held = cfg.init.u[i];
    rt[i].y_at_trigger = cfg.init.y[i];
  }

  std::vector<double> e_y(n), e_tilde(n), delta(n), event_value(n), ppd(n);
  std::vector<int> h(n, 1);
  std::vector<char> fired(n, 0);
  std::vector<double> e_tilde_prev(n, 0.0), delta_prev(n, 0.0);
  double theta_prev = cfg.init.theta;

  SimResult out;
  out.agents = n;
  out.horizon = horizon;
  out.rows.reserve(static_cast<std::size_t>(horizon) * n);
  out.reference.reserve(static_cast<std::size_t>(horizon));
  out.delta = gauge.delta;
  out.scale = gauge.s;
  for (auto [a, b] : cfg.reference.segment_bounds()) {
    if (a < horizon) out.reference_segments.emplace_back(a, std::min(b, horizon));
  }

  AgentLoop for_agents(n, cfg.threads);
  const bool periodic = cfg.trigger == TriggerMode::Periodic;

  for (long k = 0; k < horizon; ++k) {
    const double y_d = cfg.reference.value(k);
    for (std::size_t i = 0; i < n; ++i) {
      h[i] = cfg.attacks.empty()        ? 1
             : cfg.attacks.size() == 1  ? cfg.attacks[0].availability(k)
                                        : cfg.attacks[i].availability(k);
    }

    // Event decisions and broadcasts. Reads y only; writes entry i.
    for_agents(k, [&](std::size_t i) {
      event_value[i] = k == 0 ? -std::numeric_limits<double>::infinity()
                              : event_function(e_tilde_prev[i], delta_prev[i], theta_prev);
      fired[i] = k == 0 || periodic || event_value[i] < 0.0;
      if (fired[i]) held[i] = y[i];
      e_y[i] = neighborhood_error(i, y, y_d, graph, gauge);
    });

    // Controller updates on the complete set of broadcast outputs.
    for_agents(k, [&](std::size_t i) {
      auto& a = rt[i];
      e_tilde[i] = triggered_error(i, held, y_d, graph, gauge);
      const double ebar = filter_error(e_y[i], h[i]);
      if (fired[i]) {
        if (!(cfg.skip_estimator_on_attack && h[i] == 0)) {
          const double est = update_ppd(a.ppd_hat, cfg.gains[i], a.du_last_event, ebar,
                                        a.ebar_last_step);
          a.ppd_hat = reset_ppd(est, a.ppd_init, a.du_last_event, cfg.gains[i].gamma);
        }
        const double u_new = control_update(a.u_held, a.ppd_hat, cfg.gains[i], e_tilde[i], h[i]);
        a.du_last_event = u_new - a.u_held;
        a.u_held = u_new;
        a.y_at_trigger = y[i];
        a.last_trigger = k;
        ++a.trigger_count;
      }
      delta[i] = triggered_output_error(i, y[i], held[i], gauge);
      a.ebar_last_step = ebar;
      ppd[i] = a.ppd_hat;
    });

    const double theta = compute_theta(ppd, cfg.gains, net.coupling.psi).theta;

    for (std::size_t i = 0; i < n; ++i) {
      TraceRow row;
      row.k = k;
      row.agent = i;
      row.y = y[i];
      row.u = rt[i].u_held;
      row.e_abc = local_abc_error(i, y[i], y_d, gauge);
      row.e_y = e_y[i];
      row.e_y_tilde = e_tilde[i];
      row.delta = delta[i];
      row.h = h[i];
      row.triggered = fired[i] != 0;
      row.ppd_hat = rt[i].ppd_hat;
      row.theta = theta;
      row.event_value = event_value[i];
      out.rows.push_back(row);
    }
    out.reference.push_back(y_d);

    for_agents(k, [&](std::size_t i) { y[i] = cfg.plants[i].step(y[i], rt[i].u_held); });

    e_tilde_prev = e_tilde;
    delta_prev = delta;
    theta_prev = theta;
  }
  return out;
}

long LyapunovTrace::increases(long from_step) const {
  long count = 0;
  for (std::size_t k = static_cast<std::size_t>(std::max(0L, from_step)); k < dv.size(); ++k) {
    if (dv[k] > 0.0) ++count;
  }
  return count;
}

LyapunovTrace lyapunov_trace(const SimResult& r) {
  LyapunovTrace out;
  out.v.reserve(static_cast<std::size_t>(r.horizon));
  for (long k = 0; k < r.horizon; ++k) {
    double v = 0.0;
    for (std::size_t i = 0; i < r.agents; ++i) {
      const double e = r.at(k, i).e_y;
      v += e * e;
    }
    out.v.push_back(v);
  }
  for (std::size_t k = 0; k + 1 < out.v.size(); ++k) out.dv.push_back(out.v[k + 1] - out.v[k]);
  return out;
}

Metrics summarize(const SimResult& r, const std::vector<std::pair<long, long>>& segments) {
  for (auto [a, b] : segments) {
    if (a < 0 || b > r.horizon || a >= b) {
      throw Error(ErrorKind::OutOfRange,
                  fmt::format("segment [{}, {}) is empty or outside [0, {})", a, b, r.horizon));
    }
  }
  const bool gauge_known = r.scale.size() == r.agents && r.delta.size() == r.agents &&
                           r.reference.size() == static_cast<std::size_t>(r.horizon);
  Metrics m;
  m.trigger_counts.assign(r.agents, 0);
  for (long k = 0; k < r.horizon; ++k) {
    bool attacked = false;
    for (std::size_t i = 0; i < r.agents; ++i) {
      const auto& row = r.at(k, i);
      if (row.triggered) ++m.trigger_counts[i];
      attacked = attacked || row.h == 0;
      m.max_abs_e_abc = std::max(m.max_abs_e_abc, std::abs(row.e_abc));
    }
    if (attacked) ++m.attacked_steps;
  }
  for (auto c : m.trigger_counts) {
    m.trigger_rates.push_back(static_cast<double>(c) / static_cast<double>(r.horizon));
  }
  for (auto [a, b] : segments) {
    for (std::size_t i = 0; i < r.agents; ++i) {
      SegmentStats st;
      st.start = a;
      st.end = b;
      st.agent = i;
      double sum = 0.0, track = 0.0;
      for (long k = a; k < b; ++k) {
        const auto& row = r.at(k, i);
        sum += std::abs(row.e_abc);
        st.max_abs_e_abc = std::max(st.max_abs_e_abc, std::abs(row.e_abc));
        if (row.h == 0) ++st.attacked_steps;
        if (row.triggered) ++st.triggers;
        if (gauge_known) {
          track += std::abs(row.y - r.delta[i] * r.scale[i] * r.reference[static_cast<std::size_t>(k)]);
        }
      }
      const double len = static_cast<double>(b - a);
      st.mean_abs_e_abc = sum / len;
      if (gauge_known) st.mean_abs_tracking = track / len;
      m.segments.push_back(st);
    }
  }
  m.lyapunov_increases = lyapunov_trace(r).increases();
  return m;
}

std::vector<std::pair<long, long>> steady_state_windows(
    const std::vector<std::pair<long, long>>& segments, long length) {
  std::vector<std::pair<long, long>> out;
  for (auto [a, b] : segments) out.emplace_back(std::max(a, b - length), b);
  return out;
}

DiagnosticsReport diagnostics(const SimResult& r) {
  const auto n = r.agents;
  const auto steps = static_cast<std::size_t>(r.horizon);
  DiagnosticsReport rep;
  rep.input_ratio = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<std::vector<double>> du(n, std::vector<double>(steps, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> y(steps), u(steps), e(steps);
    double min_u = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < steps; ++k) {
      const auto& row = r.at(static_cast<long>(k), i);
      y[k] = row.y;
      u[k] = row.u;
      e[k] = row.e_y;
      min_u = std::min(min_u, std::abs(row.u));
      if (k > 0) du[i][k] = u[k] - u[k - 1];
    }
    rep.output_ppd_bound.push_back(cfdl_diagnostic(y, u).bound_estimate);
    rep.error_ppd_bound.push_back(cfdl_diagnostic(e, u).bound_estimate);
    rep.min_abs_input.push_back(min_u);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double worst = 0.0;
      for (std::size_t k = 1; k < steps; ++k) {
        if (du[i][k] != 0.0) worst = std::max(worst, std::abs(du[j][k]) / std::abs(du[i][k]));
      }
      rep.input_ratio(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = worst;
    }
  }
  return rep;
}

}  // namespace ddet
