#include "ddet/report.hpp"

#include "ddet/error.hpp"
#include "text_lines.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace ddet {

namespace {

constexpr const char* kTraceHeader = "k,agent,y,u,e_abc,e_y,e_y_tilde,delta,h,triggered,ppd_hat,theta";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                          "#bcbd22", "#17becf"};

struct Frame {
  double x0 = 60, y0 = 20, w = 820, h = 360;
  double kmax = 1, lo = 0, hi = 1;

  double px(double k) const { return x0 + w * k / kmax; }
  double py(double v) const {
    v = std::clamp(v, lo, hi);
    return y0 + h * (hi - v) / (hi - lo);
  }
};

void fit_range(Frame& f, double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    lo = -1.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-12) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  f.lo = lo - pad;
  f.hi = hi + pad;
}

void axes(std::ostream& out, const Frame& f, const std::string& label) {
  fmt::print(out, "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n",
             f.x0, f.y0, f.w, f.h);
  fmt::print(out, "<text x=\"{}\" y=\"{}\" font-size=\"11\">{}</text>\n", f.x0 + 4, f.y0 + 12, label);
  fmt::print(out, "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{:.3g}</text>\n",
             f.x0 - 4, f.y0 + 10, f.hi);
  fmt::print(out, "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{:.3g}</text>\n",
             f.x0 - 4, f.y0 + f.h, f.lo);
  fmt::print(out, "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{}</text>\n",
             f.x0 + f.w, f.y0 + f.h + 14, static_cast<long>(f.kmax));
}

template <class Get>
void polyline(std::ostream& out, const Frame& f, long horizon, Get&& get, const char* colour,
              const char* extra = "") {
  out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1\" " << extra
      << " points=\"";
  // Thin long traces down to about two points per pixel.
  const long stride = std::max<long>(1, horizon / static_cast<long>(2 * f.w));
  for (long k = 0; k < horizon; k += stride) {
    const double v = get(k);
    if (!std::isfinite(v)) continue;
    fmt::print(out, "{:.1f},{:.1f} ", f.px(static_cast<double>(k)), f.py(v));
  }
  out << "\"/>\n";
}

}  // namespace

void write_trace_csv(std::ostream& out, const SimResult& r) {
  out << kTraceHeader << '\n';
  for (const auto& row : r.rows) {
    fmt::print(out, "{},{},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{},{},{:.9g},{:.9g}\n", row.k,
               row.agent + 1, row.y, row.u, row.e_abc, row.e_y, row.e_y_tilde, row.delta, row.h,
               row.triggered ? 1 : 0, row.ppd_hat, row.theta);
  }
}

SimResult read_trace_csv(std::istream& in, const std::string& source) {
  std::string line;
  int lineno = 1;
  if (!std::getline(in, line)) throw Error(ErrorKind::Parse, fmt::format("{}: empty trace", source));
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) {
    throw Error(ErrorKind::Parse, fmt::format("{}:1: unexpected trace header", source));
  }
  std::vector<TraceRow> rows;
  std::size_t agents = 0;
  long max_k = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto bad = [&] { return Error(ErrorKind::Parse, fmt::format("{}:{}: malformed trace row", source, lineno)); };
    const auto c = split_csv(line);
    if (c.size() != 12) throw bad();
    TraceRow row;
    row.k = parse_long(c[0], bad);
    const long agent = parse_long(c[1], bad);
    if (row.k < 0 || agent < 1) throw bad();
    row.agent = static_cast<std::size_t>(agent - 1);
    row.y = parse_double(c[2], bad);
    row.u = parse_double(c[3], bad);
    row.e_abc = parse_double(c[4], bad);
    row.e_y = parse_double(c[5], bad);
    row.e_y_tilde = parse_double(c[6], bad);
    row.delta = parse_double(c[7], bad);
    row.h = static_cast<int>(parse_long(c[8], bad));
    row.triggered = parse_long(c[9], bad) != 0;
    row.ppd_hat = parse_double(c[10], bad);
    row.theta = parse_double(c[11], bad);
    row.event_value = std::numeric_limits<double>::quiet_NaN();
    agents = std::max(agents, row.agent + 1);
    max_k = std::max(max_k, row.k);
    rows.push_back(row);
  }
  if (rows.empty()) throw Error(ErrorKind::Parse, fmt::format("{}: trace has no rows", source));
  SimResult r;
  r.agents = agents;
  r.horizon = max_k + 1;
  if (rows.size() != agents * static_cast<std::size_t>(r.horizon)) {
    throw Error(ErrorKind::Parse, fmt::format("{}: trace is not a complete k x agent grid", source));
  }
  r.rows.resize(rows.size());
  std::vector<bool> seen(rows.size(), false);
  for (const auto& row : rows) {
    const auto idx = static_cast<std::size_t>(row.k) * agents + row.agent;
    if (seen[idx]) {
      throw Error(ErrorKind::Parse,
                  fmt::format("{}: duplicate row for k={} agent={}", source, row.k, row.agent + 1));
    }
    seen[idx] = true;
    r.rows[idx] = row;
  }
  r.reference_segments = {{0, r.horizon}};
  return r;
}

SimResult load_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, fmt::format("cannot open trace {}", path));
  return read_trace_csv(in, path);
}

void write_metrics_csv(std::ostream& out, const Metrics& m) {
  out << "start,end,agent,mean_abs_e_abc,max_abs_e_abc,mean_abs_tracking,attacked_steps,triggers\n";
  for (const auto& s : m.segments) {
    fmt::print(out, "{},{},{},{:.9g},{:.9g},{:.9g},{},{}\n", s.start, s.end, s.agent + 1,
               s.mean_abs_e_abc, s.max_abs_e_abc, s.mean_abs_tracking, s.attacked_steps, s.triggers);
  }
}

void write_summary(std::ostream& out, const SummaryInfo& info, const SimResult& r, const Metrics& m) {
  if (!info.title.empty()) fmt::print(out, "experiment: {}\n", info.title);
  fmt::print(out, "agents: {}\nhorizon: {}\n", r.agents, r.horizon);
  if (!info.partition_v1.empty()) {
    fmt::print(out, "partition: V1={} V2={}\n", info.partition_v1, info.partition_v2);
  }
  fmt::print(out, "attacked steps: {}\n", m.attacked_steps);
  fmt::print(out, "max |e_abc|: {:.6g}\n", m.max_abs_e_abc);
  fmt::print(out, "lyapunov increases: {}\n", m.lyapunov_increases);
  fmt::print(out, "final theta: {:.6g}\n", info.theta_final);
  out << "triggers per agent:\n";
  for (std::size_t i = 0; i < r.agents; ++i) {
    fmt::print(out, "  agent {}: {} ({:.4f})\n", i + 1, m.trigger_counts[i], m.trigger_rates[i]);
  }
  if (!m.segments.empty()) {
    out << "segments (mean |e_abc| / mean tracking error):\n";
    for (const auto& s : m.segments) {
      fmt::print(out, "  [{}, {}) agent {}: {:.6g} / {:.6g}\n", s.start, s.end, s.agent + 1,
                 s.mean_abs_e_abc, s.mean_abs_tracking);
    }
  }
}

void write_outputs_svg(std::ostream& out, const SimResult& r, double m, double n) {
  Frame f;
  f.kmax = static_cast<double>(std::max<long>(1, r.horizon - 1));
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& row : r.rows) {
    if (std::isfinite(row.y)) {
      lo = std::min(lo, row.y);
      hi = std::max(hi, row.y);
    }
  }
  for (double yd : r.reference) {
    for (double v : {yd, m * yd, -n * yd}) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  fit_range(f, lo, hi);
  fmt::print(out, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\">\n",
             f.x0 + f.w + 120, f.y0 + f.h + 30);
  axes(out, f, "outputs y_i(k)");
  if (!r.reference.empty()) {
    auto ref = [&](double scale) {
      return [&r, scale](long k) { return scale * r.reference[static_cast<std::size_t>(k)]; };
    };
    const long len = static_cast<long>(r.reference.size());
    polyline(out, f, len, ref(1.0), "#000", "stroke-dasharray=\"4 3\"");
    polyline(out, f, len, ref(m), "#000", "stroke-dasharray=\"1 3\"");
    polyline(out, f, len, ref(-n), "#000", "stroke-dasharray=\"1 3\"");
  }
  for (std::size_t i = 0; i < r.agents; ++i) {
    const char* colour = kPalette[i % std::size(kPalette)];
    polyline(out, f, r.horizon, [&](long k) { return r.at(k, i).y; }, colour);
    fmt::print(out, "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"{}\">agent {}</text>\n",
               f.x0 + f.w + 10, f.y0 + 14 * (i + 1), colour, i + 1);
  }
  out << "</svg>\n";
}

void write_events_svg(std::ostream& out, const SimResult& r) {
  const double panel = 90;
  fmt::print(out, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\">\n", 940,
             20 + panel * static_cast<double>(r.agents) + 20);
  for (std::size_t i = 0; i < r.agents; ++i) {
    Frame f;
    f.y0 = 20 + panel * static_cast<double>(i);
    f.h = panel - 20;
    f.kmax = static_cast<double>(std::max<long>(1, r.horizon - 1));
    double lo = 0.0, hi = 0.0;
    for (long k = 0; k < r.horizon; ++k) {
      const double v = r.at(k, i).event_value;
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    fit_range(f, lo, hi);
    axes(out, f, fmt::format("agent {}: event function, triggers", i + 1));
    fmt::print(out, "<line x1=\"{}\" x2=\"{}\" y1=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#bbb\"/>\n", f.x0,
               f.x0 + f.w, f.py(0.0), f.py(0.0));
    polyline(out, f, r.horizon, [&](long k) { return r.at(k, i).event_value; },
             kPalette[i % std::size(kPalette)]);
    for (long k = 0; k < r.horizon; ++k) {
      if (!r.at(k, i).triggered) continue;
      const double x = f.px(static_cast<double>(k));
      fmt::print(out, "<line x1=\"{:.1f}\" x2=\"{:.1f}\" y1=\"{}\" y2=\"{}\" stroke=\"#000\"/>\n", x, x,
                 f.y0 + f.h - 6, f.y0 + f.h);
    }
  }
  out << "</svg>\n";
}

}  // namespace ddet
