#include "ddet/attack.hpp"
#include "ddet/config.hpp"
#include "ddet/engine.hpp"
#include "ddet/error.hpp"
#include "ddet/report.hpp"
#include "ddet/signed_graph.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace ddet;

namespace {

enum Exit : int { kOk = 0, kFail = 1, kConfig = 2, kGraph = 3, kRuntime = 4 };

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::GraphFormat:
    case ErrorKind::Unbalanced:
    case ErrorKind::NoSpanningTree:
      return kGraph;
    case ErrorKind::NonFinite:
    case ErrorKind::DegenerateGain:
    case ErrorKind::Infeasible:
      return kRuntime;
    default:
      return kConfig;
  }
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidArgument, fmt::format("cannot write {}", path.string()));
  return out;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 const std::vector<std::string>& overrides, unsigned threads) {
  std::optional<ExperimentConfig> loaded;
  PreparedNetwork net;
  try {
    loaded.emplace(load_experiment(config_path, overrides));
    loaded->sim.threads = threads;
    net = prepare(loaded->sim);
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return exit_code_for(e.kind());
  }

  const ExperimentConfig& exp = *loaded;
  SimResult result;
  try {
    result = run(exp.sim);
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kRuntime;
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    fmt::print(stderr, "error: cannot create {}: {}\n", out_dir, ec.message());
    return kConfig;
  }
  const fs::path dir(out_dir);
  const auto windows = steady_state_windows(result.reference_segments);
  auto segments = result.reference_segments;
  segments.insert(segments.end(), windows.begin(), windows.end());
  const Metrics metrics = summarize(result, segments);

  try {
    auto trace = open_out(dir / "trace.csv");
    write_trace_csv(trace, result);
    auto mcsv = open_out(dir / "metrics.csv");
    write_metrics_csv(mcsv, metrics);
    auto summary = open_out(dir / "summary.txt");
    SummaryInfo info{
        .title = config_path,
        .partition_v1 = format_members(net.partition.members(Side::V1)),
        .partition_v2 = format_members(net.partition.members(Side::V2)),
        .theta_final = result.rows.back().theta,
    };
    write_summary(summary, info, result, metrics);
    auto outputs = open_out(dir / "outputs.svg");
    write_outputs_svg(outputs, result, exp.sim.m, exp.sim.n);
    auto events = open_out(dir / "events.svg");
    write_events_svg(events, result);
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kConfig;
  }
  fmt::print("wrote {} rows to {}\n", result.rows.size(), (dir / "trace.csv").string());
  return kOk;
}

int cmd_verify_graph(const std::string& path, double m, double n) {
  std::optional<SignedDigraph> graph;
  try {
    graph = load_graph(path);
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kConfig;
  }
  fmt::print("agents: {}\n", graph->size());
  bool ok = true;
  std::optional<Partition> part;
  try {
    part = check_structural_balance(*graph);
    fmt::print("balanced: yes\n");
    fmt::print("V1 = {}\nV2 = {}\n", format_members(part->members(Side::V1)),
               format_members(part->members(Side::V2)));
  } catch (const Error& e) {
    fmt::print("balanced: no ({})\n", e.what());
    ok = false;
  }
  const bool tree = has_spanning_tree(*graph);
  fmt::print("spanning tree: {}\n", tree ? "yes" : "no");
  ok = ok && tree;
  if (part) {
    if (!(m > 0.0) || !(n > 0.0)) {
      fmt::print(stderr, "error: --m and --n must be positive\n");
      return kConfig;
    }
    const auto coupling = coupling_matrices(*graph, build_gauge(*part, m, n), PsiPinning::Signed);
    fmt::print("sigma_min(Psi): {:.6g}\n", smallest_singular_value(coupling.psi));
  }
  return ok ? kOk : kFail;
}

struct GenAttackArgs {
  std::uint64_t seed = 1;
  long horizon = 2500;
  AttackBudget budget;
  long max_duration = 10;
  std::string out;
};

int cmd_gen_attack(const GenAttackArgs& a) {
  DosSchedule sched(a.horizon, {});
  try {
    validate(a.budget);
    if (a.horizon < 1 || a.max_duration < 1) {
      throw Error(ErrorKind::InvalidArgument, "horizon and max-duration must be positive");
    }
    sched = generate_schedule(a.budget, a.horizon, a.max_duration, a.seed);
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return e.kind() == ErrorKind::Infeasible ? kRuntime : kConfig;
  }
  if (a.out.empty() || a.out == "-") {
    write_schedule(std::cout, sched);
  } else {
    std::ofstream out(a.out);
    if (!out) {
      fmt::print(stderr, "error: cannot write {}\n", a.out);
      return kConfig;
    }
    write_schedule(out, sched);
  }
  const bool freq = verify_frequency(sched, a.budget);
  const bool dur = verify_duration(sched, a.budget);
  auto& log = (a.out.empty() || a.out == "-") ? std::cerr : std::cout;
  log << fmt::format("intervals: {}\nattacked steps: {}\n", sched.intervals().size(),
                     sched.attacked_steps());
  log << fmt::format("frequency: {}\nduration: {}\n", freq ? "pass" : "fail", dur ? "pass" : "fail");
  return freq && dur ? kOk : kFail;
}

std::pair<long, long> parse_segment(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw CLI::ValidationError("--segment", "expected START:END");
  try {
    return {std::stol(s.substr(0, colon)), std::stol(s.substr(colon + 1))};
  } catch (const std::exception&) {
    throw CLI::ValidationError("--segment", "expected START:END");
  }
}

int cmd_summarize(const std::string& trace_path, const std::vector<std::string>& segs,
                  const std::string& out) {
  try {
    const SimResult result = load_trace_csv(trace_path);
    std::vector<std::pair<long, long>> segments;
    for (const auto& s : segs) segments.push_back(parse_segment(s));
    if (segments.empty()) segments = result.reference_segments;
    const Metrics metrics = summarize(result, segments);
    if (out.empty() || out == "-") {
      write_metrics_csv(std::cout, metrics);
    } else {
      auto f = open_out(out);
      write_metrics_csv(f, metrics);
    }
    write_summary(std::cerr, SummaryInfo{.title = trace_path, .partition_v1 = {}, .partition_v2 = {}, .theta_final = result.rows.back().theta}, result, metrics);
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kConfig;
  } catch (const CLI::ValidationError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kConfig;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-triggered bipartite consensus simulator under DoS attacks"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  std::vector<std::string> overrides;
  unsigned threads = 0;
  auto* sim = app.add_subcommand("simulate", "run an experiment config");
  sim->add_option("config", config_path, "experiment YAML file")->required();
  sim->add_option("--out,-o", out_dir, "output directory");
  sim->add_option("--set", overrides, "override a config key (section.key=value)");
  sim->add_option("--threads", threads, "worker threads (0 = hardware count)");

  std::string graph_path;
  double m = 1.0, n = 1.0;
  auto* vg = app.add_subcommand("verify-graph", "check structural balance and spanning tree");
  vg->add_option("graph", graph_path, "graph file")->required();
  vg->add_option("--m", m, "V1 scale");
  vg->add_option("--n", n, "V2 scale");

  GenAttackArgs ga;
  auto* gen = app.add_subcommand("gen-attack", "generate a DoS schedule within a budget");
  gen->add_option("--seed", ga.seed);
  gen->add_option("--horizon", ga.horizon);
  gen->add_option("--kappa", ga.budget.kappa_a)->required();
  gen->add_option("--freq-rate", ga.budget.freq_rate)->required();
  gen->add_option("--zeta", ga.budget.zeta_a)->required();
  gen->add_option("--dur-rate", ga.budget.dur_rate)->required();
  gen->add_option("--max-duration", ga.max_duration);
  gen->add_option("--out,-o", ga.out, "schedule file (default stdout)");

  std::string trace_path, metrics_out;
  std::vector<std::string> segs;
  auto* sum = app.add_subcommand("summarize", "recompute metrics from a trace.csv");
  sum->add_option("trace", trace_path)->required();
  sum->add_option("--segment", segs, "START:END window, repeatable");
  sum->add_option("--out,-o", metrics_out, "metrics CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfig;
  }

  if (*sim) return cmd_simulate(config_path, out_dir, overrides, threads);
  if (*vg) return cmd_verify_graph(graph_path, m, n);
  if (*gen) return cmd_gen_attack(ga);
  return cmd_summarize(trace_path, segs, metrics_out);
}
