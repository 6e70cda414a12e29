#include "ddet/config.hpp"
#include "ddet/error.hpp"
#include "ddet/report.hpp"
#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace ddet;

namespace {

const std::string kDir = DDET_SOURCE_DIR;

const char* kMinimal = R"(
graph:
  agents: 2
  edges: [[1, 2, -1]]
  pins: [[1, 1]]
gauge: {m: 3, n: 4}
plant: {catalog: linear, gains: [1.0, 2.0]}
reference:
  segments:
    - {start: 0, value: 1}
    - start: 50
      terms: [{wave: sin, amplitude: 2, pi_over: 100}]
gains: {eta1: 0.1, eta2: [0.1, 0.2], mu: 1, varpi: -0.1, gamma: 1.0e-5}
init: {y: 0.5, u: 0, ppd: 1, theta: 0}
run: {horizon: 100}
)";

Error parse_error(const std::string& text, std::vector<std::string> overrides = {}) {
  try {
    parse_experiment(text, "", overrides, "t.cfg");
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "no error";
  return Error(ErrorKind::InvalidArgument, "");
}

}  // namespace

TEST(Config, MinimalInline) {
  const auto exp = parse_experiment(kMinimal, "");
  const auto& sim = exp.sim;
  EXPECT_EQ(sim.graph.size(), 2u);
  EXPECT_EQ(sim.graph.weight(1, 0), -1.0);
  EXPECT_EQ(sim.m, 3.0);
  EXPECT_EQ(sim.plants[1].gain, 2.0);
  EXPECT_EQ(sim.plants[0].family, PlantFamily::Linear);
  EXPECT_EQ(sim.gains[1].eta2, 0.2);
  EXPECT_EQ(sim.gains[0].eta2, 0.1);
  EXPECT_EQ(sim.init.y, (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(sim.horizon, 100);
  EXPECT_EQ(sim.trigger, TriggerMode::Event);
  EXPECT_EQ(sim.psi_pinning, PsiPinning::Signed);
  EXPECT_FALSE(sim.skip_estimator_on_attack);
  EXPECT_TRUE(sim.attacks.empty());
  EXPECT_EQ(sim.reference.value(10), 1.0);
  EXPECT_NEAR(sim.reference.value(60), 2 * std::sin(std::numbers::pi * 60 / 100), 1e-12);
}

TEST(Config, MissingKeyReportsLine) {
  std::string text = kMinimal;
  text.replace(text.find("gauge: {m: 3, n: 4}"), 19, "gauge: {n: 4}");
  const auto e = parse_error(text);
  EXPECT_EQ(e.kind(), ErrorKind::Parse);
  EXPECT_NE(std::string(e.what()).find("t.cfg:6"), std::string::npos) << e.what();
  EXPECT_NE(std::string(e.what()).find("gauge.m"), std::string::npos) << e.what();
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_NE(std::string(parse_error(kMinimal, {"run.speed=3"}).what()).find("run.speed"), std::string::npos);
  EXPECT_NE(std::string(parse_error(std::string(kMinimal) + "extra: 1\n").what()).find("extra"), std::string::npos);
  parse_error(kMinimal, {"plant.gains=[1, 2, 3]"});
  parse_error(kMinimal, {"gauge.m=-1"});
  parse_error(kMinimal, {"gauge.m=abc"});
  parse_error(kMinimal, {"run.trigger=sometimes"});
  parse_error(kMinimal, {"run.psi_pinning=both"});
  parse_error(kMinimal, {"plant.catalog=custom"});
  parse_error(kMinimal, {"gains.eta1=3"});
  parse_error(kMinimal, {"run.horizon=1"});
  parse_error(kMinimal, {"attack.dur_rate=1.5", "attack.seed=1", "attack.kappa=2",
                         "attack.freq_rate=0.01", "attack.zeta=5", "attack.max_duration=5"});
  parse_error(kMinimal, {"attack.file=x", "attack.seed=1"});
  parse_error(kMinimal, {"no_equals"});
  parse_error("graph: [1, 2]\n");
  parse_error("run: {horizon: 10\n");
}

TEST(Config, OverridesApply) {
  const auto exp = parse_experiment(
      kMinimal, "",
      {"gauge.m=5", "init.y=[1, 2]", "run.trigger=periodic", "run.psi_pinning=absolute",
       "attack.seed=7", "attack.kappa=2", "attack.freq_rate=0.05", "attack.zeta=4",
       "attack.dur_rate=0.3", "attack.max_duration=5"});
  EXPECT_EQ(exp.sim.m, 5.0);
  EXPECT_EQ(exp.sim.init.y, (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(exp.sim.trigger, TriggerMode::Periodic);
  EXPECT_EQ(exp.sim.psi_pinning, PsiPinning::Absolute);
  ASSERT_EQ(exp.sim.attacks.size(), 1u);
  EXPECT_EQ(exp.attack.kind, AttackSource::Kind::Generated);
  EXPECT_EQ(exp.sim.attacks[0], generate_schedule({2, 0.05, 4, 0.3}, 100, 5, 7));
}

TEST(Config, PerAgentGeneratedSchedules) {
  const auto exp = parse_experiment(
      kMinimal, "",
      {"attack.seed=7", "attack.kappa=2", "attack.freq_rate=0.05", "attack.zeta=4",
       "attack.dur_rate=0.3", "attack.max_duration=5", "attack.per_agent=true"});
  ASSERT_EQ(exp.sim.attacks.size(), 2u);
  EXPECT_NE(exp.sim.attacks[0], exp.sim.attacks[1]);
}

TEST(Config, ShippedExperimentsLoad) {
  for (const char* name : {"example1", "example2", "linear"}) {
    const auto exp = load_experiment(kDir + "/experiments/" + name + ".cfg");
    EXPECT_EQ(exp.sim.graph, ddet::test::canonical_graph()) << name;
    EXPECT_NO_THROW(prepare(exp.sim)) << name;
  }
  const auto ex1 = load_experiment(kDir + "/experiments/example1.cfg");
  const auto want = example1_plants();
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(ex1.sim.plants[i].family, want[i].family);
    EXPECT_EQ(ex1.sim.plants[i].exponent, want[i].exponent);
    EXPECT_EQ(ex1.sim.plants[i].gain, want[i].gain);
  }
  const auto ex2 = load_experiment(kDir + "/experiments/example2.cfg");
  const auto ref = example2_reference(2500);
  for (long k = 0; k <= 2500; k += 13) EXPECT_NEAR(ex2.sim.reference.value(k), ref.value(k), 1e-12);
}

TEST(Config, GraphFileProblemsAreGraphErrors) {
  const auto e = parse_error(kMinimal, {"graph=null", "graph.file=missing.graph"});
  EXPECT_EQ(e.kind(), ErrorKind::GraphFormat);
  const auto f = parse_error(kMinimal, {"graph.edges=[[1, 1, 1]]"});
  EXPECT_EQ(f.kind(), ErrorKind::GraphFormat);
}

TEST(Config, SameSeedSameRun) {
  const auto path = kDir + "/experiments/example1.cfg";
  const auto a = run(load_experiment(path, {"attack.seed=7"}).sim);
  const auto b = run(load_experiment(path, {"attack.seed=7"}).sim);
  std::ostringstream sa, sb;
  write_trace_csv(sa, a);
  write_trace_csv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(Report, TraceRoundTrip) {
  auto cfg = ddet::test::example1_config({generate_schedule(ddet::test::nominal_budget(), 2500, 10, 1)});
  const auto r = run(cfg);
  std::stringstream buf;
  write_trace_csv(buf, r);
  std::string header;
  std::getline(buf, header);
  EXPECT_EQ(header, "k,agent,y,u,e_abc,e_y,e_y_tilde,delta,h,triggered,ppd_hat,theta");
  buf.seekg(0);
  const auto back = read_trace_csv(buf);
  ASSERT_EQ(back.rows.size(), r.rows.size());
  EXPECT_EQ(back.agents, 8u);
  EXPECT_EQ(back.horizon, 2500);
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    EXPECT_EQ(back.rows[i].agent, r.rows[i].agent);
    EXPECT_EQ(back.rows[i].h, r.rows[i].h);
    EXPECT_EQ(back.rows[i].triggered, r.rows[i].triggered);
    EXPECT_NEAR(back.rows[i].y, r.rows[i].y, 1e-8 * (1 + std::abs(r.rows[i].y)));
  }
  const auto m1 = summarize(r, {{0, 2500}});
  const auto m2 = summarize(back, {{0, 2500}});
  EXPECT_EQ(m1.trigger_counts, m2.trigger_counts);
  EXPECT_EQ(m1.attacked_steps, m2.attacked_steps);
}

TEST(Report, RejectsBrokenTraces) {
  std::istringstream bad_header("k,agent,y\n");
  EXPECT_THROW(read_trace_csv(bad_header), Error);
  std::istringstream missing_row(
      "k,agent,y,u,e_abc,e_y,e_y_tilde,delta,h,triggered,ppd_hat,theta\n"
      "0,1,0,0,0,0,0,0,1,1,1,0\n0,2,0,0,0,0,0,0,1,1,1,0\n1,1,0,0,0,0,0,0,1,0,1,0\n");
  EXPECT_THROW(read_trace_csv(missing_row), Error);
  std::istringstream junk(
      "k,agent,y,u,e_abc,e_y,e_y_tilde,delta,h,triggered,ppd_hat,theta\n0,1,x,0,0,0,0,0,1,1,1,0\n");
  EXPECT_THROW(read_trace_csv(junk), Error);
}

TEST(Report, SvgAndMetricsAreWellFormed) {
  const auto r = run(ddet::test::example1_config());
  std::ostringstream svg, ev, metrics;
  write_outputs_svg(svg, r, 3, 4);
  write_events_svg(ev, r);
  write_metrics_csv(metrics, summarize(r, r.reference_segments));
  EXPECT_EQ(svg.str().rfind("<svg", 0), 0u);
  EXPECT_NE(svg.str().find("</svg>"), std::string::npos);
  EXPECT_NE(ev.str().find("</svg>"), std::string::npos);
  const auto text = metrics.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 3 * 8);
}
