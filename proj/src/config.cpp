#include "ddet/config.hpp"

#include "ddet/error.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace ddet {

namespace {

struct Context {
  std::string source;
  std::string base_dir;

  Error error(const YAML::Mark& mark, const std::string& msg) const {
    if (mark.is_null() || mark.line < 0) {
      return Error(ErrorKind::Parse, fmt::format("{}: {}", source, msg));
    }
    return Error(ErrorKind::Parse, fmt::format("{}:{}: {}", source, mark.line + 1, msg));
  }

  std::string resolve(const std::string& path) const {
    namespace fs = std::filesystem;
    const fs::path p(path);
    if (p.is_absolute() || base_dir.empty()) return p.string();
    return (fs::path(base_dir) / p).lexically_normal().string();
  }
};

// A YAML mapping at a dotted path with strict key checking.
class Section {
 public:
  Section(YAML::Node node, std::string path, const Context& ctx)
      : node_(std::move(node)), path_(std::move(path)), ctx_(&ctx) {
    if (!node_.IsMap()) throw ctx_->error(node_.Mark(), fmt::format("`{}` must be a mapping", path_.empty() ? "config" : path_));
  }

  void allow(std::initializer_list<std::string_view> keys) const {
    const std::set<std::string_view> ok(keys);
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!ok.contains(key)) {
        throw ctx_->error(kv.first.Mark(), fmt::format("unknown key `{}`", qualify(key)));
      }
    }
  }

  bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }

  YAML::Node required(const std::string& key) const {
    YAML::Node v = node_[key];
    if (!v) throw ctx_->error(node_.Mark(), fmt::format("missing key `{}`", qualify(key)));
    return v;
  }

  template <class T>
  T get(const std::string& key) const {
    return convert<T>(required(key), key);
  }

  template <class T>
  T get_or(const std::string& key, T fallback) const {
    return has(key) ? convert<T>(node_[key], key) : fallback;
  }

  // Scalar broadcast to every agent, or a list with one entry per agent.
  std::vector<double> per_agent(const std::string& key, std::size_t n) const {
    const YAML::Node v = required(key);
    if (v.IsScalar()) return std::vector<double>(n, convert<double>(v, key));
    auto list = convert<std::vector<double>>(v, key);
    if (list.size() != n) {
      throw ctx_->error(v.Mark(), fmt::format("`{}` needs {} entries, got {}", qualify(key), n,
                                              list.size()));
    }
    return list;
  }

  Section child(const std::string& key) const {
    return Section(required(key), qualify(key), *ctx_);
  }

  std::string qualify(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const YAML::Node& node() const { return node_; }
  const std::string& path() const { return path_; }
  const Context& ctx() const { return *ctx_; }

  template <class T>
  T convert(const YAML::Node& v, const std::string& key) const {
    try {
      return v.as<T>();
    } catch (const YAML::Exception&) {
      throw ctx_->error(v.Mark(), fmt::format("`{}` has the wrong type", qualify(key)));
    }
  }

 private:
  YAML::Node node_;
  std::string path_;
  const Context* ctx_;
};

void apply_override(YAML::Node& root, const std::string& assignment, const Context& ctx) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorKind::Parse,
                fmt::format("{}: override `{}` is not key=value", ctx.source, assignment));
  }
  const std::string key = assignment.substr(0, eq);
  YAML::Node value;
  try {
    value = YAML::Load(assignment.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorKind::Parse, fmt::format("override `{}`: {}", assignment, e.msg));
  }
  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string p; std::getline(ss, p, '.');) {
    if (p.empty()) throw Error(ErrorKind::Parse, fmt::format("override key `{}` is malformed", key));
    parts.push_back(p);
  }
  YAML::Node cur = root;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node next = cur[parts[i]];
    if (!next || next.IsNull()) {
      cur[parts[i]] = YAML::Node(YAML::NodeType::Map);
      next.reset(cur[parts[i]]);
    }
    if (!next.IsMap()) {
      throw Error(ErrorKind::Parse,
                  fmt::format("override `{}`: `{}` is not a section", key, parts[i]));
    }
    cur.reset(next);
  }
  cur[parts.back()] = value;
}

SignedDigraph read_graph(const Section& sec) {
  sec.allow({"file", "agents", "edges", "pins"});
  if (sec.has("file")) {
    if (sec.has("agents") || sec.has("edges") || sec.has("pins")) {
      throw sec.ctx().error(sec.node().Mark(), "graph: give either `file` or an inline graph");
    }
    const auto path = sec.ctx().resolve(sec.get<std::string>("file"));
    try {
      return load_graph(path);
    } catch (const Error& e) {
      throw Error(ErrorKind::GraphFormat, e.what());
    }
  }
  const long n = sec.get<long>("agents");
  if (n < 1) throw sec.ctx().error(sec.node().Mark(), "graph.agents must be positive");
  std::ostringstream text;
  text << "agents " << n << "\n";
  if (sec.has("edges")) {
    for (const auto& e : sec.convert<std::vector<std::vector<double>>>(sec.node()["edges"], "edges")) {
      if (e.size() != 3) throw sec.ctx().error(sec.node()["edges"].Mark(), "graph.edges entries are [from, to, weight]");
      text << fmt::format("edge {} {} {}\n", static_cast<long>(e[0]), static_cast<long>(e[1]), e[2]);
    }
  }
  for (const auto& p : sec.convert<std::vector<std::vector<long>>>(sec.required("pins"), "pins")) {
    if (p.size() != 2) throw sec.ctx().error(sec.node()["pins"].Mark(), "graph.pins entries are [agent, sign]");
    text << fmt::format("pin {} {}\n", p[0], p[1]);
  }
  std::istringstream in(text.str());
  try {
    return parse_graph(in, sec.ctx().source + " (graph)");
  } catch (const Error& e) {
    throw Error(ErrorKind::GraphFormat, e.what());
  }
}

ReferenceSignal read_reference(const Section& sec, long horizon) {
  sec.allow({"segments"});
  const YAML::Node list = sec.required("segments");
  if (!list.IsSequence() || list.size() == 0) {
    throw sec.ctx().error(list.Mark(), "reference.segments must be a non-empty list");
  }
  std::vector<ReferenceSegment> segs;
  for (const auto& item : list) {
    Section s(item, "reference.segments[]", sec.ctx());
    s.allow({"start", "value", "terms"});
    ReferenceSegment seg;
    seg.start = s.get<long>("start");
    seg.constant = s.get_or<double>("value", 0.0);
    if (s.has("terms")) {
      for (const auto& t : s.node()["terms"]) {
        Section ts(t, "reference.segments[].terms[]", sec.ctx());
        ts.allow({"wave", "amplitude", "omega", "pi_over"});
        HarmonicTerm term;
        const auto wave = ts.get<std::string>("wave");
        if (wave == "sin") {
          term.wave = HarmonicTerm::Wave::Sin;
        } else if (wave == "cos") {
          term.wave = HarmonicTerm::Wave::Cos;
        } else {
          throw sec.ctx().error(t["wave"].Mark(), "wave must be `sin` or `cos`");
        }
        term.amplitude = ts.get<double>("amplitude");
        if (ts.has("omega") == ts.has("pi_over")) {
          throw sec.ctx().error(t.Mark(), "a term needs exactly one of `omega` or `pi_over`");
        }
        term.omega = ts.has("omega") ? ts.get<double>("omega")
                                     : std::numbers::pi / ts.get<double>("pi_over");
        seg.terms.push_back(term);
      }
    }
    segs.push_back(std::move(seg));
  }
  try {
    return ReferenceSignal(std::move(segs), horizon);
  } catch (const Error& e) {
    throw sec.ctx().error(list.Mark(), e.what());
  }
}

std::vector<DosSchedule> read_attack(const YAML::Node& node, const Context& ctx, long horizon,
                                     std::size_t agents, AttackSource& src) {
  if (!node || node.IsNull() || (node.IsScalar() && node.as<std::string>() == "none")) return {};
  Section sec(node, "attack", ctx);
  sec.allow({"file", "files", "seed", "kappa", "freq_rate", "zeta", "dur_rate", "max_duration",
             "per_agent"});
  const bool generated = sec.has("seed") || sec.has("kappa") || sec.has("freq_rate") ||
                         sec.has("zeta") || sec.has("dur_rate") || sec.has("max_duration");
  if (static_cast<int>(sec.has("file")) + static_cast<int>(sec.has("files")) +
          static_cast<int>(generated) != 1) {
    throw ctx.error(node.Mark(), "attack: give exactly one of `file`, `files` or generator keys");
  }
  auto load = [&](const std::string& p) {
    try {
      return load_schedule(ctx.resolve(p), horizon);
    } catch (const Error& e) {
      throw Error(ErrorKind::Parse, e.what());
    }
  };
  if (sec.has("file")) {
    src.kind = AttackSource::Kind::File;
    src.file = sec.get<std::string>("file");
    return {load(src.file)};
  }
  if (sec.has("files")) {
    const auto files = sec.get<std::vector<std::string>>("files");
    if (files.size() != agents) {
      throw ctx.error(node["files"].Mark(), fmt::format("attack.files needs {} entries", agents));
    }
    src.kind = AttackSource::Kind::File;
    src.per_agent = true;
    std::vector<DosSchedule> out;
    for (const auto& f : files) out.push_back(load(f));
    return out;
  }
  src.kind = AttackSource::Kind::Generated;
  src.seed = sec.get<std::uint64_t>("seed");
  src.budget = {sec.get<double>("kappa"), sec.get<double>("freq_rate"), sec.get<double>("zeta"),
                sec.get<double>("dur_rate")};
  src.max_duration = sec.get<long>("max_duration");
  src.per_agent = sec.get_or<bool>("per_agent", false);
  try {
    validate(src.budget);
  } catch (const Error& e) {
    throw ctx.error(node.Mark(), e.what());
  }
  if (src.max_duration < 1) throw ctx.error(node.Mark(), "attack.max_duration must be positive");
  std::vector<DosSchedule> out;
  const std::size_t count = src.per_agent ? agents : 1;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(generate_schedule(src.budget, horizon, src.max_duration, src.seed + i));
  }
  return out;
}

}  // namespace

ExperimentConfig parse_experiment(const std::string& text, const std::string& base_dir,
                                  const std::vector<std::string>& overrides,
                                  const std::string& source) {
  const Context ctx{source, base_dir};
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ctx.error(e.mark, e.msg);
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  for (const auto& o : overrides) apply_override(root, o, ctx);

  const Section top(root, "", ctx);
  top.allow({"graph", "gauge", "plant", "reference", "gains", "init", "attack", "run"});

  const Section run_sec = top.child("run");
  run_sec.allow({"horizon", "trigger", "psi_pinning", "skip_estimator_on_attack"});
  const long horizon = run_sec.get<long>("horizon");
  if (horizon < 2) throw ctx.error(run_sec.required("horizon").Mark(), "run.horizon must be >= 2");

  const Section gauge = top.child("gauge");
  gauge.allow({"m", "n"});
  const double m = gauge.get<double>("m");
  const double n = gauge.get<double>("n");
  if (!(m > 0.0) || !(n > 0.0)) throw ctx.error(gauge.node().Mark(), "gauge.m and gauge.n must be positive");

  const Section plant = top.child("plant");
  plant.allow({"catalog", "exponents", "gains"});
  const Section gains_sec = top.child("gains");
  gains_sec.allow({"eta1", "eta2", "mu", "varpi", "gamma"});
  const Section init_sec = top.child("init");
  init_sec.allow({"y", "u", "ppd", "theta"});
  const Section ref_sec = top.child("reference");

  SignedDigraph graph = read_graph(top.child("graph"));
  const auto agents = graph.size();

  ExperimentConfig out{
      .sim = SimConfig{.graph = std::move(graph),
                       .m = m,
                       .n = n,
                       .plants = {},
                       .reference = read_reference(ref_sec, horizon),
                       .horizon = horizon,
                       .gains = {},
                       .init = {},
                       .attacks = {}},
      .catalog = PlantCatalog::Linear,
      .attack = {},
      .source = source,
  };
  SimConfig& sim = out.sim;

  try {
    out.catalog = parse_catalog(plant.get<std::string>("catalog"));
  } catch (const Error& e) {
    throw ctx.error(plant.required("catalog").Mark(), e.what());
  }
  const auto plant_gains = plant.per_agent("gains", agents);
  const bool no_exponents =
      out.catalog == PlantCatalog::Linear || out.catalog == PlantCatalog::Integrator;
  const auto exponents = no_exponents
                             ? std::vector<double>(agents, 1.0)
                             : plant.per_agent("exponents", agents);
  if (no_exponents && plant.has("exponents")) {
    throw ctx.error(plant.node()["exponents"].Mark(),
                    fmt::format("the {} catalog takes no exponents", to_string(out.catalog)));
  }
  try {
    sim.plants = make_plants(out.catalog, exponents, plant_gains);
  } catch (const Error& e) {
    throw ctx.error(plant.node().Mark(), e.what());
  }

  const auto eta1 = gains_sec.per_agent("eta1", agents);
  const auto eta2 = gains_sec.per_agent("eta2", agents);
  const auto mu = gains_sec.per_agent("mu", agents);
  const auto varpi = gains_sec.per_agent("varpi", agents);
  const auto gamma = gains_sec.per_agent("gamma", agents);
  for (std::size_t i = 0; i < agents; ++i) {
    sim.gains.push_back({eta1[i], eta2[i], mu[i], varpi[i], gamma[i]});
    try {
      validate(sim.gains.back());
    } catch (const Error& e) {
      throw ctx.error(gains_sec.node().Mark(), fmt::format("agent {}: {}", i + 1, e.what()));
    }
  }

  sim.init.y = init_sec.per_agent("y", agents);
  sim.init.u = init_sec.per_agent("u", agents);
  sim.init.ppd = init_sec.per_agent("ppd", agents);
  sim.init.theta = init_sec.get<double>("theta");

  const auto trigger = run_sec.get_or<std::string>("trigger", "event");
  if (trigger == "event") {
    sim.trigger = TriggerMode::Event;
  } else if (trigger == "periodic") {
    sim.trigger = TriggerMode::Periodic;
  } else {
    throw ctx.error(run_sec.node()["trigger"].Mark(), "run.trigger must be `event` or `periodic`");
  }
  const auto pinning = run_sec.get_or<std::string>("psi_pinning", "signed");
  if (pinning == "signed") {
    sim.psi_pinning = PsiPinning::Signed;
  } else if (pinning == "absolute") {
    sim.psi_pinning = PsiPinning::Absolute;
  } else {
    throw ctx.error(run_sec.node()["psi_pinning"].Mark(),
                    "run.psi_pinning must be `signed` or `absolute`");
  }
  sim.skip_estimator_on_attack = run_sec.get_or<bool>("skip_estimator_on_attack", false);

  sim.attacks = read_attack(root["attack"], ctx, horizon, agents, out.attack);
  sim.seed = out.attack.seed;
  return out;
}

ExperimentConfig load_experiment(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, fmt::format("cannot open config {}", path));
  std::stringstream buf;
  buf << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path().string();
  return parse_experiment(buf.str(), dir, overrides, path);
}

}  // namespace ddet
