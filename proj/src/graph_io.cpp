#include "ddet/error.hpp"
#include "ddet/signed_graph.hpp"
#include "text_lines.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <optional>
#include <set>

namespace ddet {

SignedDigraph parse_graph(std::istream& in, const std::string& source) {
  std::optional<std::size_t> agents;
  struct EdgeLine { std::size_t from, to; double w; int line; };
  std::vector<EdgeLine> edges;
  std::vector<std::pair<std::size_t, int>> pins;
  std::vector<int> pin_lines;

  auto fail = [&](int line, const std::string& msg) -> Error {
    return Error(ErrorKind::Parse, fmt::format("{}:{}: {}", source, line, msg));
  };

  for_each_record(in, [&](int line, const std::vector<std::string>& tok) {
    const auto& kw = tok[0];
    if (kw == "agents") {
      if (tok.size() != 2) throw fail(line, "expected `agents N`");
      if (agents) throw fail(line, "duplicate `agents` header");
      const long v = parse_long(tok[1], [&] { return fail(line, "bad agent count"); });
      if (v < 1) throw fail(line, "agent count must be positive");
      agents = static_cast<std::size_t>(v);
    } else if (kw == "edge") {
      if (tok.size() != 4) throw fail(line, "expected `edge <from> <to> <weight>`");
      if (!agents) throw fail(line, "`agents` header must come first");
      const long from = parse_long(tok[1], [&] { return fail(line, "bad edge source"); });
      const long to = parse_long(tok[2], [&] { return fail(line, "bad edge target"); });
      const double w = parse_double(tok[3], [&] { return fail(line, "bad edge weight"); });
      if (from < 1 || to < 1 || static_cast<std::size_t>(from) > *agents ||
          static_cast<std::size_t>(to) > *agents) {
        throw fail(line, fmt::format("edge {} -> {} references an agent outside 1..{}",
                                     from, to, *agents));
      }
      if (from == to) throw fail(line, "self-edges are not allowed");
      if (w == 0.0 || !std::isfinite(w)) throw fail(line, "edge weight must be finite and nonzero");
      edges.push_back({static_cast<std::size_t>(from - 1),
                       static_cast<std::size_t>(to - 1), w, line});
    } else if (kw == "pin") {
      if (tok.size() != 3) throw fail(line, "expected `pin <i> <+1|-1>`");
      if (!agents) throw fail(line, "`agents` header must come first");
      const long i = parse_long(tok[1], [&] { return fail(line, "bad pinned agent"); });
      const long g = parse_long(tok[2], [&] { return fail(line, "bad pinning gain"); });
      if (i < 1 || static_cast<std::size_t>(i) > *agents) {
        throw fail(line, fmt::format("pinned agent {} outside 1..{}", i, *agents));
      }
      if (g != 1 && g != -1) throw fail(line, "pinning gain must be +1 or -1");
      pins.emplace_back(static_cast<std::size_t>(i - 1), static_cast<int>(g));
      pin_lines.push_back(line);
    } else {
      throw fail(line, fmt::format("unknown record `{}`", kw));
    }
  });

  if (!agents) throw Error(ErrorKind::Parse, fmt::format("{}: missing `agents` header", source));

  const auto n = static_cast<Eigen::Index>(*agents);
  Matrix a = Matrix::Zero(n, n);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& e : edges) {
    if (!seen.emplace(e.from, e.to).second) {
      throw fail(e.line, fmt::format("duplicate edge {} -> {}", e.from + 1, e.to + 1));
    }
    a(static_cast<Eigen::Index>(e.to), static_cast<Eigen::Index>(e.from)) = e.w;
  }
  std::vector<int> pinning(*agents, 0);
  for (std::size_t k = 0; k < pins.size(); ++k) {
    auto [i, g] = pins[k];
    if (pinning[i] != 0) throw fail(pin_lines[k], fmt::format("agent {} pinned twice", i + 1));
    pinning[i] = g;
  }
  try {
    return SignedDigraph(std::move(a), std::move(pinning));
  } catch (const Error& e) {
    throw Error(ErrorKind::Parse, fmt::format("{}: {}", source, e.what()));
  }
}

SignedDigraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, fmt::format("cannot open graph file {}", path));
  return parse_graph(in, path);
}

void write_graph(std::ostream& out, const SignedDigraph& graph) {
  const auto n = graph.size();
  out << fmt::format("agents {}\n", n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : graph.neighbors(i)) {
      out << fmt::format("edge {} {} {}\n", j + 1, i + 1, graph.weight(i, j));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (graph.pin(i) != 0) out << fmt::format("pin {} {:+d}\n", i + 1, graph.pin(i));
  }
}

}  // namespace ddet
