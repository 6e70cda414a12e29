#include "ddet/signed_graph.hpp"

#include "ddet/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <deque>
#include <optional>

namespace ddet {

SignedDigraph::SignedDigraph(Matrix adjacency, std::vector<int> pinning)
    : adjacency_(std::move(adjacency)), pinning_(std::move(pinning)) {
  const auto n = pinning_.size();
  if (n == 0) {
    throw Error(ErrorKind::InvalidArgument, "graph needs at least one follower");
  }
  if (static_cast<std::size_t>(adjacency_.rows()) != n ||
      static_cast<std::size_t>(adjacency_.cols()) != n) {
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("adjacency is {}x{} but there are {} pinning gains",
                            adjacency_.rows(), adjacency_.cols(), n));
  }
  bool pinned = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (pinning_[i] < -1 || pinning_[i] > 1) {
      throw Error(ErrorKind::InvalidArgument,
                  fmt::format("pinning gain of agent {} must be -1, 0 or +1", i + 1));
    }
    pinned = pinned || pinning_[i] != 0;
    if (adjacency_(i, i) != 0.0) {
      throw Error(ErrorKind::InvalidArgument,
                  fmt::format("self-edge on agent {}", i + 1));
    }
  }
  if (!pinned) {
    throw Error(ErrorKind::InvalidArgument, "the leader pins no follower");
  }
  if (!adjacency_.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "adjacency has non-finite weights");
  }
  in_neighbors_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (adjacency_(i, j) != 0.0) in_neighbors_[i].push_back(j);
    }
  }
}

std::vector<std::size_t> Partition::members(Side s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < side.size(); ++i) {
    if (side[i] == s) out.push_back(i);
  }
  return out;
}

Matrix BalanceGauge::W() const {
  return Eigen::Map<const Vector>(delta.data(), static_cast<Eigen::Index>(delta.size()))
      .asDiagonal();
}

Matrix BalanceGauge::S() const {
  return Eigen::Map<const Vector>(s.data(), static_cast<Eigen::Index>(s.size()))
      .asDiagonal();
}

namespace {

int sign_of(double w) { return (w > 0.0) - (w < 0.0); }

}  // namespace

Partition check_structural_balance(const SignedDigraph& graph) {
  const auto n = graph.size();
  const auto leader = n;  // extra vertex
  // Undirected sign adjacency: (neighbour, sign).
  std::vector<std::vector<std::pair<std::size_t, int>>> adj(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : graph.neighbors(i)) {
      const int sg = sign_of(graph.weight(i, j));
      adj[i].emplace_back(j, sg);
      adj[j].emplace_back(i, sg);
    }
    if (graph.pin(i) != 0) {
      adj[i].emplace_back(leader, graph.pin(i));
      adj[leader].emplace_back(i, graph.pin(i));
    }
  }

  // colour: +1 = V1, -1 = V2
  std::vector<int> colour(n + 1, 0);
  auto flood = [&](std::size_t root) {
    colour[root] = 1;
    std::deque<std::size_t> queue{root};
    while (!queue.empty()) {
      const auto v = queue.front();
      queue.pop_front();
      for (auto [w, sg] : adj[v]) {
        const int want = colour[v] * sg;
        if (colour[w] == 0) {
          colour[w] = want;
          queue.push_back(w);
        } else if (colour[w] != want) {
          auto label = [&](std::size_t x) {
            return x == leader ? std::string("leader") : fmt::format("{}", x + 1);
          };
          throw Error(ErrorKind::Unbalanced,
                      fmt::format("graph is not structurally balanced: the {} "
                                  "link between {} and {} closes a cycle with "
                                  "an odd number of negative edges",
                                  sg > 0 ? "positive" : "negative", label(v),
                                  label(w)));
        }
      }
    }
  };
  flood(leader);
  for (std::size_t i = 0; i < n; ++i) {
    if (colour[i] == 0) flood(i);
  }

  Partition p;
  p.side.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    p.side.push_back(colour[i] > 0 ? Side::V1 : Side::V2);
  }
  return p;
}

BalanceGauge build_gauge(const Partition& partition, double m, double n) {
  if (!(m > 0.0) || !(n > 0.0) || !std::isfinite(m) || !std::isfinite(n)) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("influence coefficients must be positive (m={}, n={})", m, n));
  }
  BalanceGauge g;
  g.partition = partition;
  g.m = m;
  g.n = n;
  for (Side side : partition.side) {
    g.delta.push_back(side == Side::V1 ? 1.0 : -1.0);
    g.s.push_back(side == Side::V1 ? m : n);
  }
  return g;
}

CouplingMatrices coupling_matrices(const SignedDigraph& graph,
                                   const BalanceGauge& gauge, PsiPinning pinning) {
  if (gauge.size() != graph.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("gauge covers {} agents, graph has {}", gauge.size(),
                            graph.size()));
  }
  const auto& a = graph.adjacency();
  const auto n = static_cast<Eigen::Index>(graph.size());
  const Matrix w = gauge.W();
  const Matrix s = gauge.S();
  const Vector ones = Vector::Ones(n);

  CouplingMatrices out;
  const Vector degree = a * ones;
  out.laplacian = Matrix(degree.asDiagonal()) - a;

  const Vector row = s.inverse() * w * a * w * s * ones;
  out.l_signed = Matrix(row.asDiagonal()) - a;

  Vector pin(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int g = graph.pin(static_cast<std::size_t>(i));
    pin(i) = pinning == PsiPinning::Signed ? g : std::abs(g);
  }
  out.psi = out.l_signed * w * s + Matrix(pin.asDiagonal());
  return out;
}

namespace {

std::vector<bool> reach(std::size_t n, std::optional<std::size_t> start,
                        const SignedDigraph& graph, bool reverse, bool undirected) {
  std::vector<bool> seen(n, false);
  std::deque<std::size_t> queue;
  if (start) {
    seen[*start] = true;
    queue.push_back(*start);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      if (graph.pin(i) != 0) {
        seen[i] = true;
        queue.push_back(i);
      }
    }
  }
  const auto& a = graph.adjacency();
  while (!queue.empty()) {
    const auto v = queue.front();
    queue.pop_front();
    for (std::size_t w = 0; w < n; ++w) {
      if (seen[w]) continue;
      // forward edge v -> w exists when a_wv != 0
      const bool fwd = a(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(v)) != 0.0;
      const bool bwd = a(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(w)) != 0.0;
      if ((undirected && (fwd || bwd)) || (!undirected && (reverse ? bwd : fwd))) {
        seen[w] = true;
        queue.push_back(w);
      }
    }
  }
  return seen;
}

bool all(const std::vector<bool>& v) {
  for (bool b : v) {
    if (!b) return false;
  }
  return true;
}

}  // namespace

bool has_spanning_tree(const SignedDigraph& graph) {
  return all(reach(graph.size(), std::nullopt, graph, false, false));
}

bool is_strongly_connected(const SignedDigraph& graph) {
  const auto n = graph.size();
  return all(reach(n, 0, graph, false, false)) && all(reach(n, 0, graph, true, false));
}

bool is_weakly_connected(const SignedDigraph& graph) {
  return all(reach(graph.size(), 0, graph, false, true));
}

double smallest_singular_value(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  return sv.size() == 0 ? 0.0 : sv(sv.size() - 1);
}

std::string format_members(const std::vector<std::size_t>& members) {
  std::string out = "{";
  for (std::size_t k = 0; k < members.size(); ++k) {
    out += fmt::format("{}{}", k ? "," : "", members[k] + 1);
  }
  return out + "}";
}

}  // namespace ddet
