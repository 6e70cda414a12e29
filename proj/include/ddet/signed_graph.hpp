#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ddet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Leader-follower signed digraph. Followers are indexed 0..N-1 internally
// (1..N in files and reports); the leader is implicit and reaches follower i
// through the pinning gain g_i in {-1, 0, +1}.
//
// adjacency(i, j) = a_ij is the weight of the edge j -> i (i listens to j).
class SignedDigraph {
 public:
  SignedDigraph(Matrix adjacency, std::vector<int> pinning);

  std::size_t size() const noexcept { return pinning_.size(); }
  double weight(std::size_t i, std::size_t j) const { return adjacency_(i, j); }
  int pin(std::size_t i) const { return pinning_[i]; }
  const Matrix& adjacency() const noexcept { return adjacency_; }
  std::span<const int> pinning() const noexcept { return pinning_; }

  // In-neighbours of i (indices j with a_ij != 0), ascending.
  std::span<const std::size_t> neighbors(std::size_t i) const {
    return in_neighbors_[i];
  }

  friend bool operator==(const SignedDigraph& a, const SignedDigraph& b) {
    return a.adjacency_ == b.adjacency_ && a.pinning_ == b.pinning_;
  }

 private:
  Matrix adjacency_;
  std::vector<int> pinning_;
  std::vector<std::vector<std::size_t>> in_neighbors_;
};

enum class Side { V1, V2 };

struct Partition {
  std::vector<Side> side;  // per follower

  std::size_t size() const noexcept { return side.size(); }
  std::vector<std::size_t> members(Side s) const;
  friend bool operator==(const Partition&, const Partition&) = default;
};

// Diagonal gauges of a structurally balanced graph: delta_i = +1/-1 and
// s_i = m/n for V1/V2 members.
struct BalanceGauge {
  Partition partition;
  double m = 1.0;
  double n = 1.0;
  std::vector<double> delta;
  std::vector<double> s;

  std::size_t size() const noexcept { return delta.size(); }
  Matrix W() const;
  Matrix S() const;
};

enum class PsiPinning { Signed, Absolute };

struct CouplingMatrices {
  Matrix laplacian;  // L = D - A
  Matrix l_signed;   // L_|G| = diag(S^-1 W A W S 1) - A
  Matrix psi;        // L_|G| W S + G_pin
};

// Two-colours the sign graph (leader included, fixed to V1). Throws
// ErrorKind::Unbalanced on an odd negative cycle or a pin whose sign
// contradicts the side its follower is forced into.
Partition check_structural_balance(const SignedDigraph& graph);

BalanceGauge build_gauge(const Partition& partition, double m, double n);

CouplingMatrices coupling_matrices(const SignedDigraph& graph,
                                   const BalanceGauge& gauge,
                                   PsiPinning pinning = PsiPinning::Signed);

// Every follower reachable from the leader along pins and edges j -> i.
bool has_spanning_tree(const SignedDigraph& graph);

// Connectivity of the follower subgraph, signs ignored.
bool is_strongly_connected(const SignedDigraph& graph);
bool is_weakly_connected(const SignedDigraph& graph);

double smallest_singular_value(const Matrix& m);

// Line format:
//   agents N
//   edge <from> <to> <weight>     (1-based, sets a_{to,from})
//   pin <i> <+1|-1>
//   # comment
SignedDigraph parse_graph(std::istream& in, const std::string& source = "<graph>");
SignedDigraph load_graph(const std::string& path);
void write_graph(std::ostream& out, const SignedDigraph& graph);

std::string format_members(const std::vector<std::size_t>& members);

}  // namespace ddet
