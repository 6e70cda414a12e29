#pragma once

#include "ddet/attack.hpp"
#include "ddet/engine.hpp"
#include "ddet/plant.hpp"
#include "ddet/signed_graph.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace ddet::test {

inline SignedDigraph canonical_graph() {
  Matrix a = Matrix::Zero(8, 8);
  auto edge = [&](int from, int to, double w) { a(to - 1, from - 1) = w; };
  edge(1, 2, 1);
  edge(2, 4, 1);
  edge(1, 3, -1);
  edge(3, 7, 1);
  edge(4, 5, 1);
  edge(5, 6, 1);
  edge(6, 8, 1);
  return SignedDigraph(a, {1, 0, 0, 0, 0, 0, 0, 0});
}

// Random structurally balanced graph: sides drawn first, then edge signs
// follow the sides and pins carry the side's sign.
inline SignedDigraph random_balanced(std::mt19937_64& rng, std::size_t n, double density = 0.4) {
  std::bernoulli_distribution coin(0.5), edge(density);
  std::uniform_real_distribution<double> mag(0.2, 2.0);
  std::vector<int> side(n);
  for (auto& s : side) s = coin(rng) ? 1 : -1;
  Matrix a = Matrix::Zero(static_cast<long>(n), static_cast<long>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && edge(rng)) a(static_cast<long>(i), static_cast<long>(j)) = side[i] * side[j] * mag(rng);
    }
  }
  std::vector<int> pins(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (coin(rng)) pins[i] = side[i];
  }
  if (std::all_of(pins.begin(), pins.end(), [](int g) { return g == 0; })) pins[0] = side[0];
  return SignedDigraph(a, pins);
}

// Branch form of the neighbourhood error, written per side.
inline double branch_error(std::size_t i, const std::vector<double>& y, double yd,
                           const SignedDigraph& g, const Partition& p, double m, double n) {
  double e = 0.0;
  const bool in_v1 = p.side[i] == Side::V1;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double a = g.weight(i, j);
    if (a == 0.0) continue;
    const bool j_v1 = p.side[j] == Side::V1;
    double ratio = 1.0;
    if (in_v1 && !j_v1) ratio = n / m;
    if (!in_v1 && j_v1) ratio = m / n;
    e += a * y[j] - ratio * std::abs(a) * y[i];
  }
  const double gi = g.pin(i);
  e += gi * yd - std::abs(gi) * y[i] / (in_v1 ? m : n);
  return e;
}

// Counts onsets / attacked steps in [k0, k] directly.
inline long onsets_in(const DosSchedule& s, long k0, long k) {
  long c = 0;
  for (const auto& iv : s.intervals()) c += iv.start >= k0 && iv.start <= k;
  return c;
}

inline long attacked_in(const DosSchedule& s, long k0, long k) {
  long c = 0;
  for (long t = k0; t <= k; ++t) c += s.availability(t) == 0;
  return c;
}

inline bool window_ok(const DosSchedule& s, const AttackBudget& b, long k0, long k) {
  const double len = static_cast<double>(k - k0);
  return onsets_in(s, k0, k) <= b.kappa_a + b.freq_rate * len + 1e-9 &&
         attacked_in(s, k0, k) <= b.zeta_a + b.dur_rate * len + 1e-9;
}

inline SimConfig linear_single(TriggerMode trigger, long horizon = 400) {
  SimConfig cfg{
      .graph = SignedDigraph(Matrix::Zero(1, 1), {1}),
      .m = 1.0,
      .n = 1.0,
      .plants = {PlantModel{PlantFamily::Linear, 1.0, 1.0}},
      .reference = ReferenceSignal({{0, 1.0, {}}}, horizon),
      .horizon = horizon,
      .gains = {ControllerGains{}},
      .init = {{0.5}, {0.0}, {1.0}, 0.0},
      .attacks = {},
  };
  cfg.trigger = trigger;
  return cfg;
}

inline SimConfig example1_config(std::vector<DosSchedule> attacks = {}) {
  SimConfig cfg{
      .graph = canonical_graph(),
      .m = 3.0,
      .n = 4.0,
      .plants = example1_plants(),
      .reference = example1_reference(2500),
      .horizon = 2500,
      .gains = std::vector<ControllerGains>(8),
      .init = {std::vector<double>(8, 0.5), std::vector<double>(8, 0.0),
               std::vector<double>(8, 1.0), 0.0},
      .attacks = std::move(attacks),
  };
  return cfg;
}

inline SimConfig example2_config(std::vector<DosSchedule> attacks = {}) {
  SimConfig cfg = example1_config(std::move(attacks));
  cfg.plants = example2_plants();
  cfg.reference = example2_reference(2500);
  return cfg;
}

inline AttackBudget nominal_budget() { return {2.0, 0.01, 5.0, 0.3}; }

}  // namespace ddet::test
