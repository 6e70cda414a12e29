#include "ddet/controller.hpp"
#include "ddet/error.hpp"
#include "helpers.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <random>

using namespace ddet;

namespace {

struct Net {
  SignedDigraph graph;
  BalanceGauge gauge;
};

Net chain_v2(double m = 3, double n = 4) {
  Matrix a = Matrix::Zero(2, 2);
  a(1, 0) = -1;
  SignedDigraph g(a, {1, 0});
  auto gauge = build_gauge(check_structural_balance(g), m, n);
  return {g, gauge};
}

Net lone(int pin, double m, double n) {
  SignedDigraph g(Matrix::Zero(1, 1), {pin});
  auto gauge = build_gauge(check_structural_balance(g), m, n);
  return {g, gauge};
}

}  // namespace

TEST(NeighborhoodError, TargetsGiveZeroOnChain) {
  const auto net = chain_v2();
  const double yd = 1.7;
  const std::vector<double> y{3 * yd, -4 * yd};
  EXPECT_NEAR(neighborhood_error(1, y, yd, net.graph, net.gauge), 0.0, 1e-15);
  EXPECT_NEAR(neighborhood_error(0, y, yd, net.graph, net.gauge), 0.0, 1e-15);
}

TEST(NeighborhoodError, PinnedLoneAgent) {
  const auto net = lone(1, 3, 4);
  const std::vector<double> at{9.0}, zero{0.0};
  EXPECT_EQ(neighborhood_error(0, at, 3.0, net.graph, net.gauge), 0.0);
  EXPECT_EQ(neighborhood_error(0, zero, 3.0, net.graph, net.gauge), 3.0);
}

TEST(NeighborhoodError, CompactMatchesBranchFormOnRandomGraphs) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> pos(0.2, 5.0), val(-10, 10);
  std::uniform_int_distribution<std::size_t> size(1, 9);
  int v2_rows = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto g = ddet::test::random_balanced(rng, size(rng));
    const auto p = check_structural_balance(g);
    const double m = pos(rng), n = pos(rng);
    const auto gauge = build_gauge(p, m, n);
    std::vector<double> y(g.size());
    for (auto& v : y) v = val(rng);
    const double yd = val(rng);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double compact = neighborhood_error(i, y, yd, g, gauge);
      const double branch = ddet::test::branch_error(i, y, yd, g, p, m, n);
      EXPECT_NEAR(compact, branch, 1e-12 * (1.0 + std::abs(branch)));
      v2_rows += p.side[i] == Side::V2;
    }
  }
  EXPECT_GT(v2_rows, 1000);
}

TEST(NeighborhoodError, EqualsPsiTimesLocalErrors) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> pos(0.2, 5.0), val(-10, 10);
  for (int t = 0; t < 500; ++t) {
    const auto g = ddet::test::random_balanced(rng, 6);
    const auto gauge = build_gauge(check_structural_balance(g), pos(rng), pos(rng));
    const auto psi = coupling_matrices(g, gauge).psi;
    std::vector<double> y(6);
    for (auto& v : y) v = val(rng);
    const double yd = val(rng);
    Vector e_abc(6), e_y(6);
    for (std::size_t i = 0; i < 6; ++i) {
      e_abc(i) = local_abc_error(i, y[i], yd, gauge);
      e_y(i) = neighborhood_error(i, y, yd, g, gauge);
    }
    EXPECT_LT((psi * e_abc - e_y).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(TriggeredError, EqualsNeighborhoodErrorWhenAllHeldAreCurrent) {
  const auto net = chain_v2();
  const std::vector<double> y{1.0, -2.0};
  EXPECT_EQ(triggered_error(1, y, 0.5, net.graph, net.gauge),
            neighborhood_error(1, y, 0.5, net.graph, net.gauge));
}

TEST(TriggeredError, OnlyReferenceTermMovesForLoneAgent) {
  const auto net = lone(1, 1, 1);
  const std::vector<double> held{0.4};
  const double a = triggered_error(0, held, 3.0, net.graph, net.gauge);
  const double b = triggered_error(0, held, 2.0, net.graph, net.gauge);
  EXPECT_DOUBLE_EQ(b - a, -1.0);
}

TEST(TriggeredError, StaleNeighbourSubstitution) {
  const auto net = chain_v2();
  const std::vector<double> held{2.0, -5.0};  // agent 1 last broadcast 2.0
  // -1 * 2.0 - (-1)(-1)(3)(1)/4 * (-5.0) with delta_2 = -1
  const double expected = -1.0 * 2.0 - (-1.0) * (-1.0) * 3.0 * 1.0 * (-5.0) / 4.0;
  EXPECT_NEAR(triggered_error(1, held, 9.0, net.graph, net.gauge), expected, 1e-15);
}

TEST(LocalError, Examples) {
  const auto net = chain_v2();
  EXPECT_EQ(local_abc_error(0, 9.0, 3.0, net.gauge), 0.0);
  EXPECT_EQ(local_abc_error(1, -12.0, 3.0, net.gauge), 0.0);
  EXPECT_EQ(local_abc_error(0, 0.0, 3.0, net.gauge), 3.0);
  EXPECT_DOUBLE_EQ(triggered_output_error(1, -2.0, -6.0, net.gauge), -1.0);
}

TEST(Trigger, Examples) {
  EXPECT_TRUE(trigger_decision(0.5, 1.0, 1.0));
  EXPECT_FALSE(trigger_decision(0.5, 0.0, 7.0));
  EXPECT_FALSE(trigger_decision(0.0, 0.0, 0.0));
  EXPECT_DOUBLE_EQ(event_function(0.5, -1.0, 2.0), -1.5);
}

TEST(Trigger, ZeroThresholdNeverFires) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> v(-1e6, 1e6);
  for (int t = 0; t < 10000; ++t) EXPECT_FALSE(trigger_decision(v(rng), v(rng), 0.0));
}

TEST(Estimator, Arithmetic) {
  const ControllerGains g{};
  EXPECT_NEAR(update_ppd(1.0, g, 1.0, 2.0, 0.0), 1.05, 1e-12);
  EXPECT_EQ(update_ppd(1.0, g, 1.0, 1.0, 0.0), 1.0);
  EXPECT_EQ(update_ppd(1.0, g, 1.0, 3.5, 2.5), 1.0);
  EXPECT_EQ(update_ppd(0.7, g, 0.0, 5.0, -3.0), 0.7);
}

TEST(Reset, ThreeClauses) {
  EXPECT_EQ(reset_ppd(0.0001, 1.0, 1.0, 0.001), 1.0);    // magnitude
  EXPECT_EQ(reset_ppd(0.8, 1.0, 0.0001, 0.001), 1.0);    // input increment
  EXPECT_EQ(reset_ppd(-0.5, 1.0, 1.0, 0.001), 1.0);      // sign
  EXPECT_EQ(reset_ppd(0.8, 1.0, 1.0, 0.001), 0.8);
  EXPECT_EQ(reset_ppd(-0.8, -1.0, 1.0, 0.001), -0.8);
}

TEST(Reset, SignAndMagnitudeInvariant) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> v(-3, 3), gam(1e-6, 0.5);
  for (int t = 0; t < 10000; ++t) {
    double init = v(rng);
    if (init == 0.0) init = 1.0;
    const double gamma = gam(rng);
    const double out = reset_ppd(v(rng), init, v(rng), gamma);
    EXPECT_EQ(std::signbit(out), std::signbit(init));
    EXPECT_GE(std::abs(out), std::min(gamma, std::abs(init)));
  }
}

TEST(Control, Arithmetic) {
  const ControllerGains g{};
  EXPECT_NEAR(control_update(0.0, 1.0, g, 0.9, 1), 0.1, 1e-12);
  EXPECT_EQ(control_update(0.3, 1.0, g, 123.0, 0), 0.3);
  EXPECT_EQ(control_update(0.3, 1.0, g, 0.0, 1), 0.3);
}

TEST(Control, DegenerateGain) {
  ControllerGains g{};
  g.varpi = -1.0;
  try {
    control_update(0.0, 1.0, g, 1.0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateGain);
  }
}

TEST(Gains, Validation) {
  EXPECT_NO_THROW(validate(ControllerGains{}));
  EXPECT_THROW(validate(ControllerGains{0.0, 0.1, 1, -0.1, 1e-5}), Error);
  EXPECT_THROW(validate(ControllerGains{0.1, 2.5, 1, -0.1, 1e-5}), Error);
  EXPECT_THROW(validate(ControllerGains{0.1, 0.1, 0, -0.1, 1e-5}), Error);
  EXPECT_THROW(validate(ControllerGains{0.1, 0.1, 1, -0.1, 0}), Error);
}

TEST(Threshold, ScalarCase) {
  const std::vector<double> m{1.0};
  const std::vector<ControllerGains> g{{0.1, 0.1, 1.0, 1.0, 1e-5}};
  const auto st = compute_theta(m, g, Matrix::Identity(1, 1));
  ASSERT_EQ(st.p_diag.size(), 1u);
  EXPECT_NEAR(st.p_diag[0], -0.05, 1e-15);
  EXPECT_NEAR(st.theta, 2 * 0.05 / (0.1 + 0.0025), 1e-12);
  EXPECT_NEAR(st.theta, 0.9756, 1e-4);
}

TEST(Threshold, ZeroEstimateFallsBackToZero) {
  const std::vector<double> m{0.0, 0.0};
  const std::vector<ControllerGains> g(2);
  EXPECT_EQ(compute_theta(m, g, Matrix::Identity(2, 2)).theta, 0.0);
  EXPECT_EQ(compute_theta(std::vector<double>{std::numeric_limits<double>::quiet_NaN()},
                          Matrix::Identity(1, 1)).theta,
            0.0);
}

TEST(Threshold, MatchesDirectFormulaAndScalesWithPsi) {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> v(-2, 2), c(0.1, 10);
  for (int t = 0; t < 300; ++t) {
    std::vector<double> p(5);
    for (auto& x : p) x = v(rng);
    Matrix psi = Matrix::Random(5, 5);
    const Vector pd = Eigen::Map<const Vector>(p.data(), 5);
    const Matrix pm = pd.asDiagonal();
    const double num = 2 * Eigen::JacobiSVD<Matrix>(psi.transpose() * pm).singularValues()(0);
    const double den = 2 * pd.cwiseAbs().minCoeff() + pd.cwiseAbs2().maxCoeff();
    const double theta = compute_theta(p, psi).theta;
    EXPECT_NEAR(theta, num / den, 1e-10 * (1 + theta));
    const double scale = c(rng);
    EXPECT_NEAR(compute_theta(p, scale * psi).theta, scale * theta, 1e-9 * (1 + theta));
  }
}

TEST(Threshold, CertaintyEquivalenceWeights) {
  const std::vector<double> m{2.0}, mhat{0.5};
  const std::vector<ControllerGains> g{{0.1, 0.2, 1.0, -0.1, 1e-5}};
  const auto w = threshold_weights(m, mhat, g);
  EXPECT_NEAR(w[0], -0.2 * 2.0 * 0.5 / (0.25 - 0.1), 1e-15);
  EXPECT_EQ(compute_theta(mhat, g, Matrix::Identity(1, 1)).p_diag[0],
            threshold_weights(mhat, mhat, g)[0]);
}
