#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "geolab/splitting.hpp"
#include "test_util.hpp"

using namespace geolab;
using geolab::testing::vec;

namespace {

// Central-difference Jacobian of the level-flow embedding at (x0, tau_i).
struct FdJet {
  Vec dx;
  Vec dtau;
};

Vec embed_at(double x0, double tau) {
  const LevelFlowPath p = level_flow(x0, {tau, tau + 1.0, 2}, 1e-13);
  const FlowNode& n = p.nodes.front();
  return vec({n.x1, n.x2, n.t});
}

FdJet fd_jet(double x0, double tau, double h = 1e-4) {
  return {(embed_at(x0 + h, tau) - embed_at(x0 - h, tau)) / (2 * h),
          (embed_at(x0, tau + h) - embed_at(x0, tau - h)) / (2 * h)};
}

}  // namespace

TEST(LevelFlow, MeridianIsFixed) {
  const LevelFlowPath p = level_flow(0.0);
  ASSERT_EQ(p.nodes.size(), 241u);
  for (const FlowNode& n : p.nodes) {
    EXPECT_EQ(n.x1, 0.0);
    EXPECT_NEAR(n.beta, 1.0, 1e-14 * std::pow(std::cosh(n.tau), 2));  // cancellation of cosh^2 terms
    // J' = -tanh(tau) J, so A = J^2 = sech^2(tau)
    EXPECT_NEAR(n.A, 1.0 / std::pow(std::cosh(n.tau), 2), 1e-10);
  }
}

TEST(LevelFlow, StaysOnSurfaceAndMatchesClosedBeta) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> x(-3, 3);
  for (int k = 0; k < 20; ++k) {
    const LevelFlowPath p = level_flow(x(rng));
    for (const FlowNode& n : p.nodes) {
      EXPECT_LE(std::abs(n.x2 - std::sqrt(n.x1 * n.x1 + n.t * n.t + 1.0)), 1e-8);
      EXPECT_NEAR(n.t, std::sinh(n.tau), 1e-12 * std::cosh(n.tau));
      EXPECT_NEAR(n.beta, n.beta_closed, 1e-6);
      EXPECT_LE(std::abs(n.cross), 1e-8);
      EXPECT_GT(n.A, 0.0);
      EXPECT_GT(n.beta, 0.0);
    }
  }
}

TEST(LevelFlow, FiniteDifferenceJacobianIsOrthogonal) {
  for (double x0 : {-2.0, -0.7, 0.4, 1.5}) {
    for (double tau : {-2.5, -1.0, 0.3, 1.7, 3.0}) {
      const FdJet j = fd_jet(x0, tau);
      EXPECT_LE(std::abs(inner(e31(), j.dx, j.dtau)), 1e-7) << x0 << ' ' << tau;
    }
  }
}

TEST(LevelFlow, PulledBackMetricReconstruction) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  const SplitChart chart = hyperboloid_chart(1e-13);
  for (int k = 0; k < 30; ++k) {
    const double x0 = 2.0 * u(rng), tau = 2.5 * u(rng);
    const FdJet j = fd_jet(x0, tau);
    const SplitCoefficients c = coefficients(chart, x0, tau);
    const double a = u(rng), s = u(rng), a2 = u(rng), s2 = u(rng);
    const double ambient = inner(e31(), a * j.dx + s * j.dtau, a2 * j.dx + s2 * j.dtau);
    EXPECT_NEAR(ambient, c.A * a * a2 - c.beta * s * s2, 1e-7);
  }
}

TEST(LevelFlow, ChartAgreesWithTrajectory) {
  const SplitChart chart = hyperboloid_chart();
  const LevelFlowPath p = level_flow(1.3);
  for (std::size_t i = 0; i < p.nodes.size(); i += 20) {
    const SplitCoefficients c = coefficients(chart, 1.3, p.nodes[i].tau);
    EXPECT_NEAR(c.A, p.nodes[i].A, 1e-8 * std::max(1.0, c.A));
    EXPECT_NEAR(c.beta, p.nodes[i].beta, 1e-8 * c.beta);
  }
}

TEST(LevelFlow, RangeWithoutZero) {
  const LevelFlowPath whole = level_flow(0.8, {-2.0, 2.0, 41});
  const LevelFlowPath right = level_flow(0.8, {1.0, 2.0, 11});
  EXPECT_NEAR(right.nodes.front().x1, whole.nodes[30].x1, 1e-9);
  EXPECT_NEAR(right.nodes.back().x1, whole.nodes.back().x1, 1e-9);
  EXPECT_THROW(level_flow(std::nan("")), std::invalid_argument);
}

TEST(LevelFlow, BetaUnboundedAlongCoshCurve) {
  for (double tau = 0.0; tau <= 6.0; tau += 0.1) {
    const double c = std::cosh(tau);
    EXPECT_NEAR(hyperboloid_beta_extracted(c, tau), (1.0 + 2.0 * c * c) / 3.0, 1e-6);
  }
  EXPECT_GT(hyperboloid_beta_extracted(std::cosh(4.4), 4.4), 1e3);
  EXPECT_LT(hyperboloid_beta_extracted(std::cosh(4.3), 4.3), 1e3);
}

TEST(LevelFlow, MeridianCoefficientDegenerates) {
  const LevelFlowPath p = level_flow(0.0);
  const Degeneration d = degeneration_threshold(p, 0.01);
  EXPECT_TRUE(d.monotone);
  // sech^2(tau) < 0.01 exactly when tau > acosh(10); nodes are 0.05 apart
  EXPECT_GE(d.threshold, std::acosh(10.0));
  EXPECT_LE(d.threshold, std::acosh(10.0) + 0.05);
}

TEST(LevelFlow, CsvLayout) {
  std::ostringstream os;
  write_level_flow_csv(os, {level_flow(0.5, {-1, 1, 5})});
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "x0,tau,x1,x2,t,beta,A");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 5);
}

TEST(BoostChart, ClosedFormsAndStatic) {
  const SplitChart b = boost_chart();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> x(-10, 10), t(-4, 4);
  for (int k = 0; k < 500; ++k) {
    const double xv = x(rng), tv = t(rng);
    const ChartJet j = b.jet(xv, tv);
    const SplitCoefficients c = coefficients(j);
    EXPECT_NEAR(c.A, boost_A(xv), 1e-8);
    EXPECT_NEAR(c.beta, boost_beta(xv), 1e-8 * boost_beta(xv));
    EXPECT_LE(std::abs(c.cross), 1e-10 * (1.0 + c.beta));
    EXPECT_NEAR(j.point(1) * j.point(1) - j.point(2) * j.point(2), 1.0 + xv * xv, 1e-9 * std::cosh(tv) * std::cosh(tv) * (1 + xv * xv));
    EXPECT_GE(c.A, 1.0);
    EXPECT_LT(c.A, 2.0);
    const SplitCoefficients later = coefficients(b, xv, tv + 0.7);
    EXPECT_NEAR(later.A, c.A, 1e-8);
    EXPECT_NEAR(later.beta, c.beta, 1e-8 * c.beta);
  }
  const ChartJet slice = b.jet(0.6, 0.0);
  EXPECT_TRUE(slice.point.isApprox(vec({0.6, std::sqrt(1.36), 0.0})));
}

TEST(BoundScan, BoostBetaUnboundedInX) {
  const BoundScan s = bound_scan(boost_chart(), {-40, 40, -2, 2}, {81, 9});
  EXPECT_NEAR(s.beta_sup.value, 1601.0, 1e-9);
  EXPECT_EQ(std::abs(s.beta_sup.x), 40.0);
  EXPECT_NEAR(s.beta_inf.value, 1.0, 1e-12);
  EXPECT_FALSE(s.beta_bounded);
  EXPECT_TRUE(s.A_bounded_below);
  EXPECT_NEAR(s.A_inf.value, 1.0, 1e-12);
  EXPECT_LE(s.beta_tau_sup.value, 1e-6);
  EXPECT_LE(s.max_cross, 1e-9);
  EXPECT_TRUE(s.positive);
}

TEST(BoundScan, HyperboloidLevelChartLosesLowerBoundOnA) {
  const BoundScan s = bound_scan(hyperboloid_chart(), {-2, 2, -6, 6}, {9, 25});
  EXPECT_FALSE(s.A_bounded_below);
  EXPECT_LT(s.A_inf.value, 0.01);
  EXPECT_EQ(std::abs(s.A_inf.tau), 6.0);
  EXPECT_LE(s.max_cross, 1e-8);
  EXPECT_TRUE(s.positive);
}

TEST(NullRuled, CircleHasOrthogonalTangents) {
  try {
    null_ruled(unit_circle(), vec({1, 0}));
    FAIL() << "expected OrthogonalTangentPoint";
  } catch (const OrthogonalTangentPoint& e) {
    ASSERT_EQ(e.witness().size(), 2u);
    EXPECT_NEAR(std::abs(e.witness()[0]), 1.0, 1e-12);
    EXPECT_NEAR(e.witness()[1], 0.0, 1e-9);
  }
}

TEST(NullRuled, ParabolaVertexIsOrthogonalToVertical) {
  // tangent (1, 2s) is orthogonal to (0, 1) at the vertex
  try {
    null_ruled(parabola(), vec({0, 1}));
    FAIL() << "expected OrthogonalTangentPoint";
  } catch (const OrthogonalTangentPoint& e) {
    EXPECT_NEAR(e.witness()[0], 0.0, 1e-9);
    EXPECT_NEAR(e.witness()[1], 1.0, 1e-9);
  }
}

TEST(NullRuled, TiltedDirectionWitness) {
  const double th = 0.3;
  const double s = -1.0 / (2.0 * std::tan(th));  // cos th + 2 s sin th = 0
  try {
    null_ruled(parabola(), vec({std::cos(th), std::sin(th)}));
    FAIL() << "expected OrthogonalTangentPoint";
  } catch (const OrthogonalTangentPoint& e) {
    EXPECT_NEAR(e.witness()[0], s, 1e-9);
  }
}

TEST(NullRuled, ParabolaAlongAxisIsTimelikeWithNullKilling) {
  NullRuledCheck chk;
  const NullRuledSurface L = null_ruled(parabola(), vec({1, 0}), 2001, &chk);
  EXPECT_GT(chk.min_normal_square, 0.0);
  EXPECT_EQ(chk.killing_square, 0.0);
  EXPECT_LE(chk.max_killing_pairing, 1e-15);
  for (double s = -3.0; s <= 3.0; s += 0.25) {
    const Vec N = L.normal(s);
    // <N_L, N_L> = 1 - <N, v>^2 = 1 / (1 + 4 s^2)
    EXPECT_NEAR(inner(e31(), N, N), 1.0 / (1.0 + 4.0 * s * s), 1e-14);
    EXPECT_NEAR(inner(e31(), N, L.tangent_s(s)), 0.0, 1e-14);
    EXPECT_NEAR(inner(e31(), N, L.killing()), 0.0, 1e-15);
    // L contains the null line through each base point
    const Vec a = L.point(s, 0.0), b = L.point(s, 2.5);
    EXPECT_NEAR(inner(e31(), b - a, b - a), 0.0, 1e-12);
  }
}

TEST(NullRuled, RejectsNonUnitDirection) {
  EXPECT_THROW(null_ruled(parabola(), vec({2, 0})), std::invalid_argument);
}

TEST(Diamond, SamePointVanishes) {
  const DiamondResult r = diamond_check(parabola(), vec({1, 0}), 0.4, 0.4);
  EXPECT_EQ(r.best, DiamondClass::vanishes);
}

TEST(Diamond, DistinctHeightsOnParabolaAreMonotone) {
  const DiamondResult r = diamond_check(parabola(), vec({1, 0}), -2.0, 1.5);
  EXPECT_EQ(r.best, DiamondClass::constant_sign);
  EXPECT_EQ(r.arcs.size(), 1u);
  EXPECT_EQ(r.path.front(), -2.0);
  EXPECT_EQ(r.path.back(), 1.5);
}

TEST(Diamond, CircleQuarterArcIsMonotone) {
  const double pi = std::numbers::pi;
  const DiamondResult r = diamond_check(unit_circle(), vec({0, 1}), 0.1, pi / 2);
  EXPECT_EQ(r.best, DiamondClass::constant_sign);
  ASSERT_EQ(r.arcs.size(), 2u);
  EXPECT_EQ(r.arcs[1].kind, DiamondClass::mixed);
}

TEST(Diamond, EqualHeightOnCircleIsInconclusive) {
  const double pi = std::numbers::pi;
  EXPECT_THROW(diamond_check(unit_circle(), vec({0, 1}), 0.3, pi - 0.3), PathSearchExhausted);
}
