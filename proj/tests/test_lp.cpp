#include <gtest/gtest.h>

#include "geolab/lp.hpp"
#include "test_util.hpp"

using namespace geolab;
using geolab::testing::random_vec;
using geolab::testing::vec;

TEST(Simplex, TextbookMaximum) {
  lp::Problem p(2);
  p.maximize = true;
  p.objective = vec({1, 1});
  p.add_row(vec({1, 2}), lp::Sense::le, 4);
  p.add_row(vec({3, 1}), lp::Sense::le, 6);
  const lp::Solution s = lp::solve(p);
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.x(0), 1.6, 1e-12);
  EXPECT_NEAR(s.x(1), 1.2, 1e-12);
  EXPECT_NEAR(s.value, 2.8, 1e-12);
}

TEST(Simplex, Infeasible) {
  lp::Problem p(1);
  p.add_row(vec({1}), lp::Sense::ge, 2);
  p.add_row(vec({1}), lp::Sense::le, 1);
  EXPECT_EQ(lp::solve(p).status, lp::Status::infeasible);
  lp::Problem q(1);
  q.bounds(0, 1, 0);
  EXPECT_EQ(lp::solve(q).status, lp::Status::infeasible);
}

TEST(Simplex, Unbounded) {
  lp::Problem p(2);
  p.maximize = true;
  p.objective = vec({1, 0});
  p.add_row(vec({0, 1}), lp::Sense::le, 1);
  EXPECT_EQ(lp::solve(p).status, lp::Status::unbounded);
}

TEST(Simplex, FreeAndUpperBoundedVariables) {
  lp::Problem p(2);
  p.objective = vec({1, -1});
  p.free(0);
  p.bounds(1, -lp::inf, 2.5);
  p.add_row(vec({1, 0}), lp::Sense::ge, -3);
  const lp::Solution s = lp::solve(p);
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.x(0), -3, 1e-12);
  EXPECT_NEAR(s.x(1), 2.5, 1e-12);
  EXPECT_NEAR(s.value, -5.5, 1e-12);
}

TEST(Simplex, EqualityWithBoxes) {
  lp::Problem p(2);
  p.objective = vec({2, 1});
  p.bounds(0, 0.2, 0.5);
  p.bounds(1, -1, 1);
  p.add_row(vec({1, 1}), lp::Sense::eq, 1);
  const lp::Solution s = lp::solve(p);
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.x(0), 0.2, 1e-12);
  EXPECT_NEAR(s.x(1), 0.8, 1e-12);
}

TEST(Simplex, RedundantEqualities) {
  lp::Problem p(3);
  p.objective = vec({1, 2, 3});
  p.add_row(vec({1, 1, 1}), lp::Sense::eq, 1);
  p.add_row(vec({2, 2, 2}), lp::Sense::eq, 2);
  const lp::Solution s = lp::solve(p);
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.value, 1, 1e-12);
}

TEST(Simplex, DegenerateVertex) {
  // Many constraints through the optimum at the origin.
  lp::Problem p(2);
  p.maximize = true;
  p.objective = vec({1, 1});
  for (int k = 0; k < 30; ++k) {
    const double a = 0.1 + k * 0.05;
    p.add_row(vec({a, 1}), lp::Sense::le, 0.0);
    p.add_row(vec({1, a}), lp::Sense::le, 0.0);
  }
  const lp::Solution s = lp::solve(p);
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.value, 0, 1e-12);
}

namespace {

// Brute-force oracle: best feasible vertex of {A x <= b, |x_i| <= 1}.
double vertex_enumeration(const lp::Mat& A, const lp::Vec& b, const lp::Vec& c) {
  const int n = static_cast<int>(c.size());
  lp::Mat G(A.rows() + 2 * n, n);
  lp::Vec h(A.rows() + 2 * n);
  G.topRows(A.rows()) = A;
  h.head(A.rows()) = b;
  G.bottomRows(2 * n) << lp::Mat::Identity(n, n), -lp::Mat::Identity(n, n);
  h.tail(2 * n).setOnes();
  const int m = static_cast<int>(G.rows());
  double best = -lp::inf;
  std::vector<int> pick(n);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) {
      lp::Mat S(n, n);
      lp::Vec r(n);
      for (int i = 0; i < n; ++i) {
        S.row(i) = G.row(pick[i]);
        r(i) = h(pick[i]);
      }
      Eigen::FullPivLU<lp::Mat> lu(S);
      if (lu.rank() < n) return;
      const lp::Vec x = lu.solve(r);
      if (((G * x - h).array() <= 1e-9).all()) best = std::max(best, c.dot(x));
      return;
    }
    for (int i = start; i < m; ++i) {
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace

TEST(SimplexProperty, MatchesVertexEnumeration) {
  std::mt19937_64 rng(21);
  int feasible = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 2;
    const int m = 3 + trial % 5;
    lp::Mat A(m, n);
    for (int i = 0; i < m; ++i) A.row(i) = random_vec(rng, n).transpose();
    const lp::Vec b = random_vec(rng, m, -0.5, 1);
    const lp::Vec c = random_vec(rng, n);
    lp::Problem p(n);
    p.maximize = true;
    p.objective = c;
    for (int i = 0; i < n; ++i) p.bounds(i, -1, 1);
    for (int i = 0; i < m; ++i) p.add_row(A.row(i).transpose(), lp::Sense::le, b(i));
    const double oracle = vertex_enumeration(A, b, c);
    const lp::Solution s = lp::solve(p);
    if (oracle == -lp::inf) {
      EXPECT_EQ(s.status, lp::Status::infeasible);
      continue;
    }
    ++feasible;
    ASSERT_TRUE(s.optimal());
    EXPECT_NEAR(s.value, oracle, 1e-9);
    EXPECT_LE((A * s.x - b).maxCoeff(), 1e-9);
  }
  EXPECT_GT(feasible, 50);
}
