#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "../support/fixtures.hpp"
#include "viramem/error.hpp"
#include "viramem/stats.hpp"

using namespace viramem;
using namespace viramem::stats;
using viramem::testing::fixture_dir;
using viramem::testing::load_json;
using viramem::testing::to_matrix;
using viramem::testing::to_vector;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Independent ranking: for each element count strictly smaller and equal
// values. Average rank = smaller + (equal + 1) / 2.
Eigen::VectorXd brute_rank(const Eigen::VectorXd& v) {
  Eigen::VectorXd r(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double smaller = 0;
    double equal = 0;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      if (v(j) < v(i)) smaller += 1;
      if (v(j) == v(i)) equal += 1;
    }
    r(i) = smaller + (equal + 1) / 2.0;
  }
  return r;
}

// Quantile by explicit order statistics, O(n^2): the k-th smallest element
// is the one with exactly k elements before it in a stable ordering.
double brute_quantile(const Eigen::VectorXd& v, double p) {
  const Eigen::Index n = v.size();
  auto kth = [&](Eigen::Index k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index before = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (v(j) < v(i) || (v(j) == v(i) && j < i)) ++before;
      }
      if (before == k) return v(i);
    }
    return v(0);
  };
  const double h = (n - 1) * p;
  const auto lo = static_cast<Eigen::Index>(h);
  const Eigen::Index hi = std::min(lo + 1, n - 1);
  return kth(lo) + (h - lo) * (kth(hi) - kth(lo));
}

}  // namespace

TEST(Rank, SimpleOrder) {
  EXPECT_EQ(rank(vec({10, 20, 30})), vec({1, 2, 3}));
}

TEST(Rank, AverageTies) {
  EXPECT_EQ(rank(vec({5, 5, 7})), vec({1.5, 1.5, 3}));
}

TEST(Rank, MatchesBruteForceOnRandomVectors) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dist(0, 9);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd v(25);
    for (Eigen::Index i = 0; i < 25; ++i) v(i) = dist(rng);
    EXPECT_EQ(rank(v), brute_rank(v));
  }
}

TEST(Rank, NaNThrows) {
  EXPECT_THROW(rank(vec({1, std::nan(""), 2})), DataError);
}

TEST(Spearman, MonotoneIncreasing) {
  const auto r = spearman(vec({1, 2, 3}), vec({10, 20, 30}));
  EXPECT_DOUBLE_EQ(r.rho, 1.0);
  EXPECT_EQ(r.p_value, 0.0);
}

TEST(Spearman, MonotoneDecreasing) {
  EXPECT_DOUBLE_EQ(spearman(vec({1, 2, 3}), vec({3, 2, 1})).rho, -1.0);
}

TEST(Spearman, ConstantInputIsDegenerate) {
  EXPECT_THROW(spearman(vec({1, 1, 1, 1}), vec({1, 2, 3, 4})), NumericError);
}

TEST(Spearman, TooFewObservations) {
  EXPECT_THROW(spearman(vec({1, 2}), vec({1, 2})), DataError);
}

TEST(Spearman, MatchesFrozenReference) {
  const auto fx = load_json(fixture_dir() / "stats" / "spearman.json");
  ASSERT_GE(fx["cases"].size(), 10u);
  for (const auto& c : fx["cases"]) {
    const auto r = spearman(to_vector(c["x"]), to_vector(c["y"]));
    EXPECT_NEAR(r.rho, c["rho"].get<double>(), 1e-10);
    EXPECT_NEAR(r.p_value, c["p"].get<double>(), 1e-10);
  }
}

TEST(Spearman, InvariantUnderMonotoneTransforms) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd x(40), y(40);
    for (Eigen::Index i = 0; i < 40; ++i) {
      x(i) = g(rng);
      y(i) = 0.5 * x(i) + g(rng);
    }
    const Eigen::VectorXd fx = x.array().exp();
    const Eigen::VectorXd gy = y.array().cube() * 3.0 + 1.0;
    EXPECT_NEAR(spearman(x, y).rho, spearman(fx, gy).rho, 1e-12);
    EXPECT_NEAR(spearman(x, y).rho, spearman(y, x).rho, 1e-15);
  }
}

TEST(Spearman, PermutationPValueAgreesWithAsymptoticInShape) {
  const Eigen::VectorXd x = vec({1, 2, 3, 4, 5, 6, 7, 8});
  const Eigen::VectorXd y = vec({2, 1, 4, 3, 6, 5, 8, 7});
  const double exact = spearman_permutation_p(x, y);
  EXPECT_GT(exact, 0.0);
  EXPECT_LT(exact, 0.05);
  // Perfect monotone relation: only the identity and its reverse reach |rho| = 1.
  EXPECT_NEAR(spearman_permutation_p(x, x), 2.0 / 40320.0, 1e-15);
}

TEST(PartialSpearman, MatchesFrozenReference) {
  const auto fx = load_json(fixture_dir() / "stats" / "partial_spearman.json");
  ASSERT_GE(fx["cases"].size(), 10u);
  for (const auto& c : fx["cases"]) {
    const auto r = partial_spearman(to_vector(c["x"]), to_vector(c["y"]), to_matrix(c["controls"]));
    EXPECT_NEAR(r.rho, c["rho"].get<double>(), 1e-10);
    EXPECT_NEAR(r.p_value, c["p"].get<double>(), 1e-10);
  }
}

TEST(PartialSpearman, UncorrelatedControlsLeaveRhoNearlyUnchanged) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g;
  const Eigen::Index n = 500;
  Eigen::VectorXd x(n), y(n);
  Eigen::MatrixXd z(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i) = g(rng);
    y(i) = 0.6 * x(i) + g(rng);
    z(i, 0) = g(rng);
    z(i, 1) = g(rng);
  }
  const auto simple = spearman(x, y);
  const auto partial = partial_spearman(x, y, z, {"a", "b"});
  EXPECT_LT(std::abs(simple.rho - partial.rho), 0.02);
  EXPECT_EQ(partial.controls, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(partial.method, CorrelationMethod::partial_spearman);
}

TEST(PartialSpearman, ResponseEqualToControlIsDegenerate) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  Eigen::VectorXd x(30), y(30);
  for (Eigen::Index i = 0; i < 30; ++i) {
    x(i) = g(rng);
    y(i) = g(rng);
  }
  EXPECT_THROW(partial_spearman(x, y, y), NumericError);
}

TEST(PartialSpearman, CollinearControlsThrow) {
  Eigen::VectorXd x = vec({1, 2, 3, 4, 5, 6, 7});
  Eigen::VectorXd y = vec({2, 1, 3, 5, 4, 7, 6});
  Eigen::MatrixXd z(7, 2);
  z.col(0) = vec({3, 1, 2, 7, 5, 6, 4});
  z.col(1) = z.col(0);
  EXPECT_THROW(partial_spearman(x, y, z), NumericError);
}

TEST(Quantile, IqrBoundsHandExample) {
  const Fences f = iqr_bounds(vec({1, 2, 3, 4}));
  EXPECT_DOUBLE_EQ(f.q1, 1.75);
  EXPECT_DOUBLE_EQ(f.q3, 3.25);
  EXPECT_DOUBLE_EQ(f.lower, -0.5);
  EXPECT_DOUBLE_EQ(f.upper, 5.5);
}

TEST(Quantile, ConstantVectorFencesEqualConstant) {
  const Fences f = iqr_bounds(vec({4, 4, 4, 4, 4}));
  EXPECT_EQ(f.lower, 4.0);
  EXPECT_EQ(f.upper, 4.0);
  EXPECT_FALSE(f.outside(4.0));
}

TEST(Quantile, ThousandIsAboveUpperFence) {
  Eigen::VectorXd v(101);
  for (int i = 0; i < 100; ++i) v(i) = i;
  v(100) = 1000;
  // Hand computation: n = 101, Q1 at h = 25 -> 25, Q3 at h = 75 -> 75,
  // IQR = 50, upper fence = 150.
  const Fences f = iqr_bounds(v);
  EXPECT_DOUBLE_EQ(f.q1, 25.0);
  EXPECT_DOUBLE_EQ(f.q3, 75.0);
  EXPECT_DOUBLE_EQ(f.upper, 150.0);
  EXPECT_TRUE(f.outside(1000.0));
}

TEST(Quantile, TooFewValues) {
  EXPECT_THROW(iqr_bounds(vec({1, 2, 3})), DataError);
}

TEST(Quantile, AgreesWithQuadraticOracle) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-5, 5);
  std::uniform_int_distribution<int> len(4, 40);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd v(len(rng));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = std::round(u(rng) * 4) / 4;
    for (double p : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      EXPECT_NEAR(quantile(v, p), brute_quantile(v, p), 1e-12);
    }
  }
}

TEST(Heatmap, IdenticalAndNegatedColumns) {
  Eigen::MatrixXd t(6, 3);
  t.col(0) = vec({1, 4, 2, 8, 5, 7});
  t.col(1) = t.col(0);
  t.col(2) = -t.col(0);
  const auto h = correlation_heatmap(t, {"a", "b", "c"});
  EXPECT_DOUBLE_EQ(h.rho(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(h.rho(0, 2), -1.0);
  EXPECT_EQ(h.rho.diagonal(), Eigen::VectorXd::Ones(3));
  EXPECT_EQ(h.rho, h.rho.transpose());
}

TEST(Heatmap, MatchesPairwiseCalls) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Eigen::MatrixXd t(30, 8);
  for (Eigen::Index i = 0; i < t.size(); ++i) t(i) = g(rng);
  std::vector<std::string> names;
  for (int j = 0; j < 8; ++j) names.push_back("c" + std::to_string(j));
  const auto h = correlation_heatmap(t, names);
  for (Eigen::Index i = 0; i < 8; ++i) {
    for (Eigen::Index j = 0; j < 8; ++j) {
      if (i == j) continue;
      const auto r = spearman(t.col(i), t.col(j));
      EXPECT_EQ(h.rho(i, j), r.rho);
      EXPECT_EQ(h.p_value(i, j), r.p_value);
    }
  }
}

TEST(Heatmap, ConstantColumnFlagged) {
  Eigen::MatrixXd t(5, 2);
  t.col(0) = vec({1, 2, 3, 4, 5});
  t.col(1).setConstant(2.0);
  const auto h = correlation_heatmap(t, {"a", "b"});
  EXPECT_FALSE(h.degenerate[0]);
  EXPECT_TRUE(h.degenerate[1]);
  EXPECT_TRUE(std::isnan(h.rho(0, 1)));
}
