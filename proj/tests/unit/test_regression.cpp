#include <gtest/gtest.h>

#include <random>

#include "../support/fixtures.hpp"
#include "viramem/error.hpp"
#include "viramem/regression.hpp"

using namespace viramem;
using namespace viramem::stats;
using viramem::testing::fixture_dir;
using viramem::testing::load_json;
using viramem::testing::to_matrix;
using viramem::testing::to_vector;

namespace {

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), x.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(x.cols()) = x;
  return out;
}

Eigen::MatrixXd random_normal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = g(rng);
  return m;
}

}  // namespace

TEST(Ols, ExactLine) {
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(10, 0, 9);
  Eigen::VectorXd y = (1.0 + 2.0 * x.array()).matrix();
  const auto fit = ols_fit(with_intercept(x), y);
  EXPECT_NEAR(fit.coefficients(0), 1.0, 1e-12);
  EXPECT_NEAR(fit.coefficients(1), 2.0, 1e-12);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
}

TEST(Ols, OrthogonalResponseHasZeroSlope) {
  Eigen::VectorXd x(4), y(4);
  x << -1, 1, -1, 1;
  y << 1, 1, -1, -1;
  const auto fit = ols_fit(with_intercept(x), y);
  EXPECT_NEAR(fit.coefficients(1), 0.0, 1e-14);
}

TEST(Ols, MatchesFrozenReference) {
  const auto fx = load_json(fixture_dir() / "stats" / "ols.json");
  ASSERT_GE(fx["cases"].size(), 10u);
  for (const auto& c : fx["cases"]) {
    const auto fit = ols_fit(to_matrix(c["X"]), to_vector(c["y"]));
    const Eigen::VectorXd beta = to_vector(c["beta"]);
    const Eigen::VectorXd se = to_vector(c["se"]);
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
      EXPECT_NEAR(fit.coefficients(j), beta(j), 1e-10);
      EXPECT_NEAR(fit.standard_errors(j), se(j), 1e-10);
    }
    EXPECT_NEAR(fit.r_squared, c["r_squared"].get<double>(), 1e-10);
  }
}

TEST(Ols, RankDeficiencyNamesColumn) {
  Eigen::MatrixXd x(6, 3);
  x.col(0).setOnes();
  x.col(1) << 1, 2, 3, 4, 5, 6;
  x.col(2) = 2.0 * x.col(1);
  Eigen::VectorXd y(6);
  y << 1, 3, 2, 5, 4, 6;
  try {
    ols_fit(x, y, {"const", "a", "twice_a"});
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    const std::string msg = e.what();
    EXPECT_TRUE(msg.find("'a'") != std::string::npos || msg.find("'twice_a'") != std::string::npos) << msg;
  }
}

TEST(Ols, CiIsBetaPlusMinusWaldHalfWidth) {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd x = with_intercept(random_normal(40, 2, rng));
  const Eigen::VectorXd y = random_normal(40, 1, rng);
  const auto fit = ols_fit(x, y);
  for (Eigen::Index j = 0; j < 3; ++j) {
    EXPECT_NEAR(fit.ci_lower(j), fit.coefficients(j) - 1.96 * fit.standard_errors(j), 1e-4 * fit.standard_errors(j));
    EXPECT_NEAR(fit.ci_upper(j), fit.coefficients(j) + 1.96 * fit.standard_errors(j), 1e-4 * fit.standard_errors(j));
  }
}

TEST(Residualize, OrthogonalToPredictorAndIntercept) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd x = random_normal(50, 1, rng);
    const Eigen::VectorXd y = random_normal(50, 1, rng) + 0.7 * x;
    const Eigen::VectorXd r = residualize(y, x);
    EXPECT_NEAR(r.sum(), 0.0, 1e-10);
    EXPECT_NEAR(r.dot(x), 0.0, 1e-10);
    EXPECT_LT((residualize(r, x) - r).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Residualize, ConstantPredictorThrows) {
  Eigen::VectorXd x = Eigen::VectorXd::Constant(5, 3.0);
  Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(5, 0, 4);
  EXPECT_THROW(residualize(y, x), NumericError);
}

TEST(Vif, OrthonormalPredictorsGiveOne) {
  // Centered, mutually orthogonal columns.
  Eigen::MatrixXd x(4, 2);
  x << 1, 1, -1, 1, 1, -1, -1, -1;
  const auto r = vif(x);
  EXPECT_NEAR(r.vif(0), 1.0, 1e-12);
  EXPECT_NEAR(r.vif(1), 1.0, 1e-12);
}

TEST(Vif, OrthogonalizedRandomDesign) {
  std::mt19937_64 rng(4);
  Eigen::MatrixXd x = random_normal(60, 5, rng);
  x.rowwise() -= x.colwise().mean();
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(60, 5);
  const auto r = vif(q);
  for (Eigen::Index j = 0; j < 5; ++j) EXPECT_NEAR(r.vif(j), 1.0, 1e-9);
}

TEST(Vif, DuplicatedColumnIsInfinite) {
  std::mt19937_64 rng(6);
  Eigen::MatrixXd x = random_normal(20, 3, rng);
  x.col(2) = x.col(0);
  const auto r = vif(x);
  EXPECT_TRUE(r.infinite[0]);
  EXPECT_TRUE(r.infinite[2]);
  EXPECT_TRUE(std::isinf(r.vif(0)));
  EXPECT_FALSE(r.all_below(5.0));
}

TEST(Vif, MatchesFrozenReference) {
  const auto fx = load_json(fixture_dir() / "stats" / "vif.json");
  ASSERT_GE(fx["cases"].size(), 10u);
  for (const auto& c : fx["cases"]) {
    const auto r = vif(to_matrix(c["X"]));
    const Eigen::VectorXd expected = to_vector(c["vif"]);
    for (Eigen::Index j = 0; j < expected.size(); ++j) EXPECT_NEAR(r.vif(j), expected(j), 1e-8);
  }
}

TEST(Glm, GaussianEqualsOlsOnRandomDesigns) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd x = with_intercept(random_normal(35, 3, rng));
    const Eigen::VectorXd y = random_normal(35, 1, rng);
    const auto g = glm_fit(x, y, Family::gaussian);
    const auto o = ols_fit(x, y);
    EXPECT_TRUE(g.converged);
    EXPECT_LT((g.coefficients - o.coefficients).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Glm, GaussianMatchesFrozenReference) {
  const auto fx = load_json(fixture_dir() / "stats" / "glm_gaussian.json");
  ASSERT_GE(fx["cases"].size(), 10u);
  for (const auto& c : fx["cases"]) {
    const auto fit = glm_fit(to_matrix(c["X"]), to_vector(c["y"]), Family::gaussian);
    const Eigen::VectorXd beta = to_vector(c["beta"]);
    const Eigen::VectorXd se = to_vector(c["se"]);
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
      EXPECT_NEAR(fit.coefficients(j), beta(j), 1e-4);
      EXPECT_NEAR(fit.standard_errors(j), se(j), 1e-4);
    }
  }
}

TEST(Glm, NegativeBinomialMatchesFrozenReference) {
  const auto fx = load_json(fixture_dir() / "stats" / "glm_negative_binomial.json");
  ASSERT_GE(fx["cases"].size(), 10u);
  for (const auto& c : fx["cases"]) {
    const auto fit = glm_fit(to_matrix(c["X"]), to_vector(c["y"]), Family::negative_binomial);
    ASSERT_TRUE(fit.converged);
    EXPECT_TRUE(fit.dispersion_converged);
    EXPECT_NEAR(fit.dispersion_alpha, c["alpha"].get<double>(), 1e-4);
    const Eigen::VectorXd beta = to_vector(c["beta"]);
    const Eigen::VectorXd se = to_vector(c["se"]);
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
      EXPECT_NEAR(fit.coefficients(j), beta(j), 1e-4);
      EXPECT_NEAR(fit.standard_errors(j), se(j), 1e-4);
    }
    EXPECT_NEAR(fit.log_likelihood, c["log_likelihood"].get<double>(), 1e-4);
  }
}

TEST(Glm, NegativeBinomialFixedAlphaLoglikNonDecreasing) {
  const auto fx = load_json(fixture_dir() / "stats" / "glm_negative_binomial.json");
  for (const auto& c : fx["cases"]) {
    GlmOptions opt;
    opt.estimate_alpha = false;
    opt.fixed_alpha = c["alpha"].get<double>();
    const auto fit = glm_fit(to_matrix(c["X"]), to_vector(c["y"]), Family::negative_binomial, opt);
    for (std::size_t k = 1; k < fit.loglik_trace.size(); ++k) {
      EXPECT_GE(fit.loglik_trace[k], fit.loglik_trace[k - 1] - 1e-9 * std::abs(fit.loglik_trace[k - 1]));
    }
    EXPECT_LE(fit.iterations, opt.max_iter);
  }
}

TEST(Glm, NegativeBinomialRejectsNonIntegerResponse) {
  Eigen::MatrixXd x = with_intercept(Eigen::VectorXd::LinSpaced(6, 0, 1));
  Eigen::VectorXd y(6);
  y << 1, 2, 3.5, 4, 5, 6;
  EXPECT_THROW(glm_fit(x, y, Family::negative_binomial), DataError);
  y(2) = -1;
  EXPECT_THROW(glm_fit(x, y, Family::negative_binomial), DataError);
}

TEST(Glm, NegativeBinomialRecoversSimulatedParameters) {
  std::mt19937_64 rng(20240601);
  const Eigen::Index n = 2000;
  const double b0 = 0.5, b1 = 0.8, alpha = 0.7;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  std::normal_distribution<double> g;
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = g(rng);
    const double mu = std::exp(b0 + b1 * x(i, 1));
    std::gamma_distribution<double> gamma(1.0 / alpha, alpha * mu);
    std::poisson_distribution<long long> pois(gamma(rng));
    y(i) = static_cast<double>(pois(rng));
  }
  const auto fit = glm_fit(x, y, Family::negative_binomial);
  EXPECT_NEAR(fit.coefficients(0), b0, 0.05);
  EXPECT_NEAR(fit.coefficients(1), b1, 0.05);
  EXPECT_NEAR(fit.dispersion_alpha, alpha, 0.15);
}

TEST(Glm, UnderdispersedCountsSettleAtPoissonEdge) {
  // Equal counts carry no extra-Poisson variance: the profile peaks at the
  // lower alpha bound, which is accepted.
  Eigen::MatrixXd x = with_intercept(Eigen::VectorXd::LinSpaced(20, -1, 1));
  Eigen::VectorXd y = Eigen::VectorXd::Constant(20, 4.0);
  const auto fit = glm_fit(x, y, Family::negative_binomial);
  EXPECT_TRUE(fit.dispersion_converged);
  EXPECT_LT(fit.dispersion_alpha, 1e-3);
  EXPECT_NEAR(fit.coefficients(0), std::log(4.0), 1e-6);
}
