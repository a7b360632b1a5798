#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "emi/econ/linalg.hpp"
#include "emi/econ/ols.hpp"
#include "oracles.hpp"

using namespace emi;
using namespace emi::econ;

namespace {

Matrix random_design(std::mt19937_64& rng, int n, int k) {
  std::normal_distribution<double> nd;
  Matrix X(n, k);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    for (int j = 1; j < k; ++j) X(i, j) = nd(rng);
  }
  return X;
}

RegressionSpec spec(const std::string& y, std::vector<std::string> xs, bool country, bool year) {
  RegressionSpec s;
  s.id = "m";
  s.outcome = y;
  s.predictors = std::move(xs);
  s.fixed_effects = {country, year};
  return s;
}

}  // namespace

TEST(QrLeastSquares, AgreesWithNormalEquations) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 100; ++t) {
    const int n = 20 + static_cast<int>(rng() % 80);
    const int k = 2 + static_cast<int>(rng() % 6);
    const auto X = random_design(rng, n, k);
    Vector y(n);
    for (int i = 0; i < n; ++i) y(i) = nd(rng);
    const auto fit = qr_least_squares(X, y);
    const auto beta = oracle::normal_equations(X, y);
    ASSERT_EQ(fit.rank(), static_cast<std::size_t>(k));
    EXPECT_LT((fit.coef - beta).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(fit.rss, oracle::rss(X, y, beta), 1e-9);
    // Residuals are orthogonal to the design.
    EXPECT_LT((X.transpose() * fit.residuals).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(QrLeastSquares, FlagsAliasedColumnsInOrder) {
  std::mt19937_64 rng(2);
  auto X = random_design(rng, 30, 3);
  Matrix Xa(30, 4);
  Xa << X, X.col(1) * 2.0 - X.col(2);
  Vector y = X.col(1) + Vector::Constant(30, 0.5);
  const auto fit = qr_least_squares(Xa, y);
  EXPECT_EQ(fit.rank(), 3u);
  EXPECT_TRUE(fit.aliased[3]);
  EXPECT_TRUE(std::isnan(fit.coef(3)));
  EXPECT_NEAR(fit.coef(1), 1.0, 1e-10);
}

TEST(OlsFe, ExactLineWithoutFixedEffects) {
  std::vector<panel::PanelRow> rows(5);
  for (int i = 0; i < 5; ++i) {
    rows[i].country = "XA";
    rows[i].year = 2000 + i;
    rows[i].set("x", i);
    rows[i].set("y", 1.0 + 2.0 * i + (i % 2 ? 0.1 : -0.1));
  }
  const auto r = ols_fe(rows, spec("y", {"x"}, false, false));
  EXPECT_EQ(r.n_obs, 5u);
  EXPECT_EQ(r.df_resid, 3u);
  const auto beta = oracle::normal_equations(
      (Matrix(5, 2) << 1, 0, 1, 1, 1, 2, 1, 3, 1, 4).finished(),
      (Vector(5) << 0.9, 3.1, 4.9, 7.1, 8.9).finished());
  EXPECT_NEAR(r.coef("x").estimate, beta(1), 1e-12);
  EXPECT_NEAR(r.coef("(Intercept)").estimate, beta(0), 1e-12);
  EXPECT_GT(r.r2, 0.99);
  EXPECT_LT(r.coef("x").p, 1e-4);
  EXPECT_LT(r.coef("x").ci_low, r.coef("x").estimate);
  EXPECT_NEAR(r.f_stat, std::pow(r.coef("x").t, 2), 1e-6);
}

TEST(OlsFe, TwoWayDummiesMatchWithinEstimator) {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const auto p = oracle::make_panel(seed, 6, 9, 0.7, 0.4);
    const auto r = ols_fe(p.rows, spec("y", {"x"}, true, true));
    EXPECT_NEAR(r.coef("x").estimate, oracle::within_slope(p.x, p.y, p.unit, p.period), 1e-10);
    EXPECT_EQ(r.n_fixed_effects, 5u + 8u);
    EXPECT_EQ(r.df_resid, 54u - 2u - 13u);
  }
}

TEST(OlsFe, ListwiseDeletionAndRequiredFields) {
  auto p = oracle::make_panel(9, 3, 5, 1.0, 0.2);
  p.rows[0].set("y", std::nullopt);
  p.rows[7].set("x", std::nullopt);
  auto s = spec("y", {"x"}, false, false);
  EXPECT_EQ(estimation_sample(p.rows, s).size(), 13u);
  p.rows[2].set("z", std::nullopt);
  for (std::size_t i = 3; i < p.rows.size(); ++i) p.rows[i].set("z", 1.0);
  s.require_nonmissing = {"z"};
  EXPECT_EQ(estimation_sample(p.rows, s).size(), 11u);
}

TEST(OlsFe, Errors) {
  const auto p = oracle::make_panel(3, 3, 4, 1.0, 0.2);
  auto rows = p.rows;
  for (auto& r : rows) r.set("dup", *r.get("x") * 3.0);
  try {
    (void)ols_fe(rows, spec("y", {"x", "dup"}, false, false));
    FAIL();
  } catch (const RankDeficientError& e) {
    ASSERT_EQ(e.columns().size(), 1u);
    EXPECT_EQ(e.columns()[0], "dup");
  }
  for (auto& r : rows) r.set("flat", 2.0);
  EXPECT_THROW((void)ols_fe(rows, spec("flat", {"x"}, false, false)), ZeroVarianceOutcome);
  EXPECT_THROW(spec("y", {"y"}, false, false).validate(), std::invalid_argument);
}

TEST(OlsFe, DesignLayout) {
  const auto p = oracle::make_panel(3, 3, 4, 1.0, 0.2);
  const auto s = spec("y", {"x"}, true, true);
  const auto d = build_design(p.rows, s, estimation_sample(p.rows, s));
  ASSERT_EQ(d.columns.size(), 1u + 1u + 2u + 3u);
  EXPECT_EQ(d.columns[0], "(Intercept)");
  EXPECT_EQ(d.columns[1], "x");
  EXPECT_EQ(d.X.rows(), 12);
  for (int i = 0; i < d.X.rows(); ++i) EXPECT_EQ(d.X(i, 0), 1.0);
}
