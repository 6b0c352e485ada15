#include <gtest/gtest.h>

#include "nle/analysis.hpp"

using namespace nle;

TEST(Maximal, IndicatorAtThree) {
  TorusGrid g(1, 2048, 8.0);
  auto ind = ScalarField::from_function(g, [](const Vec& x) { return std::abs(x[0]) <= 1.0 ? 1.0 : 0.0; });
  RadiiLadder l = RadiiLadder::dense(3.0, 5.0, g.h());
  EXPECT_NEAR(maximal_at(ind, g.nearest(Vec{3, 0, 0}), l), 0.25, 1e-3);
  // same value through the 1-d prefix-sum path
  EXPECT_NEAR(hl_maximal(ind, l)[g.nearest(Vec{3, 0, 0})], 0.25, 1e-3);
}

TEST(Maximal, DominatesAndConstant) {
  TorusGrid g(2, 32, 4.0);
  std::mt19937_64 rng(3);
  RadiiLadder l = RadiiLadder::geometric(g);
  ScalarField u = random_bandlimited_field(g, rng);
  auto m = hl_maximal(u, l);
  auto s = sharp_function(u, l);
  for (std::size_t i = 0; i < u.size(); ++i) {
    EXPECT_GE(m[i], std::abs(u[i]) - 1e-15);
    EXPECT_LE(s[i], 2 * m[i] + 1e-12);
  }
  ScalarField c(g, std::vector<double>(g.size(), -2.0));
  auto mc = hl_maximal(c, l), sc = sharp_function(c, l);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_NEAR(mc[i], 2.0, 1e-14);
    EXPECT_NEAR(sc[i], 0.0, 1e-14);
  }
}

TEST(Maximal, OneDimensionalPathMatchesGeneric) {
  TorusGrid g(1, 128, 4.0);
  std::mt19937_64 rng(8);
  ScalarField u = random_bandlimited_field(g, rng);
  RadiiLadder l = RadiiLadder::geometric(g);
  auto m = hl_maximal(u, l);
  for (std::size_t i = 0; i < g.size(); i += 7) EXPECT_NEAR(m[i], maximal_at(u, i, l), 1e-13);
}

TEST(Maximal, Sublinear) {
  TorusGrid g(1, 256, 8.0);
  std::mt19937_64 rng(4);
  ScalarField a = random_bandlimited_field(g, rng), b = random_bandlimited_field(g, rng);
  std::vector<double> s(g.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = a[i] + b[i];
  RadiiLadder l = RadiiLadder::geometric(g);
  auto ms = hl_maximal(ScalarField(g, s), l), ma = hl_maximal(a, l), mb = hl_maximal(b, l);
  auto ss = sharp_function(ScalarField(g, s), l), sa = sharp_function(a, l), sb = sharp_function(b, l);
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_LE(ms[i], ma[i] + mb[i] + 1e-12);
    EXPECT_LE(ss[i], sa[i] + sb[i] + 1e-12);
  }
}

TEST(Sharp, SignFunctionAtOrigin) {
  TorusGrid g(1, 256, 4.0);
  auto s = ScalarField::from_function(g, [](const Vec& x) { return x[0] < 0 ? -1.0 : 1.0; });
  // node 128 sits at x = 0 (value +1); balls of radius kh hold k negatives and k+1 positives
  EXPECT_GE(sharp_at(s, g.nearest(Vec{}), RadiiLadder::geometric(g)), 1.0 - 1.0 / 64);
}

TEST(Ladder, Validation) {
  EXPECT_THROW(RadiiLadder::dense(1.0, 0.5, 0.1), DomainError);
  RadiiLadder bad{{1.0, 0.5}};
  EXPECT_THROW(bad.validate(), DomainError);
  TorusGrid g(1, 64, 8.0);
  auto l = RadiiLadder::geometric(g);
  EXPECT_DOUBLE_EQ(l.radii.front(), g.h() / 2);
  EXPECT_LE(l.radii.back(), g.R());
}

TEST(HardyFs, FiniteAndDominating) {
  for (double p : {2.0, 4.0}) {
    auto r = verify_hardy_fs(p, 10, 11);
    EXPECT_EQ(r.trials, 10);
    EXPECT_GE(r.min_hl_ratio, 1.0);
    EXPECT_TRUE(std::isfinite(r.C_hl_obs));
    EXPECT_TRUE(std::isfinite(r.C_fs_obs));
  }
  EXPECT_THROW(verify_hardy_fs(1.0, 1, 1), DomainError);
}

TEST(Dyadic, WeightedNormBound) {
  TorusGrid g(1, 1024, 32.0);
  std::mt19937_64 rng(12);
  double worst = 0;
  for (int t = 0; t < 10; ++t) {
    ScalarField u = random_bandlimited_field(g, rng);
    double w = weighted_l1(u, WeightOmega{1, 0.5}).value;
    double s = dyadic_average_sum(u, 0.5);
    double m = maximal_at(u, g.nearest(Vec{}), RadiiLadder::geometric(g));
    EXPECT_LE(s, m / (1 - std::pow(2.0, -0.5)) + 1e-12);
    worst = std::max(worst, w / s);
  }
  EXPECT_TRUE(std::isfinite(worst));
  EXPECT_LT(worst, 20.0);
}

TEST(MeanOscillation, ZeroRhsAndFiniteRatios) {
  TorusGrid g(1, 256, 16.0);
  SymbolTable t = SymbolTable::fractional(g, 0.8);
  ScalarField z(g);
  auto rows = mean_oscillation_report(t, 0.8, 1.0, z, 2.0, {0.5, 1.0});
  for (const auto& r : rows) EXPECT_EQ(r.lhs, 0.0);
  auto f = ScalarField::from_function(g, [](const Vec& x) { return std::exp(-x[0] * x[0]); });
  for (auto v : {OscVariant::Standard, OscVariant::Interchanged})
    for (const auto& r : mean_oscillation_report(t, 0.8, 1.0, f, 4.0, {0.25, 1.0, 2.0}, v)) {
      EXPECT_GT(r.lhs, 0.0);
      EXPECT_TRUE(std::isfinite(r.ratio));
    }
  EXPECT_THROW(mean_oscillation_report(t, 0.8, 1.0, f, 1.5, {1.0}), DomainError);
  EXPECT_THROW(mean_oscillation_report(t, 0.8, 0.0, f, 2.0, {1.0}), UnsupportedError);
}
