#include <gtest/gtest.h>

#include "nle/process.hpp"

using namespace nle;

TEST(Process, JumpRateClosedForm) {
  double s = 0.7, eps = 0.05;
  KernelSpec k = fractional_kernel(1, s);
  PathEnsemble e = simulate_paths(k, eps, 0.01, Vec{}, 10, 1);
  EXPECT_NEAR(e.jump_rate, 2.0 / frac_laplace_constant(1, s) * std::pow(eps, -s) / s, 1e-10 * e.jump_rate);
}

TEST(Process, ReproducibleFromSeed) {
  KernelSpec k = make_random_kernel(2, 1.2, 0.5, 2.0, 3, 6);
  auto a = simulate_paths(k, 0.1, 0.1, Vec{}, 500, 42);
  auto b = simulate_paths(k, 0.1, 0.1, Vec{}, 500, 42);
  auto c = simulate_paths(k, 0.1, 0.1, Vec{}, 500, 43);
  for (std::size_t i = 0; i < 500; ++i) EXPECT_EQ(a.terminal[i], b.terminal[i]);
  bool differ = false;
  for (std::size_t i = 0; i < 500; ++i) differ = differ || a.terminal[i] != c.terminal[i];
  EXPECT_TRUE(differ);
  EXPECT_NE(path_seed(1, 0), path_seed(1, 1));
}

TEST(Process, Errors) {
  KernelSpec k = fractional_kernel(1, 1.5);
  EXPECT_THROW(simulate_paths(k, 0.0, 1.0, Vec{}, 10, 1), DomainError);
  EXPECT_THROW(simulate_paths(k, 1e-6, 1.0, Vec{}, 10, 1), BudgetError);
}

TEST(Process, JumpRadiusLaw) {
  for (double s : {0.5, 1.5}) {
    KernelSpec k = make_random_kernel(1, s, 0.5, 2.0, 4);
    auto e = simulate_paths(k, 0.02, 0.05, Vec{}, 20000, 9);
    auto ks = jump_radius_ks(e, k);
    EXPECT_TRUE(ks.pass) << ks.statistic << " vs " << ks.threshold;
  }
}

TEST(Process, GeneratorCheckFractional) {
  KernelSpec k = fractional_kernel(1, 0.5);
  auto e = simulate_paths(k, 1e-2, 0.05, Vec{0.3, 0, 0}, 100000, 7);
  auto g = generator_check_cosine(e, k, Vec{1, 0, 0});
  EXPECT_TRUE(g.pass) << g.mc_estimate << " vs " << g.analytic_Lu << " z " << g.z_score;
  EXPECT_NEAR(g.analytic_Lu, -std::cos(0.3), 1e-8);
}

TEST(Process, TruncationBiasShrinks) {
  KernelSpec k = make_random_kernel(1, 1.5, 0.5, 2.0, 10);
  TestFunction u = cosine_test_function(Vec{1, 0, 0});
  double b1 = std::abs(small_jump_bias(k, u, Vec{0.3, 0, 0}, 0.02));
  double b2 = std::abs(small_jump_bias(k, u, Vec{0.3, 0, 0}, 0.01));
  EXPECT_LT(b2, b1);
  // second-order Taylor estimate: -cos(0.3)/2 * int_{|y|<eps} y^2 K
  double ref = -0.5 * std::cos(0.3) * trace(k.a().radial_second(0.0, 0.01, 1.0 - 1.5));
  EXPECT_NEAR(small_jump_bias(k, u, Vec{0.3, 0, 0}, 0.01), ref, 1e-3 * std::abs(ref));
}

TEST(Process, EmptyAndSymmetricEnsembles) {
  KernelSpec k = fractional_kernel(1, 0.5);
  auto e = simulate_paths(k, 0.05, 0.1, Vec{1, 0, 0}, 0, 3);
  EXPECT_EQ(e.terminal.size(), 0u);
  // the law has no mean for sigma < 1; symmetry shows as a median at x0
  auto f = simulate_paths(k, 0.05, 0.1, Vec{1, 0, 0}, 20000, 3);
  double above = 0, moved = 0;
  for (std::size_t i = 0; i < f.terminal.size(); ++i) {
    if (f.jump_count[i] == 0) continue;
    moved += 1;
    above += f.terminal[i][0] > 1.0 ? 1 : 0;
  }
  EXPECT_EQ(norm(f.drift), 0.0);
  EXPECT_LT(std::abs(above / moved - 0.5), 3 * 0.5 / std::sqrt(moved));
}
