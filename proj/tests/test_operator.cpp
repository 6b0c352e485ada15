#include <gtest/gtest.h>

#include <numbers>

#include "nle/operator.hpp"

using namespace nle;

namespace {

double gauss(const Vec& x) { return std::exp(-dot(x, x)); }

SmoothFunction gaussian_closure() {
  SmoothFunction u;
  u.value = gauss;
  u.gradient = [](const Vec& x) { return (-2.0 * gauss(x)) * x; };
  u.hessian = [](const Vec& x) {
    Mat3 h{};
    double g = gauss(x);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) h[a][b] = g * (4 * x[a] * x[b] - (a == b ? 2.0 : 0.0));
    return h;
  };
  return u;
}

// -(-Delta)^{s/2} e^{-|x|^2} at 0 in d dimensions:
// -(2 pi)^{-d} int |xi|^s pi^{d/2} e^{-|xi|^2/4} = -2^s Gamma((d+s)/2) / Gamma(d/2)
double frac_gaussian_at_zero(int d, double s) { return -std::pow(2.0, s) * std::tgamma(0.5 * (d + s)) / std::tgamma(0.5 * d); }

}  // namespace

TEST(Transform, GaussianAgainstContinuousTransform) {
  TorusGrid g(1, 128, 10.0);
  auto u = ScalarField::from_function(g, gauss);
  Spectrum s = transform(u);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double xi = g.frequency(i)[0];
    EXPECT_NEAR(s.c[i].real(), std::sqrt(std::numbers::pi) * std::exp(-xi * xi / 4), 1e-12);
    EXPECT_NEAR(s.c[i].imag(), 0.0, 1e-12);
  }
}

TEST(Transform, RoundTrip) {
  for (int d = 1; d <= 3; ++d) {
    TorusGrid g(d, d == 3 ? 8 : 16, 3.0);
    auto u = ScalarField::from_function(g, [](const Vec& x) { return std::sin(x[0]) + x[1] * std::exp(-x[2] * x[2]); });
    auto v = inverse_transform(transform(u));
    for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(u[i], v[i], 1e-13);
  }
}

TEST(Spectral, ModesAreEigenfunctions) {
  TorusGrid g(1, 64, std::numbers::pi);
  auto c = ScalarField::from_function(g, [](const Vec& x) { return std::cos(3 * x[0]); }, Extension::Periodic);
  auto r = riesz_apply(c, 0.7);
  auto b = bessel_apply(c, 0.7);
  auto dx = spectral_derivative(c, 0);
  auto dxx = spectral_second_derivative(c, 0, 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double x = g.node(i)[0];
    EXPECT_NEAR(r[i], std::pow(3.0, 0.7) * std::cos(3 * x), 1e-12);
    EXPECT_NEAR(b[i], std::pow(10.0, 0.35) * std::cos(3 * x), 1e-12);
    EXPECT_NEAR(dx[i], -3 * std::sin(3 * x), 1e-12);
    EXPECT_NEAR(dxx[i], -9 * std::cos(3 * x), 1e-11);
  }
  EXPECT_THROW(riesz_apply(c, 0.0), DomainError);
}

TEST(Spectral, NyquistOddDerivativeVanishes) {
  TorusGrid g(1, 16, 1.0);
  auto u = ScalarField::from_function(g, [&](const Vec& x) { return std::cos(8 * std::numbers::pi * x[0]); });
  auto dx = spectral_derivative(u, 0);
  for (double v : dx.values()) EXPECT_NEAR(v, 0.0, 1e-12);
}

namespace {

// max change of the spectral fractional Laplacian of a Gaussian on |x| <= 4
double refinement_change(double s, int n1, double R1, int n2, double R2) {
  TorusGrid a(1, n1, R1), b(1, n2, R2);
  auto la = apply_spectral(SymbolTable::fractional(a, s), ScalarField::from_function(a, gauss));
  auto lb = apply_spectral(SymbolTable::fractional(b, s), ScalarField::from_function(b, gauss));
  double e = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a.node(i)[0]) <= 4) e = std::max(e, std::abs(la[i] - lb[b.nearest(a.node(i))]));
  return e;
}

}  // namespace

// Refining h alone is at round-off; growing R shrinks the periodic-image
// tail like R^{-1-sigma} since Lu decays like |x|^{-d-sigma}.
TEST(Spectral, AliasingAndTruncation) {
  for (double s : {0.5, 1.0, 1.5}) {
    EXPECT_LT(refinement_change(s, 512, 16.0, 1024, 16.0), 1e-12);
    double t1 = refinement_change(s, 512, 16.0, 1024, 32.0), t2 = refinement_change(s, 1024, 32.0, 2048, 64.0);
    EXPECT_NEAR(t1 / t2, std::pow(2.0, 1 + s), 0.1 * std::pow(2.0, 1 + s)) << s;
  }
}

TEST(SymbolTable, MatchesPointEvaluationAndIsHermitian) {
  KernelSpec k = make_random_kernel(1, 1.2, 0.5, 2.0, 5);
  TorusGrid g(1, 32, 4.0);
  SymbolTable t = symbol_table(k, g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    cplx m = symbol_at(k, g.frequency(i));
    if (g.self_conjugate(i)) m = m.real();  // Nyquist node keeps Re m
    EXPECT_NEAR(std::abs(t.values[i] - m), 0.0, 1e-8 * std::max(1.0, std::abs(m)));
    if (!g.self_conjugate(i)) {
      EXPECT_EQ(t.values[g.negated(i)], std::conj(t.values[i]));
    }
  }
  EXPECT_EQ(t.values[0], cplx(0.0));
}

TEST(SymbolTable, FractionalApplyOnMode) {
  KernelSpec k = fractional_kernel(2, 0.8);
  TorusGrid g(2, 16, std::numbers::pi);
  SymbolTable t = symbol_table(k, g);
  auto u = ScalarField::from_function(g, [](const Vec& x) { return std::cos(2 * x[0] + x[1]); }, Extension::Periodic);
  auto lu = apply_spectral(t, u);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(lu[i], -std::pow(5.0, 0.4) * u[i], 1e-7);
  EXPECT_THROW(apply_spectral(t, ScalarField(TorusGrid(2, 8, 1.0))), SizeMismatch);
}

TEST(Direct, ClosureGaussianAgainstClosedForm) {
  for (int d = 1; d <= 2; ++d)
    for (double s : {0.5, 1.0, 1.5}) {
      KernelSpec k = fractional_kernel(d, s);
      DirectResult r = apply_direct(k, gaussian_closure(), Vec{});
      double ref = frac_gaussian_at_zero(d, s);
      EXPECT_NEAR(r.value, ref, 2e-5 * std::abs(ref)) << d << ' ' << s;
    }
}

TEST(Direct, SpectralAgreementOnPeriodicField) {
  TorusGrid g(1, 1024, 16.0);
  for (double s : {0.5, 1.0}) {
    KernelSpec k = make_random_kernel(1, s, 0.5, 2.0, 31);
    auto u = ScalarField::from_function(g, gauss, Extension::Periodic);
    auto lu = apply_spectral(symbol_table(k, g), u);
    for (double x : {0.0, 0.5, -1.25}) {
      std::size_t i = g.nearest(Vec{x, 0, 0});
      double direct = apply_direct(k, u, g.node(i));
      EXPECT_NEAR(direct, lu[i], 2e-4 * std::max(1.0, std::abs(lu[i]))) << s << ' ' << x;
    }
  }
}

TEST(Direct, RejectsPointsNearZeroOutsideBoundary) {
  TorusGrid g(1, 64, 4.0);
  auto u = ScalarField::from_function(g, gauss);
  EXPECT_THROW(apply_direct(fractional_kernel(1, 0.5), u, Vec{3.95, 0, 0}), DomainError);
}

TEST(Spectral, RieszAlgebra) {
  TorusGrid g(1, 128, 8.0);
  auto u = ScalarField::from_function(g, [](const Vec& x) { return std::exp(-x[0] * x[0]) * (2 + x[0]); });
  auto a = riesz_apply(riesz_apply(u, 0.4), 0.7), b = riesz_apply(u, 1.1);
  auto l = apply_spectral(SymbolTable::fractional(g, 1.1), u);
  double scale = 0;
  for (double v : b.values()) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(a[i], b[i], 1e-10 * scale);
    EXPECT_NEAR(l[i], -b[i], 1e-12 * scale);
  }
}

TEST(Direct, OffSupportIsPlainIntegral) {
  // u = (1 - x^2)^4 on [-1, 1]; at x = 3 only u(x + y) K(y) contributes
  double s = 0.5;
  KernelSpec k = fractional_kernel(1, s);
  SmoothFunction u;
  u.value = [](const Vec& x) { return std::abs(x[0]) < 1 ? std::pow(1 - x[0] * x[0], 4) : 0.0; };
  u.gradient = [](const Vec& x) {
    return Vec{std::abs(x[0]) < 1 ? -8 * x[0] * std::pow(1 - x[0] * x[0], 3) : 0.0, 0, 0};
  };
  u.hessian = [](const Vec&) { return Mat3{}; };
  u.support_radius = 1.0;
  double a = 1.0 / frac_laplace_constant(1, s), oracle = 0;
  for (int p = 0; p < 32; ++p)
    oracle += gauss_integrate([&](double z) { return std::pow(1 - z * z, 4) * a / std::pow(3 - z, 1 + s); },
                              -1 + p / 16.0, -1 + (p + 1) / 16.0, 16);
  EXPECT_NEAR(apply_direct(k, u, Vec{3, 0, 0}).value, oracle, 1e-6 * oracle);
}
