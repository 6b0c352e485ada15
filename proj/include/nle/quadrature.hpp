#pragma once

// Gauss-Legendre rules and an adaptive Gauss-Kronrod (7/15) integrator.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <utility>
#include <vector>

#include "error.hpp"

namespace nle {

struct GaussRule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

namespace detail {

inline GaussRule build_gauss_legendre(int n) {
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = 0;
      for (int k = 1; k <= n; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1, p1 = 0;
    for (int k = 1; k <= n; ++k) {
      double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    double w = 2.0 / ((1.0 - z * z) * dp * dp);
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = r.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.x[n / 2] = 0.0;
  return r;
}

}  // namespace detail

constexpr int kMaxGaussOrder = 64;

// Cached rule of order n (1 <= n <= 64).
inline const GaussRule& gauss_legendre(int n) {
  static const std::vector<GaussRule> table = [] {
    std::vector<GaussRule> t(kMaxGaussOrder + 1);
    for (int k = 1; k <= kMaxGaussOrder; ++k) t[k] = detail::build_gauss_legendre(k);
    return t;
  }();
  if (n < 1 || n > kMaxGaussOrder) throw DomainError("gauss_legendre: order out of range");
  return table[n];
}

// Integrate f over [a, b] with an n-point rule.
template <class F>
auto gauss_integrate(F&& f, double a, double b, int n) {
  const GaussRule& g = gauss_legendre(n);
  double c = 0.5 * (a + b), hw = 0.5 * (b - a);
  decltype(f(c)) s{};
  for (int i = 0; i < n; ++i) s += g.w[i] * f(c + hw * g.x[i]);
  return s * hw;
}

struct AdaptiveResult {
  std::complex<double> value;
  double error;
  int evaluations;
};

namespace detail {

// Kronrod 15 nodes (non-negative half) and weights; Gauss 7 weights on the odd nodes.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
std::pair<std::complex<double>, double> gk15(F& f, double a, double b) {
  double c = 0.5 * (a + b), hw = 0.5 * (b - a);
  std::complex<double> fv[15];
  fv[7] = f(c);
  std::complex<double> rk = fv[7] * kWgk[7], rg = fv[7] * kWg[3];
  for (int j = 0; j < 7; ++j) {
    double dx = hw * kXgk[j];
    fv[j] = f(c - dx);
    fv[14 - j] = f(c + dx);
    std::complex<double> s = fv[j] + fv[14 - j];
    rk += kWgk[j] * s;
    if (j % 2 == 1) rg += kWg[j / 2] * s;
  }
  // QUADPACK error heuristic
  std::complex<double> mean = 0.5 * rk;
  double asc = kWgk[7] * std::abs(fv[7] - mean);
  for (int j = 0; j < 7; ++j) asc += kWgk[j] * (std::abs(fv[j] - mean) + std::abs(fv[14 - j] - mean));
  asc *= std::abs(hw);
  double err = std::abs((rk - rg) * hw);
  if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  return {rk * hw, err};
}

}  // namespace detail

// Globally adaptive bisection: split the interval with the largest error
// estimate until the summed estimate is below abs_tol or the evaluation budget
// is spent. The caller decides what to do with result.error > abs_tol.
template <class F>
AdaptiveResult adaptive_integrate(F&& f, double a, double b, double abs_tol, int max_evals = 20000) {
  struct Piece {
    double a, b;
    std::complex<double> v;
    double e;
  };
  std::vector<Piece> pieces;
  auto [v0, e0] = detail::gk15(f, a, b);
  pieces.push_back({a, b, v0, e0});
  int evals = 15;
  double total_err = e0;
  while (total_err > abs_tol && evals + 30 <= max_evals) {
    std::size_t worst = 0;
    for (std::size_t i = 1; i < pieces.size(); ++i)
      if (pieces[i].e > pieces[worst].e) worst = i;
    Piece p = pieces[worst];
    double m = 0.5 * (p.a + p.b);
    if (!(m > p.a && m < p.b)) break;
    auto [vl, el] = detail::gk15(f, p.a, m);
    auto [vr, er] = detail::gk15(f, m, p.b);
    evals += 30;
    pieces[worst] = {p.a, m, vl, el};
    pieces.push_back({m, p.b, vr, er});
    total_err = 0;
    for (auto& q : pieces) total_err += q.e;
  }
  std::complex<double> v{};
  for (auto& q : pieces) v += q.v;
  return {v, total_err, evals};
}

}  // namespace nle
