#pragma once

// Energy identities on a periodic 1-d grid, checked against brute-force
// nested sums over grid shifts:
//   -2 int u L u        = int int (u(x+y) - u(x))^2 K(y)
//    4 int |L_e u|^2    = int int int (u(x+y+z) - u(x+y) - u(x+z) + u(x))^2 K_e(y) K_e(z)
//   int (L_e u)(L_o u)  = 0

#include <cmath>
#include <string>
#include <vector>

#include "../operator.hpp"
#include "report.hpp"

namespace nle {

inline constexpr int kIdentityMaxN = 64;

namespace detail {

// Weights F (one per residue mod n) and tail mass T with
//   int_R D(y) K(y) dy ~ sum_r F[r] D(r h) + T mean(D)
// for a period-2R function D that is even and vanishes to second order at 0.
// E = D / y^2 is interpolated by 6-point Lagrange on the shifts |m| <= M n;
// E(0) comes from the even extrapolation (15 E1 - 6 E2 + E3) / 10.
struct FoldedWeights {
  std::vector<double> F;
  double tail;
};

inline FoldedWeights folded_weights(const Density& a, double sigma, double h, int n, int M) {
  const int N = M * n;
  const double beta = 1.0 / (2.0 - sigma);
  std::vector<double> W(2 * N + 1, 0.0);  // weights on E_m, index m + N
  const GaussRule& g16 = gauss_legendre(16);
  const GaussRule& g10 = gauss_legendre(10);
  const PolarMesh& mesh = a.mesh();

  auto lagrange = [](const double* nodes, double y, double* L) {
    for (int j = 0; j < 6; ++j) {
      double p = 1;
      for (int k = 0; k < 6; ++k)
        if (k != j) p *= (y - nodes[k]) / (nodes[j] - nodes[k]);
      L[j] = p;
    }
  };

  for (int m = -N; m < N; ++m) {
    int s0 = std::clamp(m - 2, -N, N - 5);
    double nodes[6];
    for (int j = 0; j < 6; ++j) nodes[j] = (s0 + j) * h;
    double y0 = m * h, y1 = (m + 1) * h;
    int cell = m >= 0 ? 0 : 1;
    double r0 = std::abs(m >= 0 ? y0 : y1), r1 = std::abs(m >= 0 ? y1 : y0);
    double sgn = m >= 0 ? 1.0 : -1.0;
    bool near_origin = (m == 0 || m == -1);
    double L[6];
    a.for_shells(r0, r1, [&](int shell, double lo, double hi) {
      double av = a.at(shell, cell);
      if (near_origin) {
        // r = t^beta makes r^{1-sigma} dr = beta dt
        double t0 = std::pow(lo, 1.0 / beta), t1 = std::pow(hi, 1.0 / beta);
        double c = 0.5 * (t1 - t0), mid = 0.5 * (t1 + t0);
        for (std::size_t q = 0; q < g16.x.size(); ++q) {
          double r = std::pow(mid + c * g16.x[q], beta);
          lagrange(nodes, sgn * r, L);
          double w = g16.w[q] * c * beta * av;
          for (int j = 0; j < 6; ++j) W[s0 + j + N] += w * L[j];
        }
      } else {
        double c = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
        for (std::size_t q = 0; q < g10.x.size(); ++q) {
          double r = mid + c * g10.x[q];
          lagrange(nodes, sgn * r, L);
          double w = g10.w[q] * c * av * std::pow(r, 1.0 - sigma);
          for (int j = 0; j < 6; ++j) W[s0 + j + N] += w * L[j];
        }
      }
    });
  }

  std::vector<double> F(n, 0.0);
  auto fold = [&](int m, double w) { F[((m % n) + n) % n] += w; };
  for (int m = -N; m <= N; ++m) {
    if (m == 0) continue;
    double y = m * h;
    fold(m, W[m + N] / (y * y));
  }
  const double ex[3] = {1.5, -0.6, 0.1};
  for (int k = 1; k <= 3; ++k) {
    double y = k * h;
    fold(k, 0.5 * W[N] * ex[k - 1] / (y * y));
    fold(-k, 0.5 * W[N] * ex[k - 1] / (y * y));
  }
  double Y = N * h;
  double T = 0;
  for (int i = 0; i < mesh.n_shells(); ++i)
    for (int c = 0; c < 2; ++c) {
      double lo = std::max(Y, mesh.shell_lo(i)), hi = mesh.shell_hi(i);
      if (hi > lo) T += a.at(i, c) * radial_power_integral(lo, hi, -1.0 - sigma);
    }
  return {std::move(F), T};
}

inline void require_identity_grid(const ScalarField& u) {
  const TorusGrid& g = u.grid();
  if (g.d() != 1) throw UnsupportedError("identity_suite: only d = 1 grids are brute-forced");
  if (g.n() > kIdentityMaxN)
    throw BudgetError("identity_suite: n = " + std::to_string(g.n()) + " exceeds the brute-force limit " +
                      std::to_string(kIdentityMaxN));
}

}  // namespace detail

struct IdentityOptions {
  int windows = 64;      // shifts |y| <= windows * 2R are integrated explicitly
  double gate = 1e-3;    // relative gap for the two energy identities
  double ortho_gate = 1e-8;
  double symbol_tol = 1e-10;
};

// u is treated as periodic on the torus. Rows carry lhs (spectral side),
// rhs (nested sums) and N_obs = relative gap.
inline EstimateReport identity_suite(const KernelSpec& spec, const ScalarField& u, const IdentityOptions& opt = {}) {
  detail::require_identity_grid(u);
  if (spec.d() != 1) throw SizeMismatch("identity_suite: kernel and grid dimensions differ");
  const TorusGrid& g = u.grid();
  const int n = g.n();
  const double h = g.h(), sigma = spec.sigma();
  ScalarField up = u.with_extension(Extension::Periodic);
  auto at = [&](int j) { return up[static_cast<std::size_t>(((j % n) + n) % n)]; };

  KernelParts parts = decompose(spec, DecompositionMode::EvenOdd);
  const KernelSpec& even = parts.main;
  SymbolTable tk = symbol_table(spec, g, opt.symbol_tol);
  SymbolTable te = symbol_table(even, g, opt.symbol_tol);
  SymbolTable to = symbol_table(parts.residual, sigma, spec.chi(), g, opt.symbol_tol);

  EstimateReport rep;
  std::string params = "n=" + std::to_string(n) + ",R=" + std::to_string(g.R()) + ",sigma=" + std::to_string(sigma);
  auto gap_row = [&](const std::string& id, double lhs, double rhs, double gate) {
    double gap = std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300);
    rep.rows.push_back({id, params, lhs, rhs, gap, gap < gate});
  };

  // first identity
  {
    double lhs = -2.0 * inner_product(up, apply_spectral(tk, up));
    auto fw = detail::folded_weights(spec.a(), sigma, h, n, opt.windows);
    std::vector<double> D(n, 0.0);
    double mean = 0;
    for (int r = 0; r < n; ++r) {
      double s = 0;
      for (int j = 0; j < n; ++j) {
        double v = at(j + r) - at(j);
        s += v * v;
      }
      D[r] = h * s;
      mean += D[r] / n;
    }
    double rhs = fw.tail * mean;
    for (int r = 0; r < n; ++r) rhs += fw.F[r] * D[r];
    gap_row("energy_identity", lhs, rhs, opt.gate);
  }

  // second identity, for the symmetric part
  ScalarField le = apply_spectral(te, up);
  {
    double lhs = 4.0 * inner_product(le, le);
    auto fw = detail::folded_weights(even.a(), sigma, h, n, opt.windows);
    std::vector<double> Q(static_cast<std::size_t>(n) * n, 0.0);
    for (int r = 0; r < n; ++r)
      for (int s = 0; s < n; ++s) {
        double acc = 0;
        for (int j = 0; j < n; ++j) {
          double v = at(j + r + s) - at(j + r) - at(j + s) + at(j);
          acc += v * v;
        }
        Q[r * n + s] = h * acc;
      }
    std::vector<double> row_mean(n, 0.0), col_mean(n, 0.0);
    double all = 0;
    for (int r = 0; r < n; ++r)
      for (int s = 0; s < n; ++s) {
        double q = Q[r * n + s];
        row_mean[r] += q / n;
        col_mean[s] += q / n;
        all += q / (double(n) * n);
      }
    double rhs = fw.tail * fw.tail * all;
    for (int r = 0; r < n; ++r) {
      rhs += fw.tail * fw.F[r] * (row_mean[r] + col_mean[r]);
      for (int s = 0; s < n; ++s) rhs += fw.F[r] * fw.F[s] * Q[r * n + s];
    }
    gap_row("square_identity", lhs, rhs, opt.gate);
  }

  // orthogonality of the even and odd parts
  {
    ScalarField lo = apply_spectral(to, up);
    double ip = inner_product(le, lo);
    double scale = std::sqrt(inner_product(le, le) * inner_product(lo, lo));
    double gap = scale > 0 ? std::abs(ip) / scale : std::abs(ip);
    rep.rows.push_back({"even_odd_orthogonality", params, ip, 0.0, gap, gap < opt.ortho_gate});
  }
  return rep;
}

}  // namespace nle
