#pragma once

// Discrete Hardy-Littlewood maximal and sharp functions over centred closed
// balls clipped to the box, and the mean-oscillation experiments.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "norms.hpp"
#include "solver.hpp"

namespace nle {

struct RadiiLadder {
  std::vector<double> radii;

  // h/2 (the single node), then h, 2h, 4h, ... up to the box half-width.
  static RadiiLadder geometric(const TorusGrid& g) {
    RadiiLadder l;
    l.radii.push_back(0.5 * g.h());
    for (double r = g.h(); r <= g.R() * (1 + 1e-12); r *= 2) l.radii.push_back(r);
    return l;
  }
  static RadiiLadder dense(double r0, double r1, double step) {
    if (!(r0 > 0 && r1 >= r0 && step > 0)) throw DomainError("RadiiLadder::dense: bad range");
    RadiiLadder l;
    for (int k = 0; r0 + k * step <= r1 * (1 + 1e-12); ++k) l.radii.push_back(r0 + k * step);
    return l;
  }
  void validate() const {
    if (radii.empty()) throw DomainError("RadiiLadder: empty");
    for (std::size_t i = 0; i < radii.size(); ++i)
      if (!(radii[i] > 0) || (i > 0 && !(radii[i] > radii[i - 1]))) throw DomainError("RadiiLadder: radii must increase");
  }
};

namespace detail {

// Integer offsets o with |o| h <= r.
inline std::vector<std::array<int, 3>> ball_offsets(const TorusGrid& g, double r) {
  std::vector<std::array<int, 3>> out;
  int d = g.d();
  int k = static_cast<int>(std::floor(r / g.h() * (1 + 1e-12)));
  double lim = (r / g.h()) * (r / g.h()) * (1 + 1e-12);
  std::array<int, 3> o{0, 0, 0};
  int lo[3] = {-k, d > 1 ? -k : 0, d > 2 ? -k : 0}, hi[3] = {k, d > 1 ? k : 0, d > 2 ? k : 0};
  for (o[0] = lo[0]; o[0] <= hi[0]; ++o[0])
    for (o[1] = lo[1]; o[1] <= hi[1]; ++o[1])
      for (o[2] = lo[2]; o[2] <= hi[2]; ++o[2])
        if (double(o[0]) * o[0] + double(o[1]) * o[1] + double(o[2]) * o[2] <= lim) out.push_back(o);
  return out;
}

// Box-clipped ball average of v (or of |v - c| when centred) at node idx.
template <class F>
double ball_mean(const TorusGrid& g, std::size_t idx, const std::vector<std::array<int, 3>>& offs, F&& value) {
  auto j = g.unravel(idx);
  int n = g.n(), d = g.d();
  double s = 0;
  std::size_t cnt = 0;
  for (const auto& o : offs) {
    std::array<int, 3> q{j[0] + o[0], j[1] + o[1], j[2] + o[2]};
    bool in = true;
    for (int a = 0; a < d; ++a) in = in && q[a] >= 0 && q[a] < n;
    if (!in) continue;
    s += value(g.ravel(q));
    ++cnt;
  }
  return s / cnt;
}

inline double maximal_at_impl(const ScalarField& g, std::size_t idx,
                              const std::vector<std::vector<std::array<int, 3>>>& offs) {
  double best = 0;
  for (const auto& o : offs)
    best = std::max(best, ball_mean(g.grid(), idx, o, [&](std::size_t i) { return std::abs(g[i]); }));
  return best;
}

inline double sharp_at_impl(const ScalarField& g, std::size_t idx,
                            const std::vector<std::vector<std::array<int, 3>>>& offs) {
  double best = 0;
  for (const auto& o : offs) {
    double mean = ball_mean(g.grid(), idx, o, [&](std::size_t i) { return g[i]; });
    best = std::max(best, ball_mean(g.grid(), idx, o, [&](std::size_t i) { return std::abs(g[i] - mean); }));
  }
  return best;
}

inline std::vector<std::vector<std::array<int, 3>>> ladder_offsets(const TorusGrid& g, const RadiiLadder& l) {
  l.validate();
  std::vector<std::vector<std::array<int, 3>>> offs;
  for (double r : l.radii) offs.push_back(ball_offsets(g, r));
  return offs;
}

}  // namespace detail

inline double maximal_at(const ScalarField& g, std::size_t idx, const RadiiLadder& l) {
  return detail::maximal_at_impl(g, idx, detail::ladder_offsets(g.grid(), l));
}

inline double sharp_at(const ScalarField& g, std::size_t idx, const RadiiLadder& l) {
  return detail::sharp_at_impl(g, idx, detail::ladder_offsets(g.grid(), l));
}

inline ScalarField hl_maximal(const ScalarField& g, const RadiiLadder& l) {
  const TorusGrid& grid = g.grid();
  std::vector<double> out(g.size());
  if (grid.d() == 1) {
    // prefix sums of |g|
    l.validate();
    int n = grid.n();
    std::vector<double> pre(n + 1, 0.0);
    for (int i = 0; i < n; ++i) pre[i + 1] = pre[i] + std::abs(g[i]);
    for (int i = 0; i < n; ++i) {
      double best = 0;
      for (double r : l.radii) {
        int k = static_cast<int>(std::floor(r / grid.h() * (1 + 1e-12)));
        int a = std::max(0, i - k), b = std::min(n - 1, i + k);
        best = std::max(best, (pre[b + 1] - pre[a]) / (b - a + 1));
      }
      out[i] = best;
    }
  } else {
    auto offs = detail::ladder_offsets(grid, l);
    parallel_for(g.size(), [&](std::size_t i) { out[i] = detail::maximal_at_impl(g, i, offs); });
  }
  return ScalarField(grid, std::move(out), g.extension());
}

inline ScalarField sharp_function(const ScalarField& g, const RadiiLadder& l) {
  auto offs = detail::ladder_offsets(g.grid(), l);
  std::vector<double> out(g.size());
  parallel_for(g.size(), [&](std::size_t i) { out[i] = detail::sharp_at_impl(g, i, offs); });
  return ScalarField(g.grid(), std::move(out), g.extension());
}

struct HardyFsReport {
  double C_hl_obs;      // max ||Mg||_p / ||g||_p
  double C_fs_obs;      // max ||g||_p / ||g#||_p
  double min_hl_ratio;  // >= 1 by pointwise domination
  int trials;
};

// Random band-limited fields times a Gaussian envelope on a 1-d grid.
inline ScalarField random_bandlimited_field(const TorusGrid& g, std::mt19937_64& rng, int modes = 12,
                                            double envelope = 4.0) {
  std::normal_distribution<double> gauss;
  std::vector<double> a(modes), b(modes);
  for (int k = 0; k < modes; ++k) {
    a[k] = gauss(rng) / (1 + k);
    b[k] = gauss(rng) / (1 + k);
  }
  double shift = gauss(rng);
  double base = std::numbers::pi / g.R();
  return ScalarField::from_function(g, [&](const Vec& x) {
    double s = shift;
    double r2 = dot(x, x);
    for (int k = 0; k < modes; ++k) {
      double ph = (k + 1) * base * 2 * (x[0] + 0.5 * x[1] + 0.25 * x[2]);
      s += a[k] * std::cos(ph) + b[k] * std::sin(ph);
    }
    return s * std::exp(-r2 / (2 * envelope * envelope));
  });
}

inline HardyFsReport verify_hardy_fs(double p, int n_trials, std::uint64_t seed, const TorusGrid& grid = TorusGrid(1, 256, 16.0)) {
  if (!(p > 1.0) || std::isinf(p)) throw DomainError("verify_hardy_fs: p must lie in (1, inf)");
  std::mt19937_64 rng(seed);
  RadiiLadder l = RadiiLadder::geometric(grid);
  HardyFsReport rep{0.0, 0.0, kInf, 0};
  for (int t = 0; t < n_trials; ++t) {
    ScalarField g = random_bandlimited_field(grid, rng);
    double ng = lp_norm(g, p);
    if (ng == 0) continue;
    double nm = lp_norm(hl_maximal(g, l), p);
    double ns = lp_norm(sharp_function(g, l), p);
    rep.C_hl_obs = std::max(rep.C_hl_obs, nm / ng);
    rep.min_hl_ratio = std::min(rep.min_hl_ratio, nm / ng);
    if (ns > 0) rep.C_fs_obs = std::max(rep.C_fs_obs, ng / ns);
    ++rep.trials;
  }
  return rep;
}

// sum_k 2^{-k sigma} (|u|)_{B_{2^k}(0)} over balls inside the box.
inline double dyadic_average_sum(const ScalarField& u, double sigma) {
  const TorusGrid& g = u.grid();
  std::size_t c = g.nearest(Vec{});
  double s = 0;
  int k = 0;
  for (double r = 1.0; r <= g.R() * (1 + 1e-12); r *= 2, ++k) {
    auto offs = detail::ball_offsets(g, r);
    s += std::pow(2.0, -k * sigma) * detail::ball_mean(g, c, offs, [&](std::size_t i) { return std::abs(u[i]); });
  }
  return s;
}

enum class OscVariant { Standard, Interchanged };

struct MeanOscRow {
  double r, kappa, lambda, lhs, rhs_osc_term, rhs_f_term, ratio;
};

// Standard: (L - lambda) u = f, derivative D = (-Delta)^{sigma/2} u.
// Interchanged: (-(-Delta)^{sigma/2} - lambda) u = f, derivative D = L u.
// lhs = lambda (|u - (u)_B|)_B + (|D - (D)_B|)_B on B = B_r(0);
// rhs = kappa^{-alpha} (lambda Mu(0) + M D(0)) + kappa^{d/2} M(f^2)(0)^{1/2}, alpha = min(1,sigma)/2.
inline std::vector<MeanOscRow> mean_oscillation_report(const SymbolTable& table, double sigma, double lambda,
                                                       const ScalarField& f, double kappa,
                                                       const std::vector<double>& r_list,
                                                       OscVariant variant = OscVariant::Standard) {
  if (!(lambda > 0)) throw UnsupportedError("mean_oscillation_report: lambda must be positive");
  if (!(kappa >= 2)) throw DomainError("mean_oscillation_report: kappa must be >= 2");
  const TorusGrid& g = f.grid();
  ScalarField u(g), D(g);
  if (variant == OscVariant::Standard) {
    u = solve(table, lambda, f).u;
    D = riesz_apply(u, sigma);
  } else {
    u = solve(SymbolTable::fractional(g, sigma), lambda, f).u;
    D = apply_spectral(table, u);
  }
  std::vector<double> f2(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) f2[i] = f[i] * f[i];
  ScalarField F2(g, std::move(f2), f.extension());
  std::size_t origin = g.nearest(Vec{});
  RadiiLadder l = RadiiLadder::geometric(g);
  double alpha = std::min(1.0, sigma) / 2;
  double Mu = maximal_at(u, origin, l), MD = maximal_at(D, origin, l), Mf2 = maximal_at(F2, origin, l);
  double osc_term = std::pow(kappa, -alpha) * (lambda * Mu + MD);
  double f_term = std::pow(kappa, 0.5 * g.d()) * std::sqrt(Mf2);
  std::vector<MeanOscRow> rows;
  for (double r : r_list) {
    Ball b{Vec{}, r};
    double lhs = lambda * oscillation(u, b, OscMode::Mean) + oscillation(D, b, OscMode::Mean);
    double rhs = osc_term + f_term;
    rows.push_back({r, kappa, lambda, lhs, osc_term, f_term, rhs > 0 ? lhs / rhs : 0.0});
  }
  return rows;
}

}  // namespace nle
