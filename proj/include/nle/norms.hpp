#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "operator.hpp"

namespace nle {

// omega(x) = 1 / (1 + |x|^{d+sigma})
struct WeightOmega {
  int d;
  double sigma;
  double operator()(const Vec& x) const { return 1.0 / (1.0 + std::pow(norm(x), d + sigma)); }
  // int_{R^d} omega
  double total_mass() const {
    double p = d + sigma;
    return sphere_area(d) * std::numbers::pi / (p * std::sin(std::numbers::pi * d / p));
  }
};

struct Ball {
  Vec center;
  double radius;
};

struct NormValue {
  double value;
  double tail_bound;  // bound on the part of the norm outside the box (0 if none)
};

inline constexpr double kInfP = std::numeric_limits<double>::infinity();

namespace detail {

inline double lp_raw(const ScalarField& u, double p) {
  if (std::isinf(p)) {
    double m = 0;
    for (double v : u.values()) m = std::max(m, std::abs(v));
    return m;
  }
  double s = 0;
  for (double v : u.values()) s += std::pow(std::abs(v), p);
  return std::pow(s * u.grid().cell_volume(), 1.0 / p);
}

// Indices of nodes with |x - c| <= r (closed ball, relative slack 1e-12).
inline std::vector<std::size_t> ball_nodes(const TorusGrid& g, const Ball& b) {
  std::vector<std::size_t> out;
  const int d = g.d(), n = g.n();
  const double h = g.h(), R = g.R();
  double r2 = b.radius * b.radius * (1 + 1e-12) + 1e-24;
  int lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
  for (int a = 0; a < d; ++a) {
    lo[a] = std::max(0, static_cast<int>(std::floor((b.center[a] - b.radius + R) / h)) - 1);
    hi[a] = std::min(n - 1, static_cast<int>(std::ceil((b.center[a] + b.radius + R) / h)) + 1);
  }
  std::array<int, 3> j{lo[0], lo[1], lo[2]};
  while (true) {
    double dist2 = 0;
    for (int a = 0; a < d; ++a) {
      double dx = -R + j[a] * h - b.center[a];
      dist2 += dx * dx;
    }
    if (dist2 <= r2) out.push_back(g.ravel(j));
    int a = d - 1;
    while (a >= 0) {
      if (++j[a] <= hi[a]) break;
      j[a] = lo[a];
      --a;
    }
    if (a < 0) break;
  }
  return out;
}

inline void require_inside(const TorusGrid& g, const Ball& b, const char* who) {
  for (int a = 0; a < g.d(); ++a)
    if (b.center[a] - b.radius < -g.R() - 1e-12 || b.center[a] + b.radius > g.R() + 1e-12)
      throw DomainError(std::string(who) + ": ball must lie inside the box");
}

}  // namespace detail

// (h^d sum |u|^p)^{1/p}; p = infinity gives max |u|.
inline double lp_norm(const ScalarField& u, double p) {
  if (!(p > 1.0)) throw DomainError("lp_norm: p must exceed 1 (use weighted_l1 for p = 1)");
  return detail::lp_raw(u, p);
}

// L_p norm restricted to the nodes of a ball.
inline double lp_norm_ball(const ScalarField& u, double p, const Ball& b) {
  if (!(p >= 1.0)) throw DomainError("lp_norm_ball: p must be >= 1");
  auto idx = detail::ball_nodes(u.grid(), b);
  if (std::isinf(p)) {
    double m = 0;
    for (auto i : idx) m = std::max(m, std::abs(u[i]));
    return m;
  }
  double s = 0;
  for (auto i : idx) s += std::pow(std::abs(u[i]), p);
  return std::pow(s * u.grid().cell_volume(), 1.0 / p);
}

// homogeneous: ||(-Delta)^{s/2} u||_p ; otherwise ||(1-Delta)^{s/2} u||_p
inline double sobolev_seminorm(const ScalarField& u, double s, double p, bool homogeneous) {
  if (!(s > 0)) throw DomainError("sobolev_seminorm: s must be positive");
  if (!(p > 1.0)) throw DomainError("sobolev_seminorm: p must exceed 1");
  return lp_norm(homogeneous ? riesz_apply(u, s) : bessel_apply(u, s), p);
}

// max |u(x) - u(y)| / |x - y|^alpha over node pairs in the ball with |x - y| >= 2h.
inline double holder_seminorm(const ScalarField& u, double alpha, const Ball& b) {
  if (!(alpha > 0 && alpha < 1)) throw DomainError("holder_seminorm: alpha must lie in (0,1)");
  const TorusGrid& g = u.grid();
  detail::require_inside(g, b, "holder_seminorm");
  auto idx = detail::ball_nodes(g, b);
  double floor = 2 * g.h() * (1 - 1e-12);
  std::vector<Vec> xs;
  for (auto i : idx) xs.push_back(g.node(i));
  double best = 0;
  bool any = false;
  for (std::size_t p = 0; p < idx.size(); ++p)
    for (std::size_t q = p + 1; q < idx.size(); ++q) {
      double dist = norm(xs[p] - xs[q]);
      if (dist < floor) continue;
      any = true;
      best = std::max(best, std::abs(u[idx[p]] - u[idx[q]]) / std::pow(dist, alpha));
    }
  if (!any) throw DomainError("holder_seminorm: ball has fewer than two admissible nodes");
  return best;
}

// h^d sum |u| omega, plus a bound for the region outside the box where a
// ZeroOutside field is taken as 0: boundary max |u| times int_{|x|>R} omega.
inline NormValue weighted_lp(const ScalarField& u, const WeightOmega& w, double p) {
  if (!(p >= 1.0)) throw DomainError("weighted_lp: p must be >= 1");
  const TorusGrid& g = u.grid();
  double s = 0;
  for (std::size_t i = 0; i < u.size(); ++i) s += std::pow(std::abs(u[i]), p) * w(g.node(i));
  s *= g.cell_volume();
  double outside = sphere_area(g.d()) * std::pow(g.R(), -w.sigma) / w.sigma;
  double tail = std::pow(u.boundary_max(), p) * outside;
  return {std::pow(s, 1.0 / p), std::pow(s + tail, 1.0 / p) - std::pow(s, 1.0 / p)};
}

inline NormValue weighted_l1(const ScalarField& u, const WeightOmega& w) { return weighted_lp(u, w, 1.0); }

enum class OscMode { SupInf, Mean };

inline double oscillation(const ScalarField& u, const Ball& b, OscMode mode) {
  detail::require_inside(u.grid(), b, "oscillation");
  auto idx = detail::ball_nodes(u.grid(), b);
  if (idx.empty()) throw DomainError("oscillation: empty ball");
  if (mode == OscMode::SupInf) {
    double lo = u[idx[0]], hi = lo;
    for (auto i : idx) {
      lo = std::min(lo, u[i]);
      hi = std::max(hi, u[i]);
    }
    return hi - lo;
  }
  double mean = 0;
  for (auto i : idx) mean += u[i];
  mean /= idx.size();
  double s = 0;
  for (auto i : idx) s += std::abs(u[i] - mean);
  return s / idx.size();
}

}  // namespace nle
