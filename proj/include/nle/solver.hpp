#pragma once

// (L - lambda) u = f and (L + b.grad - lambda) u = f by division in Fourier space.

#include <cmath>
#include <vector>

#include "operator.hpp"

namespace nle {

struct SolveResult {
  ScalarField u;
  double residual_l2;  // ||(L - lambda) u - f||_2 / ||f||_2 (0 when f = 0)
  double lambda;
};

namespace detail {

inline double l2(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline SolveResult solve_impl(const SymbolTable& table, const Vec& b, double lambda, const ScalarField& f) {
  if (!(lambda > 0.0)) throw UnsupportedError("solve: lambda must be positive");
  if (!(table.grid == f.grid())) throw SizeMismatch("solve: table and rhs grids differ");
  const TorusGrid& g = f.grid();
  auto symbol = [&](std::size_t i) {
    cplx m = table.values[i] + cplx(0.0, dot(b, g.frequency(i)));
    if (g.self_conjugate(i)) m = m.real();
    return m - lambda;
  };
  Spectrum s = transform(f);
  for (std::size_t i = 0; i < s.c.size(); ++i) s.c[i] /= symbol(i);
  ScalarField u = inverse_transform(s, f.extension());
  // residual from a fresh forward transform of u
  Spectrum su = transform(u);
  for (std::size_t i = 0; i < su.c.size(); ++i) su.c[i] *= symbol(i);
  ScalarField lu = inverse_transform(su, f.extension());
  std::vector<double> r(f.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = lu[i] - f[i];
  double nf = l2(f.values());
  double res = nf > 0 ? l2(r) / nf : l2(r);
  return {std::move(u), res, lambda};
}

}  // namespace detail

inline SolveResult solve(const SymbolTable& table, double lambda, const ScalarField& f) {
  return detail::solve_impl(table, Vec{}, lambda, f);
}

inline SolveResult solve_with_drift(const SymbolTable& table, const Vec& b, double lambda, const ScalarField& f) {
  return detail::solve_impl(table, b, lambda, f);
}

struct MaxPrincipleReport {
  double lhs;  // lambda ||u||_inf
  double rhs;  // ||f||_inf
  bool pass;
};

inline MaxPrincipleReport max_principle_check(const SolveResult& r, const ScalarField& f) {
  double um = 0, fm = 0;
  for (double v : r.u.values()) um = std::max(um, std::abs(v));
  for (double v : f.values()) fm = std::max(fm, std::abs(v));
  MaxPrincipleReport rep{r.lambda * um, fm, false};
  rep.pass = rep.lhs <= rep.rhs * (1.0 + 1e-6);
  return rep;
}

// <g, solve_L(f)> - <solve_{L*}(g), f>, relative to ||f|| ||g|| / lambda.
inline double duality_gap(const SymbolTable& table, const SymbolTable& adjoint_table, double lambda,
                          const ScalarField& f, const ScalarField& g) {
  SolveResult a = solve(table, lambda, f);
  SolveResult b = solve(adjoint_table, lambda, g);
  double lhs = inner_product(g, a.u), rhs = inner_product(b.u, f);
  double scale = std::sqrt(inner_product(f, f) * inner_product(g, g)) / lambda;
  return scale > 0 ? std::abs(lhs - rhs) / scale : std::abs(lhs - rhs);
}

}  // namespace nle
