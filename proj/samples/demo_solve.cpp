// Solve (L - lambda) u = f for a random sigma = 1.5 kernel on the default 1-d
// grid and print the estimate quantities for a few lambdas.

#include <cstdio>

#include "nle/nle.hpp"

using namespace nle;

int main() {
  TorusGrid g = TorusGrid::default_for(1);
  KernelSpec k = make_random_kernel(1, 1.5, 0.5, 2.0, 42);
  SymbolTable t = symbol_table(k, g);
  ScalarField f = ScalarField::from_function(g, [](const Vec& x) { return std::exp(-2 * x[0] * x[0]); });

  std::printf("%8s %12s %12s %12s %10s\n", "lambda", "||u||_2", "[u]_H^s", "residual", "N_obs");
  for (double lam : {0.01, 1.0, 100.0}) {
    SolveResult r = solve(t, lam, f);
    double n = estimate_lhs(r.u, k.sigma(), lam, 2.0) / lp_norm(f, 2.0);
    std::printf("%8g %12.5e %12.5e %12.3e %10.4f\n", lam, lp_norm(r.u, 2.0), sobolev_seminorm(r.u, 1.5, 2.0, true),
                r.residual_l2, n);
  }

  // direct quadrature at the origin against the spectral value
  ScalarField u = solve(t, 1.0, f).u.with_extension(Extension::Periodic);
  double direct = apply_direct(k, u, Vec{});
  double spectral = apply_spectral(t, u)[g.nearest(Vec{})];
  std::printf("Lu(0): direct %.8f spectral %.8f\n", direct, spectral);
}
