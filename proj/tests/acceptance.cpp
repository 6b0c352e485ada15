// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "nle/nle.hpp"

using namespace nle;

namespace {

constexpr double kSymbolRelTol = 1e-4;
constexpr double kConstantTol = 1e-12;
constexpr double kEllipticSlack = 0.99;
constexpr double kResidualTol = 1e-8;
constexpr double kDualityTol = 1e-8;
constexpr double kMaxPrincipleSlack = 1e-6;
constexpr double kIdentityGap = 1e-3;
constexpr double kVariation = 10.0;
constexpr double kIndicatorTol = 1e-3;
constexpr double kDominationTol = 1e-12;  // relative, prefix-sum rounding
constexpr double kDefectTol = 1e-12;
constexpr double kChiInvariance = 1e-6;

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, const std::function<Outcome()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s %2d %-28s %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Independent Gamma-function form of c(d, sigma).
double gamma_constant(int d, double s) {
  return std::pow(std::numbers::pi, d / 2.0) * std::abs(std::tgamma(-s / 2)) / (std::pow(2.0, s) * std::tgamma((d + s) / 2));
}

std::vector<Vec> lattice_freqs(const TorusGrid& g, int count) {
  std::vector<Vec> xs;
  for (int k = 1; k <= count; ++k) xs.push_back(Vec{k * std::numbers::pi / g.R() * (k % 2 ? 1 : -1), 0, 0});
  return xs;
}

// max / min over the non-stability rows with this id, grouped by params minus lambda
double worst_stability(const EstimateReport& r, const std::string& id) {
  double w = 0;
  for (const auto& row : r.rows)
    if (row.estimate_id == id) w = std::max(w, row.n_obs);
  return w;
}

bool all_rows_pass(const EstimateReport& r) { return r.all_pass() && !r.partial; }

struct Triple {
  KernelSpec k;
  double lambda;
  ScalarField f;
};

}  // namespace

int main() {
  const TorusGrid g1(1, 512, 16.0);

  criterion(1, "symbol_correctness", [&] {
    double worst = 0;
    for (double s : {0.5, 1.0, 1.5}) {
      KernelSpec k = fractional_kernel(1, s);
      for (const Vec& xi : lattice_freqs(g1, 32)) {
        double t = std::pow(std::abs(xi[0]), s);
        worst = std::max(worst, std::abs(symbol_at(k, xi, 1e-10) + t) / t);
      }
    }
    return Outcome{worst < kSymbolRelTol, fmt("max rel err %.3e < %.0e", worst, kSymbolRelTol)};
  });

  criterion(2, "constant_formula", [&] {
    double pi = std::numbers::pi;
    double e1 = std::abs(frac_laplace_constant(1, 1) - pi), e3 = std::abs(frac_laplace_constant(3, 1) - pi * pi);
    double o1 = std::abs(gamma_constant(1, 1) - pi), o3 = std::abs(gamma_constant(3, 1) - pi * pi);
    double w = std::max({e1 / pi, e3 / (pi * pi), o1 / pi, o3 / (pi * pi)});
    return Outcome{w < kConstantTol, fmt("rel err %.2e (lib) / %.2e (Gamma oracle)", std::max(e1 / pi, e3 / (pi * pi)),
                                         std::max(o1 / pi, o3 / (pi * pi)))};
  });

  criterion(3, "symbol_ellipticity", [&] {
    std::mt19937_64 rng(303);
    double worst = kInf;
    auto xs = lattice_freqs(g1, 32);
    for (int t = 0; t < 100; ++t) {
      double s = 0.1 + 1.8 * unit_uniform(rng);
      KernelSpec k = make_random_kernel(1, s, 0.5, 2.0, 1000 + t);
      worst = std::min(worst, verify_symbol_bounds(k, xs).c_lower_obs);
    }
    return Outcome{worst >= kEllipticSlack, fmt("min -Re m / (nu c (2-sigma) |xi|^sigma) = %.4f >= %.2f", worst, kEllipticSlack)};
  });

  // 50 shared (kernel, lambda, f) triples for 4 and 5
  std::vector<Triple> triples;
  {
    std::mt19937_64 rng(404);
    for (int t = 0; t < 50; ++t) {
      double s = 0.1 + 1.8 * unit_uniform(rng);
      double lam = std::pow(10.0, -2 + 4 * unit_uniform(rng));
      triples.push_back({make_random_kernel(1, s, 0.5, 2.0, 2000 + t), lam, random_bandlimited_field(g1, rng)});
    }
  }
  std::vector<SymbolTable> tables;
  for (const auto& tr : triples) tables.push_back(symbol_table(tr.k, g1));

  criterion(4, "solver_residual_duality", [&] {
    std::mt19937_64 rng(405);
    double res = 0, gap = 0;
    for (std::size_t i = 0; i < triples.size(); ++i) {
      res = std::max(res, solve(tables[i], triples[i].lambda, triples[i].f).residual_l2);
      ScalarField h = random_bandlimited_field(g1, rng);
      gap = std::max(gap, duality_gap(tables[i], tables[i].adjoint(), triples[i].lambda, triples[i].f, h));
    }
    return Outcome{res < kResidualTol && gap < kDualityTol, fmt("max residual %.2e, max duality gap %.2e", res, gap)};
  });

  criterion(5, "maximum_principle", [&] {
    double worst = 0;
    for (std::size_t i = 0; i < triples.size(); ++i) {
      auto r = max_principle_check(solve(tables[i], triples[i].lambda, triples[i].f), triples[i].f);
      worst = std::max(worst, r.lhs / r.rhs);
    }
    return Outcome{worst <= 1 + kMaxPrincipleSlack, fmt("max lambda|u|_inf / |f|_inf = %.8f", worst)};
  });

  criterion(6, "l2_identities", [&] {
    TorusGrid g(1, 48, 6.0);
    auto u = ScalarField::from_function(g, [](const Vec& x) { return std::exp(-x[0] * x[0]) * (1 + 0.3 * x[0]); });
    double e = 0, q = 0, o = 0;
    bool ok = true;
    int seed = 0;
    for (double s : {0.5, 1.0, 1.5}) {
      for (const KernelSpec& k : {fractional_kernel(1, s), make_random_kernel(1, s, 0.5, 2.0, 600 + seed++)}) {
        auto rep = identity_suite(k, u);
        ok = ok && all_rows_pass(rep);
        for (const auto& r : rep.rows) {
          if (r.estimate_id == "energy_identity") e = std::max(e, r.n_obs);
          if (r.estimate_id == "square_identity") q = std::max(q, r.n_obs);
          if (r.estimate_id == "even_odd_orthogonality") o = std::max(o, r.n_obs);
        }
      }
    }
    ok = ok && e < kIdentityGap && q < kIdentityGap;
    return Outcome{ok, fmt("energy gap %.2e, quadruple gap %.2e, odd part %.1e", e, q, o)};
  });

  const std::vector<double> ladder{1e-2, 1e-1, 1.0, 10.0, 100.0};
  auto rhs_family = [&](const TorusGrid& g) {
    RhsParams p;
    return std::vector<NamedField>{{"gaussian", make_rhs(g, "gaussian", p, 1)},
                                   {"dipole", make_rhs(g, "dipole", p, 2)},
                                   {"bandlimited", make_rhs(g, "bandlimited", p, 3)}};
  };

  criterion(7, "l2_lambda_uniformity", [&] {
    EstimateSuiteOptions o;
    o.lambdas = ladder;
    o.ps = {2.0};
    o.drift = false;
    bool ok = true;
    auto sweep = [&](const std::function<double(int)>& sigma_of, double* res) {
      double worst = 0;
      for (int t = 0; t < 10; ++t) {
        KernelSpec k = make_random_kernel(1, sigma_of(t), 0.5, 2.0, 700 + t);
        auto rep = estimate_suite(k, symbol_table(k, g1), rhs_family(g1), o);
        ok = ok && all_rows_pass(rep);
        worst = std::max(worst, worst_stability(rep, "lp_lambda_stability"));
        *res = std::max(*res, worst_stability(rep, "solver_residual"));
      }
      return worst;
    };
    double res = 0;
    const double sig[3] = {0.5, 1.0, 1.5};
    double worst = sweep([&](int t) { return sig[t % 3]; }, &res);
    bool gated = ok;
    // informational: sigma drawn uniformly; the constant degrades near sigma = 1 without cancellation
    std::mt19937_64 rng(707);
    std::vector<double> drawn;
    for (int t = 0; t < 10; ++t) drawn.push_back(0.2 + 1.6 * unit_uniform(rng));
    double info = sweep([&](int t) { return drawn[t]; }, &res);
    return Outcome{gated && worst < kVariation,
                   fmt("sigma in {0.5,1,1.5}: variation x%.3f < x%.0f (uniform sigma draw: x%.3f)", worst, kVariation, info) +
                       fmt(", residual %.1e", res)};
  });

  criterion(8, "lp_lambda_uniformity", [&] {
    EstimateSuiteOptions o;
    o.lambdas = ladder;
    o.ps = {1.5, 2.0, 3.0, 4.0};
    double worst = 0, dworst = 0;
    bool ok = true;
    int seed = 800;
    for (double s : {0.5, 1.0, 1.5}) {
      KernelSpec k = make_random_kernel(1, s, 0.5, 2.0, seed++);
      auto rep = estimate_suite(k, symbol_table(k, g1), rhs_family(g1), o);
      ok = ok && all_rows_pass(rep);
      worst = std::max(worst, worst_stability(rep, "lp_lambda_stability"));
      dworst = std::max(dworst, worst_stability(rep, "drift_lambda_stability"));
    }
    ok = ok && worst < kVariation;
    return Outcome{ok, fmt("p in {1.5,2,3,4,3/2,3}: variation x%.3f, with drift x%.3f", worst, dworst)};
  });

  criterion(9, "holder_lambda_independence", [&] {
    const std::vector<double> lams{1e-3, 1e-2, 1e-1, 1.0, 10.0};
    double worst = 0, info = 0;
    bool ok = true;
    int seed = 900;
    for (double s : {0.5, 1.0, 1.5}) {
      KernelSpec k = make_random_kernel(1, s, 0.5, 2.0, seed++);
      if (s == 1.0 && max_shell_moment(k.a()) > kDefectTol) return Outcome{false, "sigma=1 kernel not cancellation-enforced"};
      SymbolTable t = symbol_table(k, g1);
      NamedField f{"dipole", make_rhs(g1, "dipole", RhsParams{}, 0)};
      auto rep = holder_suite(k, t, lams, f);
      ok = ok && all_rows_pass(rep);
      worst = std::max(worst, worst_stability(rep, "holder_lambda_stability"));
      // informational: ratio at lambda = 100, outside the gated window
      auto far = holder_suite(k, t, {100.0}, f);
      info = std::max(info, far.rows.front().n_obs);
    }
    return Outcome{ok && worst < kVariation,
                   fmt("lambda 1e-3..10 variation x%.3f < x%.0f (ratio at lambda=100: %.3e)", worst, kVariation, info)};
  });

  criterion(10, "maximal_machinery", [&] {
    bool dom = true;
    std::mt19937_64 rng(1010);
    for (int t = 0; t < 20; ++t) {
      TorusGrid g = t % 2 ? TorusGrid(1, 256, 16.0) : TorusGrid(2, 32, 4.0);
      ScalarField u = random_bandlimited_field(g, rng);
      auto m = hl_maximal(u, RadiiLadder::geometric(g));
      for (std::size_t i = 0; i < u.size(); ++i) dom = dom && m[i] >= std::abs(u[i]) * (1 - kDominationTol);
    }
    TorusGrid g(1, 2048, 8.0);
    auto ind = ScalarField::from_function(g, [](const Vec& x) { return std::abs(x[0]) <= 1.0 ? 1.0 : 0.0; });
    double m3 = maximal_at(ind, g.nearest(Vec{3, 0, 0}), RadiiLadder::dense(3.0, 5.0, g.h()));
    auto h2 = verify_hardy_fs(2.0, 20, 11), h4 = verify_hardy_fs(4.0, 20, 12);
    bool fin = std::isfinite(h2.C_hl_obs) && std::isfinite(h2.C_fs_obs) && std::isfinite(h4.C_hl_obs) &&
               std::isfinite(h4.C_fs_obs);
    bool ok = dom && std::abs(m3 - 0.25) < kIndicatorTol && fin && h2.min_hl_ratio >= 1 && h4.min_hl_ratio >= 1;
    return Outcome{ok, fmt("M1(3) = %.6f; HL p=2 %.3f, FS p=2 %.3f", m3, h2.C_hl_obs, h2.C_fs_obs) +
                           fmt("; HL p=4 %.3f, FS p=4 %.3f", h4.C_hl_obs, h4.C_fs_obs) + (dom ? "; Mg>=|g|" : "; Mg<|g|!")};
  });

  criterion(11, "mean_oscillation", [&] {
    MeanOscOptions o;
    o.lambdas = {0.1, 1.0, 10.0, 100.0};
    o.kappas = {2.0, 4.0, 8.0};
    double std_w = 0, int_w = 0;
    bool ok = true;
    int seed = 1100;
    for (double s : {0.5, 1.0, 1.5}) {
      KernelSpec k = make_random_kernel(1, s, 0.5, 2.0, seed++);
      auto rep = mean_oscillation_suite(k, symbol_table(k, g1), {"gaussian", make_rhs(g1, "gaussian", RhsParams{}, 0)}, o);
      ok = ok && all_rows_pass(rep);
      std_w = std::max(std_w, worst_stability(rep, "mean_oscillation"));
      int_w = std::max(int_w, worst_stability(rep, "mean_oscillation_interchanged"));
    }
    return Outcome{ok, fmt("max ratio %.3f / %.3f (interchanged) <= %.1f", std_w, int_w, kMeanOscConstant)};
  });

  criterion(12, "local_estimates", [&] {
    bool ok = true;
    std::string d;
    int seed = 1200;
    for (double s : {0.5, 1.0, 1.5}) {
      KernelSpec k = make_random_kernel(1, s, 0.5, 2.0, seed++);
      auto rep = local_estimate_check(k, symbol_table(k, g1), rhs_family(g1));
      ok = ok && all_rows_pass(rep) && !rep.rows.empty();
      double w = 0;
      for (const auto& r : rep.rows)
        if (r.estimate_id != "local_eps_monotone") w = std::max(w, r.n_obs);
      d += fmt("sigma=%.1f N<=%.3f; ", s, w);
      if (s == 1.0) {
        std::string ns;
        for (const auto& r : rep.rows)
          if (r.estimate_id == "local_estimate_eq1") ns += fmt("%.3f ", r.n_obs);
        d += "N(eps 0.5,0.1,0.02) = " + ns;
      }
    }
    return Outcome{ok, d};
  });

  criterion(13, "generator_check", [&] {
    GeneratorOptions o;
    o.eps = 1e-2;
    o.n_paths = 100000;
    bool ok = true;
    double zmax = 0;
    std::string d;
    std::vector<KernelSpec> ks{fractional_kernel(1, 1.5), make_random_kernel(1, 0.7, 0.5, 2.0, 1301),
                               make_random_kernel(1, 1.3, 0.5, 2.0, 1302)};
    for (const auto& k : ks) {
      auto rep = generator_suite(k, o);
      ok = ok && all_rows_pass(rep);
      for (const auto& r : rep.rows)
        if (r.estimate_id == "generator") zmax = std::max(zmax, r.n_obs);
        else if (r.estimate_id == "truncation_bias_halving") d += fmt("bias ratio %.3f; ", r.n_obs);
    }
    return Outcome{ok, d + fmt("max gap / (3 se + bias) = %.3f", zmax)};
  });

  criterion(14, "sigma1_cancellation", [&] {
    double defect = 0, chi = 0;
    for (int d = 1; d <= 2; ++d)
      for (std::uint64_t seed = 1; seed <= 5; ++seed) defect = std::max(defect, max_shell_moment(make_random_kernel(d, 1.0, 0.5, 2.0, 1400 + seed).a()));
    KernelSpec k = make_random_kernel(1, 1.0, 0.5, 2.0, 1410);
    for (const Vec& xi : lattice_freqs(g1, 16)) {
      cplx ref = symbol_at(k.with_chi_radius(1.0), xi, 1e-10);
      for (double r : {0.5, 2.0}) chi = std::max(chi, std::abs(symbol_at(k.with_chi_radius(r), xi, 1e-10) - ref) / std::abs(ref));
    }
    return Outcome{defect < kDefectTol && chi < kChiInvariance, fmt("max shell defect %.2e, chi-radius change %.2e", defect, chi)};
  });

  std::printf("%d of 14 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
