#pragma once

// Estimate experiments. Every row records lhs, rhs and N_obs = lhs / rhs;
// the stability rows gate max/min of N_obs over a lambda sweep.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "../analysis.hpp"
#include "../process.hpp"
#include "identity.hpp"
#include "report.hpp"

namespace nle {

inline constexpr double kStabilityFactor = 10.0;
inline constexpr double kResidualGate = 1e-8;
inline constexpr double kMeanOscConstant = 1.0;

namespace detail {

inline std::string fmt_params(std::initializer_list<std::pair<const char*, double>> kv, const std::string& extra = "") {
  std::ostringstream os;
  os.precision(6);
  bool first = true;
  for (const auto& [k, v] : kv) {
    os << (first ? "" : ";") << k << '=' << v;
    first = false;
  }
  if (!extra.empty()) os << (first ? "" : ";") << extra;
  return os.str();
}

inline bool all_zero(const ScalarField& f) {
  return std::all_of(f.values().begin(), f.values().end(), [](double v) { return v == 0.0; });
}

inline double safe_ratio(double a, double b) { return b > 0 ? a / b : (a == 0 ? 0.0 : std::numeric_limits<double>::infinity()); }

// max/min over a sweep; a sweep of zeros is stable
inline EstimateRow stability_row(const std::string& id, const std::string& params, const std::vector<double>& v) {
  double mx = 0, mn = std::numeric_limits<double>::infinity();
  for (double x : v) {
    mx = std::max(mx, x);
    mn = std::min(mn, x);
  }
  if (v.empty() || mx == 0) return {id, params, 0.0, 0.0, 1.0, true};
  double s = mn > 0 ? mx / mn : std::numeric_limits<double>::infinity();
  return {id, params, mx, mn, s, std::isfinite(s) && s < kStabilityFactor};
}

}  // namespace detail

struct NamedField {
  std::string name;
  ScalarField f;
};

inline double dual_exponent(double p) { return p / (p - 1.0); }

// Sweep-level N_obs = (||u||_{H^sigma_p} + sqrt(lam) ||u||_{H^{sigma/2}_p} + lam ||u||_p) / ||f||_p.
inline double estimate_lhs(const ScalarField& u, double sigma, double lambda, double p) {
  return sobolev_seminorm(u, sigma, p, true) + std::sqrt(lambda) * sobolev_seminorm(u, sigma / 2, p, true) +
         lambda * lp_norm(u, p);
}

struct EstimateSuiteOptions {
  std::vector<double> lambdas{1e-2, 1e-1, 1.0, 10.0, 100.0};
  std::vector<double> ps{2.0};
  bool duals = true;
  bool drift = true;
};

inline EstimateReport estimate_suite(const KernelSpec& spec, const SymbolTable& table, const std::vector<NamedField>& fs,
                                     const EstimateSuiteOptions& opt) {
  EstimateReport rep;
  const double sigma = spec.sigma();
  std::vector<double> ps;
  for (double p : opt.ps) {
    if (!(p > 1.0) || std::isinf(p)) throw DomainError("estimate_suite: p must lie in (1, inf)");
    ps.push_back(p);
    if (opt.duals && std::abs(p - 2.0) > 1e-12) ps.push_back(dual_exponent(p));
  }
  std::sort(ps.begin(), ps.end());
  ps.erase(std::unique(ps.begin(), ps.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }), ps.end());

  bool use_drift = opt.drift && sigma != 1.0;
  Vec b = use_drift ? drift_vector(spec) : Vec{};

  for (const auto& nf : fs) {
    if (detail::all_zero(nf.f)) continue;
    std::vector<SolveResult> sols, dsols;
    for (double lam : opt.lambdas) {
      sols.push_back(solve(table, lam, nf.f));
      const auto& s = sols.back();
      rep.rows.push_back({"solver_residual", detail::fmt_params({{"lambda", lam}}, "f=" + nf.name), s.residual_l2,
                          kResidualGate, s.residual_l2, s.residual_l2 < kResidualGate});
      if (use_drift) dsols.push_back(solve_with_drift(table, b, lam, nf.f));
    }
    for (double p : ps) {
      double nf_p = lp_norm(nf.f, p);
      std::vector<double> nobs, dobs;
      for (std::size_t k = 0; k < opt.lambdas.size(); ++k) {
        double lam = opt.lambdas[k];
        std::string prm = detail::fmt_params({{"p", p}, {"lambda", lam}}, "f=" + nf.name);
        double lhs = estimate_lhs(sols[k].u, sigma, lam, p);
        double n = detail::safe_ratio(lhs, nf_p);
        nobs.push_back(n);
        rep.rows.push_back({"lp_estimate", prm, lhs, nf_p, n, std::isfinite(n)});
        double hs = sobolev_seminorm(sols[k].u, sigma, p, true);
        double lu = lp_norm(apply_spectral(table, sols[k].u), p);
        double c = detail::safe_ratio(lu, hs);
        rep.rows.push_back({"continuity", prm, lu, hs, c, std::isfinite(c)});
        if (use_drift) {
          double dl = estimate_lhs(dsols[k].u, sigma, lam, p);
          double dn = detail::safe_ratio(dl, nf_p);
          dobs.push_back(dn);
          rep.rows.push_back({"drift_estimate", prm, dl, nf_p, dn, std::isfinite(dn)});
        }
      }
      std::string prm = detail::fmt_params({{"p", p}}, "f=" + nf.name);
      rep.rows.push_back(detail::stability_row("lp_lambda_stability", prm, nobs));
      if (use_drift) rep.rows.push_back(detail::stability_row("drift_lambda_stability", prm, dobs));
    }
  }
  return rep;
}

// Per lambda: [u]_{C^alpha(B_1/2)} / (||u||_{L_1(omega)} + osc_{B_1} f), alpha = min(1,sigma)/2.
// The osc |f| reading is reported in the params; the gate uses osc f.
inline EstimateReport holder_suite(const KernelSpec& spec, const SymbolTable& table, const std::vector<double>& lambdas,
                                   const NamedField& nf) {
  EstimateReport rep;
  const double sigma = spec.sigma(), alpha = std::min(1.0, sigma) / 2;
  WeightOmega w{spec.d(), sigma};
  Ball b_half{Vec{}, 0.5}, b_one{Vec{}, 1.0};
  double osc_f = oscillation(nf.f, b_one, OscMode::SupInf);
  std::vector<double> absf(nf.f.size());
  for (std::size_t i = 0; i < absf.size(); ++i) absf[i] = std::abs(nf.f[i]);
  double osc_abs = oscillation(ScalarField(nf.f.grid(), absf), b_one, OscMode::SupInf);
  std::vector<double> ratios;
  for (double lam : lambdas) {
    ScalarField u = solve(table, lam, nf.f).u;
    double hs = holder_seminorm(u, alpha, b_half);
    double rhs = weighted_l1(u, w).value + osc_f;
    double rhs_abs = weighted_l1(u, w).value + osc_abs;
    double r = detail::safe_ratio(hs, rhs);
    ratios.push_back(r);
    std::ostringstream extra;
    extra << "f=" << nf.name << ";ratio_osc_abs=" << detail::safe_ratio(hs, rhs_abs);
    rep.rows.push_back({"holder_ratio", detail::fmt_params({{"alpha", alpha}, {"lambda", lam}}, extra.str()), hs, rhs, r,
                        std::isfinite(r)});
  }
  rep.rows.push_back(detail::stability_row("holder_lambda_stability", detail::fmt_params({{"alpha", alpha}}, "f=" + nf.name), ratios));
  return rep;
}

struct LocalOptions {
  double p = 2.0;
  double lambda = 1.0;
  std::vector<double> eps{0.5, 0.1, 0.02};
};

// ||(-Delta)^{sigma/2} u||_{L_p(B_1)} against ||f||_{L_p(B_2)} + ||u||_{L_p(omega)}
// (+ ||Du||_{L_p(B_4)} for sigma > 1). For sigma = 1 the eps-form is read as
//   lhs <= N(eps) (||f||_{L_p(B_2)} + ||u||_{L_p(omega)}) + eps ||Du||_{L_p(B_4)}
// with one N(eps) over the whole family of f.
inline EstimateReport local_estimate_check(const KernelSpec& spec, const SymbolTable& table,
                                           const std::vector<NamedField>& fs, const LocalOptions& opt = {}) {
  EstimateReport rep;
  const double sigma = spec.sigma(), p = opt.p;
  WeightOmega w{spec.d(), sigma};
  Ball b1{Vec{}, 1.0}, b2{Vec{}, 2.0}, b4{Vec{}, 4.0};
  detail::require_inside(table.grid, b4, "local_estimate_check");
  struct Sides {
    double lhs, f2, uw, du4;
  };
  std::vector<std::pair<std::string, Sides>> sides;
  for (const auto& nf : fs) {
    ScalarField u = solve(table, opt.lambda, nf.f).u;
    Sides s{lp_norm_ball(riesz_apply(u, sigma), p, b1), lp_norm_ball(nf.f, p, b2), weighted_lp(u, w, p).value,
            lp_norm_ball(gradient_magnitude(u), p, b4)};
    sides.emplace_back(nf.name, s);
  }
  if (sigma != 1.0) {
    for (const auto& [name, s] : sides) {
      double rhs = s.f2 + s.uw + (sigma > 1.0 ? s.du4 : 0.0);
      double n = detail::safe_ratio(s.lhs, rhs);
      rep.rows.push_back({sigma < 1.0 ? "local_estimate_lt1" : "local_estimate_gt1",
                          detail::fmt_params({{"p", p}, {"lambda", opt.lambda}}, "f=" + name), s.lhs, rhs, n,
                          std::isfinite(n)});
    }
    return rep;
  }
  std::vector<double> eps = opt.eps;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  std::vector<double> ns;
  for (double e : eps) {
    double n_eps = 0, lhs_max = 0, rhs_at = 0;
    for (const auto& [name, s] : sides) {
      double num = std::max(0.0, s.lhs - e * s.du4), den = s.f2 + s.uw;
      double n = detail::safe_ratio(num, den);
      if (n >= n_eps) {
        n_eps = n;
        lhs_max = num;
        rhs_at = den;
      }
    }
    ns.push_back(n_eps);
    rep.rows.push_back({"local_estimate_eq1", detail::fmt_params({{"p", p}, {"lambda", opt.lambda}, {"eps", e}}), lhs_max,
                        rhs_at, n_eps, std::isfinite(n_eps)});
  }
  bool mono = true;
  for (std::size_t k = 1; k < ns.size(); ++k) mono = mono && ns[k] > ns[k - 1];
  rep.rows.push_back({"local_eps_monotone", detail::fmt_params({{"p", p}}), ns.empty() ? 0.0 : ns.back(),
                      ns.empty() ? 0.0 : ns.front(), ns.empty() ? 0.0 : detail::safe_ratio(ns.back(), ns.front()), mono});
  return rep;
}

struct MeanOscOptions {
  std::vector<double> lambdas{1e-1, 1.0, 10.0, 100.0};
  std::vector<double> kappas{2.0, 4.0, 8.0};
  std::vector<double> radii;  // empty: h, 2h, ... up to R / 8
  double constant = kMeanOscConstant;
};

inline EstimateReport mean_oscillation_suite(const KernelSpec& spec, const SymbolTable& table, const NamedField& nf,
                                             const MeanOscOptions& opt, std::vector<MeanOscRow>* rows_out = nullptr) {
  EstimateReport rep;
  const TorusGrid& g = table.grid;
  std::vector<double> radii = opt.radii;
  if (radii.empty())
    for (double r = g.h(); r <= g.R() / 8 * (1 + 1e-12); r *= 2) radii.push_back(r);
  for (auto variant : {OscVariant::Standard, OscVariant::Interchanged}) {
    double worst = 0;
    for (double lam : opt.lambdas)
      for (double kap : opt.kappas) {
        auto rows = mean_oscillation_report(table, spec.sigma(), lam, nf.f, kap, radii, variant);
        for (const auto& r : rows) worst = std::max(worst, r.ratio);
        if (rows_out) rows_out->insert(rows_out->end(), rows.begin(), rows.end());
      }
    std::string id = variant == OscVariant::Standard ? "mean_oscillation" : "mean_oscillation_interchanged";
    rep.rows.push_back({id, "f=" + nf.name, worst, opt.constant, worst, std::isfinite(worst) && worst <= opt.constant});
  }
  return rep;
}

struct GeneratorOptions {
  double eps = 1e-2;
  double t = 0.05;
  std::size_t n_paths = 100000;
  std::uint64_t seed = 7;
  Vec x0{0.3, 0.0, 0.0};
  Vec xi{1.0, 0.0, 0.0};
};

// Cosine test function at eps and eps/2 on the same seed.
inline EstimateReport generator_suite(const KernelSpec& spec, const GeneratorOptions& opt) {
  EstimateReport rep;
  std::vector<double> trunc;
  for (double e : {opt.eps, opt.eps / 2}) {
    PathEnsemble ens = simulate_paths(spec, e, opt.t, opt.x0, opt.n_paths, opt.seed);
    GeneratorReport g = generator_check_cosine(ens, spec, opt.xi);
    std::string prm = detail::fmt_params({{"eps", e}, {"t", opt.t}, {"n_paths", double(opt.n_paths)}, {"z", g.z_score}});
    double gap = std::abs(g.mc_estimate - g.analytic_Lu);
    double allowed = 3 * g.std_err + g.bias_bound;
    rep.rows.push_back({"generator", prm, gap, allowed, detail::safe_ratio(gap, allowed), g.pass});
    KsReport ks = jump_radius_ks(ens, spec);
    rep.rows.push_back({"jump_radius_ks", prm, ks.statistic, ks.threshold, detail::safe_ratio(ks.statistic, ks.threshold), ks.pass});
    trunc.push_back(std::abs(g.truncation_bias));
  }
  rep.rows.push_back({"truncation_bias_halving", detail::fmt_params({{"eps", opt.eps}}), trunc[1], trunc[0],
                      detail::safe_ratio(trunc[1], trunc[0]), trunc[1] <= trunc[0]});
  return rep;
}

inline EstimateReport maximal_suite(const std::vector<double>& ps, int n_trials, std::uint64_t seed) {
  EstimateReport rep;
  for (double p : ps) {
    HardyFsReport h = verify_hardy_fs(p, n_trials, seed);
    std::string prm = detail::fmt_params({{"p", p}, {"trials", double(h.trials)}});
    rep.rows.push_back({"hardy_littlewood", prm, h.C_hl_obs, 1.0, h.C_hl_obs, std::isfinite(h.C_hl_obs) && h.min_hl_ratio >= 1.0});
    rep.rows.push_back({"fefferman_stein", prm, h.C_fs_obs, 1.0, h.C_fs_obs, std::isfinite(h.C_fs_obs)});
  }
  return rep;
}

}  // namespace nle
