#pragma once

// Compound-Poisson approximation of the jump process generated by L: jumps
// with |y| > eps at rate K(y) dy plus the drift -int_{|y|>eps} y chi K dy.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "operator.hpp"

namespace nle {

// SplitMix64 stream; one per path, seeded from (master seed, path index).
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t s) : s_(s) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type(0); }
  result_type operator()() {
    std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t s_;
};

inline std::uint64_t path_seed(std::uint64_t seed, std::uint64_t i) {
  SplitMix64 a(seed ^ 0x5851f42d4c957f2dULL);
  std::uint64_t base = a();
  SplitMix64 b(base + i * 0xd1b54a32d192ed03ULL);
  return b();
}

struct PathEnsemble {
  int d = 1;
  std::size_t n_paths = 0;
  double t = 0, eps = 0;
  Vec x0{};
  std::uint64_t seed = 0;
  double jump_rate = 0;  // Lambda_eps
  Vec drift{};
  std::vector<Vec> terminal;
  std::vector<double> first_jump_radius;  // NaN when the path made no jump
  std::vector<int> jump_count;
};

namespace detail {

struct JumpLaw {
  std::vector<double> cum;  // cumulative weight per (shell, cell)
  std::vector<int> shell, cell;
  std::vector<double> lo, hi;
  double total = 0;
};

inline JumpLaw jump_law(const KernelSpec& spec, double eps) {
  JumpLaw L;
  const Density& a = spec.a();
  const PolarMesh& m = a.mesh();
  double p = -1.0 - spec.sigma();
  for (int i = 0; i < m.n_shells(); ++i) {
    double lo = std::max(eps, m.shell_lo(i)), hi = m.shell_hi(i);
    if (!(hi > lo)) continue;
    double rad = radial_power_integral(lo, hi, p);
    for (int c = 0; c < m.n_cells(); ++c) {
      double w = a.at(i, c) * m.cell_measure(c) * rad;
      if (w < 0) throw DomainError("simulate_paths: kernel density must be nonnegative");
      if (w == 0) continue;
      L.total += w;
      L.cum.push_back(L.total);
      L.shell.push_back(i);
      L.cell.push_back(c);
      L.lo.push_back(lo);
      L.hi.push_back(hi);
    }
  }
  return L;
}

inline Vec sample_jump(const JumpLaw& L, const PolarMesh& m, double sigma, SplitMix64& rng, double* radius) {
  double u = rng.uniform() * L.total;
  std::size_t k = std::upper_bound(L.cum.begin(), L.cum.end(), u) - L.cum.begin();
  k = std::min(k, L.cum.size() - 1);
  double a = std::pow(L.lo[k], -sigma), b = std::isinf(L.hi[k]) ? 0.0 : std::pow(L.hi[k], -sigma);
  double r = std::pow(a - rng.uniform() * (a - b), -1.0 / sigma);
  *radius = r;
  int c = L.cell[k];
  Vec w;
  if (m.dim() == 1) {
    w = {c == 0 ? 1.0 : -1.0, 0, 0};
  } else {
    auto bx = m.cell_box(c);
    double s1 = bx.a0 + rng.uniform() * (bx.a1 - bx.a0);
    if (m.dim() == 2) w = PolarMesh::direction(2, s1);
    else w = PolarMesh::direction(3, s1, bx.b0 + rng.uniform() * (bx.b1 - bx.b0));
  }
  return r * w;
}

// -int_{|y| > eps} y chi(y) K(y) dy
inline Vec compensator_drift(const KernelSpec& spec, double eps) {
  Chi chi = spec.chi();
  double s = spec.sigma();
  if (chi.kind == Chi::Kind::Zero) return Vec{};
  double hi = chi.kind == Chi::Kind::One ? kInf : chi.radius;
  if (!(hi > eps)) return Vec{};
  return -1.0 * spec.a().radial_first(eps, hi, -s);
}

// int_{|y| < eps} y (1 - chi(y)) K(y) dy
inline Vec uncompensated_moment(const KernelSpec& spec, double eps) {
  Chi chi = spec.chi();
  if (chi.kind == Chi::Kind::Zero) return spec.a().radial_first(0.0, eps, -spec.sigma());
  if (chi.kind == Chi::Kind::BallIndicator && chi.radius < eps) return spec.a().radial_first(chi.radius, eps, -spec.sigma());
  return Vec{};
}

}  // namespace detail

inline constexpr double kMaxExpectedJumps = 1e6;

inline PathEnsemble simulate_paths(const KernelSpec& spec, double eps, double t, const Vec& x0, std::size_t n_paths,
                                   std::uint64_t seed) {
  if (!(eps > 0)) throw DomainError("simulate_paths: eps must be positive");
  if (!(t > 0)) throw DomainError("simulate_paths: t must be positive");
  PathEnsemble e;
  e.d = spec.d();
  e.n_paths = n_paths;
  e.t = t;
  e.eps = eps;
  e.x0 = x0;
  e.seed = seed;
  detail::JumpLaw law = detail::jump_law(spec, eps);
  e.jump_rate = law.total;
  if (law.total * t > kMaxExpectedJumps)
    throw BudgetError("simulate_paths: expected jumps per path exceed 1e6; reduce t or raise eps");
  e.drift = detail::compensator_drift(spec, eps);
  e.terminal.resize(n_paths);
  e.first_jump_radius.assign(n_paths, std::numeric_limits<double>::quiet_NaN());
  e.jump_count.assign(n_paths, 0);
  const PolarMesh& mesh = spec.a().mesh();
  parallel_for(n_paths, [&](std::size_t i) {
    SplitMix64 rng(path_seed(seed, i));
    std::poisson_distribution<long> pois(law.total * t);
    long nj = law.total > 0 ? pois(rng) : 0;
    Vec x = x0 + t * e.drift;
    for (long k = 0; k < nj; ++k) {
      double r;
      x += detail::sample_jump(law, mesh, spec.sigma(), rng, &r);
      if (k == 0) e.first_jump_radius[i] = r;
    }
    e.terminal[i] = x;
    e.jump_count[i] = static_cast<int>(nj);
  });
  return e;
}

struct TestFunction {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat3(const Vec&)> hessian;
  double hessian_bound = 0;      // sup |D^2 u| (operator norm)
  double second_order_bound = -1;  // bound on |A_eps^2 u(x0)| / 2 near the start; < 0 if unknown
};

// u(x) = cos(xi.x + phase)
inline TestFunction cosine_test_function(const Vec& xi, double phase = 0.0) {
  TestFunction f;
  f.value = [=](const Vec& x) { return std::cos(dot(xi, x) + phase); };
  f.gradient = [=](const Vec& x) { return -std::sin(dot(xi, x) + phase) * xi; };
  f.hessian = [=](const Vec& x) { return -std::cos(dot(xi, x) + phase) * outer(xi, xi); };
  f.hessian_bound = dot(xi, xi);
  return f;
}

struct GeneratorReport {
  double mc_estimate;
  double analytic_Lu;
  double std_err;
  double z_score;
  double bias_bound;
  double truncation_bias;  // int_{|y|<eps} (u(x0+y) - u(x0) - y.grad u chi) K dy, by quadrature
  bool pass;
};

// Exact small-jump part dropped by the eps-truncation, by direct quadrature.
inline double small_jump_bias(const KernelSpec& spec, const TestFunction& u, const Vec& x0, double eps) {
  SmoothFunction f{u.value, u.gradient, u.hessian};
  DirectOptions opt;
  opt.rho = eps / 64;
  opt.panel_length = eps / 16;
  opt.r_far = kInf;
  auto exit = [](const Vec&, const Vec&) { return kInf; };
  return jump_integral(spec.a(), spec.sigma(), spec.chi(), f, x0, eps, opt, exit).value;
}

// Gate: |mc - Lu| <= 3 std_err + bias, where bias = |truncation bound| + t * time coefficient.
inline GeneratorReport generator_check(const PathEnsemble& e, const KernelSpec& spec, const TestFunction& u,
                                       double analytic_Lu) {
  if (e.n_paths < 2) throw DomainError("generator_check: need at least two paths");
  double u0 = u.value(e.x0);
  double mean = 0, m2 = 0;
  for (std::size_t i = 0; i < e.n_paths; ++i) {
    double v = u.value(e.terminal[i]) - u0;
    double dlt = v - mean;
    mean += dlt / (i + 1);
    m2 += dlt * (v - mean);
  }
  double var = m2 / (e.n_paths - 1);
  double se = std::sqrt(var / e.n_paths) / e.t;
  double mc = mean / e.t;

  // truncation bound: |grad u . V_eps| + 1/2 sup|D^2 u| int_{B_eps} |y|^2 K
  Vec V = detail::uncompensated_moment(spec, e.eps);
  double S = trace(spec.a().radial_second(0.0, e.eps, 1.0 - spec.sigma()));
  double trunc = std::abs(dot(u.gradient(e.x0), V)) + 0.5 * u.hessian_bound * S;
  double coeff = u.second_order_bound;
  if (coeff < 0) {
    // eigenfunction heuristic: A^2 u ~ (Lu)^2 / u
    double lu = std::abs(analytic_Lu) + trunc;
    coeff = 0.5 * lu * lu / std::max(std::abs(u0), 1e-3) * std::exp(e.t * lu / std::max(std::abs(u0), 1e-3));
  }
  double bias = trunc + e.t * coeff;
  GeneratorReport r{};
  r.mc_estimate = mc;
  r.analytic_Lu = analytic_Lu;
  r.std_err = se;
  double diff = std::abs(mc - analytic_Lu);
  r.z_score = se > 0 ? (mc - analytic_Lu) / se : (diff == 0 ? 0.0 : kInf);
  r.bias_bound = bias;
  r.truncation_bias = small_jump_bias(spec, u, e.x0, e.eps);
  r.pass = diff <= 3 * se + bias;
  return r;
}

// For u = cos(xi.x + phase): Lu(x0) = Re(m(xi) e^{i(xi.x0 + phase)}), and the
// time-discretisation coefficient follows from E e^{i xi.X_t} = e^{t m_eps(xi)}.
inline GeneratorReport generator_check_cosine(const PathEnsemble& e, const KernelSpec& spec, const Vec& xi,
                                              double phase = 0.0) {
  cplx m = symbol_at(spec, xi, 1e-10);
  double lu = (m * std::exp(cplx(0, dot(xi, e.x0) + phase))).real();
  TestFunction u = cosine_test_function(xi, phase);
  double me = std::abs(m) + 0.5 * u.hessian_bound * trace(spec.a().radial_second(0.0, e.eps, 1.0 - spec.sigma())) +
              norm(xi) * norm(detail::uncompensated_moment(spec, e.eps));
  u.second_order_bound = 0.5 * me * me * std::exp(e.t * me);
  return generator_check(e, spec, u, lu);
}

struct KsReport {
  double statistic;
  double threshold;  // 1% level, 1.63 / sqrt(n)
  std::size_t n;
  bool pass;
};

// First-jump radii against F(r) = 1 - Lambda_r / Lambda_eps.
inline KsReport jump_radius_ks(const PathEnsemble& e, const KernelSpec& spec) {
  std::vector<double> r;
  for (double v : e.first_jump_radius)
    if (!std::isnan(v)) r.push_back(v);
  std::sort(r.begin(), r.end());
  double p = -1.0 - spec.sigma();
  double total = spec.a().radial_zeroth(e.eps, kInf, p);
  double D = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    double F = 1.0 - spec.a().radial_zeroth(r[i], kInf, p) / total;
    D = std::max({D, std::abs(F - double(i) / r.size()), std::abs(F - double(i + 1) / r.size())});
  }
  KsReport k{D, r.empty() ? kInf : 1.63 / std::sqrt(double(r.size())), r.size(), false};
  k.pass = !r.empty() && D <= k.threshold;
  return k;
}

}  // namespace nle
