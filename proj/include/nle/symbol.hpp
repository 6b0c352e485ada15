#pragma once

// Fourier symbol m(xi) = int (e^{i y.xi} - 1 - i y.xi chi(y)) K(y) dy.
//
// Along a ray y = r w, with t = w.xi, the radial integral over a shell with
// constant a is a * |t|^sigma * Phi(lo|t|, hi|t|) where
//   Phi(s0, s1) = int_{s0}^{s1} (e^{iu} - 1 - i u chi) u^{-1-sigma} du.
// Phi is assembled from Psi(s) = int_0^s (e^{iu} - 1 - iu) u^{-1-sigma} du,
// tabulated once per sigma (series near 0, Hermite table, asymptotic tail).

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "constants.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "kernel.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"

namespace nle {

using cplx = std::complex<double>;

namespace detail {

class JumpPrimitive {
 public:
  static constexpr double kSeriesEnd = 0.5;
  static constexpr double kTableEnd = 60.0;
  static constexpr double kStep = 0.02;

  explicit JumpPrimitive(double sigma) : sigma_(sigma) {
    int n = static_cast<int>(std::lround((kTableEnd - kSeriesEnd) / kStep));
    val_.resize(n + 1);
    der_.resize(n + 1);
    val_[0] = series(kSeriesEnd);
    der_[0] = dpsi(kSeriesEnd);
    for (int j = 0; j < n; ++j) {
      double a = kSeriesEnd + j * kStep, b = a + kStep;
      val_[j + 1] = val_[j] + gauss_integrate([&](double u) { return dpsi(u); }, a, b, 12);
      der_[j + 1] = dpsi(b);
    }
    psi_end_ = val_.back();
    osc_end_ = oscillatory_tail(kTableEnd);
  }

  double sigma() const { return sigma_; }

  // d Psi / ds
  cplx dpsi(double s) const {
    cplx e = std::exp(cplx(0, s)) - 1.0 - cplx(0, s);
    return e * std::pow(s, -1.0 - sigma_);
  }

  cplx psi(double s) const {
    if (s <= 0.0) return 0.0;
    if (s <= kSeriesEnd) return series(s);
    if (s <= kTableEnd) {
      double q = (s - kSeriesEnd) / kStep;
      int j = std::min(static_cast<int>(q), static_cast<int>(val_.size()) - 2);
      double t = q - j;
      double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
      double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
      return h00 * val_[j] + h10 * kStep * der_[j] + h01 * val_[j + 1] + h11 * kStep * der_[j + 1];
    }
    // Psi(s) - Psi(S) = I(S) - I(s) - J0(S,s) - i J1(S,s)
    return psi_end_ + osc_end_ - oscillatory_tail(s) - j0(kTableEnd, s) - cplx(0, 1) * j1(kTableEnd, s);
  }

  // int_s^inf e^{iu} u^{-1-sigma} du for s >= kTableEnd (asymptotic expansion).
  cplx oscillatory_tail(double s) const {
    double mu = 1.0 + sigma_;
    cplx term = 1.0, sum = 0.0;
    cplx step = cplx(0, -1.0 / s);
    double prev = kInf;
    for (int k = 0; k < 200; ++k) {
      double mag = std::abs(term);
      if (mag > prev) break;
      sum += term;
      prev = mag;
      if (mag < 1e-18) break;
      term *= (mu + k) * step;
    }
    return cplx(0, 1) * std::exp(cplx(0, s)) * std::pow(s, -mu) * sum;
  }

  // int_{s0}^{s1} u^{-1-sigma}
  double j0(double s0, double s1) const { return radial_power_integral(s0, s1, -1.0 - sigma_); }
  // int_{s0}^{s1} u^{-sigma}
  double j1(double s0, double s1) const { return radial_power_integral(s0, s1, -sigma_); }

  // Phi(s0, s1) with compensator active (chi = 1) or not on the whole segment.
  cplx segment(double s0, double s1, bool compensated) const {
    if (!(s1 > s0)) return 0.0;
    const cplx I(0, 1);
    if (std::isinf(s1)) {
      if (s0 < kTableEnd) return segment(s0, kTableEnd, compensated) + segment(kTableEnd, kInf, compensated);
      cplx v = oscillatory_tail(s0) - j0(s0, kInf);
      if (compensated) v -= I * j1(s0, kInf);
      return v;
    }
    if (s0 >= kTableEnd) {
      cplx v = oscillatory_tail(s0) - oscillatory_tail(s1) - j0(s0, s1);
      if (compensated) v -= I * j1(s0, s1);
      return v;
    }
    cplx v = psi(s1) - psi(s0);
    if (!compensated) v += I * j1(s0, s1);
    return v;
  }

  // Truncation size of the asymptotic series at the table end, per unit |t|^sigma a.
  double tail_remainder() const { return 1e-18 * std::pow(kTableEnd, -1.0 - sigma_); }

 private:
  cplx series(double s) const {
    // sum_{k>=2} i^k s^{k-sigma} / (k! (k - sigma))
    cplx sum = 0.0, ik = -1.0;  // i^2
    double fact = 2.0, sp = s * s;
    for (int k = 2; k < 60; ++k) {
      cplx term = ik * (std::pow(s, k - sigma_) / (fact * (k - sigma_)));
      sum += term;
      if (std::abs(term) < 1e-19 * std::abs(sum)) break;
      ik *= cplx(0, 1);
      fact *= (k + 1);
      sp *= s;
    }
    return sum;
  }

  double sigma_;
  std::vector<cplx> val_, der_;
  cplx psi_end_, osc_end_;
};

inline const JumpPrimitive& jump_primitive(double sigma) {
  static std::mutex m;
  static std::map<double, std::unique_ptr<JumpPrimitive>> cache;
  std::lock_guard lk(m);
  auto& p = cache[sigma];
  if (!p) p = std::make_unique<JumpPrimitive>(sigma);
  return *p;
}

// int_0^inf (e^{i r t} - 1 - i r t chi(r)) a(r, cell) r^{-1-sigma} dr for one angular cell.
inline cplx ray_symbol(const JumpPrimitive& jp, const Density& a, int cell, const Chi& chi, double t) {
  if (t == 0.0) return 0.0;
  double at = std::abs(t);
  const PolarMesh& mesh = a.mesh();
  cplx sum = 0.0;
  for (int i = 0; i < mesh.n_shells(); ++i) {
    double v = a.at(i, cell);
    if (v == 0.0) continue;
    double lo = mesh.shell_lo(i), hi = mesh.shell_hi(i);
    cplx part;
    if (chi.kind == Chi::Kind::BallIndicator && chi.radius > lo && chi.radius < hi) {
      part = jp.segment(lo * at, chi.radius * at, true) + jp.segment(chi.radius * at, hi * at, false);
    } else {
      bool comp = chi.kind == Chi::Kind::One || (chi.kind == Chi::Kind::BallIndicator && hi <= chi.radius);
      part = jp.segment(lo * at, hi * at, comp);
    }
    sum += v * part;
  }
  sum *= std::pow(at, jp.sigma());
  return t > 0 ? sum : std::conj(sum);
}

}  // namespace detail

struct SymbolValue {
  cplx m;
  double error;  // quadrature error estimate (absolute)
};

// tol is relative to max(1, |xi|^sigma).
inline SymbolValue symbol_eval(const Density& a, double sigma, const Chi& chi, const Vec& xi, double tol) {
  if (!(tol > 0)) throw DomainError("symbol_at: tol must be positive");
  double xn = norm(xi);
  if (xn == 0.0) return {0.0, 0.0};
  const auto& jp = detail::jump_primitive(sigma);
  const PolarMesh& mesh = a.mesh();
  int d = mesh.dim();
  double scale = std::max(1.0, std::pow(xn, sigma));
  double amax = std::max(std::abs(a.max_value()), std::abs(a.min_value()));
  double tail = jp.tail_remainder() * amax * sphere_area(d) * scale;
  if (d == 1) {
    cplx m = detail::ray_symbol(jp, a, 0, chi, xi[0]) + detail::ray_symbol(jp, a, 1, chi, -xi[0]);
    return {m, tail};
  }
  double budget = tol * scale / mesh.n_cells();
  cplx total = 0.0;
  double err = tail;
  const double pi = std::numbers::pi;
  if (d == 2) {
    double phi = std::atan2(xi[1], xi[0]);
    for (int c = 0; c < mesh.n_cells(); ++c) {
      auto bx = mesh.cell_box(c);
      // split where w.xi changes sign (|t|^sigma kink)
      std::vector<double> cuts{bx.a0, bx.a1};
      for (int k = -3; k <= 3; ++k) {
        double z = phi + pi / 2 + k * pi;
        if (z > bx.a0 && z < bx.a1) cuts.push_back(z);
      }
      std::sort(cuts.begin(), cuts.end());
      auto f = [&](double th) {
        Vec w = PolarMesh::direction(2, th);
        return detail::ray_symbol(jp, a, c, chi, dot(w, xi));
      };
      for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        auto r = adaptive_integrate(f, cuts[k], cuts[k + 1], budget / (cuts.size() - 1), 40000);
        total += r.value;
        err += r.error;
      }
    }
  } else {
    for (int c = 0; c < mesh.n_cells(); ++c) {
      auto bx = mesh.cell_box(c);
      double inner_err = 0;
      auto outer = [&](double z) {
        auto g = [&](double p) {
          Vec w = PolarMesh::direction(3, z, p);
          return detail::ray_symbol(jp, a, c, chi, dot(w, xi));
        };
        auto r = adaptive_integrate(g, bx.b0, bx.b1, 0.1 * budget / (bx.a1 - bx.a0), 6000);
        inner_err = std::max(inner_err, r.error);
        return r.value;
      };
      auto r = adaptive_integrate(outer, bx.a0, bx.a1, budget, 3000);
      total += r.value;
      err += r.error + inner_err * (bx.a1 - bx.a0);
    }
  }
  if (err > tol * scale)
    throw NumericalError("symbol_at: angular quadrature did not reach tolerance", err / scale);
  return {total, err};
}

inline cplx symbol_at(const KernelSpec& spec, const Vec& xi, double tol = 1e-8) {
  return symbol_eval(spec.a(), spec.sigma(), spec.chi(), xi, tol).m;
}

struct SymbolBoundsReport {
  double C_upper_obs;  // max |m| / |xi|^sigma
  double c_lower_obs;  // min (-Re m) / (nu c (2-sigma) |xi|^sigma)
  bool pass;
};

inline SymbolBoundsReport verify_symbol_bounds(const KernelSpec& spec, const std::vector<Vec>& xi_samples,
                                               double tol = 1e-8) {
  double cb = spec.nu() * frac_laplace_constant_times_band(spec.d(), spec.sigma());
  SymbolBoundsReport r{0.0, kInf, true};
  for (const Vec& xi : xi_samples) {
    double xn = norm(xi);
    if (xn == 0) throw DomainError("verify_symbol_bounds: xi samples must be nonzero");
    cplx m = symbol_at(spec, xi, tol);
    double s = std::pow(xn, spec.sigma());
    r.C_upper_obs = std::max(r.C_upper_obs, std::abs(m) / s);
    if (cb > 0) r.c_lower_obs = std::min(r.c_lower_obs, -m.real() / (cb * s));
  }
  // 1% quadrature slack
  r.pass = std::isfinite(r.C_upper_obs) && (cb == 0 || r.c_lower_obs >= 0.99);
  return r;
}

}  // namespace nle
