#pragma once

// Applying L: spectrally through a SymbolTable, or pointwise by direct
// quadrature of the jump integral.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "grid.hpp"
#include "kernel.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "symbol.hpp"

namespace nle {

// m(xi_k) on a grid's frequency lattice (FFT order).
struct SymbolTable {
  TorusGrid grid;
  std::vector<cplx> values;
  std::vector<double> tail_bound;
  double tol = 0.0;

  cplx operator[](std::size_t i) const { return values[i]; }

  template <class F>
  static SymbolTable from_function(const TorusGrid& g, F&& m) {
    SymbolTable t{g, std::vector<cplx>(g.size()), std::vector<double>(g.size(), 0.0), 0.0};
    for (std::size_t i = 0; i < g.size(); ++i) t.values[i] = m(g.frequency(i));
    return t;
  }

  // -|xi|^s : the symbol of -(-Delta)^{s/2}
  static SymbolTable fractional(const TorusGrid& g, double s) {
    return from_function(g, [s](const Vec& xi) { return cplx(-std::pow(norm(xi), s), 0.0); });
  }

  // Symbol of the formal adjoint, m(-xi) = conj m(xi).
  SymbolTable adjoint() const {
    SymbolTable t = *this;
    for (auto& v : t.values) v = std::conj(v);
    return t;
  }
};

// Half the lattice is evaluated; the other half follows from m(-xi) = conj m(xi).
inline SymbolTable symbol_table(const Density& a, double sigma, const Chi& chi, const TorusGrid& grid, double tol) {
  if (grid.d() != a.mesh().dim()) throw SizeMismatch("symbol_table: kernel and grid dimensions differ");
  SymbolTable t{grid, std::vector<cplx>(grid.size()), std::vector<double>(grid.size()), tol};
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (i <= grid.negated(i)) todo.push_back(i);
  parallel_for(todo.size(), [&](std::size_t k) {
    std::size_t i = todo[k];
    SymbolValue v = symbol_eval(a, sigma, chi, grid.frequency(i), tol);
    t.values[i] = v.m;
    t.tail_bound[i] = v.error;
  });
  for (std::size_t i : todo) {
    std::size_t j = grid.negated(i);
    if (j == i) {
      t.values[i] = t.values[i].real();
    } else {
      t.values[j] = std::conj(t.values[i]);
      t.tail_bound[j] = t.tail_bound[i];
    }
  }
  return t;
}

inline SymbolTable symbol_table(const KernelSpec& spec, const TorusGrid& grid, double tol = 1e-8) {
  return symbol_table(spec.a(), spec.sigma(), spec.chi(), grid, tol);
}

inline ScalarField apply_spectral(const SymbolTable& table, const ScalarField& u) {
  if (!(table.grid == u.grid())) throw SizeMismatch("apply_spectral: table and field grids differ");
  return apply_multiplier(u, [&](std::size_t i) { return table.values[i]; });
}

// Multiplier |xi|^s, i.e. (-Delta)^{s/2}; the zero mode maps to 0.
inline ScalarField riesz_apply(const ScalarField& u, double s) {
  if (!(s > 0.0)) throw DomainError("riesz_apply: s must be positive");
  const TorusGrid& g = u.grid();
  return apply_multiplier(u, [&](std::size_t i) { return cplx(std::pow(norm(g.frequency(i)), s), 0.0); });
}

// (1 - Delta)^{s/2}
inline ScalarField bessel_apply(const ScalarField& u, double s) {
  const TorusGrid& g = u.grid();
  return apply_multiplier(u, [&](std::size_t i) {
    Vec xi = g.frequency(i);
    return cplx(std::pow(1.0 + dot(xi, xi), 0.5 * s), 0.0);
  });
}

// d/dx_a. The Nyquist component of an odd derivative is set to zero.
inline ScalarField spectral_derivative(const ScalarField& u, int a) {
  const TorusGrid& g = u.grid();
  return apply_multiplier(u, [&](std::size_t i) {
    auto k = g.wavenumber(i);
    if (k[a] == -g.n() / 2) return cplx(0.0);
    return cplx(0.0, g.frequency(i)[a]);
  });
}

// d^2/dx_a dx_b
inline ScalarField spectral_second_derivative(const ScalarField& u, int a, int b) {
  const TorusGrid& g = u.grid();
  return apply_multiplier(u, [&](std::size_t i) {
    auto k = g.wavenumber(i);
    if (a != b && (k[a] == -g.n() / 2 || k[b] == -g.n() / 2)) return cplx(0.0);
    Vec xi = g.frequency(i);
    return cplx(-xi[a] * xi[b], 0.0);
  });
}

// |grad u| at every node.
inline ScalarField gradient_magnitude(const ScalarField& u) {
  std::vector<double> v(u.size(), 0.0);
  for (int a = 0; a < u.grid().d(); ++a) {
    ScalarField da = spectral_derivative(u, a);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += da[i] * da[i];
  }
  for (auto& x : v) x = std::sqrt(x);
  return ScalarField(u.grid(), std::move(v), u.extension());
}

// Pointwise access to a function for direct quadrature.
struct SmoothFunction {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat3(const Vec&)> hessian;
  // u vanishes outside B(support_center, support_radius); infinity if unknown.
  double support_radius = kInf;
  Vec support_center{};
};

namespace detail {

// Tensor-product 4-point Lagrange interpolation of grid data.
class GridInterpolator {
 public:
  GridInterpolator(const TorusGrid& g, const std::vector<double>& v, bool periodic)
      : g_(g), v_(&v), periodic_(periodic) {}

  double operator()(const Vec& x) const {
    const int d = g_.d(), n = g_.n();
    const double h = g_.h();
    int base[3] = {0, 0, 0};
    double w[3][4] = {};
    for (int a = 0; a < d; ++a) {
      double q = (x[a] + g_.R()) / h;
      int j = static_cast<int>(std::floor(q));
      double t = q - j;
      base[a] = j - 1;
      // nodes at -1, 0, 1, 2 relative to j
      w[a][0] = -t * (t - 1) * (t - 2) / 6.0;
      w[a][1] = (t + 1) * (t - 1) * (t - 2) / 2.0;
      w[a][2] = -(t + 1) * t * (t - 2) / 2.0;
      w[a][3] = (t + 1) * t * (t - 1) / 6.0;
    }
    double s = 0;
    int tot = 1;
    for (int a = 0; a < d; ++a) tot *= 4;
    for (int c = 0; c < tot; ++c) {
      int rem = c;
      double wt = 1.0;
      std::array<int, 3> j{0, 0, 0};
      bool inside = true;
      for (int a = d - 1; a >= 0; --a) {
        int o = rem % 4;
        rem /= 4;
        wt *= w[a][o];
        j[a] = base[a] + o;
        if (!periodic_ && (j[a] < 0 || j[a] >= n)) inside = false;
      }
      if (!inside || wt == 0.0) continue;
      s += wt * (*v_)[g_.ravel(j)];
    }
    return s;
  }

 private:
  TorusGrid g_;
  const std::vector<double>* v_;
  bool periodic_;
};

struct RayContext {
  const Density* a;
  double sigma;
  Chi chi;
};

// sum over shell pieces of int_{lo}^{hi} a(r, cell) r^p dr, optionally only where chi is active.
inline double ray_power(const RayContext& k, int cell, double lo, double hi, double p, bool chi_only) {
  const PolarMesh& mesh = k.a->mesh();
  if (chi_only) {
    if (k.chi.kind == Chi::Kind::Zero) return 0.0;
    if (k.chi.kind == Chi::Kind::BallIndicator) hi = std::min(hi, k.chi.radius);
  }
  double s = 0;
  for (int i = 0; i < mesh.n_shells(); ++i) {
    double l = std::max(lo, mesh.shell_lo(i)), h = std::min(hi, mesh.shell_hi(i));
    if (h > l) s += k.a->at(i, cell) * radial_power_integral(l, h, p);
  }
  return s;
}

}  // namespace detail

struct DirectOptions {
  double rho = 0.0;            // Taylor zone radius; 0 -> grid spacing (fields) or 1e-3 (closures)
  double panel_length = 0.0;   // 0 -> grid spacing (fields) or 0.05 (closures)
  double r_far = 0.0;          // numeric cutoff for unbounded support; 0 -> 64 * box size or 200
  double far_value = 0.0;      // value assumed for u beyond r_far
  int angular_nodes = 12;      // per cell and axis, d >= 2
  int radial_nodes = 8;        // Gauss points per radial panel
};

struct DirectResult {
  double value;
  double tail_bound;  // size of the far-field approximation beyond r_far
};

// int_{r_lo <= |y| < r_hi} (u(x+y) - u(x) - y.grad u(x) chi(y)) K(y) dy with r_lo = 0.
// Below rho the integrand is replaced by its second-order Taylor expansion
// integrated exactly against the kernel moments.
inline DirectResult jump_integral(const Density& a, double sigma, const Chi& chi, const SmoothFunction& u,
                                  const Vec& x, double r_hi, const DirectOptions& opt,
                                  const std::function<double(const Vec&, const Vec&)>& exit_distance) {
  const PolarMesh& mesh = a.mesh();
  const int d = mesh.dim();
  detail::RayContext ctx{&a, sigma, chi};
  double rho = std::min(opt.rho, r_hi);
  double u0 = u.value(x);
  Vec g0 = u.gradient(x);
  Mat3 H = u.hessian(x);

  // near zone
  Vec V{};
  if (chi.kind == Chi::Kind::Zero) V = a.radial_first(0.0, rho, -sigma);
  else if (chi.kind == Chi::Kind::BallIndicator && chi.radius < rho) V = a.radial_first(chi.radius, rho, -sigma);
  Mat3 S = a.radial_second(0.0, rho, 1.0 - sigma);
  double total = dot(g0, V) + 0.5 * contract(H, S);
  double tail = 0.0;
  if (!(r_hi > rho)) return {total, 0.0};

  const GaussRule& gr = gauss_legendre(opt.radial_nodes);
  auto ray = [&](int cell, const Vec& w) -> double {
    double r_exit = exit_distance(x, w);
    double r_num = std::min({r_hi, r_exit, opt.r_far});
    double s = 0.0;
    if (r_num > rho) {
      // panel breakpoints: geometric from rho up to the panel length, then uniform
      std::vector<double> bp{rho};
      double r = rho;
      while (r * 2 < opt.panel_length && r * 2 < r_num) {
        r *= 2;
        bp.push_back(r);
      }
      for (r = std::max(r, opt.panel_length); r < r_num; r += opt.panel_length) bp.push_back(r);
      bp.push_back(r_num);
      for (int i = 1; i < mesh.n_shells(); ++i) {
        double e = mesh.shell_lo(i);
        if (e > rho && e < r_num) bp.push_back(e);
      }
      if (chi.kind == Chi::Kind::BallIndicator && chi.radius > rho && chi.radius < r_num) bp.push_back(chi.radius);
      std::sort(bp.begin(), bp.end());
      bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
      double gw = dot(g0, w);
      for (std::size_t p = 0; p + 1 < bp.size(); ++p) {
        double lo = bp[p], hi = bp[p + 1];
        if (!(hi > lo)) continue;
        double mid = 0.5 * (lo + hi), hw = 0.5 * (hi - lo);
        double av = a.at(mesh.shell_of(mid), cell);
        bool comp = chi.active(mid);
        double acc = 0;
        for (int q = 0; q < opt.radial_nodes; ++q) {
          double rr = mid + hw * gr.x[q];
          double f = u.value(x + rr * w) - u0 - (comp ? rr * gw : 0.0);
          acc += gr.w[q] * f * std::pow(rr, -1.0 - sigma);
        }
        s += av * acc * hw;
      }
    }
    // beyond r_num: u(x + r w) is 0 past the exit, far_value past r_far
    double r0 = std::max(rho, r_num);
    if (r_hi > r0) {
      double outside = (r_exit <= r_num) ? 0.0 : opt.far_value;
      double k0 = detail::ray_power(ctx, cell, r0, r_hi, -1.0 - sigma, false);
      s += (outside - u0) * k0;
      s -= dot(g0, w) * detail::ray_power(ctx, cell, r0, r_hi, -sigma, true);
      if (r_exit > r_num) tail += std::abs(u0 - opt.far_value) * std::abs(k0);
    }
    return s;
  };

  if (d == 1) {
    total += ray(0, {1, 0, 0}) + ray(1, {-1, 0, 0});
    return {total, tail};
  }
  const GaussRule& ga = gauss_legendre(opt.angular_nodes);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    auto bx = mesh.cell_box(c);
    double ca = 0.5 * (bx.a0 + bx.a1), ha = 0.5 * (bx.a1 - bx.a0);
    if (d == 2) {
      for (int q = 0; q < opt.angular_nodes; ++q) total += ga.w[q] * ha * ray(c, PolarMesh::direction(2, ca + ha * ga.x[q]));
    } else {
      double cb = 0.5 * (bx.b0 + bx.b1), hb = 0.5 * (bx.b1 - bx.b0);
      for (int q = 0; q < opt.angular_nodes; ++q)
        for (int p = 0; p < opt.angular_nodes; ++p)
          total += ga.w[q] * ga.w[p] * ha * hb * ray(c, PolarMesh::direction(3, ca + ha * ga.x[q], cb + hb * ga.x[p]));
    }
  }
  return {total, tail};
}

// Direct quadrature for an analytic closure.
inline DirectResult apply_direct(const KernelSpec& spec, const SmoothFunction& u, const Vec& x,
                                 DirectOptions opt = {}) {
  if (opt.rho <= 0) opt.rho = 1e-3;
  if (opt.panel_length <= 0) opt.panel_length = 0.05;
  if (opt.r_far <= 0) opt.r_far = 200.0;
  auto exit = [&](const Vec& p, const Vec&) {
    if (std::isinf(u.support_radius)) return kInf;
    return norm(p - u.support_center) + u.support_radius;
  };
  return jump_integral(spec.a(), spec.sigma(), spec.chi(), u, x, kInf, opt, exit);
}

// Pointwise view of a grid field: cubic interpolation of u and of its
// spectral first and second derivatives.
class GridSampler {
 public:
  explicit GridSampler(const ScalarField& u) : u_(u) {
    int d = u.grid().d();
    for (int a = 0; a < d; ++a) {
      grad_.push_back(spectral_derivative(u, a));
      for (int b = a; b < d; ++b) hess_.push_back(spectral_second_derivative(u, a, b));
    }
  }

  SmoothFunction as_function() const {
    bool per = u_.extension() == Extension::Periodic;
    const TorusGrid& g = u_.grid();
    int d = g.d();
    SmoothFunction f;
    f.value = [this, per](const Vec& y) { return detail::GridInterpolator(u_.grid(), u_.values(), per)(y); };
    f.gradient = [this, per, d](const Vec& y) {
      Vec v{};
      for (int a = 0; a < d; ++a) v[a] = detail::GridInterpolator(u_.grid(), grad_[a].values(), per)(y);
      return v;
    };
    f.hessian = [this, per, d](const Vec& y) {
      Mat3 m{};
      int k = 0;
      for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b, ++k) m[a][b] = m[b][a] = detail::GridInterpolator(u_.grid(), hess_[k].values(), per)(y);
      return m;
    };
    (void)g;
    return f;
  }

  const ScalarField& field() const { return u_; }

 private:
  ScalarField u_;
  std::vector<ScalarField> grad_, hess_;
};

// Direct quadrature for a grid field. ZeroOutside fields vanish past the box
// faces; Periodic fields are integrated to r_far and the periodic mean is used beyond.
inline DirectResult apply_direct_report(const KernelSpec& spec, const ScalarField& u, const Vec& x,
                                        DirectOptions opt = {}) {
  const TorusGrid& g = u.grid();
  if (g.d() != spec.d()) throw SizeMismatch("apply_direct: kernel and grid dimensions differ");
  const double R = g.R(), h = g.h();
  bool periodic = u.extension() == Extension::Periodic;
  if (!periodic)
    for (int a = 0; a < g.d(); ++a)
      if (x[a] < -R + 2 * h || x[a] > R - 2 * h)
        throw DomainError("apply_direct: x too close to the box boundary for the interpolation stencil");
  if (opt.rho <= 0) opt.rho = h;
  if (opt.panel_length <= 0) opt.panel_length = h;
  if (opt.r_far <= 0) opt.r_far = periodic ? 64.0 * R : kInf;
  if (periodic) {
    double mean = 0;
    for (double v : u.values()) mean += v;
    opt.far_value = mean / u.size();
  }
  GridSampler s(u);
  SmoothFunction f = s.as_function();
  auto exit = [&](const Vec& p, const Vec& w) {
    if (periodic) return kInf;
    double r = kInf;
    for (int a = 0; a < g.d(); ++a) {
      if (w[a] > 1e-15) r = std::min(r, (R - p[a]) / w[a]);
      else if (w[a] < -1e-15) r = std::min(r, (p[a] + R) / -w[a]);
    }
    return r;
  };
  return jump_integral(spec.a(), spec.sigma(), spec.chi(), f, x, kInf, opt, exit);
}

inline double apply_direct(const KernelSpec& spec, const ScalarField& u, const Vec& x, DirectOptions opt = {}) {
  return apply_direct_report(spec, u, x, opt).value;
}

}  // namespace nle
