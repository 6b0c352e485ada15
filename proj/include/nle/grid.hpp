#pragma once

// Periodic box [-R, R)^d sampled at n^d nodes, fields on it, and the FFT pair
//   u^(xi_k) = h^d sum_x u(x) e^{-i xi_k . x},   xi_k = (pi/R) k.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"

namespace nle {

using cplx = std::complex<double>;

class TorusGrid {
 public:
  TorusGrid(int d, int n, double R) : d_(d), n_(n), R_(R) {
    if (d < 1 || d > 3) throw DomainError("TorusGrid: d must be 1, 2 or 3");
    if (n < 2 || n % 2 != 0) throw DomainError("TorusGrid: n must be even and >= 2");
    if (!(R > 0)) throw DomainError("TorusGrid: R must be positive");
    size_ = 1;
    for (int k = 0; k < d; ++k) size_ *= static_cast<std::size_t>(n);
  }

  static TorusGrid default_for(int d) {
    if (d == 1) return TorusGrid(1, 512, 16.0);
    if (d == 2) return TorusGrid(2, 128, 8.0);
    return TorusGrid(3, 32, 8.0);
  }

  int d() const { return d_; }
  int n() const { return n_; }
  double R() const { return R_; }
  double h() const { return 2.0 * R_ / n_; }
  double cell_volume() const { return std::pow(h(), d_); }
  double volume() const { return std::pow(2.0 * R_, d_); }
  std::size_t size() const { return size_; }

  // Row-major multi-index, last axis fastest.
  std::array<int, 3> unravel(std::size_t idx) const {
    std::array<int, 3> j{0, 0, 0};
    for (int a = d_ - 1; a >= 0; --a) {
      j[a] = static_cast<int>(idx % n_);
      idx /= n_;
    }
    return j;
  }
  std::size_t ravel(const std::array<int, 3>& j) const {
    std::size_t idx = 0;
    for (int a = 0; a < d_; ++a) idx = idx * n_ + static_cast<std::size_t>(((j[a] % n_) + n_) % n_);
    return idx;
  }

  Vec node(std::size_t idx) const {
    auto j = unravel(idx);
    Vec x{};
    for (int a = 0; a < d_; ++a) x[a] = -R_ + j[a] * h();
    return x;
  }

  // Signed lattice index of FFT-ordered position j: 0..n/2-1, -n/2..-1.
  int signed_k(int j) const { return j < n_ / 2 ? j : j - n_; }

  std::array<int, 3> wavenumber(std::size_t idx) const {
    auto j = unravel(idx);
    for (int a = 0; a < d_; ++a) j[a] = signed_k(j[a]);
    return j;
  }

  Vec frequency(std::size_t idx) const {
    auto k = wavenumber(idx);
    Vec xi{};
    for (int a = 0; a < d_; ++a) xi[a] = std::numbers::pi / R_ * k[a];
    return xi;
  }

  // Spectral index of -k.
  std::size_t negated(std::size_t idx) const {
    auto j = unravel(idx);
    for (int a = 0; a < d_; ++a) j[a] = (n_ - j[a]) % n_;
    return ravel(j);
  }

  // Every component is 0 or -n/2, so -k aliases to k.
  bool self_conjugate(std::size_t idx) const { return negated(idx) == idx; }

  // Index of the node nearest to x (clamped into the box).
  std::size_t nearest(const Vec& x) const {
    std::array<int, 3> j{0, 0, 0};
    for (int a = 0; a < d_; ++a)
      j[a] = std::clamp(static_cast<int>(std::lround((x[a] + R_) / h())), 0, n_ - 1);
    return ravel(j);
  }

  bool operator==(const TorusGrid& o) const { return d_ == o.d_ && n_ == o.n_ && R_ == o.R_; }

 private:
  int d_, n_;
  double R_;
  std::size_t size_;
};

// How a field is read outside the box.
enum class Extension { Periodic, ZeroOutside };

template <class T>
class Field {
 public:
  Field(TorusGrid grid, std::vector<T> values, Extension ext = Extension::ZeroOutside)
      : grid_(grid), v_(std::move(values)), ext_(ext) {
    if (v_.size() != grid_.size()) throw SizeMismatch("Field: value count must be n^d");
  }
  explicit Field(TorusGrid grid, Extension ext = Extension::ZeroOutside)
      : grid_(grid), v_(grid.size(), T{}), ext_(ext) {}

  template <class F>
  static Field from_function(const TorusGrid& g, F&& f, Extension ext = Extension::ZeroOutside) {
    std::vector<T> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = f(g.node(i));
    return Field(g, std::move(v), ext);
  }

  const TorusGrid& grid() const { return grid_; }
  Extension extension() const { return ext_; }
  const std::vector<T>& values() const { return v_; }
  std::vector<T>& values() { return v_; }
  std::size_t size() const { return v_.size(); }
  const T& operator[](std::size_t i) const { return v_[i]; }
  T& operator[](std::size_t i) { return v_[i]; }

  Field with_extension(Extension e) const { return Field(grid_, v_, e); }

  // Largest |u| over nodes on the box faces (decay check for ZeroOutside).
  double boundary_max() const {
    double m = 0;
    for (std::size_t i = 0; i < v_.size(); ++i) {
      auto j = grid_.unravel(i);
      bool edge = false;
      for (int a = 0; a < grid_.d(); ++a) edge = edge || j[a] == 0 || j[a] == grid_.n() - 1;
      if (edge) m = std::max(m, static_cast<double>(std::abs(v_[i])));
    }
    return m;
  }

 private:
  TorusGrid grid_;
  std::vector<T> v_;
  Extension ext_;
};

using ScalarField = Field<double>;
using ComplexField = Field<cplx>;

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place unnormalised DFT with FFTW sign convention.
inline void fft_inplace(const TorusGrid& g, std::vector<cplx>& data, int sign) {
  int dims[3] = {g.n(), g.n(), g.n()};
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lk(fftw_planner_mutex());
    plan = fftw_plan_dft(g.d(), dims, p, p, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lk(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
}

inline double parity(const TorusGrid& g, std::size_t idx) {
  auto k = g.wavenumber(idx);
  int s = 0;
  for (int a = 0; a < g.d(); ++a) s += k[a];
  return (s % 2 == 0) ? 1.0 : -1.0;
}

}  // namespace detail

// Spectral coefficients in FFT order.
struct Spectrum {
  TorusGrid grid;
  std::vector<cplx> c;
};

template <class T>
Spectrum transform(const Field<T>& u) {
  const TorusGrid& g = u.grid();
  std::vector<cplx> data(u.values().begin(), u.values().end());
  detail::fft_inplace(g, data, FFTW_FORWARD);
  double hd = g.cell_volume();
  // e^{-i xi_k x_j} = (-1)^k e^{-2 pi i k j / n} since x_0 = -R
  for (std::size_t i = 0; i < data.size(); ++i) data[i] *= hd * detail::parity(g, i);
  return {g, std::move(data)};
}

inline ComplexField inverse_transform_complex(const Spectrum& s, Extension ext = Extension::ZeroOutside) {
  const TorusGrid& g = s.grid;
  if (s.c.size() != g.size()) throw SizeMismatch("inverse_transform: coefficient count must be n^d");
  std::vector<cplx> data(s.c);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] *= detail::parity(g, i);
  detail::fft_inplace(g, data, FFTW_BACKWARD);
  double inv = 1.0 / g.volume();
  for (auto& v : data) v *= inv;
  return ComplexField(g, std::move(data), ext);
}

// Real part of the inverse transform.
inline ScalarField inverse_transform(const Spectrum& s, Extension ext = Extension::ZeroOutside) {
  ComplexField z = inverse_transform_complex(s, ext);
  std::vector<double> v(z.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = z[i].real();
  return ScalarField(s.grid, std::move(v), ext);
}

// Apply a Fourier multiplier mult(idx) (conjugate-symmetric for real output).
// At self-conjugate nodes only the real part of the multiplier is used so the
// result stays real.
template <class M>
ScalarField apply_multiplier(const ScalarField& u, M&& mult) {
  Spectrum s = transform(u);
  const TorusGrid& g = u.grid();
  for (std::size_t i = 0; i < s.c.size(); ++i) {
    cplx m = mult(i);
    if (g.self_conjugate(i)) m = m.real();
    s.c[i] *= m;
  }
  return inverse_transform(s, u.extension());
}

// Lattice Plancherel: int u v dx for the trigonometric interpolants.
inline double inner_product(const ScalarField& u, const ScalarField& v) {
  if (!(u.grid() == v.grid())) throw SizeMismatch("inner_product: grids differ");
  double s = 0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s * u.grid().cell_volume();
}

}  // namespace nle
