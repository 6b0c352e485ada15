#pragma once

// Kernels K(y) = a(y) / |y|^{d+sigma} with a piecewise constant on a polar mesh.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "constants.hpp"
#include "error.hpp"
#include "geometry.hpp"

namespace nle {

inline constexpr double kDefaultRMin = 1e-6;
inline constexpr double kDefaultRMax = 1e3;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline int default_n_theta(int d) { return d == 1 ? 2 : (d == 2 ? 8 : 4); }

// int_lo^hi r^p dr; hi may be +inf (needs p < -1), lo may be 0 (needs p > -1).
inline double radial_power_integral(double lo, double hi, double p) {
  if (!(hi > lo)) return 0.0;
  if (std::isinf(hi) && p >= -1.0) throw DomainError("radial integral diverges at infinity");
  if (lo == 0.0 && p <= -1.0) throw DomainError("radial integral diverges at the origin");
  if (p == -1.0) return std::log(hi / lo);
  double q = p + 1.0;
  double top = std::isinf(hi) ? 0.0 : std::pow(hi, q);
  double bot = lo == 0.0 ? 0.0 : std::pow(lo, q);
  return (top - bot) / q;
}

// Radial shells x angular cells. Shell 0 extends down to 0 and the last shell
// up to infinity, so a is extended constantly outside [r_min, r_max].
//   d=1: cells {+, -}
//   d=2: n_theta equal sectors in the polar angle
//   d=3: n_theta/2 equal-area z-bands times n_theta azimuthal sectors
class PolarMesh {
 public:
  PolarMesh(int d, std::vector<double> edges, int n_theta) : d_(d), edges_(std::move(edges)), n_theta_(n_theta) {
    if (d < 1 || d > 3) throw DomainError("PolarMesh: d must be 1, 2 or 3");
    if (edges_.size() < 2) throw DomainError("PolarMesh: need at least two radial edges");
    for (std::size_t i = 0; i + 1 < edges_.size(); ++i)
      if (!(edges_[i] > 0.0 && edges_[i + 1] > edges_[i]))
        throw DomainError("PolarMesh: radial edges must be positive and increasing");
    if (d == 1 && n_theta != 2) throw DomainError("PolarMesh: d=1 requires theta_cells = 2");
    if (d >= 2 && (n_theta < 2 || n_theta % 2 != 0)) throw DomainError("PolarMesh: theta_cells must be even and >= 2");
    build_cells();
  }

  static PolarMesh log_spaced(int d, int n_r, int n_theta, double r_min = kDefaultRMin,
                              double r_max = kDefaultRMax) {
    if (n_r < 1) throw DomainError("PolarMesh: n_r must be >= 1");
    if (!(r_min > 0 && r_max > r_min)) throw DomainError("PolarMesh: need 0 < r_min < r_max");
    std::vector<double> e(n_r + 1);
    double lr = std::log(r_min), ur = std::log(r_max);
    for (int i = 0; i <= n_r; ++i) e[i] = std::exp(lr + (ur - lr) * i / n_r);
    e.front() = r_min;
    e.back() = r_max;
    return PolarMesh(d, std::move(e), n_theta);
  }

  int dim() const { return d_; }
  int n_shells() const { return static_cast<int>(edges_.size()) - 1; }
  int n_theta() const { return n_theta_; }
  int n_cells() const { return static_cast<int>(w_.size()); }
  const std::vector<double>& edges() const { return edges_; }

  double shell_lo(int i) const { return i == 0 ? 0.0 : edges_[i]; }
  double shell_hi(int i) const { return i == n_shells() - 1 ? kInf : edges_[i + 1]; }

  int shell_of(double r) const {
    // interior edges are edges_[1 .. n_shells-1]
    auto first = edges_.begin() + 1, last = edges_.end() - 1;
    return static_cast<int>(std::upper_bound(first, last, r) - first);
  }

  // dir need not be normalised.
  int cell_of(const Vec& dir) const {
    if (d_ == 1) return dir[0] > 0 ? 0 : 1;
    double phi = std::atan2(dir[1], dir[0]);
    if (phi < 0) phi += 2 * std::numbers::pi;
    int k = std::clamp(static_cast<int>(phi / (2 * std::numbers::pi) * n_theta_), 0, n_theta_ - 1);
    if (d_ == 2) return k;
    int nb = n_bands();
    double z = dir[2] / norm(dir);
    int j = std::clamp(static_cast<int>((z + 1.0) * 0.5 * nb), 0, nb - 1);
    return j * n_theta_ + k;
  }

  int antipode(int c) const {
    if (d_ == 1) return 1 - c;
    if (d_ == 2) return (c + n_theta_ / 2) % n_theta_;
    int j = c / n_theta_, k = c % n_theta_;
    return (n_bands() - 1 - j) * n_theta_ + (k + n_theta_ / 2) % n_theta_;
  }

  int n_bands() const { return d_ == 3 ? n_theta_ / 2 : 1; }

  // Angular parameter box of a cell: d=2 -> theta in [a0,a1]; d=3 -> z in [a0,a1], phi in [b0,b1].
  struct CellBox {
    double a0, a1, b0, b1;
  };
  CellBox cell_box(int c) const {
    const double tp = 2 * std::numbers::pi;
    if (d_ == 1) return {0, 0, 0, 0};
    int k = c % n_theta_;
    double p0 = tp * k / n_theta_, p1 = tp * (k + 1) / n_theta_;
    if (d_ == 2) return {p0, p1, 0, 0};
    int j = c / n_theta_, nb = n_bands();
    return {-1.0 + 2.0 * j / nb, -1.0 + 2.0 * (j + 1) / nb, p0, p1};
  }

  static Vec direction(int d, double a, double b = 0.0) {
    if (d == 2) return {std::cos(a), std::sin(a), 0.0};
    double rho = std::sqrt(std::max(0.0, 1.0 - a * a));
    return {rho * std::cos(b), rho * std::sin(b), a};
  }

  // Representative direction (cell centre in parameter space).
  Vec cell_center(int c) const {
    if (d_ == 1) return {c == 0 ? 1.0 : -1.0, 0, 0};
    CellBox bx = cell_box(c);
    if (d_ == 2) return direction(2, 0.5 * (bx.a0 + bx.a1));
    return direction(3, 0.5 * (bx.a0 + bx.a1), 0.5 * (bx.b0 + bx.b1));
  }

  double shell_center(int i) const {
    if (n_shells() == 1) return 1.0;
    if (i == 0) return 0.5 * edges_[1];
    if (i == n_shells() - 1) return 2.0 * edges_[i];
    return std::sqrt(edges_[i] * edges_[i + 1]);
  }

  double cell_measure(int c) const { return w_[c]; }
  const Vec& cell_moment(int c) const { return m_[c]; }
  const Mat3& cell_second_moment(int c) const { return s_[c]; }

  // Cells c with c < antipode(c); one representative of each antipodal pair.
  const std::vector<int>& canonical_cells() const { return canon_; }

  PolarMesh scaled(double R) const {
    std::vector<double> e = edges_;
    for (auto& v : e) v /= R;
    return PolarMesh(d_, std::move(e), n_theta_);
  }

  bool same_layout(const PolarMesh& o) const {
    return d_ == o.d_ && n_theta_ == o.n_theta_ && edges_ == o.edges_;
  }

 private:
  void build_cells() {
    int nc = d_ == 1 ? 2 : (d_ == 2 ? n_theta_ : n_theta_ * n_bands());
    w_.assign(nc, 0.0);
    m_.assign(nc, Vec{});
    s_.assign(nc, Mat3{});
    for (int c = 0; c < nc; ++c) {
      int a = antipode(c);
      if (c > a) continue;
      if (c < a) canon_.push_back(c);
      compute_cell(c);
      w_[a] = w_[c];
      m_[a] = -1.0 * m_[c];
      s_[a] = s_[c];
    }
  }

  void compute_cell(int c) {
    if (d_ == 1) {
      double sgn = c == 0 ? 1.0 : -1.0;
      w_[c] = 1.0;
      m_[c] = {sgn, 0, 0};
      s_[c] = Mat3{};
      s_[c][0][0] = 1.0;
      return;
    }
    CellBox bx = cell_box(c);
    if (d_ == 2) {
      double t0 = bx.a0, t1 = bx.a1;
      w_[c] = t1 - t0;
      m_[c] = {std::sin(t1) - std::sin(t0), std::cos(t0) - std::cos(t1), 0};
      Mat3 s{};
      s[0][0] = 0.5 * (t1 - t0) + 0.25 * (std::sin(2 * t1) - std::sin(2 * t0));
      s[1][1] = 0.5 * (t1 - t0) - 0.25 * (std::sin(2 * t1) - std::sin(2 * t0));
      s[0][1] = s[1][0] = 0.5 * (std::sin(t1) * std::sin(t1) - std::sin(t0) * std::sin(t0));
      s_[c] = s;
      return;
    }
    double z0 = bx.a0, z1 = bx.a1, p0 = bx.b0, p1 = bx.b1;
    auto Q = [](double z) { return 0.5 * (z * std::sqrt(std::max(0.0, 1 - z * z)) + std::asin(z)); };
    auto P = [](double z) { return -std::pow(std::max(0.0, 1 - z * z), 1.5) / 3.0; };  // int z rho dz
    double dz = z1 - z0, dp = p1 - p0;
    double q = Q(z1) - Q(z0);
    double rho2 = dz - (z1 * z1 * z1 - z0 * z0 * z0) / 3.0;
    double zz = (z1 * z1 * z1 - z0 * z0 * z0) / 3.0;
    double pz = P(z1) - P(z0);
    double cs = std::sin(p1) - std::sin(p0), sn = std::cos(p0) - std::cos(p1);
    double c2 = 0.5 * dp + 0.25 * (std::sin(2 * p1) - std::sin(2 * p0));
    double s2 = 0.5 * dp - 0.25 * (std::sin(2 * p1) - std::sin(2 * p0));
    double sc = 0.5 * (std::sin(p1) * std::sin(p1) - std::sin(p0) * std::sin(p0));
    w_[c] = dz * dp;
    m_[c] = {q * cs, q * sn, dp * 0.5 * (z1 * z1 - z0 * z0)};
    Mat3 s{};
    s[0][0] = rho2 * c2;
    s[1][1] = rho2 * s2;
    s[2][2] = dp * zz;
    s[0][1] = s[1][0] = rho2 * sc;
    s[0][2] = s[2][0] = pz * cs;
    s[1][2] = s[2][1] = pz * sn;
    s_[c] = s;
  }

  int d_;
  std::vector<double> edges_;
  int n_theta_;
  std::vector<double> w_;
  std::vector<Vec> m_;
  std::vector<Mat3> s_;
  std::vector<int> canon_;
};

// Piecewise-constant (possibly signed) angular-radial density on a mesh.
class Density {
 public:
  Density(std::shared_ptr<const PolarMesh> mesh, std::vector<double> values)
      : mesh_(std::move(mesh)), v_(std::move(values)) {
    if (!mesh_) throw DomainError("Density: null mesh");
    if (v_.size() != static_cast<std::size_t>(mesh_->n_shells() * mesh_->n_cells()))
      throw SizeMismatch("Density: value count does not match mesh");
    for (double x : v_)
      if (!std::isfinite(x)) throw DomainError("Density: non-finite value");
  }

  static Density constant(std::shared_ptr<const PolarMesh> mesh, double value) {
    std::vector<double> v(mesh->n_shells() * mesh->n_cells(), value);
    return Density(std::move(mesh), std::move(v));
  }

  // Procedural a(y): sampled once per cell at the cell's representative point.
  static Density sample(std::shared_ptr<const PolarMesh> mesh, const std::function<double(const Vec&)>& a) {
    std::vector<double> v(mesh->n_shells() * mesh->n_cells());
    for (int i = 0; i < mesh->n_shells(); ++i)
      for (int c = 0; c < mesh->n_cells(); ++c)
        v[i * mesh->n_cells() + c] = a(mesh->shell_center(i) * mesh->cell_center(c));
    return Density(std::move(mesh), std::move(v));
  }

  const PolarMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const PolarMesh>& mesh_ptr() const { return mesh_; }
  const std::vector<double>& values() const { return v_; }
  double at(int shell, int cell) const { return v_[shell * mesh_->n_cells() + cell]; }

  double operator()(const Vec& y) const {
    double r = norm(y);
    if (r == 0.0) throw DomainError("density evaluated at y = 0");
    return at(mesh_->shell_of(r), mesh_->cell_of(y));
  }

  double min_value() const { return *std::min_element(v_.begin(), v_.end()); }
  double max_value() const { return *std::max_element(v_.begin(), v_.end()); }

  // sum_c a(shell, c) * int_cell omega dS, summed over antipodal pairs so that
  // symmetric densities give exactly zero.
  Vec angular_first_moment(int shell) const {
    Vec s{};
    for (int c : mesh_->canonical_cells()) {
      double diff = at(shell, c) - at(shell, mesh_->antipode(c));
      s += diff * mesh_->cell_moment(c);
    }
    return s;
  }

  double angular_zeroth_moment(int shell) const {
    double s = 0;
    for (int c = 0; c < mesh_->n_cells(); ++c) s += at(shell, c) * mesh_->cell_measure(c);
    return s;
  }

  Mat3 angular_second_moment(int shell) const {
    Mat3 s{};
    for (int c = 0; c < mesh_->n_cells(); ++c) s += at(shell, c) * mesh_->cell_second_moment(c);
    return s;
  }

  // Radial integrals over lo <= r < hi of r^p times the angular moments.
  // With p = -1-sigma the zeroth one is int K dy over the annulus,
  // p = -sigma gives int y K dy, p = 1-sigma gives int y y^T K dy.
  double radial_zeroth(double lo, double hi, double p) const {
    double s = 0;
    for_shells(lo, hi, [&](int i, double a, double b) { s += angular_zeroth_moment(i) * radial_power_integral(a, b, p); });
    return s;
  }
  Vec radial_first(double lo, double hi, double p) const {
    Vec s{};
    for_shells(lo, hi, [&](int i, double a, double b) {
      Vec m = angular_first_moment(i);
      if (m[0] != 0 || m[1] != 0 || m[2] != 0) s += radial_power_integral(a, b, p) * m;
    });
    return s;
  }
  Mat3 radial_second(double lo, double hi, double p) const {
    Mat3 s{};
    for_shells(lo, hi, [&](int i, double a, double b) { s += radial_power_integral(a, b, p) * angular_second_moment(i); });
    return s;
  }

  Density reflected() const {
    std::vector<double> v(v_.size());
    int nc = mesh_->n_cells();
    for (int i = 0; i < mesh_->n_shells(); ++i)
      for (int c = 0; c < nc; ++c) v[i * nc + c] = at(i, mesh_->antipode(c));
    return Density(mesh_, std::move(v));
  }

  Density scaled(double R) const { return Density(std::make_shared<PolarMesh>(mesh_->scaled(R)), v_); }

  bool is_symmetric() const {
    int nc = mesh_->n_cells();
    for (int i = 0; i < mesh_->n_shells(); ++i)
      for (int c = 0; c < nc; ++c)
        if (at(i, c) != at(i, mesh_->antipode(c))) return false;
    return true;
  }

  Density operator+(const Density& o) const { return combine(o, 1.0); }
  Density operator-(const Density& o) const { return combine(o, -1.0); }

  // f(shell, lo', hi') for each shell meeting [lo, hi)
  template <class F>
  void for_shells(double lo, double hi, F&& f) const {
    for (int i = 0; i < mesh_->n_shells(); ++i) {
      double a = std::max(lo, mesh_->shell_lo(i)), b = std::min(hi, mesh_->shell_hi(i));
      if (b > a) f(i, a, b);
    }
  }

 private:
  Density combine(const Density& o, double s) const {
    if (!mesh_->same_layout(o.mesh())) throw SizeMismatch("Density: meshes differ");
    std::vector<double> v(v_);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] += s * o.v_[k];
    return Density(mesh_, std::move(v));
  }

  std::shared_ptr<const PolarMesh> mesh_;
  std::vector<double> v_;
};

// Compensator chi^{(sigma)}.
struct Chi {
  enum class Kind { Zero, BallIndicator, One };
  Kind kind;
  double radius;  // only meaningful for BallIndicator

  static Chi for_sigma(double sigma, double radius = 1.0) {
    if (sigma < 1.0) return {Kind::Zero, 0.0};
    if (sigma > 1.0) return {Kind::One, 0.0};
    if (!(radius > 0.0)) throw DomainError("Chi: ball radius must be positive");
    return {Kind::BallIndicator, radius};
  }
  // chi(y) for |y| = r
  bool active(double r) const {
    switch (kind) {
      case Kind::Zero: return false;
      case Kind::One: return true;
      default: return r < radius;
    }
  }
};

class KernelSpec {
 public:
  KernelSpec(int d, double sigma, double nu, double lambda_up, Density a, double chi_radius = 1.0)
      : d_(d), sigma_(sigma), nu_(nu), lambda_up_(lambda_up), a_(std::move(a)), chi_radius_(chi_radius) {
    if (d < 1 || d > 3) throw DomainError("KernelSpec: d must be 1, 2 or 3");
    if (!(sigma > 0.0 && sigma < 2.0)) throw DomainError("KernelSpec: sigma must lie in (0,2)");
    if (!(nu >= 0.0 && lambda_up >= nu && lambda_up > 0.0)) throw DomainError("KernelSpec: need 0 <= nu <= Lambda, Lambda > 0");
    if (a_.mesh().dim() != d) throw DomainError("KernelSpec: mesh dimension differs from d");
    if (!(chi_radius > 0.0)) throw DomainError("KernelSpec: chi radius must be positive");
    symmetric_ = a_.is_symmetric();
  }

  int d() const { return d_; }
  double sigma() const { return sigma_; }
  double nu() const { return nu_; }
  double lambda_up() const { return lambda_up_; }
  const Density& a() const { return a_; }
  bool symmetric() const { return symmetric_; }
  double chi_radius() const { return chi_radius_; }
  Chi chi() const { return Chi::for_sigma(sigma_, chi_radius_); }
  double band_lo() const { return (2.0 - sigma_) * nu_; }
  double band_hi() const { return (2.0 - sigma_) * lambda_up_; }

  KernelSpec with_density(Density a) const { return KernelSpec(d_, sigma_, nu_, lambda_up_, std::move(a), chi_radius_); }
  KernelSpec with_chi_radius(double r) const { return KernelSpec(d_, sigma_, nu_, lambda_up_, a_, r); }
  // K*(y) = K(-y)
  KernelSpec reflected() const { return with_density(a_.reflected()); }
  // K_R(z) = R^{d+sigma} K(R z), i.e. a_R(z) = a(R z).
  KernelSpec scaled(double R) const {
    if (!(R > 0)) throw DomainError("KernelSpec::scaled: R must be positive");
    return KernelSpec(d_, sigma_, nu_, lambda_up_, a_.scaled(R), chi_radius_ / R);
  }

 private:
  int d_;
  double sigma_, nu_, lambda_up_;
  Density a_;
  double chi_radius_;
  bool symmetric_ = false;
};

inline double eval_kernel(const KernelSpec& spec, const Vec& y) {
  double r = norm(y);
  if (r == 0.0) throw DomainError("eval_kernel: kernel is singular at y = 0");
  return spec.a()(y) / std::pow(r, spec.d() + spec.sigma());
}

// a == value on a single-shell mesh.
inline KernelSpec uniform_kernel(int d, double sigma, double nu, double lambda_up, double value, int n_theta = 0) {
  if (n_theta == 0) n_theta = default_n_theta(d);
  auto mesh = std::make_shared<PolarMesh>(PolarMesh::log_spaced(d, 1, n_theta));
  return KernelSpec(d, sigma, nu, lambda_up, Density::constant(mesh, value));
}

// a == 1/c(d,sigma): the kernel of -(-Delta)^{sigma/2}.
inline KernelSpec fractional_kernel(int d, double sigma, int n_theta = 0) {
  double a = 1.0 / frac_laplace_constant(d, sigma);
  double nu = 1.0 / frac_laplace_constant_times_band(d, sigma);
  return uniform_kernel(d, sigma, nu, nu, a, n_theta);
}

struct EllipticityReport {
  double min_ratio;  // min a / (2 - sigma), compare against nu
  double max_ratio;  // max a / (2 - sigma), compare against Lambda
  bool pass;
};

inline EllipticityReport check_ellipticity(const KernelSpec& spec, int n_samples, std::uint64_t seed = 0) {
  if (n_samples < 1) throw DomainError("check_ellipticity: n_samples must be >= 1");
  double lo = spec.a().min_value(), hi = spec.a().max_value();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> logr(std::log(1e-8), std::log(1e4));
  for (int s = 0; s < n_samples; ++s) {
    Vec y{};
    for (int k = 0; k < spec.d(); ++k) y[k] = gauss(rng);
    double n = norm(y);
    if (n == 0) continue;
    y = (std::exp(logr(rng)) / n) * y;
    double v = spec.a()(y);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double band = 2.0 - spec.sigma();
  EllipticityReport r{lo / band, hi / band, false};
  const double rel = 1e-12;
  r.pass = r.min_ratio >= spec.nu() * (1 - rel) && r.max_ratio <= spec.lambda_up() * (1 + rel);
  return r;
}

// int_{dB_r} y K(y) dS(y)
inline Vec cancellation_defect(const Density& a, double sigma, double r) {
  if (!(r > 0)) throw DomainError("cancellation_defect: r must be positive");
  return std::pow(r, -sigma) * a.angular_first_moment(a.mesh().shell_of(r));
}
inline Vec cancellation_defect(const KernelSpec& spec, double r) { return cancellation_defect(spec.a(), spec.sigma(), r); }

// Largest per-shell |sum_c a m_c| (the defect with the r^{-sigma} factor removed).
inline double max_shell_moment(const Density& a) {
  double m = 0;
  for (int i = 0; i < a.mesh().n_shells(); ++i) m = std::max(m, norm(a.angular_first_moment(i)));
  return m;
}

enum class DecompositionMode { EvenOdd, MinResidual };

struct KernelParts {
  KernelSpec main;   // K_e or K_1 (symmetric)
  Density residual;  // K_o (signed) or K_2 (>= 0)
};

inline KernelParts decompose(const KernelSpec& spec, DecompositionMode mode) {
  const Density& a = spec.a();
  const PolarMesh& mesh = a.mesh();
  int nc = mesh.n_cells();
  std::vector<double> p1(a.values().size()), p2(a.values().size());
  for (int i = 0; i < mesh.n_shells(); ++i)
    for (int c = 0; c < nc; ++c) {
      double x = a.at(i, c), y = a.at(i, mesh.antipode(c));
      double m = mode == DecompositionMode::EvenOdd ? 0.5 * (x + y) : std::min(x, y);
      p1[i * nc + c] = m;
      p2[i * nc + c] = x - m;
    }
  Density e(a.mesh_ptr(), std::move(p1));
  // force exact symmetry of the first part (0.5*(x+y) is symmetric in x,y already)
  return {spec.with_density(std::move(e)), Density(a.mesh_ptr(), std::move(p2))};
}

// b = -int_{B_1} y K (sigma < 1), b = int_{|y|>1} y K (sigma > 1).
inline Vec drift_vector(const KernelSpec& spec) {
  double s = spec.sigma();
  if (s == 1.0) throw UnsupportedError("drift_vector: undefined for sigma = 1");
  if (s < 1.0) return -1.0 * spec.a().radial_first(0.0, 1.0, -s);
  return spec.a().radial_first(1.0, kInf, -s);
}

// Per shell: remove the first angular moment from the odd part of a by an
// orthogonal projection, then shrink the odd part just enough to stay inside
// the ellipticity band. Shrinking keeps the moment at zero.
inline KernelSpec enforce_cancellation(const KernelSpec& spec, double tol = 1e-12) {
  const Density& a = spec.a();
  const PolarMesh& mesh = a.mesh();
  const auto& canon = mesh.canonical_cells();
  int nc = mesh.n_cells(), d = spec.d();
  double lo = spec.band_lo(), hi = spec.band_hi();
  std::vector<double> out(a.values());
  for (int i = 0; i < mesh.n_shells(); ++i) {
    std::size_t nh = canon.size();
    std::vector<double> even(nh), odd(nh), w(nh);
    for (std::size_t k = 0; k < nh; ++k) {
      int c = canon[k], cp = mesh.antipode(c);
      even[k] = 0.5 * (a.at(i, c) + a.at(i, cp));
      odd[k] = 0.5 * (a.at(i, c) - a.at(i, cp));
      w[k] = mesh.cell_measure(c);
    }
    // psi_j(c) = m_c[j] / w_c ; <f,g> = sum f g w. Orthonormalise, then project out.
    std::vector<std::vector<double>> basis;
    for (int j = 0; j < d; ++j) {
      std::vector<double> psi(nh);
      for (std::size_t k = 0; k < nh; ++k) psi[k] = mesh.cell_moment(canon[k])[j] / w[k];
      for (int pass = 0; pass < 2; ++pass)
        for (auto& b : basis) {
          double ip = 0;
          for (std::size_t k = 0; k < nh; ++k) ip += psi[k] * b[k] * w[k];
          for (std::size_t k = 0; k < nh; ++k) psi[k] -= ip * b[k];
        }
      double nn = 0;
      for (std::size_t k = 0; k < nh; ++k) nn += psi[k] * psi[k] * w[k];
      if (nn < 1e-24) continue;
      for (auto& v : psi) v /= std::sqrt(nn);
      basis.push_back(std::move(psi));
    }
    for (int pass = 0; pass < 2; ++pass)
      for (auto& b : basis) {
        double ip = 0;
        for (std::size_t k = 0; k < nh; ++k) ip += odd[k] * b[k] * w[k];
        for (std::size_t k = 0; k < nh; ++k) odd[k] -= ip * b[k];
      }
    double t = 1.0;
    for (std::size_t k = 0; k < nh; ++k) {
      double o = std::abs(odd[k]);
      if (o == 0) continue;
      t = std::min(t, std::max(0.0, std::min(hi - even[k], even[k] - lo)) / o);
    }
    for (std::size_t k = 0; k < nh; ++k) {
      int c = canon[k], cp = mesh.antipode(c);
      out[i * nc + c] = even[k] + t * odd[k];
      out[i * nc + cp] = even[k] - t * odd[k];
    }
  }
  KernelSpec res = spec.with_density(Density(a.mesh_ptr(), std::move(out)));
  double defect = max_shell_moment(res.a());
  if (defect > tol) throw NumericalError("enforce_cancellation: residual first moment above tolerance", defect);
  return res;
}

// Uniform double in [0,1) from the top 53 bits; portable across standard libraries.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline KernelSpec make_random_kernel(int d, double sigma, double nu, double lambda_up, std::uint64_t seed,
                                     int n_r = 16, int n_theta = 0) {
  if (n_theta == 0) n_theta = default_n_theta(d);
  auto mesh = std::make_shared<PolarMesh>(PolarMesh::log_spaced(d, n_r, n_theta));
  if (!(sigma > 0.0 && sigma < 2.0)) throw DomainError("make_random_kernel: sigma must lie in (0,2)");
  if (!(nu >= 0.0 && lambda_up >= nu && lambda_up > 0.0)) throw DomainError("make_random_kernel: need 0 <= nu <= Lambda");
  double lo = (2.0 - sigma) * nu, hi = (2.0 - sigma) * lambda_up;
  std::mt19937_64 rng(seed);
  std::vector<double> v(mesh->n_shells() * mesh->n_cells());
  for (auto& x : v) x = lo + (hi - lo) * unit_uniform(rng);
  if (nu == lambda_up) std::fill(v.begin(), v.end(), lo);
  KernelSpec k(d, sigma, nu, lambda_up, Density(mesh, std::move(v)));
  if (sigma == 1.0) k = enforce_cancellation(k);
  return k;
}

}  // namespace nle
