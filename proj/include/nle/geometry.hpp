#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace nle {

// Points and frequencies are always stored with three components; unused
// trailing components are zero, so dot products and norms need no dimension.
using Vec = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

inline double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec operator+(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec operator-(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec operator*(double s, const Vec& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline Vec& operator+=(Vec& a, const Vec& b) {
  for (int i = 0; i < 3; ++i) a[i] += b[i];
  return a;
}

inline Mat3 outer(const Vec& a, const Vec& b) {
  Mat3 m{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m[i][j] = a[i] * b[j];
  return m;
}

inline Mat3& operator+=(Mat3& a, const Mat3& b) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a[i][j] += b[i][j];
  return a;
}

inline Mat3 operator*(double s, const Mat3& a) {
  Mat3 m = a;
  for (auto& row : m)
    for (auto& v : row) v *= s;
  return m;
}

// Frobenius inner product A : B.
inline double contract(const Mat3& a, const Mat3& b) {
  double s = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s += a[i][j] * b[i][j];
  return s;
}

inline double trace(const Mat3& a) { return a[0][0] + a[1][1] + a[2][2]; }

// |S^{d-1}|
inline double sphere_area(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    default: return 4.0 * std::numbers::pi;
  }
}

// Volume of the unit ball in R^d.
inline double ball_volume(int d) { return sphere_area(d) / d; }

}  // namespace nle
