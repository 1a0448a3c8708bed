#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace elstab {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }
constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& v) { return std::hypot(v.x, v.y); }

/// Polar angle in [0, 2π).
inline double polar_angle(const Vec2& p) {
  double t = std::atan2(p.y, p.x);
  if (t < 0.0) t += 2.0 * std::numbers::pi;
  return t;
}

inline Vec2 from_polar(double r, double theta) { return {r * std::cos(theta), r * std::sin(theta)}; }

/// Dense 2×2 matrix, row-major.
struct Mat2 {
  double a = 0.0, b = 0.0;  // row 0
  double c = 0.0, d = 0.0;  // row 1

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr Mat2 diag(double p, double q) { return {p, 0.0, 0.0, q}; }

  constexpr Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
  constexpr Mat2 operator-(const Mat2& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }
  constexpr Mat2 operator*(double s) const { return {a * s, b * s, c * s, d * s}; }
  constexpr Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  constexpr Vec2 operator*(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }

  constexpr Mat2 transposed() const { return {a, c, b, d}; }
  constexpr double det() const { return a * d - b * c; }
  constexpr double trace() const { return a + d; }
  /// Inverse; caller guarantees det() != 0.
  constexpr Mat2 inverse() const {
    const double idet = 1.0 / det();
    return {d * idet, -b * idet, -c * idet, a * idet};
  }
  double max_abs() const { return std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)}); }
  double asymmetry() const { return std::abs(b - c); }
};

inline Mat2 outer(const Vec2& u, const Vec2& v) { return {u.x * v.x, u.x * v.y, u.y * v.x, u.y * v.y}; }

/// Eigen-decomposition of a symmetric 2×2 matrix: values ascending, unit vectors.
struct SymEigen2 {
  std::array<double, 2> values{};
  std::array<Vec2, 2> vectors{};
};

/// Closed-form eigensystem of the symmetric part of m.
inline SymEigen2 sym_eigen(const Mat2& m) {
  const double p = m.a;
  const double q = m.d;
  const double s = 0.5 * (m.b + m.c);
  const double mean = 0.5 * (p + q);
  const double half_diff = 0.5 * (p - q);
  const double rad = std::hypot(half_diff, s);
  SymEigen2 out;
  out.values = {mean - rad, mean + rad};
  // Rotation angle of the eigenbasis; atan2 is stable for every input including s = 0.
  const double phi = 0.5 * std::atan2(2.0 * s, p - q);
  const Vec2 e_max{std::cos(phi), std::sin(phi)};
  const Vec2 e_min{-std::sin(phi), std::cos(phi)};
  out.vectors = {e_min, e_max};
  return out;
}

/// Spectral norm of a general 2×2 matrix (largest singular value).
inline double spectral_norm(const Mat2& m) {
  const SymEigen2 e = sym_eigen(m.transposed() * m);
  return std::sqrt(std::max(0.0, e.values[1]));
}

}  // namespace elstab
