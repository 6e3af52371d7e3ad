#pragma once

#include <cmath>
#include <utility>

namespace tumor_sde {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  double norm() const { return std::hypot(x, y); }
  double norm2() const { return x * x + y * y; }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
inline Vec2 operator/(Vec2 v, double s) { return {v.x / s, v.y / s}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

struct Mat2 {
  double a11 = 0.0, a12 = 0.0;
  double a21 = 0.0, a22 = 0.0;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static Mat2 diagonal(double d1, double d2) { return {d1, 0.0, 0.0, d2}; }

  double trace() const { return a11 + a22; }
  double det() const { return a11 * a22 - a12 * a21; }
  bool zero() const { return a11 == 0.0 && a12 == 0.0 && a21 == 0.0 && a22 == 0.0; }
  bool finite() const {
    return std::isfinite(a11) && std::isfinite(a12) && std::isfinite(a21) && std::isfinite(a22);
  }

  // Real parts of the two eigenvalues, larger one first.
  std::pair<double, double> eig_real_parts() const {
    const double half_tr = 0.5 * trace();
    const double disc = half_tr * half_tr - det();
    if (disc >= 0.0) {
      const double r = std::sqrt(disc);
      return {half_tr + r, half_tr - r};
    }
    return {half_tr, half_tr};
  }
  double max_real_eig() const { return eig_real_parts().first; }
};

inline Vec2 operator*(const Mat2& m, Vec2 v) {
  return {m.a11 * v.x + m.a12 * v.y, m.a21 * v.x + m.a22 * v.y};
}
inline Mat2 operator*(const Mat2& a, const Mat2& b) {
  return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
          a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
}
inline Mat2 operator+(const Mat2& a, const Mat2& b) {
  return {a.a11 + b.a11, a.a12 + b.a12, a.a21 + b.a21, a.a22 + b.a22};
}
inline Mat2 operator*(double s, const Mat2& m) {
  return {s * m.a11, s * m.a12, s * m.a21, s * m.a22};
}

// Solves m * x = rhs; returns false when |det| is below the cutoff.
inline bool solve2(const Mat2& m, Vec2 rhs, Vec2& out, double det_cutoff = 1e-14) {
  const double d = m.det();
  const double scale = std::fabs(m.a11) + std::fabs(m.a12) + std::fabs(m.a21) + std::fabs(m.a22);
  if (std::fabs(d) <= det_cutoff * std::max(1.0, scale * scale)) return false;
  out = {(rhs.x * m.a22 - rhs.y * m.a12) / d, (rhs.y * m.a11 - rhs.x * m.a21) / d};
  return true;
}

}  // namespace tumor_sde
