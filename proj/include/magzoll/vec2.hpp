#pragma once

#include <cmath>

namespace magzoll {

/// Point or tangent vector in chart coordinates.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend constexpr Vec2 operator/(const Vec2& a, double s) { return {a.x / s, a.y / s}; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }

/// Row-major 2x2 matrix. For lattices the columns are the generators.
struct Mat2 {
  double a11 = 1.0, a12 = 0.0;
  double a21 = 0.0, a22 = 1.0;

  constexpr double det() const { return a11 * a22 - a12 * a21; }
  constexpr Vec2 operator*(const Vec2& v) const { return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y}; }
  constexpr Vec2 column(int i) const { return i == 0 ? Vec2{a11, a21} : Vec2{a12, a22}; }
  constexpr Mat2 inverse() const {
    const double d = det();
    return {a22 / d, -a12 / d, -a21 / d, a11 / d};
  }
  constexpr Mat2 transpose() const { return {a11, a21, a12, a22}; }
};

/// Symmetric metric tensor in chart coordinates.
struct Metric {
  double g11 = 1.0, g12 = 0.0, g22 = 1.0;

  constexpr double operator()(const Vec2& u, const Vec2& v) const {
    return g11 * u.x * v.x + g12 * (u.x * v.y + u.y * v.x) + g22 * u.y * v.y;
  }
  constexpr Vec2 lower(const Vec2& v) const { return {g11 * v.x + g12 * v.y, g12 * v.x + g22 * v.y}; }
  constexpr double det() const { return g11 * g22 - g12 * g12; }
  double norm(const Vec2& v) const { return std::sqrt((*this)(v, v)); }
};

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, kTwoPi);
  return a <= -kPi ? a + kTwoPi : a;
}

}  // namespace magzoll
