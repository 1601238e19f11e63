#pragma once

#include <cmath>
#include <random>
#include <type_traits>

#include "magzoll/dual.hpp"
#include "magzoll/geometry.hpp"

namespace magzoll::test {

inline MagneticSurface unit_torus(const char* f = "1") {
  return MagneticSurface::flat_torus(Mat2{}, Expression::parse(f));
}

inline MagneticSurface round_sphere(const char* f = "1", double r = 1.0) {
  return MagneticSurface::round_sphere(r, Expression::parse(f));
}

/// a = sin(theta) - 0.2 sin^9(theta): a neck at theta = pi/2 with a = 0.8.
inline MagneticSurface neck(const char* f = "1") {
  const Profile p = Profile::from_expressions(Expression::parse("sin(t) - 0.2*sin(t)^9"),
                                              Expression::parse("cos(t) - 1.8*sin(t)^8*cos(t)"),
                                              Expression::parse("-sin(t) - 14.4*sin(t)^7*cos(t)^2 + 1.8*sin(t)^9"),
                                              kPi);
  return MagneticSurface::sphere_of_revolution(p, Expression::parse(f));
}

// Smooth step with exact plateaus, built from exp(-1/x).
template <class T>
T psi(const T& x) {
  using std::exp;
  return value_of(x) <= 0.0 ? T(0.0) : exp(T(-1.0) / x);
}
template <class T>
T smooth_step(const T& x) {
  const T a = psi(x), b = psi(T(1.0) - x);
  return a / (a + b);
}

/// Sphere-like profile with a flat neck band: a = 0.8 for |theta - pi/2| <= 0.1,
/// blending into sin(theta) beyond 0.4.
template <class T>
T band_profile(const T& t) {
  using std::sin;
  const double d = std::abs(value_of(t) - kPi / 2);
  const T s = value_of(t) < kPi / 2 ? T(kPi / 2) - t : t - T(kPi / 2);
  const T w = d <= 0.1 ? T(1.0) : (d >= 0.4 ? T(0.0) : T(1.0) - smooth_step((s - T(0.1)) / T(0.3)));
  return (T(1.0) - w) * sin(t) + w * T(0.8);
}

/// Profile whose derivatives come from nested dual numbers.
template <class Fn>
Profile dual_profile(Fn fn, const char* description) {
  using D2 = Dual<Dual<double>>;
  Profile p;
  p.a = [fn](double t) { return fn(t); };
  p.da = [fn](double t) { return fn(Dual<double>(t, 1.0)).d; };
  p.d2a = [fn](double t) { return fn(D2(Dual<double>(t, 1.0), Dual<double>(1.0, 0.0))).d.d; };
  p.length = kPi;
  p.description = description;
  return p;
}

inline MagneticSurface flat_band(const char* f = "1") {
  return MagneticSurface::sphere_of_revolution(
      dual_profile([](const auto& t) { return band_profile(t); }, "flat band"), Expression::parse(f));
}

/// a = sin(t) (1 + 0.1 sin^2(2t)): non-constant curvature.
inline MagneticSurface bumpy(const char* f = "1") {
  const auto a = [](const auto& t) {
    using std::sin;
    using T = std::decay_t<decltype(t)>;
    const T s2 = sin(T(2.0) * t);
    return sin(t) * (T(1.0) + T(0.1) * s2 * s2);
  };
  return MagneticSurface::sphere_of_revolution(dual_profile(a, "bumpy"), Expression::parse(f));
}

}  // namespace magzoll::test
