#include "magzoll/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "magzoll/error.hpp"

namespace magzoll {

namespace {

constexpr std::string_view kModule = "geometry";

struct Vec3 {
  double x, y, z;
};
Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
double dot3(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
Vec3 cross3(Vec3 a, Vec3 b) { return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x}; }
double norm3(Vec3 a) { return std::sqrt(dot3(a, a)); }

// Unit-sphere embedding of a round-sphere chart point and the pushforward of a chart vector.
Vec3 sphere_point(double theta_over_r, double phi) {
  return {std::sin(theta_over_r) * std::cos(phi), std::sin(theta_over_r) * std::sin(phi), std::cos(theta_over_r)};
}
Vec3 sphere_vector(double radius, const Vec2& q, const Vec2& v) {
  const double s = q.x / radius;
  const Vec3 d_theta{std::cos(s) * std::cos(q.y), std::cos(s) * std::sin(q.y), -std::sin(s)};
  const Vec3 d_phi{-radius * std::sin(s) * std::sin(q.y), radius * std::sin(s) * std::cos(q.y), 0.0};
  return v.x * d_theta + v.y * d_phi;
}

}  // namespace

std::string_view to_string(SurfaceKind kind) {
  switch (kind) {
    case SurfaceKind::FlatTorus: return "flat_torus";
    case SurfaceKind::RoundSphere: return "round_sphere";
    case SurfaceKind::SphereOfRevolution: return "sphere_of_revolution";
    case SurfaceKind::Plane: return "plane";
  }
  return "unknown";
}

double integrate_panels(const std::function<double(double)>& fn, double lo, double hi, double panel) {
  if (lo == hi) return 0.0;
  const double span = hi - lo;
  const int n = std::max(1, static_cast<int>(std::ceil(std::abs(span) / panel)));
  const double w = span / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = lo + i * w;
    sum += boost::math::quadrature::gauss<double, 20>::integrate(fn, a, a + w);
  }
  return sum;
}

Profile Profile::from_expressions(const Expression& a, const Expression& da, const Expression& d2a, double length) {
  if (!(length > 0.0)) throw Error(ErrorCode::InvalidArgument, kModule, "profile length must be positive");
  Profile p;
  p.a = [a](double t) { return a(t, 0.0); };
  p.da = [da](double t) { return da(t, 0.0); };
  p.d2a = [d2a](double t) { return d2a(t, 0.0); };
  p.length = length;
  p.description = "a=" + a.text() + "; da=" + da.text() + "; d2a=" + d2a.text();
  return p;
}

Profile Profile::round(double radius) {
  Profile p;
  p.a = [radius](double t) { return radius * std::sin(t / radius); };
  p.da = [radius](double t) { return std::cos(t / radius); };
  p.d2a = [radius](double t) { return -std::sin(t / radius) / radius; };
  p.length = kPi * radius;
  p.description = "a=R sin(theta/R)";
  return p;
}

MagneticSurface MagneticSurface::flat_torus(const Mat2& lattice, Expression f, int orientation) {
  if (!(std::abs(lattice.det()) > 1e-14)) throw Error(ErrorCode::InvalidArgument, kModule, "lattice matrix is singular");
  MagneticSurface s;
  s.kind_ = SurfaceKind::FlatTorus;
  s.lattice_ = lattice;
  s.f_ = std::move(f);
  s.orientation_ = orientation >= 0 ? 1 : -1;
  return s;
}

MagneticSurface MagneticSurface::round_sphere(double radius, Expression f, int orientation) {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, kModule, "radius must be positive");
  MagneticSurface s;
  s.kind_ = SurfaceKind::RoundSphere;
  s.radius_ = radius;
  s.profile_ = Profile::round(radius);
  s.f_ = std::move(f);
  s.orientation_ = orientation >= 0 ? 1 : -1;
  return s;
}

MagneticSurface MagneticSurface::sphere_of_revolution(Profile profile, Expression f, int orientation) {
  if (!profile.a || !profile.da || !profile.d2a) {
    throw Error(ErrorCode::InvalidArgument, kModule, "profile needs a, da and d2a");
  }
  for (int i = 1; i < 64; ++i) {
    const double t = profile.length * i / 64.0;
    if (!(profile.a(t) > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, kModule, "profile must be positive between the poles");
    }
  }
  MagneticSurface s;
  s.kind_ = SurfaceKind::SphereOfRevolution;
  s.profile_ = std::move(profile);
  s.f_ = std::move(f);
  s.orientation_ = orientation >= 0 ? 1 : -1;
  return s;
}

MagneticSurface MagneticSurface::plane(Expression f, int orientation) {
  MagneticSurface s;
  s.kind_ = SurfaceKind::Plane;
  s.f_ = std::move(f);
  s.orientation_ = orientation >= 0 ? 1 : -1;
  return s;
}

MagneticSurface MagneticSurface::with_pole_margin(double margin) const {
  MagneticSurface s = *this;
  s.pole_margin_ = margin;
  return s;
}

MagneticSurface MagneticSurface::with_f(Expression f) const {
  MagneticSurface s = *this;
  s.f_ = std::move(f);
  return s;
}

int MagneticSurface::chart_orientation() const { return is_revolution() ? -orientation_ : orientation_; }

int MagneticSurface::euler_characteristic() const {
  switch (kind_) {
    case SurfaceKind::FlatTorus: return 0;
    case SurfaceKind::RoundSphere:
    case SurfaceKind::SphereOfRevolution: return 2;
    case SurfaceKind::Plane: break;
  }
  throw Error(ErrorCode::UnboundedDomain, kModule, "the plane has no Euler characteristic");
}

void MagneticSurface::check_chart(const Vec2& q) const {
  if (!std::isfinite(q.x) || !std::isfinite(q.y)) {
    throw Error(ErrorCode::InvalidArgument, kModule, "non-finite chart point");
  }
  if (is_revolution() && (q.x <= 0.0 || q.x >= profile_.length)) {
    throw Error(ErrorCode::PoleEvaluation, kModule, "theta=" + std::to_string(q.x) + " is at or beyond a pole");
  }
}

bool MagneticSurface::in_dynamic_domain(const Vec2& q) const {
  if (!is_revolution()) return true;
  return q.x >= pole_margin_ && q.x <= profile_.length - pole_margin_;
}

Metric MagneticSurface::metric(const Vec2& q) const {
  if (!is_revolution()) return {};
  check_chart(q);
  const double a = profile_.a(q.x);
  return {1.0, 0.0, a * a};
}

std::array<Metric, 2> MagneticSurface::metric_derivatives(const Vec2& q) const {
  if (!is_revolution()) return {Metric{0, 0, 0}, Metric{0, 0, 0}};
  check_chart(q);
  return {Metric{0.0, 0.0, 2.0 * profile_.a(q.x) * profile_.da(q.x)}, Metric{0, 0, 0}};
}

Vec2 MagneticSurface::rotate(const Vec2& q, const Vec2& v) const {
  const Metric g = metric(q);
  const double s = chart_orientation() / std::sqrt(g.det());
  return {-s * (g.g12 * v.x + g.g22 * v.y), s * (g.g11 * v.x + g.g12 * v.y)};
}

std::array<Vec2, 2> MagneticSurface::frame(const Vec2& q) const {
  if (!is_revolution()) return {Vec2{1, 0}, Vec2{0, 1}};
  check_chart(q);
  return {Vec2{1, 0}, Vec2{0, 1.0 / profile_.a(q.x)}};
}

double MagneticSurface::direction_angle(const Vec2& q, const Vec2& v) const {
  if (!is_revolution()) return std::atan2(v.y, v.x);
  return std::atan2(profile_.a(q.x) * v.y, v.x);
}

Vec2 MagneticSurface::direction(const Vec2& q, double angle) const {
  const auto e = frame(q);
  return std::cos(angle) * e[0] + std::sin(angle) * e[1];
}

std::vector<Vec2> MagneticSurface::periods() const {
  switch (kind_) {
    case SurfaceKind::FlatTorus: return {lattice_.column(0), lattice_.column(1)};
    case SurfaceKind::RoundSphere:
    case SurfaceKind::SphereOfRevolution: return {Vec2{0.0, kTwoPi}};
    case SurfaceKind::Plane: break;
  }
  return {};
}

Vec2 MagneticSurface::deck(const std::array<int, 2>& w) const {
  const auto p = periods();
  Vec2 out;
  for (std::size_t i = 0; i < p.size(); ++i) out += static_cast<double>(w[i]) * p[i];
  return out;
}

std::array<int, 2> MagneticSurface::deck_class(const Vec2& d) const {
  switch (kind_) {
    case SurfaceKind::FlatTorus: {
      const Vec2 c = lattice_.inverse() * d;
      return {static_cast<int>(std::lround(c.x)), static_cast<int>(std::lround(c.y))};
    }
    case SurfaceKind::RoundSphere:
    case SurfaceKind::SphereOfRevolution: return {static_cast<int>(std::lround(d.y / kTwoPi)), 0};
    case SurfaceKind::Plane: break;
  }
  return {0, 0};
}

Vec2 MagneticSurface::reduce(const Vec2& q) const {
  switch (kind_) {
    case SurfaceKind::FlatTorus: {
      Vec2 c = lattice_.inverse() * q;
      c.x -= std::floor(c.x);
      c.y -= std::floor(c.y);
      return lattice_ * c;
    }
    case SurfaceKind::RoundSphere:
    case SurfaceKind::SphereOfRevolution: return {q.x, q.y - kTwoPi * std::floor(q.y / kTwoPi)};
    case SurfaceKind::Plane: break;
  }
  return q;
}

OneForm MagneticSurface::magnetic_primitive(const Vec2& q, PrimitiveSweep sweep) const {
  using D = Dual<double>;
  const double s = chart_orientation();
  OneForm out;
  if (is_revolution()) {
    check_chart(q);
    const auto& a = profile_.a;
    const double value = integrate_panels([&](double u) { return f_(u, q.y) * a(u); }, 0.0, q.x);
    const double d_phi = integrate_panels(
        [&](double u) { return f_.evaluate<D>(D(u), D(q.y, 1.0)).d * a(u); }, 0.0, q.x);
    out.value = {0.0, s * value};
    out.jacobian = {0.0, 0.0, s * f_(q) * a(q.x), s * d_phi};
    return out;
  }
  if (sweep == PrimitiveSweep::X) {
    const double value = integrate_panels([&](double u) { return f_(u, q.y); }, 0.0, q.x);
    const double d_y = integrate_panels([&](double u) { return f_.evaluate<D>(D(u), D(q.y, 1.0)).d; }, 0.0, q.x);
    out.value = {0.0, s * value};
    out.jacobian = {0.0, 0.0, s * f_(q), s * d_y};
  } else {
    const double value = integrate_panels([&](double u) { return f_(q.x, u); }, 0.0, q.y);
    const double d_x = integrate_panels([&](double u) { return f_.evaluate<D>(D(q.x, 1.0), D(u)).d; }, 0.0, q.y);
    out.value = {-s * value, 0.0};
    out.jacobian = {-s * d_x, -s * f_(q), 0.0, 0.0};
  }
  return out;
}

OneForm MagneticSurface::area_primitive(const Vec2& q) const {
  const double s = chart_orientation();
  OneForm out;
  if (is_revolution()) {
    check_chart(q);
    const double value = integrate_panels(profile_.a, 0.0, q.x);
    out.value = {0.0, s * value};
    out.jacobian = {0.0, 0.0, s * profile_.a(q.x), 0.0};
  } else {
    out.value = {0.0, s * q.x};
    out.jacobian = {0.0, 0.0, s, 0.0};
  }
  return out;
}

template <class Fn>
void MagneticSurface::for_probe_grid(const Vec2& near, Fn&& fn) const {
  constexpr int n = 32;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double u = static_cast<double>(i) / n;
      const double v = static_cast<double>(j) / n;
      switch (kind_) {
        case SurfaceKind::FlatTorus: fn(lattice_ * Vec2{u, v}); break;
        case SurfaceKind::RoundSphere:
        case SurfaceKind::SphereOfRevolution: {
          const double lo = pole_margin_;
          const double hi = profile_.length - pole_margin_;
          fn(Vec2{lo + (hi - lo) * u, kTwoPi * v});
          break;
        }
        case SurfaceKind::Plane: fn(near + Vec2{2.0 * u - 1.0, 2.0 * v - 1.0}); break;
      }
    }
  }
}

double MagneticSurface::probe_max_abs_f(const Vec2& near) const {
  if (auto c = f_.constant_value()) return std::abs(*c);
  double m = 0.0;
  for_probe_grid(near, [&](const Vec2& q) { m = std::max(m, std::abs(f_(q))); });
  return m;
}

double MagneticSurface::probe_min_f(const Vec2& near) const {
  if (auto c = f_.constant_value()) return *c;
  double m = std::numeric_limits<double>::infinity();
  for_probe_grid(near, [&](const Vec2& q) { m = std::min(m, f_(q)); });
  return m;
}

double MagneticSurface::total_flux() const {
  if (!is_closed()) throw Error(ErrorCode::UnboundedDomain, kModule, "the plane has infinite area");
  if (auto c = f_.constant_value()) return *c * total_area(*this);
  if (kind_ == SurfaceKind::FlatTorus) {
    const double inner_det = std::abs(lattice_.det());
    const double outer = integrate_panels(
        [&](double v) { return integrate_panels([&](double u) { return f_(lattice_ * Vec2{u, v}); }, 0.0, 1.0); },
        0.0, 1.0);
    return inner_det * outer;
  }
  const auto& a = profile_.a;
  return integrate_panels(
      [&](double phi) { return integrate_panels([&](double t) { return f_(t, phi) * a(t); }, 0.0, profile_.length); },
      0.0, kTwoPi);
}

UnitTangentState make_state(const MagneticSurface& surface, const Vec2& q, const Vec2& v) {
  surface.check_chart(q);
  const double n = surface.metric(q).norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) throw Error(ErrorCode::InvalidArgument, kModule, "zero tangent vector");
  return {q, v / n};
}

UnitTangentState state_from_angle(const MagneticSurface& surface, const Vec2& q, double angle) {
  surface.check_chart(q);
  return {q, surface.direction(q, angle)};
}

Christoffels christoffels(const MagneticSurface& surface, const Vec2& q) {
  Christoffels g{};
  surface.check_chart(q);
  if (!surface.is_revolution()) return g;
  const double a = surface.profile().a(q.x);
  const double da = surface.profile().da(q.x);
  g[0][1][1] = -a * da;
  g[1][0][1] = da / a;
  g[1][1][0] = da / a;
  return g;
}

double gauss_curvature(const MagneticSurface& surface, const Vec2& q) {
  surface.check_chart(q);
  switch (surface.kind()) {
    case SurfaceKind::FlatTorus:
    case SurfaceKind::Plane: return 0.0;
    case SurfaceKind::RoundSphere: return 1.0 / (surface.radius() * surface.radius());
    case SurfaceKind::SphereOfRevolution: return -surface.profile().d2a(q.x) / surface.profile().a(q.x);
  }
  return 0.0;
}

double total_area(const MagneticSurface& surface) {
  switch (surface.kind()) {
    case SurfaceKind::FlatTorus: return std::abs(surface.lattice().det());
    case SurfaceKind::RoundSphere: return 4.0 * kPi * surface.radius() * surface.radius();
    case SurfaceKind::SphereOfRevolution: {
      const auto& p = surface.profile();
      const double integral =
          boost::math::quadrature::gauss_kronrod<double, 61>::integrate(p.a, 0.0, p.length, 15, 1e-12);
      return kTwoPi * integral;
    }
    case SurfaceKind::Plane: break;
  }
  throw Error(ErrorCode::UnboundedDomain, kModule, "the plane has infinite area");
}

double base_distance(const MagneticSurface& surface, const Vec2& q1, const Vec2& q2) {
  switch (surface.kind()) {
    case SurfaceKind::Plane: return norm(q2 - q1);
    case SurfaceKind::FlatTorus: {
      const Mat2& lat = surface.lattice();
      Vec2 c = lat.inverse() * (q2 - q1);
      c.x -= std::round(c.x);
      c.y -= std::round(c.y);
      double best = std::numeric_limits<double>::infinity();
      for (int i = -1; i <= 1; ++i) {
        for (int j = -1; j <= 1; ++j) best = std::min(best, norm(lat * Vec2{c.x + i, c.y + j}));
      }
      return best;
    }
    case SurfaceKind::RoundSphere: {
      const double r = surface.radius();
      const Vec3 p1 = sphere_point(q1.x / r, q1.y);
      const Vec3 p2 = sphere_point(q2.x / r, q2.y);
      return r * std::atan2(norm3(cross3(p1, p2)), dot3(p1, p2));
    }
    case SurfaceKind::SphereOfRevolution: {
      const double dphi = wrap_angle(q2.y - q1.y);
      const double a = surface.profile().a(0.5 * (q1.x + q2.x));
      return std::hypot(q2.x - q1.x, a * dphi);
    }
  }
  return 0.0;
}

double sasaki_distance(const UnitTangentState& s1, const UnitTangentState& s2, const MagneticSurface& surface) {
  surface.check_chart(s1.q);
  surface.check_chart(s2.q);
  const double base = base_distance(surface, s1.q, s2.q);
  double fiber = 0.0;
  switch (surface.kind()) {
    case SurfaceKind::Plane:
    case SurfaceKind::FlatTorus:
      fiber = wrap_angle(std::atan2(s2.v.y, s2.v.x) - std::atan2(s1.v.y, s1.v.x));
      break;
    case SurfaceKind::RoundSphere: {
      const double r = surface.radius();
      if (r == 1.0) {
        // Unit sphere: the Sasaki metric is bi-invariant on frames [x, v, x cross v].
        const Vec3 p1 = sphere_point(s1.q.x, s1.q.y);
        const Vec3 p2 = sphere_point(s2.q.x, s2.q.y);
        const Vec3 v1 = sphere_vector(1.0, s1.q, s1.v);
        const Vec3 v2 = sphere_vector(1.0, s2.q, s2.v);
        const Vec3 d[3] = {p2 - p1, v2 - v1, cross3(p2, v2) - cross3(p1, v1)};
        double fro = 0.0;
        for (const Vec3& e : d) fro += dot3(e, e);
        return 2.0 * std::asin(std::min(1.0, std::sqrt(fro) / (2.0 * std::sqrt(2.0))));
      }
      const Vec3 p1 = sphere_point(s1.q.x / r, s1.q.y);
      const Vec3 p2 = sphere_point(s2.q.x / r, s2.q.y);
      Vec3 u = sphere_vector(r, s1.q, s1.v);
      const Vec3 w = sphere_vector(r, s2.q, s2.v);
      const Vec3 axis = cross3(p1, p2);
      const double sin_angle = norm3(axis);
      const double cos_angle = dot3(p1, p2);
      if (sin_angle > 1e-15) {
        // Rodrigues rotation of u about the great-circle axis.
        const Vec3 k = (1.0 / sin_angle) * axis;
        u = cos_angle * u + sin_angle * cross3(k, u) + ((1.0 - cos_angle) * dot3(k, u)) * k;
      }
      fiber = std::atan2(dot3(cross3(u, w), p2), dot3(u, w));
      break;
    }
    case SurfaceKind::SphereOfRevolution: {
      const auto& p = surface.profile();
      const double dphi = wrap_angle(s2.q.y - s1.q.y);
      const double a1 = surface.direction_angle(s1.q, s1.v);
      const double a2 = surface.direction_angle(s2.q, s2.v);
      fiber = wrap_angle(a2 - (a1 - p.da(0.5 * (s1.q.x + s2.q.x)) * dphi));
      break;
    }
  }
  return std::hypot(base, fiber);
}

}  // namespace magzoll
