#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "magzoll/expression.hpp"
#include "magzoll/vec2.hpp"

namespace magzoll {

enum class SurfaceKind { FlatTorus, RoundSphere, SphereOfRevolution, Plane };

std::string_view to_string(SurfaceKind kind);

/// Warped-product profile a(theta) of a sphere of revolution, with its
/// first two derivatives supplied in closed form. The chart is arc-length
/// colatitude theta in (0, length) times the angle phi.
struct Profile {
  std::function<double(double)> a;
  std::function<double(double)> da;
  std::function<double(double)> d2a;
  double length = kPi;
  std::string description;

  static Profile from_expressions(const Expression& a, const Expression& da, const Expression& d2a, double length);
  /// a(theta) = R sin(theta / R) on (0, pi R).
  static Profile round(double radius);
};

/// A point of the unit tangent bundle, in chart components.
struct UnitTangentState {
  Vec2 q;
  Vec2 v;
};

/// A 1-form evaluated at a point, with the Jacobian d(theta_i)/d(x_j).
struct OneForm {
  Vec2 value;
  Mat2 jacobian{0.0, 0.0, 0.0, 0.0};
};

/// Which coordinate the primitive of f*mu is integrated along.
enum class PrimitiveSweep { X, Y };

/// Christoffel symbols gamma[k][i][j] = Gamma^k_{ij}.
using Christoffels = std::array<std::array<std::array<double, 2>, 2>, 2>;

/// Chart-based surface with a metric, an orientation and a magnetic function.
/// Immutable after construction; copies share the expression tree.
class MagneticSurface {
 public:
  static MagneticSurface flat_torus(const Mat2& lattice, Expression f, int orientation = 1);
  static MagneticSurface round_sphere(double radius, Expression f, int orientation = 1);
  static MagneticSurface sphere_of_revolution(Profile profile, Expression f, int orientation = 1);
  static MagneticSurface plane(Expression f, int orientation = 1);

  SurfaceKind kind() const { return kind_; }
  const Expression& f() const { return f_; }
  int orientation() const { return orientation_; }
  /// Sign of the area form relative to dx1 ^ dx2. Revolution charts are
  /// positively oriented by (dphi, dtheta), so the sign there is -orientation.
  int chart_orientation() const;
  bool is_revolution() const { return kind_ == SurfaceKind::RoundSphere || kind_ == SurfaceKind::SphereOfRevolution; }
  bool is_closed() const { return kind_ != SurfaceKind::Plane; }
  int euler_characteristic() const;

  const Mat2& lattice() const { return lattice_; }
  double radius() const { return radius_; }
  const Profile& profile() const { return profile_; }

  double pole_margin() const { return pole_margin_; }
  MagneticSurface with_pole_margin(double margin) const;
  MagneticSurface with_f(Expression f) const;

  /// Throws PoleEvaluation at or beyond a coordinate pole.
  void check_chart(const Vec2& q) const;
  /// True when q is at least pole_margin away from the poles.
  bool in_dynamic_domain(const Vec2& q) const;

  Metric metric(const Vec2& q) const;
  /// d(g)/d(x_k) for k = 0, 1.
  std::array<Metric, 2> metric_derivatives(const Vec2& q) const;
  /// Rotation by +pi/2 in the oriented tangent plane (the J of the flow equation).
  Vec2 rotate(const Vec2& q, const Vec2& v) const;
  double magnetic(const Vec2& q) const { return f_(q); }

  /// Orthonormal frame (e1, e2) in chart components; e1 points along d/dx1.
  std::array<Vec2, 2> frame(const Vec2& q) const;
  double direction_angle(const Vec2& q, const Vec2& v) const;
  Vec2 direction(const Vec2& q, double angle) const;

  /// Generators of the chart translations that act trivially on the surface.
  std::vector<Vec2> periods() const;
  Vec2 deck(const std::array<int, 2>& w) const;
  /// Integer class of a displacement that is (close to) a deck translation.
  std::array<int, 2> deck_class(const Vec2& displacement) const;
  /// Representative of q in the fundamental domain.
  Vec2 reduce(const Vec2& q) const;

  /// A primitive theta of f*mu_g (d theta = f mu_g), built by 1-D quadrature.
  OneForm magnetic_primitive(const Vec2& q, PrimitiveSweep sweep = PrimitiveSweep::X) const;
  /// A primitive of mu_g.
  OneForm area_primitive(const Vec2& q) const;
  /// Integral of f over the closed surface, against the Riemannian area.
  double total_flux() const;
  /// max |f| sampled on a grid (the fundamental domain, or a box around `near` for the plane).
  double probe_max_abs_f(const Vec2& near = {}) const;
  /// min f on the same grid.
  double probe_min_f(const Vec2& near = {}) const;

 private:
  MagneticSurface() = default;

  template <class Fn>
  void for_probe_grid(const Vec2& near, Fn&& fn) const;

  SurfaceKind kind_ = SurfaceKind::Plane;
  Expression f_;
  int orientation_ = 1;
  Mat2 lattice_;
  double radius_ = 1.0;
  Profile profile_;
  double pole_margin_ = 1e-3;
};

UnitTangentState make_state(const MagneticSurface& surface, const Vec2& q, const Vec2& v);
UnitTangentState state_from_angle(const MagneticSurface& surface, const Vec2& q, double angle);

Christoffels christoffels(const MagneticSurface& surface, const Vec2& q);
double gauss_curvature(const MagneticSurface& surface, const Vec2& q);
/// Closed form where available, adaptive quadrature otherwise. Throws UnboundedDomain for the plane.
double total_area(const MagneticSurface& surface);

/// Distance between base points: exact on the torus (9 nearest translates),
/// plane and round sphere; midpoint-metric estimate on other revolution surfaces.
double base_distance(const MagneticSurface& surface, const Vec2& q1, const Vec2& q2);
/// sqrt(base^2 + fiber^2), the fiber angle measured after parallel transport.
double sasaki_distance(const UnitTangentState& s1, const UnitTangentState& s2, const MagneticSurface& surface);

/// Composite Gauss-Legendre quadrature of fn over [lo, hi] with panels no wider than `panel`.
double integrate_panels(const std::function<double(double)>& fn, double lo, double hi, double panel = 0.25);

}  // namespace magzoll
