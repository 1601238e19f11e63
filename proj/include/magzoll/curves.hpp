#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "magzoll/geometry.hpp"

namespace magzoll {

/// Closed polyline with a free period. Points are a lift to the chart cover;
/// the closing segment runs from the last point to points[0] + closure, where
/// closure is the deck translation of cover_lift.
struct DiscreteLoop {
  std::vector<Vec2> points;
  double period = 1.0;
  std::array<int, 2> cover_lift{0, 0};
  Vec2 closure;

  std::size_t size() const { return points.size(); }
  /// Endpoint of segment i (the start of segment i + 1 on the lift).
  Vec2 next(std::size_t i) const { return i + 1 < points.size() ? points[i + 1] : points[0] + closure; }
  Vec2 edge(std::size_t i) const { return next(i) - points[i]; }
  double diameter() const;
  DiscreteLoop reversed() const;

  /// Validates N >= 8, distinct consecutive points and period > 0.
  static DiscreteLoop make(const MagneticSurface& surface, std::vector<Vec2> points, double period,
                           std::array<int, 2> cover_lift = {0, 0});
  /// From an open lifted path whose last point is a deck translate of the
  /// first; the last point is dropped and cover_lift read off the displacement.
  static DiscreteLoop from_closed_path(const MagneticSurface& surface, std::vector<Vec2> path, double period);
};

/// Regular N-gon on a chart circle, counter-clockwise in the chart.
DiscreteLoop circle_loop(const MagneticSurface& surface, const Vec2& center, double radius, std::size_t n,
                         double period);
/// Parallel theta = const on a revolution surface, phi increasing.
DiscreteLoop parallel_loop(const MagneticSurface& surface, double theta, std::size_t n, double period);
/// Straight loop s -> s * (deck translation of w) on the torus.
DiscreteLoop lattice_loop(const MagneticSurface& surface, std::array<int, 2> w, std::size_t n, double period);

/// Sum of segment lengths in the metric at segment midpoints.
double loop_length(const DiscreteLoop& loop, const MagneticSurface& surface);

struct SelfIntersectionOptions {
  /// Relative to the loop diameter.
  double collar = 1e-12;
  double perturbation = 1e-7;
  int phases = 8;
  unsigned jobs = 1;
};

struct SelfIntersectionReport {
  std::size_t count = 0;
  std::size_t transversal = 0;
  /// Clusters of near-degenerate contacts, each resolved by perturbation.
  std::size_t degenerate_clusters = 0;
};

/// Self-crossings counted with multiplicity; on periodic charts computed on
/// the quotient against the nearest translates. Tangencies count one.
SelfIntersectionReport self_intersection_report(const DiscreteLoop& loop, const MagneticSurface& surface,
                                                const SelfIntersectionOptions& options = {});
std::size_t self_intersections(const DiscreteLoop& loop, const MagneticSurface& surface,
                               const SelfIntersectionOptions& options = {});

struct FluxValue {
  /// lambda times the flux of f over the disk bounded by the loop with its orientation.
  double value = 0.0;
  /// On the sphere: the same quantity for the complementary disk (value - lambda * total flux).
  std::optional<double> alternative;
  /// Signed area of the bounded disk (same convention as value).
  double area = 0.0;
};

enum class FluxQuadrature { Midpoint, Gauss3 };

/// Capping-disk flux from the line integral of a primitive along the polygon.
/// Midpoint matches the discrete action; Gauss3 is used for reporting.
FluxValue flux(const DiscreteLoop& loop, const MagneticSurface& surface, double lambda,
               PrimitiveSweep sweep = PrimitiveSweep::X, FluxQuadrature rule = FluxQuadrature::Gauss3);

/// Same convention from precomputed line integrals of the magnetic and area
/// primitives (used for orbits integrated with flux tracking).
FluxValue flux_from_line_integrals(const MagneticSurface& surface, double lambda, double line_f, double line_area,
                                   std::array<int, 2> cover_lift);

/// Winding vector of the lift on the torus; (0, 0) elsewhere except for the
/// phi winding on revolution charts, stored in the first entry.
std::array<int, 2> homotopy_class(const DiscreteLoop& loop, const MagneticSurface& surface);

/// `{"points": [[x, y], ...], "period": tau}`; points are the lift.
std::string loop_to_json(const DiscreteLoop& loop);
DiscreteLoop loop_from_json(const std::string& text, const MagneticSurface& surface);

}  // namespace magzoll
