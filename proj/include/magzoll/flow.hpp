#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "magzoll/geometry.hpp"

namespace magzoll {

struct StepStats {
  double max_step = 0.0;
  double min_step = std::numeric_limits<double>::infinity();
  /// Largest | |v|_g - 1 | seen before renormalization.
  double max_speed_deviation = 0.0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

struct FlowOptions {
  double tol = 1e-10;
  /// Defaults to 0.1 * min(1, 1 / (lambda * max|f|)).
  std::optional<double> max_step;
  double min_step = 1e-13;
  /// Accumulate the line integrals of the magnetic and area primitives along the curve.
  bool track_flux = false;
  std::size_t max_steps = 50'000'000;
};

struct TrajectorySample {
  double t = 0.0;
  UnitTangentState state;
};

/// Time-sampled solution of the prescribed-curvature equation. Torus
/// trajectories live on the universal cover.
struct Trajectory {
  std::vector<TrajectorySample> samples;
  double lambda = 0.0;
  StepStats step_stats;
  double arc_length = 0.0;
  /// Only filled with FlowOptions::track_flux.
  double magnetic_line_integral = 0.0;
  double area_line_integral = 0.0;

  double start_time() const { return samples.front().t; }
  double end_time() const { return samples.back().t; }
  /// Cubic Hermite interpolation of the base curve; the velocity is the
  /// derivative of the interpolant, renormalized.
  UnitTangentState interpolate(const MagneticSurface& surface, double t) const;
};

double default_max_step(const MagneticSurface& surface, double lambda, const Vec2& near = {});

/// Dormand-Prince 5(4) stepper on the unit tangent bundle with velocity
/// renormalization after every accepted step.
class FlowStepper {
 public:
  FlowStepper(const MagneticSurface& surface, double lambda, const UnitTangentState& start, double t0,
              const FlowOptions& options, const Vec2& probe_center);

  /// Takes one accepted step toward t_limit (either direction). Returns false
  /// once t_limit has been reached.
  bool step(double t_limit);

  double time() const { return t_; }
  const UnitTangentState& state() const { return state_; }
  double last_step() const { return last_h_; }
  const StepStats& stats() const { return stats_; }
  double arc_length() const { return extra_[2]; }
  double magnetic_integral() const { return extra_[0]; }
  double area_integral() const { return extra_[1]; }

 private:
  using State = std::array<double, 7>;
  State rhs(const State& y) const;

  const MagneticSurface& surface_;
  double lambda_;
  std::optional<double> const_f_;
  FlowOptions options_;
  UnitTangentState state_;
  std::array<double, 3> extra_{0.0, 0.0, 0.0};
  double t_;
  double h_;
  double h_max_;
  double last_h_ = 0.0;
  StepStats stats_;
};

/// Integrates over t_span. The start state sits at t = 0 when the span
/// contains 0 (backward part by reverse-time stepping), otherwise at t0.
Trajectory integrate(const MagneticSurface& surface, double lambda, const UnitTangentState& start,
                     std::pair<double, double> t_span, const FlowOptions& options = {});

/// State after flowing for `duration` (may be negative).
UnitTangentState propagate(const MagneticSurface& surface, double lambda, const UnitTangentState& start,
                           double duration, const FlowOptions& options = {});

/// Disk or axis-aligned box in chart (cover) coordinates.
struct ChartRegion {
  enum class Shape { Disk, Box };
  Shape shape = Shape::Disk;
  Vec2 center;
  double radius = 0.0;
  Vec2 half_extent;

  static ChartRegion disk(const Vec2& c, double r) { return {Shape::Disk, c, r, {}}; }
  static ChartRegion box(const Vec2& c, const Vec2& half) { return {Shape::Box, c, 0.0, half}; }
  bool contains(const Vec2& q) const;
};

struct LocalizationOptions {
  int grid = 7;       // starts per axis over the bounding box of K
  int directions = 8;
  FlowOptions flow;
  unsigned jobs = 1;
};

struct LocalizationReport {
  struct Witness {
    UnitTangentState start;
    double escape_time = 0.0;
    Vec2 escape_point;
  };
  bool holds = true;
  std::size_t trajectories = 0;
  /// Largest chart distance from a start reached by any sampled trajectory.
  double max_excursion = 0.0;
  std::optional<Witness> witness;
};

/// Samples starts in K x S^1, integrates over [-T, T] and checks that every
/// trajectory stays inside U. The witness is the lowest-index escapee.
LocalizationReport localization_check(const MagneticSurface& surface, double lambda, const ChartRegion& compact,
                                      const ChartRegion& open, double horizon, const LocalizationOptions& options = {});

}  // namespace magzoll
