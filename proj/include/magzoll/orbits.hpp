#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "magzoll/curves.hpp"
#include "magzoll/flow.hpp"

namespace magzoll {

struct ClosedOrbitOptions {
  /// Sasaki distance below which the state has returned.
  double return_tol = 1e-7;
  FlowOptions flow;
  std::size_t min_loop_points = 512;
  std::size_t max_loop_points = 4096;
  int max_divisor = 12;
  bool count_self_intersections = true;
  SelfIntersectionOptions intersections;
};

/// A detected periodic orbit.
struct ClosedOrbit {
  DiscreteLoop orbit_loop;
  double period = 0.0;
  /// Arc length integrated along the orbit.
  double length = 0.0;
  std::size_t self_int = 0;
  /// Minus lambda times the flux through the disk the orbit bounds, so that
  /// length + flux_value is the magnetic action at the critical period.
  /// Empty for non-contractible orbits.
  std::optional<double> flux_value;
  /// On the sphere: the same for the complementary disk.
  std::optional<double> flux_alternative;
  UnitTangentState start;
  double return_distance = 0.0;
  /// Iterations removed when reducing the first return to the prime period.
  int multiplicity = 1;
  /// Smallest sampled Sasaki distance from (q, -v) to the orbit.
  double reversal_separation = 0.0;
};

enum class ReturnStatus { Closed, NotClosed, Inconclusive };
std::string_view to_string(ReturnStatus status);

struct ReturnScan {
  ReturnStatus status = ReturnStatus::NotClosed;
  /// Smallest return distance after the initial departure (sampled and refined).
  double min_distance = 0.0;
  double min_distance_time = 0.0;
  double horizon = 0.0;
  std::optional<double> period;
  std::optional<ClosedOrbit> orbit;
};

/// Integrates to the horizon, refining candidate returns by golden-section
/// search on the Sasaki return distance followed by bisection on its slope.
ReturnScan scan_return(const MagneticSurface& surface, double lambda, const UnitTangentState& start, double horizon,
                       const ClosedOrbitOptions& options = {});

std::optional<ClosedOrbit> find_closed_orbit(const MagneticSurface& surface, double lambda,
                                             const UnitTangentState& start, double horizon,
                                             const ClosedOrbitOptions& options = {});

/// Builds the orbit record for a known period by re-integrating [0, T].
ClosedOrbit make_closed_orbit(const MagneticSurface& surface, double lambda, const UnitTangentState& start,
                              double period, const ClosedOrbitOptions& options = {});

/// 200 * 2 pi / (lambda * min f) when lambda * min f > 0, else 100.
double default_horizon(const MagneticSurface& surface, double lambda);

struct ZollOptions {
  int nu = 12;
  int nv = 12;
  int ndir = 8;
  std::optional<double> horizon;
  double period_tol = 1e-6;
  ClosedOrbitOptions orbit;
  unsigned jobs = 1;
  /// Samples are processed in fixed chunks; the scan stops after the first
  /// chunk containing a witness.
  std::size_t chunk = 16;
  bool stop_at_witness = true;
};

struct ZollSample {
  std::size_t index = 0;
  UnitTangentState start;
  double dir_angle = 0.0;
  ReturnScan scan;
};

enum class ZollVerdict { Zoll, NotZoll, Inconclusive };
std::string_view to_string(ZollVerdict verdict);

struct ZollReport {
  ZollVerdict verdict = ZollVerdict::Inconclusive;
  bool is_zoll = false;
  std::size_t sample_count = 0;
  std::optional<double> common_period;
  double period_spread = 0.0;
  std::optional<UnitTangentState> witness;
  std::optional<std::size_t> witness_index;
  double horizon = 0.0;
  std::vector<ZollSample> samples;
  /// Smallest reversal separation over the closed samples.
  std::optional<double> min_reversal_separation;
};

/// Grid of starts: uniform over the fundamental domain times ndir directions.
std::vector<UnitTangentState> zoll_grid(const MagneticSurface& surface, int nu, int nv, int ndir,
                                        std::vector<double>* angles = nullptr);

ZollReport zoll_check(const MagneticSurface& surface, double lambda, const ZollOptions& options = {});

enum class Dichotomy { Short, Long, Violation };
std::string_view to_string(Dichotomy d);

/// Short: simple with length in ((2pi - eps) / (lambda f_max), (2pi + eps) / (lambda f_min)).
/// Long: at least n self-intersections and length > 1 / (lambda eps).
Dichotomy classify_dichotomy(double length, std::size_t self_int, double lambda, double f_min, double f_max,
                             double eps, std::size_t n);
Dichotomy classify_dichotomy(const ClosedOrbit& orbit, double lambda, double f_min, double f_max, double eps,
                             std::size_t n);

/// Rotational first integral: a^2 phi' + lambda * int_0^theta f a on revolution
/// surfaces (sign follows the orientation); the analogous momentum on the torus.
double first_integral(const MagneticSurface& surface, double lambda, const UnitTangentState& state);

}  // namespace magzoll
