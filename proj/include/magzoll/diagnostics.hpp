#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "magzoll/flow.hpp"
#include "magzoll/geometry.hpp"

namespace magzoll {

/// Global constants of a closed magnetic system.
struct SystemConstants {
  double area = 0.0;
  int euler = 0;
  double f_total = 0.0;
  double f_avg = 0.0;

  static SystemConstants from_surface(const MagneticSurface& surface);
  static SystemConstants from_total(double area, int euler, double f_total);
  static SystemConstants from_average(double area, int euler, double f_avg);
};

/// lambda^2 f_avg^2 + 2 pi chi / A.
double avg_magnetic_curvature(const SystemConstants& c, double lambda);
/// A^2 / (2 chi) * K.
double helicity(const SystemConstants& c, double lambda);
/// sqrt(-2 pi chi A) / |f_total|, the zero of the helicity.
double lambda_zero(const SystemConstants& c);

struct SystolicValue {
  /// 2 pi / (lambda f_avg + sqrt(K)).
  double value = 0.0;
  /// Same with 2 pi / A in place of 2 pi chi / A under the root.
  double literal = 0.0;
};
SystolicValue systolic_value(const SystemConstants& c, double lambda);

struct ManeValue {
  double value = 0.0;
  /// True when value is only the lambda_zero upper bound.
  bool upper_bound = false;
};
/// Exact sqrt(-K) / f for constant K < 0 and constant f > 0, otherwise the bound.
ManeValue mane_h(const SystemConstants& c, std::optional<double> constant_curvature = std::nullopt,
                 std::optional<double> constant_f = std::nullopt);

struct DriftSetup {
  double e = 1.0;
  double L = 1.0;
  double lambda = 10.0;
  double eps = 0.0;
  /// Constant in r_lambda = c / (e lambda).
  double c = 2.0;
};

struct DriftBound {
  double r_lambda = 0.0, r0 = 0.0, r1 = 0.0, r2 = 0.0;
  /// cos30 r0 + (1 - cos30) r1 - r2; the drift per loop is at least 2 delta.
  double delta = 0.0;
  double two_delta = 0.0;
  /// delta evaluated for other values of c.
  std::vector<std::pair<double, double>> sensitivity;
};
DriftBound drift_bound(const DriftSetup& setup);

/// Closed form of lambda^2 delta at eps = 0: L lambda cos30 / (2 e^2 (lambda e - L / (2 e))).
double drift_closed_form(double e, double L, double lambda);
/// Leading-order guiding-center drift per loop, pi L / (lambda^2 e^3).
double guiding_center_drift(double e, double L, double lambda);

struct DriftMeasurement {
  double mean_dx = 0.0;
  std::vector<double> crossing_times;
  std::vector<double> crossing_x;
  std::vector<double> dx;
  Trajectory trajectory;
};

/// Plane with f = e + L y, start at the origin heading in -y; mean x advance
/// between successive downward crossings of the x axis.
DriftMeasurement measure_drift(double lambda, double e, double L, std::size_t n_loops, double tol = 1e-10,
                               bool keep_trajectory = false);

}  // namespace magzoll
