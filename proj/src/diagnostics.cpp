#include "magzoll/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "magzoll/error.hpp"

namespace magzoll {

namespace {

constexpr std::string_view kModule = "diagnostics";
const double kCos30 = std::sqrt(3.0) / 2.0;

}  // namespace

SystemConstants SystemConstants::from_surface(const MagneticSurface& surface) {
  return from_total(total_area(surface), surface.euler_characteristic(), surface.total_flux());
}

SystemConstants SystemConstants::from_total(double area, int euler, double f_total) {
  if (!(area > 0.0)) throw Error(ErrorCode::InvalidArgument, kModule, "area must be positive");
  return {area, euler, f_total, f_total / area};
}

SystemConstants SystemConstants::from_average(double area, int euler, double f_avg) {
  if (!(area > 0.0)) throw Error(ErrorCode::InvalidArgument, kModule, "area must be positive");
  return {area, euler, f_avg * area, f_avg};
}

double avg_magnetic_curvature(const SystemConstants& c, double lambda) {
  return lambda * lambda * c.f_avg * c.f_avg + kTwoPi * c.euler / c.area;
}

double helicity(const SystemConstants& c, double lambda) {
  if (c.euler == 0) throw Error(ErrorCode::TorusEulerZero, kModule, "helicity needs nonzero Euler characteristic");
  return c.area * c.area / (2.0 * c.euler) * avg_magnetic_curvature(c, lambda);
}

double lambda_zero(const SystemConstants& c) {
  if (c.euler >= 0) {
    throw Error(ErrorCode::NonNegativeEuler, kModule, "chi = " + std::to_string(c.euler) + " has no helicity zero");
  }
  if (c.f_total == 0.0) throw Error(ErrorCode::ZeroMeanField, kModule, "total flux vanishes");
  return std::sqrt(-kTwoPi * c.euler * c.area) / std::abs(c.f_total);
}

SystolicValue systolic_value(const SystemConstants& c, double lambda) {
  const double k = avg_magnetic_curvature(c, lambda);
  if (!(k > 0.0)) {
    throw Error(ErrorCode::NonpositiveMagneticCurvature, kModule,
                "average magnetic curvature " + std::to_string(k) + " is not positive");
  }
  const double lf = lambda * c.f_avg;
  SystolicValue out;
  out.value = kTwoPi / (lf + std::sqrt(k));
  out.literal = kTwoPi / (lf + std::sqrt(lf * lf + kTwoPi / c.area));
  return out;
}

ManeValue mane_h(const SystemConstants& c, std::optional<double> constant_curvature, std::optional<double> constant_f) {
  if (constant_curvature && constant_f && *constant_curvature < 0.0 && *constant_f > 0.0) {
    return {std::sqrt(-*constant_curvature) / *constant_f, false};
  }
  return {lambda_zero(c), true};
}

DriftBound drift_bound(const DriftSetup& s) {
  if (!(s.e > 0.0) || !(s.L >= 0.0) || !(s.lambda > 0.0) || !(s.eps >= 0.0) || !(s.c > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, kModule, "need e > 0, L >= 0, lambda > 0, eps >= 0, c > 0");
  }
  auto evaluate = [&](double c, DriftBound& out) {
    const double le = s.lambda * s.e;
    out.r_lambda = c / le;
    const double er = s.eps * out.r_lambda;
    const double d1 = le + er;
    const double d2 = le - er;
    if (!(d1 > 0.0)) throw Error(ErrorCode::DenominatorNonpositive, kModule, "r1: lambda e + eps r_lambda <= 0");
    if (!(d2 > 0.0)) throw Error(ErrorCode::DenominatorNonpositive, kModule, "r2: lambda e - eps r_lambda <= 0");
    const double d0 = le - s.L * s.lambda / (2.0 * d1) + er;
    if (!(d0 > 0.0)) {
      throw Error(ErrorCode::DenominatorNonpositive, kModule,
                  "r0: lambda e - L lambda / (2 (lambda e + eps r_lambda)) + eps r_lambda <= 0");
    }
    out.r0 = 1.0 / d0;
    out.r1 = 1.0 / d1;
    out.r2 = 1.0 / d2;
    out.delta = kCos30 * out.r0 + (1.0 - kCos30) * out.r1 - out.r2;
    out.two_delta = 2.0 * out.delta;
  };
  DriftBound out;
  evaluate(s.c, out);
  for (double c : {1.5, 4.0}) {
    DriftBound other;
    evaluate(c, other);
    out.sensitivity.emplace_back(c, other.delta);
  }
  return out;
}

double drift_closed_form(double e, double L, double lambda) {
  const double denom = 2.0 * e * e * (lambda * e - L / (2.0 * e));
  if (!(denom > 0.0)) throw Error(ErrorCode::DenominatorNonpositive, kModule, "lambda e <= L / (2 e)");
  return L * lambda * kCos30 / denom;
}

double guiding_center_drift(double e, double L, double lambda) { return kPi * L / (lambda * lambda * e * e * e); }

DriftMeasurement measure_drift(double lambda, double e, double L, std::size_t n_loops, double tol,
                               bool keep_trajectory) {
  if (!(lambda > 0.0) || !(e > 0.0) || n_loops == 0) {
    throw Error(ErrorCode::InvalidArgument, kModule, "need lambda > 0, e > 0 and at least one loop");
  }
  const MagneticSurface plane = MagneticSurface::plane(Expression::affine(e, 0.0, L));
  FlowOptions flow;
  flow.tol = tol;
  const UnitTangentState start = make_state(plane, {0.0, 0.0}, {0.0, -1.0});
  FlowStepper stepper(plane, lambda, start, 0.0, flow, start.q);

  DriftMeasurement out;
  out.crossing_times.push_back(0.0);
  out.crossing_x.push_back(0.0);
  if (keep_trajectory) out.trajectory.samples.push_back({0.0, start});
  out.trajectory.lambda = lambda;

  const double loop_time = kTwoPi / (lambda * e);
  double t_prev = 0.0;
  UnitTangentState s_prev = start;
  double last_crossing = 0.0;
  // Generous bound on the time between crossings.
  const double gap_limit = 20.0 * loop_time;
  while (out.crossing_times.size() <= n_loops) {
    if (!stepper.step(static_cast<double>(n_loops + 1) * gap_limit)) break;
    const double t = stepper.time();
    const UnitTangentState s = stepper.state();
    if (keep_trajectory) out.trajectory.samples.push_back({t, s});
    if (!(plane.magnetic(s.q) > 0.0)) {
      throw Error(ErrorCode::CrossingNotFound, kModule, "field changes sign along the path at t=" + std::to_string(t));
    }
    if (t - last_crossing > gap_limit) {
      throw Error(ErrorCode::CrossingNotFound, kModule, "no downward crossing within " + std::to_string(gap_limit));
    }
    if (s_prev.q.y > 0.0 && s.q.y <= 0.0) {
      // Hermite guess, then Newton on y using exact propagation from the previous sample.
      const double h = t - t_prev;
      double lo = 0.0, hi = h;
      auto hermite_y = [&](double x) {
        const double u = x / h;
        const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
        const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
        return h00 * s_prev.q.y + h10 * h * s_prev.v.y + h01 * s.q.y + h11 * h * s.v.y;
      };
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (hermite_y(mid) > 0.0 ? lo : hi) = mid;
      }
      double dt = 0.5 * (lo + hi);
      UnitTangentState c = propagate(plane, lambda, s_prev, dt, flow);
      for (int it = 0; it < 8 && std::abs(c.q.y) > 0.0; ++it) {
        const double step = -c.q.y / c.v.y;
        dt += step;
        c = propagate(plane, lambda, s_prev, dt, flow);
        if (std::abs(step) < 1e-13) break;
      }
      last_crossing = t_prev + dt;
      out.crossing_times.push_back(last_crossing);
      out.crossing_x.push_back(c.q.x);
    }
    t_prev = t;
    s_prev = s;
  }
  for (std::size_t k = 1; k < out.crossing_x.size(); ++k) out.dx.push_back(out.crossing_x[k] - out.crossing_x[k - 1]);
  out.mean_dx = (out.crossing_x.back() - out.crossing_x.front()) / static_cast<double>(out.dx.size());
  out.trajectory.step_stats = stepper.stats();
  out.trajectory.arc_length = stepper.arc_length();
  return out;
}

}  // namespace magzoll
