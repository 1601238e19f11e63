#include "magzoll/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "magzoll/error.hpp"
#include "magzoll/parallel.hpp"

namespace magzoll {

namespace {

constexpr std::string_view kModule = "orbits";
constexpr double kInvPhi = 0.6180339887498949;

// Minimizes fn on [lo, hi] by golden-section search, then polishes by
// bisection on the sign of the centered slope.
template <class Fn>
std::pair<double, double> minimize_return(Fn&& fn, double lo, double hi) {
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
  double f1 = fn(x1), f2 = fn(x2);
  const double width = std::max(1e-9 * (hi - lo), 1e-14);
  while (b - a > width) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = fn(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = fn(x2);
    }
  }
  double l = a, r = b;
  const double delta = std::max(1e-3 * (b - a), 1e-15);
  for (int it = 0; it < 40 && r - l > 1e-15; ++it) {
    const double m = 0.5 * (l + r);
    const double dp = fn(m + delta), dm = fn(m - delta);
    if (dp * dp - dm * dm > 0.0) {
      r = m;
    } else {
      l = m;
    }
  }
  double best_t = 0.5 * (l + r);
  double best = fn(best_t);
  for (double t : {x1, x2, lo, hi}) {
    const double v = fn(t);
    if (v < best) {
      best = v;
      best_t = t;
    }
  }
  return {best_t, best};
}

double connection_rate(const MagneticSurface& surface, const Vec2& q) {
  if (!surface.is_revolution()) return 0.0;
  const auto& p = surface.profile();
  return std::abs(p.da(q.x)) / p.a(q.x);
}

}  // namespace

std::string_view to_string(ReturnStatus status) {
  switch (status) {
    case ReturnStatus::Closed: return "closed";
    case ReturnStatus::NotClosed: return "not_closed";
    case ReturnStatus::Inconclusive: return "inconclusive";
  }
  return "?";
}

std::string_view to_string(ZollVerdict verdict) {
  switch (verdict) {
    case ZollVerdict::Zoll: return "zoll";
    case ZollVerdict::NotZoll: return "not_zoll";
    case ZollVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

std::string_view to_string(Dichotomy d) {
  switch (d) {
    case Dichotomy::Short: return "short";
    case Dichotomy::Long: return "long";
    case Dichotomy::Violation: return "violation";
  }
  return "?";
}

double default_horizon(const MagneticSurface& surface, double lambda) {
  const double m = lambda * surface.probe_min_f();
  return m > 0.0 ? 200.0 * kTwoPi / m : 100.0;
}

ClosedOrbit make_closed_orbit(const MagneticSurface& surface, double lambda, const UnitTangentState& start0,
                              double period, const ClosedOrbitOptions& options) {
  const UnitTangentState start = make_state(surface, start0.q, start0.v);
  FlowOptions flow = options.flow;
  flow.track_flux = true;
  const Trajectory traj = integrate(surface, lambda, start, {0.0, period}, flow);

  ClosedOrbit orbit;
  orbit.start = start;
  orbit.period = period;
  orbit.length = traj.arc_length;
  orbit.return_distance = sasaki_distance(start, traj.samples.back().state, surface);

  const std::size_t n = std::clamp<std::size_t>(2 * traj.samples.size(), options.min_loop_points,
                                                options.max_loop_points);
  std::vector<Vec2> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i] = traj.interpolate(surface, period * static_cast<double>(i) / static_cast<double>(n)).q;
  }
  const std::array<int, 2> lift = surface.kind() == SurfaceKind::Plane
                                      ? std::array<int, 2>{0, 0}
                                      : surface.deck_class(traj.samples.back().state.q - start.q);
  orbit.orbit_loop = DiscreteLoop::make(surface, std::move(pts), period, lift);
  if (options.count_self_intersections) {
    orbit.self_int = self_intersections(orbit.orbit_loop, surface, options.intersections);
  }

  const bool torus_class = surface.kind() == SurfaceKind::FlatTorus && (lift[0] != 0 || lift[1] != 0);
  if (!torus_class && !(surface.is_revolution() && std::abs(lift[0]) > 1)) {
    const FluxValue fv =
        flux_from_line_integrals(surface, lambda, traj.magnetic_line_integral, traj.area_line_integral, lift);
    orbit.flux_value = -fv.value;
    if (fv.alternative) orbit.flux_alternative = -*fv.alternative;
  }

  const UnitTangentState reversed{start.q, -start.v};
  double sep = std::numeric_limits<double>::infinity();
  for (const auto& s : traj.samples) sep = std::min(sep, sasaki_distance(reversed, s.state, surface));
  orbit.reversal_separation = sep;
  return orbit;
}

ReturnScan scan_return(const MagneticSurface& surface, double lambda, const UnitTangentState& start0, double horizon,
                       const ClosedOrbitOptions& options) {
  if (!(horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, kModule, "horizon must be positive");
  const UnitTangentState start = make_state(surface, start0.q, start0.v);
  const double tol = options.return_tol;
  const double guard = std::max(1e3 * tol, 1e-4);
  const double fmax = std::abs(lambda) * surface.probe_max_abs_f(start.q);

  ReturnScan scan;
  scan.horizon = horizon;
  scan.min_distance = std::numeric_limits<double>::infinity();

  auto distance_from = [&](const UnitTangentState& base, double dt) {
    if (dt == 0.0) return sasaki_distance(start, base, surface);
    return sasaki_distance(start, propagate(surface, lambda, base, dt, options.flow), surface);
  };

  FlowStepper stepper(surface, lambda, start, 0.0, options.flow, start.q);
  bool departed = false;
  double t_prev = 0.0;
  UnitTangentState s_prev = start;
  double d_prev = 0.0;
  std::vector<double> minima;
  double d_before = std::numeric_limits<double>::infinity();
  std::optional<double> found;

  while (stepper.step(horizon)) {
    const double t = stepper.time();
    const UnitTangentState s = stepper.state();
    const double d = sasaki_distance(start, s, surface);
    if (!departed) {
      if (d > guard) departed = true;
      t_prev = t;
      s_prev = s;
      d_prev = d;
      continue;
    }
    if (d < scan.min_distance) {
      scan.min_distance = d;
      scan.min_distance_time = t;
    }
    if (d_prev < d_before && d_prev <= d) minima.push_back(d_prev);

    const double h = t - t_prev;
    const double rate =
        1.5 * std::sqrt(1.0 + std::pow(fmax + std::max(connection_rate(surface, s_prev.q), connection_rate(surface, s.q)), 2));
    const double lower = 0.5 * (d_prev + d - rate * h);
    if (lower < 10.0 * tol) {
      const UnitTangentState base = s_prev;
      const auto [dt, dmin] = minimize_return([&](double x) { return distance_from(base, std::clamp(x, 0.0, h)); }, 0.0, h);
      if (dmin < scan.min_distance) {
        scan.min_distance = dmin;
        scan.min_distance_time = t_prev + dt;
      }
      if (dmin < tol) {
        found = t_prev + dt;
        break;
      }
    }
    d_before = d_prev;
    t_prev = t;
    s_prev = s;
    d_prev = d;
  }

  if (!found) {
    const bool decreasing = minima.size() >= 3 && std::is_sorted(minima.rbegin(), minima.rend()) &&
                            std::adjacent_find(minima.begin(), minima.end()) == minima.end();
    scan.status = (scan.min_distance < 10.0 * tol || decreasing) ? ReturnStatus::Inconclusive : ReturnStatus::NotClosed;
    return scan;
  }

  // Prime period: look for earlier returns at T / k.
  double period = *found;
  int multiplicity = 1;
  for (int k = options.max_divisor; k >= 2; --k) {
    const double tk = period / k;
    if (distance_from(start, tk) > 1e4 * tol) continue;
    const double w = 1e-6 * tk;
    const auto [t_best, d_best] =
        minimize_return([&](double x) { return distance_from(start, x); }, tk - w, tk + w);
    if (d_best < tol) {
      period = t_best;
      multiplicity = k;
      break;
    }
  }
  scan.status = ReturnStatus::Closed;
  scan.period = period;
  scan.orbit = make_closed_orbit(surface, lambda, start, period, options);
  scan.orbit->multiplicity = multiplicity;
  return scan;
}

std::optional<ClosedOrbit> find_closed_orbit(const MagneticSurface& surface, double lambda,
                                             const UnitTangentState& start, double horizon,
                                             const ClosedOrbitOptions& options) {
  ReturnScan scan = scan_return(surface, lambda, start, horizon, options);
  return scan.orbit;
}

std::vector<UnitTangentState> zoll_grid(const MagneticSurface& surface, int nu, int nv, int ndir,
                                        std::vector<double>* angles) {
  if (nu < 1 || nv < 1 || ndir < 1) throw Error(ErrorCode::InvalidArgument, kModule, "empty Zoll grid");
  if (!surface.is_closed()) throw Error(ErrorCode::UnboundedDomain, kModule, "Zoll grids need a closed surface");
  std::vector<UnitTangentState> out;
  out.reserve(static_cast<std::size_t>(nu) * nv * ndir);
  if (angles) angles->clear();
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      const double u = (i + 0.5) / nu, v = (j + 0.5) / nv;
      const Vec2 q = surface.kind() == SurfaceKind::FlatTorus ? surface.lattice() * Vec2{u, v}
                                                              : Vec2{surface.profile().length * u, kTwoPi * v};
      for (int k = 0; k < ndir; ++k) {
        const double a = kTwoPi * (k + 0.5) / ndir;
        out.push_back(state_from_angle(surface, q, a));
        if (angles) angles->push_back(a);
      }
    }
  }
  return out;
}

ZollReport zoll_check(const MagneticSurface& surface, double lambda, const ZollOptions& options) {
  std::vector<double> angles;
  const auto starts = zoll_grid(surface, options.nu, options.nv, options.ndir, &angles);
  ZollReport report;
  report.horizon = options.horizon ? *options.horizon : default_horizon(surface, lambda);
  const std::size_t chunk = std::max<std::size_t>(options.chunk, 1);

  std::optional<double> reference;
  bool stop = false;
  for (std::size_t begin = 0; begin < starts.size() && !stop; begin += chunk) {
    const std::size_t end = std::min(starts.size(), begin + chunk);
    std::vector<ZollSample> batch(end - begin);
    parallel_for(end - begin, options.jobs, [&](std::size_t k) {
      ZollSample& s = batch[k];
      s.index = begin + k;
      s.start = starts[begin + k];
      s.dir_angle = angles[begin + k];
      s.scan = scan_return(surface, lambda, s.start, report.horizon, options.orbit);
    });
    for (auto& s : batch) {
      const bool first_witness = !report.witness;
      if (s.scan.status == ReturnStatus::NotClosed && first_witness) {
        report.witness = s.start;
        report.witness_index = s.index;
      } else if (s.scan.status == ReturnStatus::Closed) {
        if (!reference) reference = *s.scan.period;
        if (std::abs(*s.scan.period - *reference) > options.period_tol && first_witness) {
          report.witness = s.start;
          report.witness_index = s.index;
        }
      }
      report.samples.push_back(std::move(s));
    }
    if (report.witness && options.stop_at_witness) stop = true;
  }

  report.sample_count = report.samples.size();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
  std::size_t closed = 0;
  bool inconclusive = false;
  for (const auto& s : report.samples) {
    if (s.scan.status == ReturnStatus::Closed) {
      lo = std::min(lo, *s.scan.period);
      hi = std::max(hi, *s.scan.period);
      sum += *s.scan.period;
      ++closed;
      const double sep = s.scan.orbit->reversal_separation;
      report.min_reversal_separation =
          report.min_reversal_separation ? std::min(*report.min_reversal_separation, sep) : sep;
    } else if (s.scan.status == ReturnStatus::Inconclusive) {
      inconclusive = true;
    }
  }
  report.period_spread = closed > 0 ? hi - lo : 0.0;
  if (report.witness) {
    report.verdict = ZollVerdict::NotZoll;
  } else if (inconclusive) {
    report.verdict = ZollVerdict::Inconclusive;
  } else {
    report.verdict = ZollVerdict::Zoll;
    report.common_period = sum / static_cast<double>(closed);
  }
  report.is_zoll = report.verdict == ZollVerdict::Zoll;
  return report;
}

Dichotomy classify_dichotomy(double length, std::size_t self_int, double lambda, double f_min, double f_max,
                             double eps, std::size_t n) {
  if (!(lambda > 0.0) || !(f_min > 0.0) || !(f_max >= f_min) || !(eps > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, kModule, "need lambda > 0, 0 < f_min <= f_max and eps > 0");
  }
  const double lo = (kTwoPi - eps) / (lambda * f_max);
  const double hi = (kTwoPi + eps) / (lambda * f_min);
  const double long_threshold = 1.0 / (lambda * eps);
  if (hi >= long_threshold) {
    throw Error(ErrorCode::WindowOverlap, kModule,
                "short window upper end " + std::to_string(hi) + " reaches the long threshold " +
                    std::to_string(long_threshold));
  }
  if (self_int == 0 && length > lo && length < hi) return Dichotomy::Short;
  if (self_int >= n && length > long_threshold) return Dichotomy::Long;
  return Dichotomy::Violation;
}

Dichotomy classify_dichotomy(const ClosedOrbit& orbit, double lambda, double f_min, double f_max, double eps,
                             std::size_t n) {
  return classify_dichotomy(orbit.length, orbit.self_int, lambda, f_min, f_max, eps, n);
}

double first_integral(const MagneticSurface& surface, double lambda, const UnitTangentState& state) {
  const Expression& f = surface.f();
  const double s = surface.chart_orientation();
  auto invariant_in = [&](int coord) {
    // Compare f along the other coordinate at a spread of sample points.
    for (int i = 0; i < 9; ++i) {
      for (int j = 1; j < 9; ++j) {
        const double u = surface.is_revolution() ? surface.profile().length * (i + 0.5) / 9.0 : (i + 0.5) / 9.0;
        const double w = (surface.is_revolution() ? kTwoPi : 1.0) * j / 9.0;
        const double f0 = coord == 1 ? f(u, 0.0) : f(0.0, u);
        const double f1 = coord == 1 ? f(u, w) : f(w, u);
        if (std::abs(f1 - f0) > 1e-10 * std::max(1.0, std::abs(f0))) return false;
      }
    }
    return true;
  };
  const Vec2 q = state.q, v = state.v;
  if (surface.is_revolution()) {
    if (!invariant_in(1)) {
      throw Error(ErrorCode::NotRotationallySymmetric, kModule, "f depends on phi");
    }
    surface.check_chart(q);
    const auto& a = surface.profile().a;
    const double ad = a(q.x);
    const double pot = integrate_panels([&](double u) { return f(u, q.y) * a(u); }, 0.0, q.x);
    return ad * ad * v.y - s * lambda * pot;
  }
  if (invariant_in(1)) {
    const double pot = integrate_panels([&](double u) { return f(u, q.y); }, 0.0, q.x);
    return v.y - s * lambda * pot;
  }
  if (invariant_in(0)) {
    const double pot = integrate_panels([&](double u) { return f(q.x, u); }, 0.0, q.y);
    return v.x + s * lambda * pot;
  }
  throw Error(ErrorCode::NotRotationallySymmetric, kModule, "f depends on both chart coordinates");
}

}  // namespace magzoll
