#include "magzoll/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "magzoll/error.hpp"

namespace magzoll {

namespace {

constexpr std::string_view kModule = "variational";

// Primitive of f * mu_g, using the area primitive for constant f.
OneForm primitive(const MagneticSurface& surface, const Vec2& q) {
  if (auto c = surface.f().constant_value()) {
    OneForm a = surface.area_primitive(q);
    a.value = *c * a.value;
    a.jacobian = {*c * a.jacobian.a11, *c * a.jacobian.a12, *c * a.jacobian.a21, *c * a.jacobian.a22};
    return a;
  }
  return surface.magnetic_primitive(q, PrimitiveSweep::X);
}

double kinetic_sum(const DiscreteLoop& loop, const MagneticSurface& surface) {
  double sum = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec2 a = loop.points[i], b = loop.next(i);
    const Vec2 d = b - a;
    sum += surface.metric(0.5 * (a + b))(d, d);
  }
  return sum;
}

// Solves (L + eps I) x = rhs for the cyclic second-difference matrix L.
std::vector<double> solve_cyclic(const std::vector<double>& rhs, double eps) {
  const std::size_t n = rhs.size();
  const double diag = 2.0 + eps;
  // Sherman-Morrison on the tridiagonal part with corner entries -1.
  const double gamma = -diag;
  std::vector<double> b(n, diag), c(n, -1.0), x(rhs), u(n, 0.0);
  b[0] = diag - gamma;
  b[n - 1] = diag - 1.0 / gamma;
  u[0] = gamma;
  u[n - 1] = -1.0;
  auto thomas = [&](std::vector<double> d) {
    std::vector<double> cp(n), dp(n);
    cp[0] = c[0] / b[0];
    dp[0] = d[0] / b[0];
    for (std::size_t i = 1; i < n; ++i) {
      const double m = b[i] - (-1.0) * cp[i - 1];
      cp[i] = c[i] / m;
      dp[i] = (d[i] - (-1.0) * dp[i - 1]) / m;
    }
    std::vector<double> out(n);
    out[n - 1] = dp[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) out[i] = dp[i] - cp[i] * out[i + 1];
    return out;
  };
  const std::vector<double> y = thomas(x);
  const std::vector<double> z = thomas(u);
  const double vy = y[0] + (-1.0 / gamma) * y[n - 1];
  const double vz = z[0] + (-1.0 / gamma) * z[n - 1];
  const double factor = vy / (1.0 + vz);
  for (std::size_t i = 0; i < n; ++i) x[i] = y[i] - factor * z[i];
  return x;
}

DiscreteLoop with_points(const DiscreteLoop& base, std::vector<Vec2> pts, double period) {
  DiscreteLoop out = base;
  out.points = std::move(pts);
  out.period = period;
  return out;
}

bool valid_points(const DiscreteLoop& loop, const MagneticSurface& surface) {
  for (std::size_t i = 0; i < loop.size(); ++i) {
    if (!std::isfinite(loop.points[i].x) || !std::isfinite(loop.points[i].y)) return false;
    if (surface.is_revolution() && !surface.in_dynamic_domain(loop.points[i])) return false;
    if (loop.next(i) == loop.points[i]) return false;
  }
  return true;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double dd = dot(d, d);
  const double u = dd > 0 ? std::clamp(dot(p - a, d) / dd, 0.0, 1.0) : 0.0;
  return norm(p - (a + u * d));
}

}  // namespace

std::string_view to_string(WaistStatus status) {
  switch (status) {
    case WaistStatus::Converged: return "converged";
    case WaistStatus::Collapse: return "collapse";
    case WaistStatus::NotConverged: return "not_converged";
  }
  return "?";
}

double ActionGradient::max_norm() const {
  double m = std::abs(period);
  for (const Vec2& g : points) m = std::max({m, std::abs(g.x), std::abs(g.y)});
  return m;
}

double ActionGradient::density_norm() const {
  const double n = static_cast<double>(points.size());
  double m = std::abs(period);
  for (const Vec2& g : points) m = std::max({m, n * std::abs(g.x), n * std::abs(g.y)});
  return m;
}

ActionValue action(const DiscreteLoop& loop, const MagneticSurface& surface, double lambda) {
  const double n = static_cast<double>(loop.size());
  ActionValue out;
  out.kinetic = n / (2.0 * loop.period) * kinetic_sum(loop, surface);
  out.period_term = 0.5 * loop.period;
  if (lambda != 0.0) out.magnetic = flux(loop, surface, lambda, PrimitiveSweep::X, FluxQuadrature::Midpoint).value;
  out.value = out.kinetic - out.magnetic + out.period_term;
  return out;
}

double optimal_period(const DiscreteLoop& loop, const MagneticSurface& surface) {
  return std::sqrt(static_cast<double>(loop.size()) * kinetic_sum(loop, surface));
}

ActionGradient action_gradient(const DiscreteLoop& loop, const MagneticSurface& surface, double lambda) {
  const std::size_t n = loop.size();
  const double tau = loop.period;
  const double scale = static_cast<double>(n) / (2.0 * tau);
  if (lambda != 0.0 && surface.kind() == SurfaceKind::FlatTorus && (loop.cover_lift[0] != 0 || loop.cover_lift[1] != 0)) {
    throw Error(ErrorCode::NonContractible, kModule, "the magnetic term needs a contractible loop");
  }
  ActionGradient g;
  g.points.assign(n, Vec2{});
  double ksum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const Vec2 a = loop.points[i], b = loop.next(i);
    const Vec2 d = b - a;
    const Vec2 m = 0.5 * (a + b);
    const Metric gm = surface.metric(m);
    const auto dg = surface.metric_derivatives(m);
    ksum += gm(d, d);
    const Vec2 gd = gm.lower(d);
    const Vec2 half_dg{0.5 * dg[0](d, d), 0.5 * dg[1](d, d)};
    Vec2 to_b = scale * (2.0 * gd + half_dg);
    Vec2 to_a = scale * (-2.0 * gd + half_dg);
    if (lambda != 0.0) {
      const OneForm th = primitive(surface, m);
      const Mat2& J = th.jacobian;
      const Vec2 jt{J.a11 * d.x + J.a21 * d.y, J.a12 * d.x + J.a22 * d.y};
      to_b -= lambda * (th.value + 0.5 * jt);
      to_a -= lambda * (-th.value + 0.5 * jt);
    }
    g.points[j] += to_b;
    g.points[i] += to_a;
  }
  g.period = -scale * ksum / tau + 0.5;
  return g;
}

double loop_space_distance(const DiscreteLoop& a, const DiscreteLoop& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, kModule, "loops differ in size");
  const std::size_t n = a.size();
  const double nn = static_cast<double>(n);
  const double tau = 0.5 * (a.period + b.period);
  double l2 = 0.0, h1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 d = a.points[i] - b.points[i];
    const Vec2 dn = a.next(i) - b.next(i);
    l2 += dot(d, d);
    h1 += dot(dn - d, dn - d);
  }
  const double dt = a.period - b.period;
  return std::sqrt(l2 / nn + h1 * nn / tau + dt * dt);
}

double chart_distance(const DiscreteLoop& a, const DiscreteLoop& b, const MagneticSurface& surface) {
  std::vector<Vec2> shifts{{0.0, 0.0}};
  const auto periods = surface.periods();
  if (periods.size() == 1) {
    shifts.push_back(periods[0]);
    shifts.push_back(-periods[0]);
  } else if (periods.size() == 2) {
    for (int i = -1; i <= 1; ++i) {
      for (int j = -1; j <= 1; ++j) {
        if (i != 0 || j != 0) shifts.push_back(static_cast<double>(i) * periods[0] + static_cast<double>(j) * periods[1]);
      }
    }
  }
  double worst = 0.0;
  for (const Vec2& p0 : a.points) {
    const Vec2 p = surface.reduce(p0);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < b.size(); ++k) {
      const Vec2 off = b.points[k] - surface.reduce(b.points[k]);
      const Vec2 s0 = b.points[k] - off, s1 = b.next(k) - off;
      for (const Vec2& sh : shifts) best = std::min(best, point_segment_distance(p + sh, s0, s1));
    }
    worst = std::max(worst, best);
  }
  return worst;
}

WaistSearch find_waist(const MagneticSurface& surface, double lambda, const DiscreteLoop& seed,
                       const WaistOptions& options) {
  const std::size_t n = seed.size();
  const double eps = 0.25 * std::pow(kTwoPi / static_cast<double>(n), 2);
  DiscreteLoop loop = seed;
  loop.period = optimal_period(loop, surface);

  WaistSearch out;
  auto reduced_value = [&](const DiscreteLoop& l) { return action(l, surface, lambda).value; };
  if (loop.period < options.tau_min) {
    out.status = WaistStatus::Collapse;
    out.final_period = loop.period;
    return out;
  }
  double value = reduced_value(loop);
  double step = 1.0;
  for (std::size_t it = 0; it <= options.max_iterations; ++it) {
    const ActionGradient g = action_gradient(loop, surface, lambda);
    out.iterations = it;
    out.grad_norm = g.density_norm();
    out.final_period = loop.period;
    if (out.grad_norm <= options.grad_tol) {
      out.status = WaistStatus::Converged;
      Waist w;
      w.loop = loop;
      w.action = value;
      w.length = loop_length(loop, surface);
      w.lambda = lambda;
      w.grad_norm = out.grad_norm;
      w.iterations = it;
      if (options.probe_radius > 0.0) {
        const auto probe =
            stability_probe(loop, surface, lambda, options.probe_radius, options.probe_directions, options.seed);
        w.stability_margin = probe.margin;
        w.probe_radius = probe.radius;
      }
      out.waist = std::move(w);
      return out;
    }
    if (it == options.max_iterations) break;

    // Sobolev-type preconditioning of the point gradient.
    std::vector<double> gx(n), gy(n);
    const double pre = loop.period / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      gx[i] = pre * g.points[i].x;
      gy[i] = pre * g.points[i].y;
    }
    const auto dx = solve_cyclic(gx, eps);
    const auto dy = solve_cyclic(gy, eps);
    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) slope += g.points[i].x * dx[i] + g.points[i].y * dy[i];
    if (!(slope > 0.0)) break;

    step = std::min(2.0 * step, 4.0);
    bool accepted = false;
    while (step > 1e-14) {
      std::vector<Vec2> pts(n);
      for (std::size_t i = 0; i < n; ++i) pts[i] = loop.points[i] - step * Vec2{dx[i], dy[i]};
      DiscreteLoop trial = with_points(loop, std::move(pts), loop.period);
      if (valid_points(trial, surface)) {
        trial.period = optimal_period(trial, surface);
        if (trial.period < options.tau_min) {
          out.status = WaistStatus::Collapse;
          out.final_period = trial.period;
          return out;
        }
        double tv = std::numeric_limits<double>::infinity();
        try {
          tv = reduced_value(trial);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::PoleEvaluation) throw;
        }
        // When the required decrease is below the rounding level of the
        // action the test is meaningless; only damped steps are taken then.
        const bool noise = 1e-4 * step * slope < 1e-13 * std::max(1.0, std::abs(value));
        const bool ok = noise ? step <= 0.5 && std::isfinite(tv) : tv <= value - 1e-4 * step * slope;
        if (ok) {
          loop = std::move(trial);
          value = tv;
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  out.status = WaistStatus::NotConverged;
  return out;
}

StabilityProbe stability_probe(const DiscreteLoop& loop, const MagneticSurface& surface, double lambda, double radius,
                               int directions, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t n = loop.size();
  const double nn = static_cast<double>(n);
  const double center = action(loop, surface, lambda).value;
  StabilityProbe out;
  out.radius = radius;
  out.margin = std::numeric_limits<double>::infinity();
  constexpr int kModes = 4;
  for (int d = 0; d < directions; ++d) {
    double cx[kModes + 1], sx[kModes + 1], cy[kModes + 1], sy[kModes + 1];
    for (int k = 0; k <= kModes; ++k) {
      cx[k] = normal(rng);
      sx[k] = normal(rng);
      cy[k] = normal(rng);
      sy[k] = normal(rng);
    }
    double dtau = normal(rng);
    std::vector<Vec2> delta(n);
    for (std::size_t i = 0; i < n; ++i) {
      Vec2 v;
      for (int k = 0; k <= kModes; ++k) {
        const double ph = kTwoPi * k * static_cast<double>(i) / nn;
        v.x += cx[k] * std::cos(ph) + sx[k] * std::sin(ph);
        v.y += cy[k] * std::cos(ph) + sy[k] * std::sin(ph);
      }
      delta[i] = v;
    }
    double l2 = 0.0, h1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 dd = delta[(i + 1) % n] - delta[i];
      l2 += dot(delta[i], delta[i]);
      h1 += dot(dd, dd);
    }
    const double scale = radius / std::sqrt(l2 / nn + h1 * nn / loop.period + dtau * dtau);
    std::vector<Vec2> pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i] = loop.points[i] + scale * delta[i];
    DiscreteLoop probe = with_points(loop, std::move(pts), loop.period + scale * dtau);
    if (!(probe.period > 0.0) || !valid_points(probe, surface)) continue;
    const double diff = action(probe, surface, lambda).value - center;
    out.margin = std::min(out.margin, diff);
    out.spread = std::max(out.spread, std::abs(diff));
  }
  return out;
}

double perturbation_threshold(double eps, double r, double theta_sup) {
  if (!(eps > 0.0) || !(r > 0.0) || !(theta_sup > 0.0)) {
    throw Error(ErrorCode::NonPositiveInput, kModule, "eps, r and theta_sup must be positive");
  }
  return eps / (4.0 * r * theta_sup);
}

namespace {

ContinuationResult continue_along(const MagneticSurface& surface, const Waist& waist,
                                  const std::vector<double>& lambdas, const ContinuationOptions& options) {
  ContinuationResult result;
  DiscreteLoop current = waist.loop;
  WaistOptions descent = options.descent;
  const double final_probe = descent.probe_radius;
  descent.probe_radius = 0.0;
  std::optional<Waist> last;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    const double lam = lambdas[k];
    if (k + 1 == lambdas.size()) descent.probe_radius = final_probe;
    WaistSearch search;
    try {
      search = find_waist(surface, lam, current, descent);
    } catch (const Error& e) {
      result.lost = true;
      result.reason = e.what();
      break;
    }
    if (search.status != WaistStatus::Converged) {
      result.lost = true;
      result.reason = "descent " + std::string(to_string(search.status)) + " at lambda " + std::to_string(lam);
      break;
    }
    const double cd = chart_distance(search.waist->loop, waist.loop, surface);
    ContinuationStep step{lam, search.waist->action, search.waist->length, search.waist->grad_norm, cd,
                          loop_space_distance(search.waist->loop, waist.loop)};
    result.trace.push_back(step);
    if (cd > options.neighborhood) {
      result.lost = true;
      result.reason = "left the neighborhood at lambda " + std::to_string(lam);
      break;
    }
    result.lambda_reached = lam;
    current = search.waist->loop;
    last = search.waist;
  }
  if (!result.lost) result.waist = last;
  return result;
}

}  // namespace

ContinuationResult continue_waist(const MagneticSurface& surface, const Waist& waist, double lambda_target,
                                  const ContinuationOptions& options) {
  if (lambda_target == 0.0) {
    ContinuationResult r;
    r.waist = waist;
    return r;
  }
  if (options.steps < 1) throw Error(ErrorCode::InvalidArgument, kModule, "steps must be positive");
  std::vector<double> lambdas;
  for (int k = 1; k <= options.steps; ++k) lambdas.push_back(lambda_target * k / options.steps);
  return continue_along(surface, waist, lambdas, options);
}

ContinuationResult continuation_threshold(const MagneticSurface& surface, const Waist& waist, double step,
                                          double lambda_max, const ContinuationOptions& options) {
  if (!(step > 0.0) || !(lambda_max > step)) {
    throw Error(ErrorCode::InvalidArgument, kModule, "need 0 < step < lambda_max");
  }
  std::vector<double> lambdas;
  for (int k = 1; k * step <= lambda_max * (1 + 1e-12); ++k) lambdas.push_back(k * step);
  ContinuationOptions opts = options;
  opts.descent.probe_radius = 0.0;
  return continue_along(surface, waist, lambdas, opts);
}

double primitive_sup(const DiscreteLoop& loop, const MagneticSurface& surface) {
  double sup = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec2 m = 0.5 * (loop.points[i] + loop.next(i));
    const Vec2 th = primitive(surface, m).value;
    const Metric g = surface.metric(m);
    const double det = g.det();
    // Dual norm of a covector: g^{ij} th_i th_j.
    const double n2 = (g.g22 * th.x * th.x - 2.0 * g.g12 * th.x * th.y + g.g11 * th.y * th.y) / det;
    sup = std::max(sup, std::sqrt(n2));
  }
  return sup;
}

double reintegrated_closure(const Waist& waist, const MagneticSurface& surface, const FlowOptions& flow) {
  const DiscreteLoop& loop = waist.loop;
  const Vec2 v = loop.next(0) - (loop.points.back() - loop.closure);
  const UnitTangentState start = make_state(surface, loop.points[0], v);
  const UnitTangentState end = propagate(surface, waist.lambda, start, waist.length, flow);
  return sasaki_distance(start, end, surface);
}

}  // namespace magzoll
