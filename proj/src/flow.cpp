#include "magzoll/flow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "magzoll/error.hpp"
#include "magzoll/parallel.hpp"

namespace magzoll {

namespace {

constexpr std::string_view kModule = "flow";

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695, e4 = b4 - 393.0 / 640,
                 e5 = b5 - (-92097.0 / 339200), e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

}  // namespace

double default_max_step(const MagneticSurface& surface, double lambda, const Vec2& near) {
  const double scale = std::abs(lambda) * surface.probe_max_abs_f(near);
  return 0.1 * std::min(1.0, scale > 0.0 ? 1.0 / scale : 1.0);
}

FlowStepper::FlowStepper(const MagneticSurface& surface, double lambda, const UnitTangentState& start, double t0,
                         const FlowOptions& options, const Vec2& probe_center)
    : surface_(surface), lambda_(lambda), const_f_(surface.f().constant_value()), options_(options), state_(start), t_(t0) {
  if (!(options.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, kModule, "tol must be positive");
  state_ = make_state(surface, start.q, start.v);
  h_max_ = options.max_step ? *options.max_step : default_max_step(surface, lambda, probe_center);
  h_ = h_max_;
}

FlowStepper::State FlowStepper::rhs(const State& y) const {
  const Vec2 q{y[0], y[1]};
  const Vec2 v{y[2], y[3]};
  surface_.check_chart(q);
  State dy{};
  dy[0] = v.x;
  dy[1] = v.y;
  const double force = lambda_ * (const_f_ ? *const_f_ : surface_.magnetic(q));
  const Vec2 jv = surface_.rotate(q, v);
  Vec2 acc = force * jv;
  double speed = norm(v);
  if (surface_.is_revolution()) {
    const double a = surface_.profile().a(q.x);
    const double da = surface_.profile().da(q.x);
    acc.x += a * da * v.y * v.y;
    acc.y -= 2.0 * (da / a) * v.x * v.y;
    speed = std::sqrt(v.x * v.x + a * a * v.y * v.y);
  }
  dy[2] = acc.x;
  dy[3] = acc.y;
  if (options_.track_flux) {
    dy[5] = dot(surface_.area_primitive(q).value, v);
    dy[4] = const_f_ ? *const_f_ * dy[5] : dot(surface_.magnetic_primitive(q).value, v);
  }
  dy[6] = speed;
  return dy;
}

bool FlowStepper::step(double t_limit) {
  const double remaining = t_limit - t_;
  if (std::abs(remaining) <= 1e-15 * std::max(1.0, std::abs(t_limit))) return false;
  const double dir = remaining > 0 ? 1.0 : -1.0;

  State y{state_.q.x, state_.q.y, state_.v.x, state_.v.y, extra_[0], extra_[1], extra_[2]};
  const double tol = options_.tol;
  for (;;) {
    if (stats_.accepted + stats_.rejected >= options_.max_steps) {
      throw Error(ErrorCode::StepUnderflow, kModule, "step budget exhausted at t=" + std::to_string(t_));
    }
    double h = std::min({h_, h_max_, std::abs(remaining)});
    if (h < std::abs(remaining) && h < options_.min_step * std::max(1.0, std::abs(t_))) {
      throw Error(ErrorCode::StepUnderflow, kModule,
                  "step size underflow at t=" + std::to_string(t_) + ", q=(" + std::to_string(state_.q.x) + ", " +
                      std::to_string(state_.q.y) + ")");
    }
    const double hs = dir * h;
    auto stage = [&](std::initializer_list<std::pair<double, const State*>> terms) {
      State s = y;
      for (const auto& [coef, k] : terms) {
        for (std::size_t i = 0; i < s.size(); ++i) s[i] += hs * coef * (*k)[i];
      }
      return s;
    };
    State k1, k2, k3, k4, k5, k6, k7, y5;
    try {
      k1 = rhs(y);
      k2 = rhs(stage({{a21, &k1}}));
      k3 = rhs(stage({{a31, &k1}, {a32, &k2}}));
      k4 = rhs(stage({{a41, &k1}, {a42, &k2}, {a43, &k3}}));
      k5 = rhs(stage({{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
      k6 = rhs(stage({{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
      y5 = stage({{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
      k7 = rhs(y5);
    } catch (const Error& err) {
      // A stage probing past a pole: shrink the step and retry.
      if (err.code() != ErrorCode::PoleEvaluation) throw;
      ++stats_.rejected;
      h_ = 0.25 * h;
      continue;
    }
    double err_norm = 0.0;
    const std::size_t ncomp = options_.track_flux ? 7 : 4;
    for (std::size_t i = 0; i < ncomp; ++i) {
      if (!options_.track_flux && i >= 4) break;
      const double e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double scale = tol + tol * std::max(std::abs(y[i]), std::abs(y5[i]));
      err_norm = std::max(err_norm, std::abs(e) / scale);
    }
    if (!std::isfinite(err_norm)) err_norm = 1e10;
    const double factor = err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
    if (err_norm > 1.0) {
      ++stats_.rejected;
      h_ = h * factor;
      continue;
    }
    // Accept, then project back to the unit sphere bundle.
    const Vec2 q{y5[0], y5[1]};
    Vec2 v{y5[2], y5[3]};
    const double speed = surface_.metric(q).norm(v);
    stats_.max_speed_deviation = std::max(stats_.max_speed_deviation, std::abs(speed - 1.0));
    v = v / speed;
    state_ = {q, v};
    extra_ = {y5[4], y5[5], y5[6]};
    t_ += hs;
    if (std::abs(t_limit - t_) <= 1e-15 * std::max(1.0, std::abs(t_limit))) t_ = t_limit;
    last_h_ = h;
    ++stats_.accepted;
    stats_.max_step = std::max(stats_.max_step, h);
    stats_.min_step = std::min(stats_.min_step, h);
    h_ = h * factor;
    if (!surface_.in_dynamic_domain(q)) {
      throw Error(ErrorCode::PoleEscape, kModule,
                  "trajectory entered the pole margin at t=" + std::to_string(t_) + ", theta=" + std::to_string(q.x));
    }
    return true;
  }
}

UnitTangentState Trajectory::interpolate(const MagneticSurface& surface, double t) const {
  if (samples.empty()) throw Error(ErrorCode::InvalidArgument, kModule, "empty trajectory");
  if (t <= samples.front().t) return samples.front().state;
  if (t >= samples.back().t) return samples.back().state;
  auto it = std::upper_bound(samples.begin(), samples.end(), t,
                             [](double value, const TrajectorySample& s) { return value < s.t; });
  const auto& s1 = *it;
  const auto& s0 = *(it - 1);
  const double h = s1.t - s0.t;
  const double u = (t - s0.t) / h;
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
  const Vec2 q = h00 * s0.state.q + (h10 * h) * s0.state.v + h01 * s1.state.q + (h11 * h) * s1.state.v;
  const double d00 = 6 * u * u - 6 * u, d10 = 3 * u * u - 4 * u + 1, d01 = -d00, d11 = 3 * u * u - 2 * u;
  const Vec2 v = (d00 / h) * s0.state.q + d10 * s0.state.v + (d01 / h) * s1.state.q + d11 * s1.state.v;
  return make_state(surface, q, v);
}

Trajectory integrate(const MagneticSurface& surface, double lambda, const UnitTangentState& start,
                     std::pair<double, double> t_span, const FlowOptions& options) {
  const auto [t0, t1] = t_span;
  if (!(t0 < t1)) throw Error(ErrorCode::InvalidArgument, kModule, "t_span must satisfy t0 < t1");
  const double t_start = (t0 <= 0.0 && 0.0 <= t1) ? 0.0 : t0;

  Trajectory traj;
  traj.lambda = lambda;
  const UnitTangentState s0 = make_state(surface, start.q, start.v);

  auto merge_stats = [&](const StepStats& s) {
    traj.step_stats.accepted += s.accepted;
    traj.step_stats.rejected += s.rejected;
    traj.step_stats.max_step = std::max(traj.step_stats.max_step, s.max_step);
    traj.step_stats.min_step = std::min(traj.step_stats.min_step, s.min_step);
    traj.step_stats.max_speed_deviation = std::max(traj.step_stats.max_speed_deviation, s.max_speed_deviation);
  };

  if (t0 < t_start) {
    FlowStepper back(surface, lambda, s0, t_start, options, s0.q);
    std::vector<TrajectorySample> rev;
    while (back.step(t0)) rev.push_back({back.time(), back.state()});
    std::reverse(rev.begin(), rev.end());
    traj.samples = std::move(rev);
    merge_stats(back.stats());
    traj.arc_length -= back.arc_length();
    traj.magnetic_line_integral -= back.magnetic_integral();
    traj.area_line_integral -= back.area_integral();
  }
  traj.samples.push_back({t_start, s0});
  FlowStepper fwd(surface, lambda, s0, t_start, options, s0.q);
  while (fwd.step(t1)) traj.samples.push_back({fwd.time(), fwd.state()});
  merge_stats(fwd.stats());
  traj.arc_length += fwd.arc_length();
  traj.magnetic_line_integral += fwd.magnetic_integral();
  traj.area_line_integral += fwd.area_integral();
  return traj;
}

UnitTangentState propagate(const MagneticSurface& surface, double lambda, const UnitTangentState& start,
                           double duration, const FlowOptions& options) {
  FlowStepper stepper(surface, lambda, start, 0.0, options, start.q);
  while (stepper.step(duration)) {
  }
  return stepper.state();
}

bool ChartRegion::contains(const Vec2& q) const {
  const Vec2 d = q - center;
  if (shape == Shape::Disk) return dot(d, d) < radius * radius;
  return std::abs(d.x) < half_extent.x && std::abs(d.y) < half_extent.y;
}

LocalizationReport localization_check(const MagneticSurface& surface, double lambda, const ChartRegion& compact,
                                      const ChartRegion& open, double horizon, const LocalizationOptions& options) {
  if (!(horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, kModule, "T must be positive");
  if (options.grid < 1 || options.directions < 1) throw Error(ErrorCode::InvalidArgument, kModule, "empty start grid");

  // Starts: grid over the bounding box of K (closed), clipped to K, plus its center.
  const Vec2 half = compact.shape == ChartRegion::Shape::Disk ? Vec2{compact.radius, compact.radius}
                                                              : compact.half_extent;
  std::vector<Vec2> bases{compact.center};
  const int n = options.grid;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double u = n == 1 ? 0.0 : 2.0 * i / (n - 1) - 1.0;
      const double v = n == 1 ? 0.0 : 2.0 * j / (n - 1) - 1.0;
      const Vec2 q = compact.center + Vec2{u * half.x, v * half.y};
      const Vec2 d = q - compact.center;
      const bool inside = compact.shape == ChartRegion::Shape::Disk
                              ? dot(d, d) <= compact.radius * compact.radius * (1 + 1e-12)
                              : true;
      if (inside && !(i * 2 == n - 1 && j * 2 == n - 1)) bases.push_back(q);
    }
  }
  for (const Vec2& q : bases) {
    if (!open.contains(q)) throw Error(ErrorCode::InvalidArgument, kModule, "K must lie inside U");
  }

  // f > 0 on U, checked on a grid over its bounding box.
  const Vec2 uhalf = open.shape == ChartRegion::Shape::Disk ? Vec2{open.radius, open.radius} : open.half_extent;
  for (int i = 0; i <= 16; ++i) {
    for (int j = 0; j <= 16; ++j) {
      const Vec2 q = open.center + Vec2{uhalf.x * (i / 8.0 - 1.0), uhalf.y * (j / 8.0 - 1.0)};
      if (open.contains(q) && !(surface.magnetic(q) > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, kModule, "f must be positive on U");
      }
    }
  }

  struct Outcome {
    bool escaped = false;
    double escape_time = 0.0;
    Vec2 escape_point;
    double excursion = 0.0;
  };
  const std::size_t total = bases.size() * static_cast<std::size_t>(options.directions);
  std::vector<Outcome> outcomes(total);
  parallel_for(total, options.jobs, [&](std::size_t idx) {
    const Vec2 q = bases[idx / static_cast<std::size_t>(options.directions)];
    const double angle = kTwoPi * static_cast<double>(idx % static_cast<std::size_t>(options.directions)) /
                         options.directions;
    const UnitTangentState s = state_from_angle(surface, q, angle);
    Outcome out;
    for (double limit : {horizon, -horizon}) {
      FlowStepper stepper(surface, lambda, s, 0.0, options.flow, q);
      while (stepper.step(limit)) {
        const Vec2 p = stepper.state().q;
        out.excursion = std::max(out.excursion, norm(p - q));
        if (!open.contains(p)) {
          out.escaped = true;
          out.escape_time = stepper.time();
          out.escape_point = p;
          break;
        }
      }
      if (out.escaped) break;
    }
    outcomes[idx] = out;
  });

  LocalizationReport report;
  report.trajectories = total;
  for (std::size_t idx = 0; idx < total; ++idx) {
    report.max_excursion = std::max(report.max_excursion, outcomes[idx].excursion);
    if (outcomes[idx].escaped && !report.witness) {
      const Vec2 q = bases[idx / static_cast<std::size_t>(options.directions)];
      const double angle = kTwoPi * static_cast<double>(idx % static_cast<std::size_t>(options.directions)) /
                           options.directions;
      report.holds = false;
      report.witness = LocalizationReport::Witness{state_from_angle(surface, q, angle), outcomes[idx].escape_time,
                                                   outcomes[idx].escape_point};
    }
  }
  return report;
}

}  // namespace magzoll
