#include "magzoll/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "magzoll/config.hpp"
#include "magzoll/curves.hpp"
#include "magzoll/diagnostics.hpp"
#include "magzoll/error.hpp"
#include "magzoll/flow.hpp"
#include "magzoll/orbits.hpp"
#include "magzoll/parallel.hpp"
#include "magzoll/report.hpp"
#include "magzoll/variational.hpp"

namespace magzoll {

namespace {

constexpr std::string_view kModule = "cli";

struct Context {
  ExperimentConfig config;
  MagneticSurface surface;
  std::string out;
  bool svg = false;
  unsigned jobs = 1;

  double lambda() const { return config.number("lambda"); }
  FlowOptions flow() const {
    FlowOptions f;
    f.tol = config.number("flow.tol");
    f.max_step = config.optional_number("flow.max_step");
    return f;
  }
  UnitTangentState start() const {
    const Json& p = config.at("start.point");
    if (!p.is_array() || p.size() != 2) throw Error(ErrorCode::ConfigError, "config", "'start.point' must be [x, y]");
    return state_from_angle(surface, {p[0].get<double>(), p[1].get<double>()}, config.number("start.dir_angle"));
  }
  void write(const std::string& name, const std::string& text) const { write_file(out, name, text); }
  void write_json(const std::string& name, const Json& j) const { write(name, j.dump(2) + "\n"); }
};

std::vector<Vec2> base_curve(const Trajectory& tr) {
  std::vector<Vec2> pts;
  pts.reserve(tr.samples.size());
  for (const auto& s : tr.samples) pts.push_back(s.state.q);
  return pts;
}

std::vector<Vec2> closed_points(const DiscreteLoop& loop) {
  std::vector<Vec2> pts = loop.points;
  pts.push_back(loop.points[0] + loop.closure);
  return pts;
}

Json loop_json(const DiscreteLoop& loop) { return Json::parse(loop_to_json(loop)); }

ClosedOrbitOptions orbit_options(const Context& ctx, const std::string& section) {
  ClosedOrbitOptions o;
  o.flow = ctx.flow();
  o.return_tol = ctx.config.number(section + ".return_tol");
  o.intersections.jobs = ctx.jobs;
  return o;
}

double horizon_or_default(const Context& ctx, const std::string& key) {
  const auto h = ctx.config.optional_number(key);
  return h ? *h : default_horizon(ctx.surface, ctx.lambda());
}

OrbitRow orbit_row(const MagneticSurface& surface, const UnitTangentState& start, const std::optional<ClosedOrbit>& o,
                   std::string cls) {
  OrbitRow r;
  r.start_x = start.q.x;
  r.start_y = start.q.y;
  r.dir_angle = surface.direction_angle(start.q, start.v);
  if (o) {
    r.period = o->period;
    r.length = o->length;
    r.self_int = o->self_int;
  }
  r.cls = std::move(cls);
  return r;
}

int cmd_simulate(const Context& ctx) {
  const Json& span = ctx.config.at("simulate.t_span");
  if (!span.is_array() || span.size() != 2) {
    throw Error(ErrorCode::ConfigError, "config", "'simulate.t_span' must be [t0, t1]");
  }
  const UnitTangentState start = ctx.start();
  const Trajectory tr = integrate(ctx.surface, ctx.lambda(), start, {span[0].get<double>(), span[1].get<double>()},
                                  ctx.flow());
  ctx.write("trajectory.csv", trajectory_csv(tr));
  Json j = report_header("simulate", ctx.config);
  j["samples"] = tr.samples.size();
  j["arc_length"] = tr.arc_length;
  j["end"] = state_json(tr.samples.back().state);
  j["steps"] = {{"accepted", tr.step_stats.accepted},
                {"rejected", tr.step_stats.rejected},
                {"max_speed_deviation", tr.step_stats.max_speed_deviation}};
  if (ctx.surface.kind() != SurfaceKind::Plane) {
    double drift = 0.0;
    const double i0 = first_integral(ctx.surface, ctx.lambda(), start);
    for (const auto& s : tr.samples) {
      drift = std::max(drift, std::abs(first_integral(ctx.surface, ctx.lambda(), s.state) - i0));
    }
    j["first_integral"] = {{"initial", i0}, {"max_drift", drift}};
  }
  ctx.write_json("simulate.json", j);
  if (ctx.svg) ctx.write("trajectory.svg", svg_polylines({base_curve(tr)}));
  std::cout << "simulate: " << tr.samples.size() << " samples, arc length " << format_number(tr.arc_length) << "\n";
  return kExitOk;
}

int cmd_closed_orbit(const Context& ctx) {
  const UnitTangentState start = ctx.start();
  const double horizon = horizon_or_default(ctx, "closed_orbit.horizon");
  const ReturnScan scan = scan_return(ctx.surface, ctx.lambda(), start, horizon, orbit_options(ctx, "closed_orbit"));
  Json j = report_header("closed-orbit", ctx.config);
  j["status"] = to_string(scan.status);
  j["horizon"] = scan.horizon;
  j["min_distance"] = scan.min_distance;
  j["min_distance_time"] = scan.min_distance_time;
  j["orbit"] = scan.orbit ? closed_orbit_json(*scan.orbit) : Json(nullptr);
  if (scan.orbit) {
    j["loop"] = loop_json(scan.orbit->orbit_loop);
    if (ctx.svg) ctx.write("orbit.svg", svg_polylines({closed_points(scan.orbit->orbit_loop)}));
  }
  ctx.write_json("closed_orbit.json", j);
  ctx.write("orbits.csv", orbits_csv({orbit_row(ctx.surface, start, scan.orbit, std::string(to_string(scan.status)))}));
  if (!scan.orbit) {
    throw Error(ErrorCode::Inconclusive, "orbits",
                "no return within horizon " + format_number(horizon) + " (status " + std::string(to_string(scan.status)) +
                    ")");
  }
  std::cout << "closed-orbit: period " << format_number(scan.orbit->period) << ", length "
            << format_number(scan.orbit->length) << ", self_int " << scan.orbit->self_int << "\n";
  return kExitOk;
}

int cmd_zoll(const Context& ctx) {
  const Json& grid = ctx.config.at("zoll.grid");
  if (!grid.is_array() || grid.size() != 3) {
    throw Error(ErrorCode::ConfigError, "config", "'zoll.grid' must be [nu, nv, ndir]");
  }
  ZollOptions o;
  o.nu = grid[0].get<int>();
  o.nv = grid[1].get<int>();
  o.ndir = grid[2].get<int>();
  o.horizon = ctx.config.optional_number("zoll.horizon");
  o.period_tol = ctx.config.number("zoll.period_tol");
  o.orbit = orbit_options(ctx, "zoll");
  o.jobs = ctx.jobs;
  o.chunk = static_cast<std::size_t>(ctx.config.integer("zoll.chunk"));
  o.stop_at_witness = ctx.config.at("zoll.stop_at_witness").get<bool>();
  const ZollReport rep = zoll_check(ctx.surface, ctx.lambda(), o);

  Json j = report_header("zoll-check", ctx.config);
  j["verdict"] = to_string(rep.verdict);
  j["is_zoll"] = rep.is_zoll;
  j["common_period"] = rep.common_period ? Json(*rep.common_period) : Json(nullptr);
  j["period_spread"] = rep.period_spread;
  j["horizon"] = rep.horizon;
  j["sample_count"] = rep.sample_count;
  j["scanned"] = rep.samples.size();
  j["min_reversal_separation"] =
      rep.min_reversal_separation ? Json(*rep.min_reversal_separation) : Json(nullptr);
  if (rep.witness) {
    const ZollSample& w = rep.samples.at(*rep.witness_index - rep.samples.front().index);
    j["witness"] = {{"index", *rep.witness_index},
                    {"start", state_json(*rep.witness)},
                    {"dir_angle", w.dir_angle},
                    {"status", to_string(w.scan.status)},
                    {"min_distance", w.scan.min_distance},
                    {"period", w.scan.period ? Json(*w.scan.period) : Json(nullptr)}};
  } else {
    j["witness"] = nullptr;
  }
  // Magnetic action l + flux over the closed contractible samples.
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& s : rep.samples) {
    if (s.scan.orbit && s.scan.orbit->flux_value) {
      const double a = s.scan.orbit->length + *s.scan.orbit->flux_value;
      lo = std::min(lo, a), hi = std::max(hi, a);
    }
  }
  if (lo <= hi) {
    j["action"] = {{"min", lo}, {"max", hi}, {"spread", hi - lo}};
    if (rep.is_zoll && ctx.surface.is_closed()) {
      try {
        const SystolicValue sv = systolic_value(SystemConstants::from_surface(ctx.surface), ctx.lambda());
        j["systolic_value"] = {{"value", sv.value}, {"literal", sv.literal}};
      } catch (const Error& e) {
        j["systolic_value"] = {{"error", e.what()}};
      }
    }
  }
  std::vector<OrbitRow> rows;
  for (const auto& s : rep.samples) {
    rows.push_back(orbit_row(ctx.surface, s.start, s.scan.orbit, std::string(to_string(s.scan.status))));
  }
  ctx.write_json("zoll.json", j);
  ctx.write("orbits.csv", orbits_csv(rows));
  if (ctx.svg) {
    std::vector<std::vector<Vec2>> paths;
    for (const auto& s : rep.samples) {
      if (s.scan.orbit) paths.push_back(closed_points(s.scan.orbit->orbit_loop));
    }
    if (!paths.empty()) ctx.write("orbits.svg", svg_polylines(paths));
  }
  std::cout << "zoll-check: " << to_string(rep.verdict);
  if (rep.common_period) std::cout << ", common period " << format_number(*rep.common_period);
  std::cout << "\n";
  if (rep.verdict == ZollVerdict::NotZoll) return kExitNotZoll;
  if (rep.verdict == ZollVerdict::Inconclusive) {
    throw Error(ErrorCode::Inconclusive, "orbits", "no verdict at horizon " + format_number(rep.horizon));
  }
  return kExitOk;
}

int cmd_dichotomy(const Context& ctx) {
  const double lambda = ctx.lambda();
  const auto f_min_cfg = ctx.config.optional_number("dichotomy.f_min");
  const auto f_max_cfg = ctx.config.optional_number("dichotomy.f_max");
  const double f_min = f_min_cfg ? *f_min_cfg : ctx.surface.probe_min_f();
  const double f_max = f_max_cfg ? *f_max_cfg : ctx.surface.probe_max_abs_f();
  const double eps = ctx.config.number("dichotomy.eps");
  const auto n = static_cast<std::size_t>(ctx.config.integer("dichotomy.n"));
  Json j = report_header("dichotomy", ctx.config);
  j["f_min"] = f_min;
  j["f_max"] = f_max;
  j["short_window"] = {(2 * kPi - eps) / (lambda * f_max), (2 * kPi + eps) / (lambda * f_min)};
  j["long_threshold"] = 1.0 / (lambda * eps);

  const auto length = ctx.config.optional_number("dichotomy.length");
  const auto self_int = ctx.config.optional_number("dichotomy.self_int");
  Dichotomy d;
  if (length || self_int) {
    if (!length || !self_int) {
      throw Error(ErrorCode::ConfigError, "config", "'dichotomy.length' and 'dichotomy.self_int' go together");
    }
    d = classify_dichotomy(*length, static_cast<std::size_t>(*self_int), lambda, f_min, f_max, eps, n);
    j["orbit"] = nullptr;
  } else {
    const UnitTangentState start = ctx.start();
    const double horizon = horizon_or_default(ctx, "dichotomy.horizon");
    const ReturnScan scan = scan_return(ctx.surface, lambda, start, horizon, orbit_options(ctx, "closed_orbit"));
    if (!scan.orbit) {
      throw Error(ErrorCode::Inconclusive, "orbits", "no closed orbit from the start within " + format_number(horizon));
    }
    d = classify_dichotomy(*scan.orbit, lambda, f_min, f_max, eps, n);
    j["orbit"] = closed_orbit_json(*scan.orbit);
    ctx.write("orbits.csv", orbits_csv({orbit_row(ctx.surface, start, scan.orbit, std::string(to_string(d)))}));
    if (ctx.svg) ctx.write("orbit.svg", svg_polylines({closed_points(scan.orbit->orbit_loop)}));
  }
  j["class"] = to_string(d);
  ctx.write_json("dichotomy.json", j);
  std::cout << "dichotomy: " << to_string(d) << "\n";
  return kExitOk;
}

DiscreteLoop seed_loop(const Context& ctx) {
  const Json& s = ctx.config.at("waist.seed");
  const std::string kind = s.at("kind").get<std::string>();
  const auto points = static_cast<std::size_t>(ctx.config.integer("waist.seed.points"));
  DiscreteLoop loop;
  if (kind == "parallel") {
    if (!ctx.surface.is_revolution()) {
      throw Error(ErrorCode::ConfigError, "config", "parallel seed needs a revolution surface");
    }
    loop = parallel_loop(ctx.surface, s.at("theta").get<double>(), points, 1.0);
    const double amp = s.at("amplitude").get<double>();
    const int mode = s.at("mode").get<int>();
    for (std::size_t i = 0; i < loop.size(); ++i) {
      loop.points[i].x += amp * std::sin(mode * loop.points[i].y);
    }
    loop = DiscreteLoop::make(ctx.surface, loop.points, 1.0, loop.cover_lift);
  } else if (kind == "lattice") {
    const Json& c = s.at("class");
    loop = lattice_loop(ctx.surface, {c.at(0).get<int>(), c.at(1).get<int>()}, points, 1.0);
  } else if (kind == "circle") {
    const Json& c = s.at("center");
    loop = circle_loop(ctx.surface, {c.at(0).get<double>(), c.at(1).get<double>()}, s.at("radius").get<double>(),
                       points, 1.0);
  } else if (kind == "file") {
    std::ifstream in(s.at("path").get<std::string>());
    if (!in) throw Error(ErrorCode::ConfigError, "config", "cannot read 'waist.seed.path'");
    std::stringstream ss;
    ss << in.rdbuf();
    return loop_from_json(ss.str(), ctx.surface);
  } else {
    throw Error(ErrorCode::ConfigError, "config", "unknown 'waist.seed.kind' '" + kind + "'");
  }
  loop.period = optimal_period(loop, ctx.surface);
  return loop;
}

WaistOptions waist_options(const Context& ctx) {
  WaistOptions o;
  o.grad_tol = ctx.config.number("waist.grad_tol");
  o.max_iterations = static_cast<std::size_t>(ctx.config.integer("waist.max_iterations"));
  o.tau_min = ctx.config.number("waist.tau_min");
  o.probe_radius = ctx.config.number("waist.probe_radius");
  o.probe_directions = ctx.config.integer("waist.probe_directions");
  o.seed = static_cast<std::uint64_t>(ctx.config.integer("seed"));
  return o;
}

Json waist_json(const Waist& w) {
  return Json{{"lambda", w.lambda},         {"length", w.length},
              {"action", w.action},         {"period", w.loop.period},
              {"grad_norm", w.grad_norm},   {"iterations", w.iterations},
              {"stability_margin", w.stability_margin}, {"probe_radius", w.probe_radius}};
}

int cmd_waist(const Context& ctx) {
  const DiscreteLoop seed = seed_loop(ctx);
  const WaistSearch search = find_waist(ctx.surface, ctx.lambda(), seed, waist_options(ctx));
  Json j = report_header("waist", ctx.config);
  j["status"] = to_string(search.status);
  j["iterations"] = search.iterations;
  j["grad_norm"] = search.grad_norm;
  j["final_period"] = search.final_period;
  j["waist"] = search.waist ? waist_json(*search.waist) : Json(nullptr);
  ctx.write_json("waist.json", j);
  if (!search.waist) {
    throw Error(ErrorCode::Inconclusive, "variational", "descent ended with status " +
                                                            std::string(to_string(search.status)));
  }
  ctx.write("waist_loop.json", loop_to_json(search.waist->loop) + "\n");
  if (ctx.svg) ctx.write("waist.svg", svg_polylines({closed_points(search.waist->loop)}));
  std::cout << "waist: length " << format_number(search.waist->length) << " after " << search.iterations
            << " iterations\n";
  return kExitOk;
}

int cmd_continue(const Context& ctx) {
  const DiscreteLoop seed = seed_loop(ctx);
  const WaistOptions wo = waist_options(ctx);
  const WaistSearch base = find_waist(ctx.surface, 0.0, seed, wo);
  if (!base.waist) {
    throw Error(ErrorCode::Inconclusive, "variational",
                "no waist at lambda 0 (status " + std::string(to_string(base.status)) + ")");
  }
  ContinuationOptions co;
  co.steps = ctx.config.integer("continue.steps");
  co.neighborhood = ctx.config.number("continue.neighborhood");
  co.descent = wo;
  const auto step = ctx.config.optional_number("continue.threshold_step");
  ContinuationResult res;
  if (step) {
    const auto max = ctx.config.optional_number("continue.threshold_max");
    if (!max) throw Error(ErrorCode::ConfigError, "config", "'continue.threshold_max' is required with threshold_step");
    res = continuation_threshold(ctx.surface, *base.waist, *step, *max, co);
  } else {
    res = continue_waist(ctx.surface, *base.waist, ctx.config.number("continue.lambda_target"), co);
  }
  Json j = report_header("continue", ctx.config);
  j["base_waist"] = waist_json(*base.waist);
  j["lost"] = res.lost;
  j["lambda_reached"] = res.lambda_reached;
  j["reason"] = res.reason;
  Json trace = Json::array();
  for (const auto& s : res.trace) {
    trace.push_back({{"lambda", s.lambda},
                     {"action", s.action},
                     {"length", s.length},
                     {"grad_norm", s.grad_norm},
                     {"chart_distance", s.chart_distance},
                     {"loop_distance", s.loop_distance}});
  }
  j["trace"] = trace;
  if (res.waist) {
    j["waist"] = waist_json(*res.waist);
    j["closure"] = reintegrated_closure(*res.waist, ctx.surface, ctx.flow());
    j["chart_distance"] = chart_distance(res.waist->loop, base.waist->loop, ctx.surface);
    ctx.write("continued_loop.json", loop_to_json(res.waist->loop) + "\n");
    if (ctx.svg) {
      ctx.write("continue.svg", svg_polylines({closed_points(base.waist->loop), closed_points(res.waist->loop)}));
    }
  } else {
    j["waist"] = nullptr;
  }
  ctx.write_json("continue.json", j);
  std::cout << "continue: reached lambda " << format_number(res.lambda_reached) << (res.lost ? " (lost)" : "")
            << "\n";
  if (!res.waist) throw Error(ErrorCode::ContinuationLost, "variational", res.reason);
  return kExitOk;
}

int cmd_drift(const Context& ctx) {
  std::vector<double> lambdas;
  for (const auto& l : ctx.config.at("drift.lambdas")) lambdas.push_back(l.get<double>());
  if (lambdas.empty()) lambdas.push_back(ctx.lambda());
  const double e = ctx.config.number("drift.e"), L = ctx.config.number("drift.L");
  const auto loops = static_cast<std::size_t>(ctx.config.integer("drift.loops"));
  const double tol = ctx.config.number("drift.tol");
  std::vector<DriftMeasurement> measured(lambdas.size());
  std::vector<DriftBound> bounds(lambdas.size());
  parallel_for(lambdas.size(), ctx.jobs, [&](std::size_t i) {
    bounds[i] = drift_bound({e, L, lambdas[i], ctx.config.number("drift.eps"), ctx.config.number("drift.c")});
    measured[i] = measure_drift(lambdas[i], e, L, loops, tol);
  });
  std::vector<DriftRow> rows;
  Json j = report_header("drift", ctx.config);
  Json arr = Json::array();
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    rows.push_back({lambdas[i], measured[i].mean_dx, bounds[i].two_delta});
    Json sens = Json::array();
    for (const auto& [c, d] : bounds[i].sensitivity) sens.push_back({{"c", c}, {"delta", d}});
    arr.push_back({{"lambda", lambdas[i]},
                   {"measured_dx", measured[i].mean_dx},
                   {"crossings", measured[i].crossing_times.size()},
                   {"bound_2delta", bounds[i].two_delta},
                   {"delta", bounds[i].delta},
                   {"r_lambda", bounds[i].r_lambda},
                   {"sensitivity", sens},
                   {"guiding_center", guiding_center_drift(e, L, lambdas[i])},
                   {"lambda2_dx", lambdas[i] * lambdas[i] * measured[i].mean_dx}});
  }
  j["sweep"] = arr;
  ctx.write("drift.csv", drift_csv(rows));
  ctx.write_json("drift.json", j);
  for (const auto& r : rows) {
    std::cout << "drift: lambda " << format_number(r.lambda) << " dx " << format_number(r.measured_dx)
              << " bound " << format_number(r.bound_2delta) << "\n";
  }
  return kExitOk;
}

template <class Fn>
Json guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return Json{{"error", e.what()}};
  }
}

int cmd_diagnostics(const Context& ctx) {
  const auto euler = ctx.config.optional_number("diagnostics.constants.euler");
  const auto area_cfg = ctx.config.optional_number("diagnostics.constants.area");
  const auto curvature = ctx.config.optional_number("diagnostics.constants.constant_curvature");
  const auto f_avg = ctx.config.optional_number("diagnostics.constants.f_avg");
  const auto f_total = ctx.config.optional_number("diagnostics.constants.f_total");
  const auto constant_f = ctx.config.optional_number("diagnostics.constant_f");
  SystemConstants c;
  if (euler) {
    std::optional<double> area = area_cfg;
    if (!area && curvature && *curvature != 0.0) area = 2 * kPi * *euler / *curvature;
    if (!area || *area <= 0.0) {
      throw Error(ErrorCode::ConfigError, "config", "'diagnostics.constants' needs a positive area or curvature");
    }
    const auto fa = f_avg ? f_avg : constant_f;
    if (fa) c = SystemConstants::from_average(*area, static_cast<int>(*euler), *fa);
    else if (f_total) c = SystemConstants::from_total(*area, static_cast<int>(*euler), *f_total);
    else throw Error(ErrorCode::ConfigError, "config", "'diagnostics.constants' needs f_avg, f_total or constant_f");
  } else {
    c = SystemConstants::from_surface(ctx.surface);
  }
  const double lambda = ctx.lambda();
  Json j = report_header("diagnostics", ctx.config);
  j["constants"] = {{"area", c.area}, {"euler", c.euler}, {"f_total", c.f_total}, {"f_avg", c.f_avg}};
  j["avg_magnetic_curvature"] = avg_magnetic_curvature(c, lambda);
  j["helicity"] = guarded([&] { return Json(helicity(c, lambda) + 0.0); });
  j["lambda_zero"] = guarded([&] { return Json(lambda_zero(c)); });
  j["systolic_value"] = guarded([&] {
    const SystolicValue s = systolic_value(c, lambda);
    return Json{{"value", s.value}, {"literal", s.literal}};
  });
  j["mane_h"] = guarded([&] {
    const ManeValue m = mane_h(c, curvature, constant_f);
    return Json{{"value", m.value}, {"upper_bound", m.upper_bound}};
  });
  ctx.write_json("diagnostics.json", j);
  std::cout << "diagnostics: K " << format_number(avg_magnetic_curvature(c, lambda)) << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Magnetic flows on surfaces: orbits, Zoll checks, waists and diagnostics", "magzoll"};
  app.set_version_flag("--version", MAGZOLL_VERSION);
  app.require_subcommand(1);
  std::string config_path, out = ".";
  std::vector<std::string> sets;
  std::optional<long long> seed;
  std::optional<unsigned> jobs;
  bool svg = false;
  struct Command {
    std::string name, help;
    int (*fn)(const Context&);
  };
  const std::vector<Command> commands = {
      {"simulate", "Integrate one trajectory", cmd_simulate},
      {"closed-orbit", "Find the closed orbit through the start state", cmd_closed_orbit},
      {"zoll-check", "Scan a start grid for a common prime period", cmd_zoll},
      {"dichotomy", "Classify an orbit as short or long", cmd_dichotomy},
      {"waist", "Descend the free-period action from a seed loop", cmd_waist},
      {"continue", "Continue a zero-field waist in lambda", cmd_continue},
      {"drift", "Measure guiding-center drift against the bound", cmd_drift},
      {"diagnostics", "Evaluate the closed-form quantities", cmd_diagnostics}};
  for (const auto& [name, help, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--set", sets, "Override as dotted.key=value")->allow_extra_args(false);
    sub->add_option("--out", out, "Output directory");
    sub->add_flag("--svg", svg, "Write SVG plots");
    sub->add_option("--seed", seed, "Seed for random sampling");
    sub->add_option("--jobs", jobs, "Worker threads (default MAGZOLL_JOBS or 1)")->check(CLI::PositiveNumber);
  }
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }
  try {
    if (seed) sets.push_back("seed=" + std::to_string(*seed));
    ExperimentConfig cfg = ExperimentConfig::load(config_path, sets);
    Context ctx{cfg, surface_from_json(cfg.at("surface")), out, svg, jobs ? *jobs : default_jobs()};
    for (const auto& c : commands) {
      if (app.got_subcommand(c.name)) return c.fn(ctx);
    }
    return kExitError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << kModule << ": ConfigError: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << kModule << ": " << e.what() << "\n";
    return kExitError;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace magzoll
