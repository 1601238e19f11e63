#include "magzoll/curves.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include "json.hpp"

#include "magzoll/error.hpp"
#include "magzoll/kernels/segment_pairs.hpp"
#include "magzoll/parallel.hpp"

namespace magzoll {

namespace {

constexpr std::string_view kModule = "curves";
constexpr double kGolden = 0.6180339887498949;

}  // namespace

double DiscreteLoop::diameter() const {
  double minx = points[0].x, maxx = minx, miny = points[0].y, maxy = miny;
  for (const Vec2& p : points) {
    minx = std::min(minx, p.x);
    maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y);
    maxy = std::max(maxy, p.y);
  }
  return std::hypot(maxx - minx, maxy - miny);
}

DiscreteLoop DiscreteLoop::reversed() const {
  DiscreteLoop out = *this;
  // Keep the first point fixed: p0, p_{N-1} - closure, ..., p1 - closure on the reversed lift.
  out.points.clear();
  out.points.push_back(points[0]);
  for (std::size_t i = points.size() - 1; i >= 1; --i) out.points.push_back(points[i] - closure);
  out.closure = -closure;
  out.cover_lift = {-cover_lift[0], -cover_lift[1]};
  return out;
}

DiscreteLoop DiscreteLoop::make(const MagneticSurface& surface, std::vector<Vec2> points, double period,
                                std::array<int, 2> cover_lift) {
  if (points.size() < 8) throw Error(ErrorCode::InvalidArgument, kModule, "a loop needs at least 8 points");
  if (!(period > 0.0)) throw Error(ErrorCode::InvalidArgument, kModule, "period must be positive");
  DiscreteLoop loop;
  loop.points = std::move(points);
  loop.period = period;
  loop.cover_lift = cover_lift;
  loop.closure = surface.deck(cover_lift);
  for (std::size_t i = 0; i < loop.size(); ++i) {
    if (loop.next(i) == loop.points[i]) {
      throw Error(ErrorCode::InvalidArgument, kModule, "consecutive points coincide at index " + std::to_string(i));
    }
  }
  return loop;
}

DiscreteLoop DiscreteLoop::from_closed_path(const MagneticSurface& surface, std::vector<Vec2> path, double period) {
  if (path.size() < 2) throw Error(ErrorCode::InvalidArgument, kModule, "path too short");
  const auto w = surface.deck_class(path.back() - path.front());
  path.pop_back();
  return make(surface, std::move(path), period, w);
}

DiscreteLoop circle_loop(const MagneticSurface& surface, const Vec2& center, double radius, std::size_t n,
                         double period) {
  std::vector<Vec2> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = kTwoPi * static_cast<double>(i) / static_cast<double>(n);
    pts[i] = center + radius * Vec2{std::cos(a), std::sin(a)};
  }
  return DiscreteLoop::make(surface, std::move(pts), period);
}

DiscreteLoop parallel_loop(const MagneticSurface& surface, double theta, std::size_t n, double period) {
  if (!surface.is_revolution()) throw Error(ErrorCode::InvalidArgument, kModule, "parallels need a revolution surface");
  std::vector<Vec2> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = {theta, kTwoPi * static_cast<double>(i) / static_cast<double>(n)};
  return DiscreteLoop::make(surface, std::move(pts), period, {1, 0});
}

DiscreteLoop lattice_loop(const MagneticSurface& surface, std::array<int, 2> w, std::size_t n, double period) {
  const Vec2 d = surface.deck(w);
  std::vector<Vec2> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = (static_cast<double>(i) / static_cast<double>(n)) * d;
  return DiscreteLoop::make(surface, std::move(pts), period, w);
}

double loop_length(const DiscreteLoop& loop, const MagneticSurface& surface) {
  double total = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec2 a = loop.points[i];
    const Vec2 b = loop.next(i);
    total += surface.metric(0.5 * (a + b)).norm(b - a);
  }
  return total;
}

namespace {

struct Segment {
  Vec2 a, b;
};

// Instance of segment `index` translated by shifts[shift].
struct Instance {
  std::size_t index;
  std::size_t shift;
  friend bool operator<(const Instance& l, const Instance& r) {
    return std::tie(l.index, l.shift) < std::tie(r.index, r.shift);
  }
};

struct Event {
  std::size_t i, j, shift;
  Vec2 contact;
};

kernels::QuerySegment query_of(const Segment& s, const Vec2& shift) {
  const Vec2 p = s.a + shift, q = s.b + shift;
  return {p.x, p.y, q.x, q.y, norm(q - p)};
}

// Midpoint of the closest pair of points between two segments.
Vec2 contact_point(const Segment& s, const Segment& t) {
  auto closest_on = [](const Segment& seg, const Vec2& p) {
    const Vec2 d = seg.b - seg.a;
    const double dd = dot(d, d);
    const double u = dd > 0 ? std::clamp(dot(p - seg.a, d) / dd, 0.0, 1.0) : 0.0;
    return seg.a + u * d;
  };
  Vec2 best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& [p, seg] : {std::pair{s.a, t}, std::pair{s.b, t}, std::pair{t.a, s}, std::pair{t.b, s}}) {
    const Vec2 c = closest_on(seg, p);
    const double d = norm(c - p);
    if (d < best_d) {
      best_d = d;
      best = 0.5 * (c + p);
    }
  }
  return best;
}

kernels::Contact classify_pair(const Segment& s, const Segment& t, double collar) {
  kernels::SegmentBlock block;
  block.assign({t.a.x}, {t.a.y}, {t.b.x}, {t.b.y});
  kernels::Contact out;
  kernels::classify_scalar(query_of(s, {}), block, 0, 1, collar, &out);
  return out;
}

}  // namespace

SelfIntersectionReport self_intersection_report(const DiscreteLoop& loop, const MagneticSurface& surface,
                                                const SelfIntersectionOptions& options) {
  const std::size_t n = loop.size();
  const double diam = std::max(loop.diameter(), 1e-300);
  const double collar = options.collar * diam;
  const double share_tol = 1e-9 * diam;

  // Segments reduced so their start lies in the fundamental domain.
  std::vector<Segment> segs(n);
  std::vector<double> xs(n), ys(n), xe(n), ye(n);
  double max_len = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = loop.points[i];
    const Vec2 shift = a - surface.reduce(a);
    segs[i] = {a - shift, loop.next(i) - shift};
    xs[i] = segs[i].a.x;
    ys[i] = segs[i].a.y;
    xe[i] = segs[i].b.x;
    ye[i] = segs[i].b.y;
    max_len = std::max(max_len, norm(segs[i].b - segs[i].a));
  }
  kernels::SegmentBlock block;
  block.assign(xs, ys, xe, ye);

  Vec2 lo{*std::min_element(xs.begin(), xs.end()), *std::min_element(ys.begin(), ys.end())};
  Vec2 hi{*std::max_element(xs.begin(), xs.end()), *std::max_element(ys.begin(), ys.end())};
  lo = {std::min(lo.x, *std::min_element(xe.begin(), xe.end())), std::min(lo.y, *std::min_element(ye.begin(), ye.end()))};
  hi = {std::max(hi.x, *std::max_element(xe.begin(), xe.end())), std::max(hi.y, *std::max_element(ye.begin(), ye.end()))};

  // Nearest translates whose bounding box meets the loop's.
  std::vector<Vec2> shifts{{0.0, 0.0}};
  const auto periods = surface.periods();
  if (periods.size() == 1) {
    for (int k : {-1, 1}) shifts.push_back(static_cast<double>(k) * periods[0]);
  } else if (periods.size() == 2) {
    for (int k0 = -1; k0 <= 1; ++k0) {
      for (int k1 = -1; k1 <= 1; ++k1) {
        if (k0 != 0 || k1 != 0) shifts.push_back(static_cast<double>(k0) * periods[0] + static_cast<double>(k1) * periods[1]);
      }
    }
  }
  std::vector<Vec2> active;
  for (const Vec2& s : shifts) {
    if (lo.x + s.x <= hi.x + collar && hi.x + s.x >= lo.x - collar && lo.y + s.y <= hi.y + collar &&
        hi.y + s.y >= lo.y - collar) {
      active.push_back(s);
    }
  }

  auto shares_endpoint = [&](std::size_t i, const Vec2& s, std::size_t j) {
    if (j == i + 1 && norm(segs[i].b + s - segs[j].a) < share_tol) return true;
    if (i == 0 && j == n - 1 && norm(segs[i].a + s - segs[j].b) < share_tol) return true;
    return false;
  };

  struct Partial {
    std::size_t crossings = 0;
    std::vector<Event> events;
  };
  constexpr std::size_t kChunk = 64;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<Partial> partials(chunks);
  parallel_for(chunks, options.jobs, [&](std::size_t c) {
    Partial& part = partials[c];
    std::vector<kernels::Contact> out(n);
    const std::size_t i_end = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < i_end; ++i) {
      if (i + 1 >= n) continue;
      for (std::size_t si = 0; si < active.size(); ++si) {
        const Vec2& s = active[si];
        kernels::classify(query_of(segs[i], s), block, i + 1, n, collar, out.data());
        for (std::size_t j = i + 1; j < n; ++j) {
          const auto contact = out[j - i - 1];
          if (contact == kernels::Contact::None) continue;
          if (shares_endpoint(i, s, j)) continue;
          if (contact == kernels::Contact::Crossing) {
            ++part.crossings;
          } else {
            const Segment moved{segs[i].a + s, segs[i].b + s};
            part.events.push_back({i, j, si, contact_point(moved, segs[j])});
          }
        }
      }
    }
  });

  SelfIntersectionReport report;
  std::vector<Event> events;
  for (auto& p : partials) {
    report.transversal += p.crossings;
    events.insert(events.end(), p.events.begin(), p.events.end());
  }
  report.count = report.transversal;
  if (events.empty()) return report;

  // Cluster degenerate contacts by proximity.
  const double radius = 2.0 * max_len + collar;
  std::vector<std::size_t> parent(events.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t k) {
    while (parent[k] != k) k = parent[k] = parent[parent[k]];
    return k;
  };
  for (std::size_t a = 0; a < events.size(); ++a) {
    for (std::size_t b = a + 1; b < events.size(); ++b) {
      // Contacts are compared on the quotient.
      double d = INFINITY;
      for (const Vec2& sh : shifts) d = std::min(d, norm(events[a].contact - events[b].contact + sh));
      if (d < radius) parent[find(a)] = find(b);
    }
  }
  std::map<std::size_t, std::vector<std::size_t>> clusters;
  for (std::size_t k = 0; k < events.size(); ++k) clusters[find(k)].push_back(k);

  // Normal directions for the perturbation.
  std::vector<Vec2> normals(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 prev = k == 0 ? loop.points[n - 1] - loop.closure : loop.points[k - 1];
    const Vec2 d = loop.next(k) - prev;
    normals[k] = Vec2{-d.y, d.x} / norm(d);
  }
  auto offset = [&](std::size_t k, int phase) {
    const double amp = options.perturbation * diam *
                       std::cos(kTwoPi * (static_cast<double>(k % n) * kGolden + static_cast<double>(phase) / options.phases));
    return amp * normals[k % n];
  };
  auto perturbed = [&](std::size_t idx, int phase) {
    Segment s = segs[idx];
    s.a += offset(idx, phase);
    s.b += offset(idx + 1, phase);
    return s;
  };

  for (const auto& [root, members] : clusters) {
    std::set<Instance> inst;
    auto add = [&](std::size_t idx, std::size_t shift) {
      for (std::size_t d = 0; d < 3; ++d) inst.insert({(idx + n - 1 + d) % n, shift});
    };
    for (const std::size_t k : members) {
      add(events[k].i, events[k].shift);
      add(events[k].j, 0);
    }
    // Canonical segment pairs (i < j, any translate of i) inside the cluster.
    std::set<std::size_t> indices;
    for (const Instance& in : inst) indices.insert(in.index);
    std::set<std::tuple<std::size_t, std::size_t, std::size_t>> pairs;
    for (const std::size_t a : indices) {
      for (const std::size_t b : indices) {
        if (a >= b) continue;
        for (std::size_t si = 0; si < active.size(); ++si) pairs.insert({a, b, si});
      }
    }
    std::optional<std::size_t> best;
    for (int phase = 0; phase < options.phases; ++phase) {
      std::size_t count = 0;
      bool valid = true;
      for (const auto& [i, j, si] : pairs) {
        if (shares_endpoint(i, active[si], j)) continue;
        const Segment si0{segs[i].a + active[si], segs[i].b + active[si]};
        if (classify_pair(si0, segs[j], collar) == kernels::Contact::Crossing) continue;
        Segment pi = perturbed(i, phase);
        pi.a += active[si];
        pi.b += active[si];
        const auto c = classify_pair(pi, perturbed(j, phase), collar);
        if (c == kernels::Contact::Degenerate) {
          valid = false;
          break;
        }
        if (c == kernels::Contact::Crossing) ++count;
      }
      if (valid) best = best ? std::min(*best, count) : count;
    }
    if (!best) {
      throw Error(ErrorCode::DegenerateSegments, kModule,
                  "perturbation did not resolve a contact near (" + std::to_string(events[members[0]].contact.x) + ", " +
                      std::to_string(events[members[0]].contact.y) + ")");
    }
    report.count += std::max<std::size_t>(*best, 1);
    ++report.degenerate_clusters;
  }
  return report;
}

std::size_t self_intersections(const DiscreteLoop& loop, const MagneticSurface& surface,
                               const SelfIntersectionOptions& options) {
  return self_intersection_report(loop, surface, options).count;
}

FluxValue flux(const DiscreteLoop& loop, const MagneticSurface& surface, double lambda, PrimitiveSweep sweep,
               FluxQuadrature rule) {
  const bool torus = surface.kind() == SurfaceKind::FlatTorus;
  if (torus && (loop.cover_lift[0] != 0 || loop.cover_lift[1] != 0)) {
    throw Error(ErrorCode::NonContractible, kModule,
                "loop class (" + std::to_string(loop.cover_lift[0]) + ", " + std::to_string(loop.cover_lift[1]) +
                    ") has no capping disk");
  }
  const std::size_t n = loop.size();
  const auto const_f = surface.f().constant_value();
  static constexpr double kMid[1][2] = {{0.5, 1.0}};
  static const double kGauss[3][2] = {{0.5 - 0.5 * std::sqrt(0.6), 5.0 / 18.0},
                                      {0.5, 8.0 / 18.0},
                                      {0.5 + 0.5 * std::sqrt(0.6), 5.0 / 18.0}};
  const double (*nodes)[2] = rule == FluxQuadrature::Midpoint ? kMid : kGauss;
  const std::size_t count = rule == FluxQuadrature::Midpoint ? 1 : 3;
  double line_f = 0.0, line_area = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = loop.points[i];
    const Vec2 d = loop.next(i) - a;
    for (std::size_t k = 0; k < count; ++k) {
      const Vec2 m = a + nodes[k][0] * d;
      const double area_term = nodes[k][1] * dot(surface.area_primitive(m).value, d);
      line_area += area_term;
      line_f += const_f ? *const_f * area_term : nodes[k][1] * dot(surface.magnetic_primitive(m, sweep).value, d);
    }
  }
  return flux_from_line_integrals(surface, lambda, line_f, line_area, loop.cover_lift);
}

FluxValue flux_from_line_integrals(const MagneticSurface& surface, double lambda, double line_f, double line_area,
                                   std::array<int, 2> cover_lift) {
  FluxValue out;
  if (!surface.is_revolution()) {
    if (cover_lift[0] != 0 || cover_lift[1] != 0) {
      throw Error(ErrorCode::NonContractible, kModule, "loop is not contractible");
    }
    out.value = lambda * line_f;
    out.area = line_area;
    return out;
  }
  // The primitive is regular at theta = 0, so the line integral is the flux
  // through the northern disk, signed by how the loop bounds it.
  if (std::abs(cover_lift[0]) > 1) {
    throw Error(ErrorCode::NonContractible, kModule, "loop winds more than once around the axis");
  }
  const double total = surface.total_flux();
  const double area_total = total_area(surface);
  if (line_area >= 0.0) {
    out.value = lambda * line_f;
    out.area = line_area;
  } else {
    out.value = lambda * (line_f + total);
    out.area = line_area + area_total;
  }
  out.alternative = out.value - lambda * total;
  return out;
}

std::array<int, 2> homotopy_class(const DiscreteLoop& loop, const MagneticSurface& surface) {
  if (surface.kind() == SurfaceKind::Plane) return {0, 0};
  return surface.deck_class(loop.closure);
}

std::string loop_to_json(const DiscreteLoop& loop) {
  nlohmann::ordered_json j;
  auto pts = nlohmann::ordered_json::array();
  for (const Vec2& p : loop.points) pts.push_back({p.x, p.y});
  j["points"] = std::move(pts);
  j["period"] = loop.period;
  return j.dump(2);
}

DiscreteLoop loop_from_json(const std::string& text, const MagneticSurface& surface) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, kModule, std::string("loop JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("points") || !j.contains("period")) {
    throw Error(ErrorCode::ConfigError, kModule, "loop JSON needs 'points' and 'period'");
  }
  for (const auto& [key, value] : j.items()) {
    if (key != "points" && key != "period") throw Error(ErrorCode::ConfigError, kModule, "unknown loop key '" + key + "'");
  }
  std::vector<Vec2> pts;
  for (const auto& p : j.at("points")) {
    if (!p.is_array() || p.size() != 2) throw Error(ErrorCode::ConfigError, kModule, "points must be [x, y] pairs");
    pts.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  if (pts.empty()) throw Error(ErrorCode::ConfigError, kModule, "loop has no points");
  // Close on the deck translate nearest to the last point.
  const auto w = surface.kind() == SurfaceKind::Plane ? std::array<int, 2>{0, 0}
                                                      : surface.deck_class(pts.back() - pts.front());
  return DiscreteLoop::make(surface, std::move(pts), j.at("period").get<double>(), w);
}

}  // namespace magzoll
