#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "magzoll/curves.hpp"
#include "magzoll/error.hpp"
#include "support.hpp"

using namespace magzoll;
using namespace magzoll::test;

namespace {

const MagneticSurface kPlane = MagneticSurface::plane(Expression::parse("1"));

DiscreteLoop sample(const MagneticSurface& s, const std::function<Vec2(double)>& c, std::size_t n,
                    std::size_t shift = 0) {
  std::vector<Vec2> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back(c(kTwoPi * static_cast<double>((i + shift) % n) / n));
  return DiscreteLoop::make(s, pts, 1.0);
}

Vec2 gerono(double t) { return {std::cos(t), std::sin(t) * std::cos(t)}; }
Vec2 limacon(double t) { return {(0.5 + std::cos(t)) * std::cos(t), (0.5 + std::cos(t)) * std::sin(t)}; }

double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

// All-pairs proper crossings of a planar closed polyline.
std::size_t brute_force_crossings(const DiscreteLoop& loop) {
  const std::size_t n = loop.size();
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      const Vec2 a = loop.points[i], b = loop.next(i), c = loop.points[j], d = loop.next(j);
      if (orient(a, b, c) * orient(a, b, d) < 0 && orient(c, d, a) * orient(c, d, b) < 0) ++count;
    }
  }
  return count;
}

std::function<Vec2(double)> random_curve(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::array<double, 12> c{};
  for (auto& x : c) x = g(rng);
  return [c](double t) {
    Vec2 p{0, 0};
    for (int k = 1; k <= 3; ++k) {
      const double w = 1.0 / k;
      p.x += w * (c[4 * (k - 1)] * std::cos(k * t) + c[4 * (k - 1) + 1] * std::sin(k * t));
      p.y += w * (c[4 * (k - 1) + 2] * std::cos(k * t) + c[4 * (k - 1) + 3] * std::sin(k * t));
    }
    return p;
  };
}

}  // namespace

// [DERIVED]
TEST(Length, Examples) {
  const auto t = unit_torus();
  EXPECT_NEAR(loop_length(circle_loop(t, {0.5, 0.5}, 0.25, 512, 1.0), t), kTwoPi * 0.25, 1e-4);
  EXPECT_NEAR(loop_length(lattice_loop(t, {1, 0}, 64, 1.0), t), 1.0, 1e-14);
  const auto s = round_sphere();
  EXPECT_NEAR(loop_length(parallel_loop(s, kPi / 2, 512, 1.0), s), kTwoPi, 1e-4);
}

// [TRIVIAL]
TEST(Length, DeckInvariance) {
  const auto t = MagneticSurface::flat_torus(Mat2{1.0, 0.5, 0.0, 1.0}, Expression::parse("1"));
  const DiscreteLoop a = circle_loop(t, {0.25, 0.5}, 0.125, 64, 1.0);
  std::vector<Vec2> moved;
  for (const auto& p : a.points) moved.push_back(p + t.deck({2, -1}));
  const DiscreteLoop b = DiscreteLoop::make(t, moved, 1.0);
  EXPECT_DOUBLE_EQ(loop_length(a, t), loop_length(b, t));
}

// [TRIVIAL]
TEST(Loop, Validation) {
  std::vector<Vec2> few(5, Vec2{0, 0});
  EXPECT_THROW(DiscreteLoop::make(kPlane, few, 1.0), Error);
  std::vector<Vec2> dup;
  for (int i = 0; i < 10; ++i) dup.push_back({std::cos(i * 0.6), std::sin(i * 0.6)});
  dup[4] = dup[3];
  EXPECT_THROW(DiscreteLoop::make(kPlane, dup, 1.0), Error);
  EXPECT_THROW(circle_loop(kPlane, {0, 0}, 1.0, 16, 0.0), Error);
}

// [DERIVED]
TEST(SelfIntersections, Examples) {
  EXPECT_EQ(self_intersections(circle_loop(kPlane, {0, 0}, 1.0, 512, 1.0), kPlane), 0u);
  EXPECT_EQ(self_intersections(sample(kPlane, gerono, 512), kPlane), 1u);
  const DiscreteLoop lim = sample(kPlane, limacon, 512);
  EXPECT_EQ(brute_force_crossings(lim), 1u);
  EXPECT_EQ(self_intersections(lim, kPlane), 1u);
}

// [DERIVED]
TEST(SelfIntersections, MatchesBruteForceOnRandomCurves) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 25; ++k) {
    const DiscreteLoop loop = sample(kPlane, random_curve(rng), 300);
    const auto rep = self_intersection_report(loop, kPlane);
    if (rep.degenerate_clusters > 0) continue;
    EXPECT_EQ(rep.count, brute_force_crossings(loop)) << "curve " << k;
  }
}

// [TRIVIAL]
TEST(SelfIntersections, CyclicShiftAndResampling) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 10; ++k) {
    const auto c = random_curve(rng);
    const std::size_t m = self_intersections(sample(kPlane, c, 400), kPlane);
    EXPECT_EQ(self_intersections(sample(kPlane, c, 400, 137), kPlane), m);
    EXPECT_EQ(self_intersections(sample(kPlane, c, 800), kPlane), m);
  }
}

// [DERIVED]
TEST(SelfIntersections, TangencyCountsOne) {
  // A vertex resting on another edge from one side.
  const std::vector<Vec2> corners{{0, 0}, {2, 0}, {2, 1}, {1, 0}, {0, 1}};
  std::vector<Vec2> pts;
  for (std::size_t i = 0; i < corners.size(); ++i) {
    const Vec2 a = corners[i], b = corners[(i + 1) % corners.size()];
    pts.push_back(a);
    pts.push_back(0.5 * (a + b));
  }
  const auto rep = self_intersection_report(DiscreteLoop::make(kPlane, pts, 1.0), kPlane);
  EXPECT_EQ(rep.count, 1u);
  EXPECT_GE(rep.degenerate_clusters, 1u);
}

// [DERIVED]
TEST(SelfIntersections, TorusQuotient) {
  const auto t = unit_torus();
  // A figure-eight straddling the corner of the fundamental domain.
  const DiscreteLoop eight = sample(t, [](double s) { return Vec2{0.97, 0.98} + 0.2 * gerono(s); }, 512);
  EXPECT_EQ(self_intersections(eight, t), 1u);
  // Graphs over a closed geodesic are simple even when they wrap vertically.
  std::vector<Vec2> graph;
  for (int i = 0; i < 400; ++i) graph.push_back({i / 400.0, 0.6 * std::sin(kTwoPi * i / 400.0)});
  const DiscreteLoop g = DiscreteLoop::make(t, graph, 1.0, {1, 0});
  EXPECT_EQ(self_intersections(g, t), 0u);
  EXPECT_EQ(self_intersections(lattice_loop(t, {2, 3}, 200, 1.0), t), 0u);
  // A (2,0) loop covers the (1,0) geodesic twice; perturbing it into two parallel strands separates them.
  std::vector<Vec2> twice;
  for (int i = 0; i < 400; ++i) twice.push_back({2.0 * i / 400.0, 0.1 * std::sin(kPi * i / 200.0)});
  EXPECT_EQ(self_intersections(DiscreteLoop::make(t, twice, 1.0, {2, 0}), t), 1u);
}

// [DERIVED]
TEST(Flux, TorusCircle) {
  const auto t = unit_torus();
  const DiscreteLoop c = circle_loop(t, {0.5, 0.5}, 0.5, 2048, 1.0);
  EXPECT_NEAR(flux(c, t, 2.0).value, kPi / 2, 1e-5);
  EXPECT_NEAR(flux(c.reversed(), t, 2.0).value, -kPi / 2, 1e-5);
  EXPECT_THROW(flux(lattice_loop(t, {1, 0}, 64, 1.0), t, 1.0), Error);
}

// [TRIVIAL]
TEST(Flux, OrientationAntisymmetry) {
  std::mt19937_64 rng(21);
  const auto t = unit_torus("1 + 0.5*cos(2*pi*x)*sin(2*pi*y)");
  for (int k = 0; k < 20; ++k) {
    const auto c = random_curve(rng);
    const DiscreteLoop loop = sample(t, [&](double s) { return Vec2{0.3, 0.2} + 0.1 * c(s); }, 256);
    EXPECT_NEAR(flux(loop, t, 1.7).value, -flux(loop.reversed(), t, 1.7).value, 1e-12);
  }
}

// [DERIVED]
TEST(Flux, SphereCap) {
  const auto s = round_sphere();
  const double cap = kTwoPi * (1 - std::cos(kPi / 4));
  const FluxValue f = flux(parallel_loop(s, kPi / 4, 4096, 1.0), s, 1.0);
  ASSERT_TRUE(f.alternative);
  const double lo = std::min(std::abs(f.value), std::abs(*f.alternative));
  const double hi = std::max(std::abs(f.value), std::abs(*f.alternative));
  EXPECT_NEAR(lo, cap, 1e-5);
  EXPECT_NEAR(hi, 4 * kPi - cap, 1e-5);
  EXPECT_NEAR(f.value - *f.alternative, 4 * kPi, 1e-9);
  const FluxValue r = flux(parallel_loop(s, kPi / 4, 4096, 1.0).reversed(), s, 1.0);
  EXPECT_NEAR(r.value, -*f.alternative, 1e-9);
}

// [PAPER]
TEST(Flux, PrimitiveIndependence) {
  const auto t = unit_torus("cos(2*pi*x)*cos(2*pi*y) + 0.3*sin(2*pi*(x + 2*y))");
  std::mt19937_64 rng(8);
  for (int k = 0; k < 10; ++k) {
    const auto c = random_curve(rng);
    const DiscreteLoop loop = sample(t, [&](double s) { return Vec2{0.6, 0.4} + 0.08 * c(s); }, 1024);
    EXPECT_NEAR(flux(loop, t, 1.0, PrimitiveSweep::X).value, flux(loop, t, 1.0, PrimitiveSweep::Y).value, 1e-8);
  }
}

// [DERIVED]
TEST(Flux, CorridorAdditivity) {
  const auto t = unit_torus("1 + 0.5*sin(2*pi*x)*cos(2*pi*y)");
  const double lambda = 1.5, r = 0.1, w = 1e-3;
  const Vec2 ca{0.3, 0.5}, cb{0.7, 0.5};
  const double da = std::asin(0.5 * w / r);
  std::vector<Vec2> pts;
  for (int i = 0; i <= 400; ++i) {
    const double a = da + (kTwoPi - 2 * da) * i / 400.0;
    pts.push_back(ca + r * Vec2{std::cos(a), std::sin(a)});
  }
  for (int i = 1; i < 50; ++i) pts.push_back(Vec2{ca.x + r * std::cos(da) + (0.2 * i / 50.0), 0.5 - 0.5 * w});
  for (int i = 0; i <= 400; ++i) {
    const double a = kPi + da + (kTwoPi - 2 * da) * i / 400.0;
    pts.push_back(cb + r * Vec2{std::cos(a), std::sin(a)});
  }
  for (int i = 1; i < 50; ++i) pts.push_back(Vec2{cb.x - r * std::cos(da) - (0.2 * i / 50.0), 0.5 + 0.5 * w});
  const DiscreteLoop joined = DiscreteLoop::make(t, pts, 1.0);
  const double sum = flux(circle_loop(t, ca, r, 802, 1.0), t, lambda).value +
                     flux(circle_loop(t, cb, r, 802, 1.0), t, lambda).value;
  EXPECT_NEAR(flux(joined, t, lambda).value, sum, w * lambda * 1.5 * 0.4 + 1e-6);
}

// [TRIVIAL]
TEST(Homotopy, Classes) {
  const auto t = unit_torus();
  EXPECT_EQ(homotopy_class(lattice_loop(t, {1, 0}, 32, 1.0), t), (std::array<int, 2>{1, 0}));
  EXPECT_EQ(homotopy_class(lattice_loop(t, {2, 3}, 32, 1.0), t), (std::array<int, 2>{2, 3}));
  EXPECT_EQ(homotopy_class(circle_loop(t, {0.5, 0.5}, 0.1, 32, 1.0), t), (std::array<int, 2>{0, 0}));
}

// [TRIVIAL]
TEST(LoopJson, RoundTripAndRejection) {
  const auto t = unit_torus();
  const DiscreteLoop a = lattice_loop(t, {1, 2}, 16, 2.5);
  const DiscreteLoop b = loop_from_json(loop_to_json(a), t);
  EXPECT_EQ(b.points, a.points);
  EXPECT_EQ(b.period, a.period);
  EXPECT_EQ(b.cover_lift, a.cover_lift);
  EXPECT_THROW(loop_from_json(R"({"points": [[0,0],[1,0]], "period": 1, "extra": 2})", t), Error);
  EXPECT_THROW(loop_from_json("{\"points\": [", t), Error);
}
