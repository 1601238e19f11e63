#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "magzoll/error.hpp"
#include "magzoll/variational.hpp"
#include "support.hpp"

using namespace magzoll;
using namespace magzoll::test;

namespace {

DiscreteLoop wobbly_parallel(const MagneticSurface& s, double theta, double amp, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const double c1 = g(rng), c2 = g(rng), c3 = g(rng);
  DiscreteLoop loop = parallel_loop(s, theta, n, 1.0);
  for (auto& p : loop.points) p.x += amp * (c1 * std::sin(p.y) + c2 * std::cos(2 * p.y) + c3 * std::sin(3 * p.y));
  loop = DiscreteLoop::make(s, loop.points, 1.0, loop.cover_lift);
  loop.period = optimal_period(loop, s) * (1.0 + 0.1 * g(rng));
  return loop;
}

DiscreteLoop random_blob(const MagneticSurface& s, const Vec2& c, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::array<double, 6> k{};
  for (auto& x : k) x = g(rng);
  std::vector<Vec2> pts;
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = kTwoPi * (i + jitter(rng)) / n;
    const double r = 0.15 * (1.0 + 0.2 * (k[0] * std::cos(t) + k[1] * std::sin(2 * t) + k[2] * std::cos(3 * t)));
    pts.push_back(c + r * Vec2{std::cos(t), std::sin(t)});
  }
  return DiscreteLoop::make(s, pts, 0.5 + 0.1 * std::abs(k[3]));
}

// Central differences of the action in every coordinate.
double fd_relative_error(const DiscreteLoop& loop, const MagneticSurface& s, double lambda) {
  const ActionGradient g = action_gradient(loop, s, lambda);
  const double h = 1e-6;
  double err = 0.0, scale = std::abs(g.period);
  for (const auto& p : g.points) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
  for (std::size_t i = 0; i < loop.size(); ++i) {
    for (int c = 0; c < 2; ++c) {
      DiscreteLoop a = loop, b = loop;
      (c == 0 ? a.points[i].x : a.points[i].y) += h;
      (c == 0 ? b.points[i].x : b.points[i].y) -= h;
      const double fd = (action(a, s, lambda).value - action(b, s, lambda).value) / (2 * h);
      err = std::max(err, std::abs(fd - (c == 0 ? g.points[i].x : g.points[i].y)));
    }
  }
  DiscreteLoop a = loop, b = loop;
  a.period += h;
  b.period -= h;
  err = std::max(err, std::abs((action(a, s, lambda).value - action(b, s, lambda).value) / (2 * h) - g.period));
  return err / scale;
}

}  // namespace

// [DERIVED]
TEST(Action, Examples) {
  const auto t = unit_torus();
  EXPECT_NEAR(action(lattice_loop(t, {1, 0}, 32, 1.0), t, 0.0).value, 1.0, 1e-14);
  DiscreteLoop c = circle_loop(t, {0.5, 0.5}, 0.2, 256, 1.0);
  c.period = optimal_period(c, t);
  EXPECT_NEAR(action(c, t, 0.0).value, loop_length(c, t), 1e-12);
  EXPECT_NEAR(c.period, loop_length(c, t), 1e-12);
  DiscreteLoop m = circle_loop(t, {0.5, 0.5}, 0.5, 2048, kPi);
  const ActionValue v = action(m, t, 2.0);
  EXPECT_NEAR(v.kinetic, kPi / 2, 1e-5);
  EXPECT_NEAR(v.magnetic, kPi / 2, 1e-5);
  EXPECT_NEAR(v.period_term, kPi / 2, 1e-12);
  EXPECT_NEAR(v.value, kPi / 2, 1e-5);
}

// [DERIVED]
TEST(Action, CircleSolutionIsCritical) {
  const auto t = unit_torus();
  const DiscreteLoop m = circle_loop(t, {0.5, 0.5}, 0.5, 512, kPi);
  EXPECT_LE(action_gradient(m, t, 2.0).max_norm(), 1e-4);
}

// [DERIVED]
TEST(Action, PeriodDerivativeClosedForm) {
  const auto s = neck();
  const DiscreteLoop loop = wobbly_parallel(s, 1.5, 0.05, 128, 4);
  double sum = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec2 mid = 0.5 * (loop.points[i] + loop.next(i));
    sum += s.metric(mid)(loop.edge(i), loop.edge(i));
  }
  const double n = static_cast<double>(loop.size());
  EXPECT_NEAR(action_gradient(loop, s, 0.0).period, -n * sum / (2 * loop.period * loop.period) + 0.5, 1e-12);
  DiscreteLoop at_opt = loop;
  at_opt.period = optimal_period(loop, s);
  EXPECT_NEAR(action_gradient(at_opt, s, 0.0).period, 0.0, 1e-12);
}

// [DERIVED]
TEST(Action, GradientMatchesFiniteDifferences) {
  const auto n1 = neck("1 + 0.3*cos(t)");
  const auto tor = unit_torus("1 + 0.5*cos(2*pi*x)*sin(2*pi*y)");
  const auto skew = MagneticSurface::flat_torus(Mat2{1.0, 0.4, 0.0, 0.9}, Expression::parse("0.5 + sin(2*pi*x)^2"));
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    const double lambda = 0.3 + 0.1 * static_cast<double>(k % 7);
    double e = 0.0;
    switch (k % 3) {
      case 0: e = fd_relative_error(wobbly_parallel(n1, 1.3 + 0.005 * k, 0.05, 24, k), n1, lambda); break;
      case 1: e = fd_relative_error(random_blob(tor, {0.4, 0.6}, 24, k), tor, lambda); break;
      default: e = fd_relative_error(random_blob(skew, {0.1, 0.2}, 24, k), skew, lambda); break;
    }
    worst = std::max(worst, e);
  }
  EXPECT_LE(worst, 1e-5);
}

// [DERIVED]
TEST(Action, BoundsLength) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.3, 3.0);
  const auto s = neck();
  for (std::uint64_t k = 0; k < 50; ++k) {
    DiscreteLoop loop = wobbly_parallel(s, 1.4, 0.08, 64, k);
    loop.period *= u(rng);
    EXPECT_GE(action(loop, s, 0.0).value, loop_length(loop, s) - 1e-12);
  }
  DiscreteLoop par = parallel_loop(s, 1.2, 256, 1.0);
  par.period = optimal_period(par, s);
  EXPECT_NEAR(action(par, s, 0.0).value, loop_length(par, s), 1e-6);
}

// [PAPER]
TEST(Waist, NeckParallel) {
  const auto s = neck();
  DiscreteLoop seed = wobbly_parallel(s, kPi / 2 + 0.1, 0.03, 512, 1);
  WaistOptions o;
  o.probe_directions = 16;
  const WaistSearch w = find_waist(s, 0.0, seed, o);
  ASSERT_EQ(w.status, WaistStatus::Converged);
  ASSERT_TRUE(w.waist);
  EXPECT_NEAR(w.waist->length, kTwoPi * 0.8, 1e-4);
  EXPECT_GT(w.waist->stability_margin, 0.0);
  EXPECT_LE(reintegrated_closure(*w.waist, s), 1e-5);
  // Continuing to lambda = 0 returns the input unchanged.
  const ContinuationResult same = continue_waist(s, *w.waist, 0.0);
  ASSERT_TRUE(same.waist);
  EXPECT_EQ(same.waist->loop.points, w.waist->loop.points);
  EXPECT_EQ(same.waist->loop.period, w.waist->loop.period);
}

// [DERIVED]
TEST(Waist, TorusClass) {
  const auto t = unit_torus();
  std::vector<Vec2> pts;
  for (int i = 0; i < 64; ++i) pts.push_back({i / 64.0, 0.3 + 0.05 * std::sin(kTwoPi * i / 64.0)});
  DiscreteLoop seed = DiscreteLoop::make(t, pts, 1.3, {1, 0});
  WaistOptions o;
  o.probe_radius = 0.0;
  const WaistSearch w = find_waist(t, 0.0, seed, o);
  ASSERT_TRUE(w.waist);
  EXPECT_NEAR(w.waist->length, 1.0, 1e-8);
  EXPECT_EQ(homotopy_class(w.waist->loop, t), (std::array<int, 2>{1, 0}));
}

// [PAPER]
TEST(Waist, SphereCollapses) {
  const auto s = round_sphere();
  DiscreteLoop seed = circle_loop(s, {1.0, 1.0}, 0.2, 64, 1.0);
  seed.period = optimal_period(seed, s);
  WaistOptions o;
  o.probe_radius = 0.0;
  const WaistSearch w = find_waist(s, 0.0, seed, o);
  EXPECT_EQ(w.status, WaistStatus::Collapse);
  EXPECT_FALSE(w.waist);
}

// [PAPER]
TEST(Waist, FlatBandWaistsAreDisjointOrEqual) {
  const auto s = flat_band();
  WaistOptions o;
  o.probe_radius = 0.0;
  std::vector<Waist> found;
  for (double th : {kPi / 2 - 0.06, kPi / 2 + 0.02, kPi / 2 + 0.05}) {
    const WaistSearch w = find_waist(s, 0.0, wobbly_parallel(s, th, 0.01, 128, 3), o);
    ASSERT_TRUE(w.waist) << th;
    EXPECT_NEAR(w.waist->length, kTwoPi * 0.8, 1e-6);
    found.push_back(*w.waist);
  }
  for (std::size_t i = 0; i < found.size(); ++i) {
    for (std::size_t j = i + 1; j < found.size(); ++j) {
      const double d = chart_distance(found[i].loop, found[j].loop, s);
      double lo = INFINITY;
      for (const auto& p : found[i].loop.points)
        for (const auto& q : found[j].loop.points) lo = std::min(lo, std::abs(p.x - q.x));
      // Either separated everywhere or the same parallel.
      EXPECT_TRUE(lo > 0.0 || d < 1e-6) << i << " " << j << " lo " << lo << " d " << d;
    }
  }
}

// [PAPER]
TEST(Perturbation, Threshold) {
  EXPECT_NEAR(perturbation_threshold(0.1, 2, 0.5), 0.025, 1e-15);
  EXPECT_NEAR(perturbation_threshold(0.2, 1, 1), 0.05, 1e-15);
  EXPECT_NEAR(perturbation_threshold(0.3, 2, 0.5), 3 * perturbation_threshold(0.1, 2, 0.5), 1e-15);
  EXPECT_THROW(perturbation_threshold(0.0, 1, 1), Error);
  EXPECT_THROW(perturbation_threshold(0.1, -1, 1), Error);
}

// [PAPER]
TEST(Continuation, ActionLevelGap) {
  const auto s = neck();
  WaistOptions o;
  o.probe_radius = 0.05;
  o.probe_directions = 32;
  const WaistSearch w = find_waist(s, 0.0, wobbly_parallel(s, kPi / 2 + 0.1, 0.03, 256, 1), o);
  ASSERT_TRUE(w.waist);
  const double eps = w.waist->stability_margin;
  ASSERT_GT(eps, 0.0);
  const double lambda = 0.5 * perturbation_threshold(eps, o.probe_radius, primitive_sup(w.waist->loop, s));
  ContinuationOptions co;
  co.steps = 4;
  co.descent = o;
  const ContinuationResult c = continue_waist(s, *w.waist, lambda, co);
  ASSERT_TRUE(c.waist);
  const StabilityProbe p = stability_probe(w.waist->loop, s, lambda, o.probe_radius, o.probe_directions, o.seed);
  const double boundary_min = action(w.waist->loop, s, lambda).value + p.margin;
  EXPECT_GE(boundary_min - c.waist->action, eps / 4);
}

// [PAPER]
TEST(Continuation, ThresholdIsPositive) {
  const auto s = neck();
  WaistOptions o;
  o.probe_radius = 0.0;
  const WaistSearch w = find_waist(s, 0.0, wobbly_parallel(s, kPi / 2 + 0.1, 0.03, 128, 1), o);
  ASSERT_TRUE(w.waist);
  ContinuationOptions co;
  co.steps = 2;
  co.descent = o;
  const ContinuationResult c = continuation_threshold(s, *w.waist, 0.02, 0.1, co);
  EXPECT_GT(c.lambda_reached, 0.0);
  ASSERT_FALSE(c.trace.empty());
  EXPECT_GT(c.trace.front().lambda, 0.0);
}

// [TRIVIAL]
TEST(LoopSpace, Distance) {
  const auto s = neck();
  const DiscreteLoop a = parallel_loop(s, 1.5, 64, 5.0);
  EXPECT_EQ(loop_space_distance(a, a), 0.0);
  DiscreteLoop b = a;
  for (auto& p : b.points) p.x += 0.01;
  EXPECT_NEAR(loop_space_distance(a, b), 0.01, 1e-12);
  EXPECT_NEAR(chart_distance(a, b, s), 0.01, 1e-12);
  b.period += 0.02;
  EXPECT_NEAR(loop_space_distance(a, b), std::hypot(0.01, 0.02), 1e-12);
}
