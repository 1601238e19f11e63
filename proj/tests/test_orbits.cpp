#include <gtest/gtest.h>

#include <cmath>

#include "magzoll/diagnostics.hpp"
#include "magzoll/error.hpp"
#include "magzoll/orbits.hpp"
#include "support.hpp"

using namespace magzoll;
using namespace magzoll::test;

// [DERIVED]
TEST(ClosedOrbit, TorusCircles) {
  const auto t = unit_torus();
  for (const auto& start : {UnitTangentState{{0, 0}, {1, 0}}, state_from_angle(t, {0.3, 0.8}, 2.0),
                            state_from_angle(t, {0.9, 0.1}, -1.0)}) {
    const auto o = find_closed_orbit(t, 2.0, start, 50.0);
    ASSERT_TRUE(o);
    EXPECT_NEAR(o->period, kPi, 1e-8);
    EXPECT_NEAR(o->length, kPi, 1e-8);
    EXPECT_LE(std::abs(o->length - o->period), 10 * 1e-10);
    EXPECT_EQ(o->self_int, 0u);
    EXPECT_EQ(o->multiplicity, 1);
    ASSERT_TRUE(o->flux_value);
    // Length plus flux is the systolic value pi / (lambda f).
    EXPECT_NEAR(o->length + *o->flux_value, kPi / 2, 1e-6);
  }
}

// [DERIVED]
TEST(ClosedOrbit, IrrationalGeodesicDoesNotClose) {
  const auto t = unit_torus("0");
  const auto scan = scan_return(t, 1.0, state_from_angle(t, {0, 0}, 0.5), 1e3);
  EXPECT_EQ(scan.status, ReturnStatus::NotClosed);
  EXPECT_FALSE(scan.orbit);
  EXPECT_FALSE(find_closed_orbit(t, 1.0, state_from_angle(t, {0, 0}, 0.5), 1e3));
}

// [DERIVED]
TEST(ClosedOrbit, RationalGeodesicCloses) {
  const auto t = unit_torus("0");
  const auto o = find_closed_orbit(t, 1.0, make_state(t, {0.1, 0.2}, {1.0, 2.0}), 10.0);
  ASSERT_TRUE(o);
  EXPECT_NEAR(o->period, std::sqrt(5.0), 1e-8);
  EXPECT_EQ(o->orbit_loop.cover_lift, (std::array<int, 2>{1, 2}));
  EXPECT_FALSE(o->flux_value);
}

// [PAPER]
TEST(ClosedOrbit, SphereCircle) {
  const auto s = round_sphere();
  const auto o = find_closed_orbit(s, 1.0, {{1.0, 0.0}, {1.0, 0.0}}, 50.0);
  ASSERT_TRUE(o);
  EXPECT_NEAR(o->length, kTwoPi * std::sin(kPi / 4), 1e-7);
  EXPECT_EQ(o->self_int, 0u);
  ASSERT_TRUE(o->flux_value);
  const double sys = systolic_value(SystemConstants::from_surface(s), 1.0).value;
  EXPECT_NEAR(o->length + *o->flux_value, sys, 1e-6);
  EXPECT_NEAR(sys, kTwoPi / (1 + std::sqrt(2.0)), 1e-12);
}

// [PAPER]
// A parallel at the latitude where its geodesic curvature equals lambda f.
TEST(ClosedOrbit, LatitudeOrbit) {
  const auto s = MagneticSurface::sphere_of_revolution(
      Profile::from_expressions(Expression::parse("sin(t)"), Expression::parse("cos(t)"),
                                Expression::parse("-sin(t)"), kPi),
      Expression::parse("1"));
  const double th = kPi / 4;
  UnitTangentState start = state_from_angle(s, {th, 0.0}, 0.0);
  start.v = {0.0, 1.0 / std::sin(th)};
  // Pick the direction along the parallel that turns toward the pole.
  const auto probe = propagate(s, 1.0, start, 0.5);
  if (std::abs(probe.q.x - th) > 1e-6) start.v = -start.v;
  const Trajectory tr = integrate(s, 1.0, start, {0.0, 10.0});
  const double i0 = first_integral(s, 1.0, start);
  for (const auto& smp : tr.samples) {
    EXPECT_NEAR(smp.state.q.x, th, 1e-9);
    EXPECT_NEAR(first_integral(s, 1.0, smp.state), i0, 1e-9);
  }
  const auto o = find_closed_orbit(s, 1.0, start, 20.0);
  ASSERT_TRUE(o);
  EXPECT_NEAR(o->length, kTwoPi * std::sin(th), 1e-8);
}

// [PAPER]
TEST(Zoll, ConstantTorusSmallGrid) {
  ZollOptions o;
  o.nu = o.nv = o.ndir = 4;
  const auto rep = zoll_check(unit_torus("2"), 5.0, o);
  EXPECT_TRUE(rep.is_zoll);
  EXPECT_EQ(rep.verdict, ZollVerdict::Zoll);
  ASSERT_TRUE(rep.common_period);
  EXPECT_NEAR(*rep.common_period, kTwoPi / 10.0, 1e-6);
  EXPECT_LE(rep.period_spread, 1e-6);
  EXPECT_FALSE(rep.witness);
  ASSERT_TRUE(rep.min_reversal_separation);
  EXPECT_GT(*rep.min_reversal_separation, 1e-3);
}

// [DERIVED]
TEST(Zoll, GreatCircles) {
  ZollOptions o;
  o.nu = 3;
  o.nv = 2;
  o.ndir = 4;
  const auto rep = zoll_check(round_sphere("0"), 1.0, o);
  EXPECT_TRUE(rep.is_zoll);
  ASSERT_TRUE(rep.common_period);
  EXPECT_NEAR(*rep.common_period, kTwoPi, 1e-6);
}

// [PAPER]
TEST(Zoll, SphereSystolicIdentity) {
  const auto s = round_sphere();
  ZollOptions o;
  o.nu = 3;
  o.nv = 2;
  o.ndir = 3;
  const auto rep = zoll_check(s, 1.0, o);
  ASSERT_TRUE(rep.is_zoll);
  const double sys = systolic_value(SystemConstants::from_surface(s), 1.0).value;
  for (const auto& smp : rep.samples) {
    ASSERT_TRUE(smp.scan.orbit && smp.scan.orbit->flux_value);
    EXPECT_NEAR(smp.scan.orbit->length + *smp.scan.orbit->flux_value, sys, 1e-6);
  }
}

// [DERIVED]
TEST(Zoll, StraightLinesAreNotZoll) {
  ZollOptions o;
  o.nu = o.nv = 2;
  // Directions pi/3, pi, 5pi/3: only the horizontal one closes.
  o.ndir = 3;
  const auto rep = zoll_check(unit_torus("0"), 1.0, o);
  EXPECT_EQ(rep.verdict, ZollVerdict::NotZoll);
  EXPECT_FALSE(rep.is_zoll);
  ASSERT_TRUE(rep.witness);
}

// [TRIVIAL]
TEST(Zoll, JobsDoNotChangeResults) {
  ZollOptions o;
  o.nu = o.nv = 3;
  o.ndir = 2;
  const auto a = zoll_check(unit_torus(), 1.0, o);
  o.jobs = 3;
  const auto b = zoll_check(unit_torus(), 1.0, o);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].scan.period, b.samples[i].scan.period);
    EXPECT_EQ(a.samples[i].scan.min_distance, b.samples[i].scan.min_distance);
  }
  EXPECT_EQ(a.common_period, b.common_period);
}

// [PAPER]
TEST(Dichotomy, WindowArithmetic) {
  EXPECT_EQ(classify_dichotomy(0.15, 0, 40.0, 0.5, 1.5, 0.05, 1), Dichotomy::Short);
  EXPECT_EQ(classify_dichotomy(0.6, 3, 40.0, 0.5, 1.5, 0.05, 1), Dichotomy::Long);
  EXPECT_EQ(classify_dichotomy(0.4, 0, 40.0, 0.5, 1.5, 0.05, 1), Dichotomy::Violation);
  EXPECT_EQ(classify_dichotomy(0.15, 1, 40.0, 0.5, 1.5, 0.05, 1), Dichotomy::Violation);
  EXPECT_EQ(classify_dichotomy(0.6, 3, 40.0, 0.5, 1.5, 0.05, 4), Dichotomy::Violation);
  try {
    classify_dichotomy(1.0, 0, 1.0, 1.0, 1.0, 1.0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WindowOverlap);
  }
}

// [TRIVIAL]
TEST(Horizon, Default) {
  EXPECT_NEAR(default_horizon(unit_torus("0.5"), 2.0), 200 * kTwoPi, 1e-9);
  EXPECT_EQ(default_horizon(unit_torus("0"), 2.0), 100.0);
}
