#include <gtest/gtest.h>

#include <cmath>

#include "magzoll/curves.hpp"
#include "magzoll/diagnostics.hpp"
#include "magzoll/error.hpp"
#include "support.hpp"

using namespace magzoll;
using namespace magzoll::test;

namespace {

const SystemConstants kGenus2 = SystemConstants::from_average(4 * kPi, -2, 1.0);

template <class Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::InvalidArgument;
}

}  // namespace

// [DERIVED]
TEST(Constants, FromSurface) {
  const auto c = SystemConstants::from_surface(round_sphere("2"));
  EXPECT_EQ(c.euler, 2);
  EXPECT_NEAR(c.area, 4 * kPi, 1e-12);
  EXPECT_NEAR(c.f_total, 8 * kPi, 1e-9);
  EXPECT_NEAR(c.f_avg, 2.0, 1e-10);
  const auto t = SystemConstants::from_surface(unit_torus("1 + 0.5*cos(2*pi*x)"));
  EXPECT_EQ(t.euler, 0);
  EXPECT_NEAR(t.f_avg, 1.0, 1e-10);
}

// [PAPER]
TEST(Curvature, AverageMagnetic) {
  EXPECT_NEAR(avg_magnetic_curvature(SystemConstants::from_average(1.0, 0, 1.0), 3.0), 9.0, 1e-14);
  EXPECT_NEAR(avg_magnetic_curvature(SystemConstants::from_average(4 * kPi, 2, 1.0), 1.0), 2.0, 1e-14);
  EXPECT_NEAR(avg_magnetic_curvature(kGenus2, 1.0), 0.0, 1e-14);
}

// [PAPER]
TEST(Helicity, Values) {
  EXPECT_NEAR(helicity(kGenus2, 1.0), 0.0, 1e-12);
  EXPECT_NEAR(helicity(kGenus2, 2.0), -12 * kPi * kPi, 1e-9);
  EXPECT_EQ(code_of([] { helicity(SystemConstants::from_average(1.0, 0, 1.0), 1.0); }), ErrorCode::TorusEulerZero);
}

// [PAPER]
TEST(Helicity, ZeroAndMonotonicity) {
  for (int chi : {-2, -4, -10}) {
    for (double favg : {0.3, 1.0, 2.5}) {
      const auto c = SystemConstants::from_average(5.0 + chi * chi, chi, favg);
      EXPECT_NEAR(helicity(c, lambda_zero(c)), 0.0, 1e-12);
      double prev = helicity(c, 0.0);
      for (int k = 1; k <= 100; ++k) {
        const double h = helicity(c, 0.05 * k);
        EXPECT_LT(h, prev);
        prev = h;
      }
    }
  }
}

// [PAPER]
TEST(LambdaZero, Values) {
  EXPECT_NEAR(lambda_zero(kGenus2), 1.0, 1e-12);
  EXPECT_NEAR(lambda_zero(SystemConstants::from_average(4 * kPi, -2, 2.0)), 0.5, 1e-12);
  EXPECT_EQ(code_of([] { lambda_zero(SystemConstants::from_average(4 * kPi, 2, 1.0)); }), ErrorCode::NonNegativeEuler);
  EXPECT_EQ(code_of([] { lambda_zero(SystemConstants::from_total(4 * kPi, -2, 0.0)); }), ErrorCode::ZeroMeanField);
}

// [PAPER]
TEST(Systolic, Values) {
  EXPECT_NEAR(systolic_value(SystemConstants::from_average(1.0, 0, 1.0), 2.0).value, kPi / 2, 1e-14);
  const SystolicValue s = systolic_value(SystemConstants::from_average(4 * kPi, 2, 1.0), 1.0);
  EXPECT_NEAR(s.value, kTwoPi / (1 + std::sqrt(2.0)), 1e-14);
  EXPECT_NEAR(s.literal, kTwoPi / (1 + std::sqrt(1.5)), 1e-14);
  // lambda * value tends to pi / f_avg.
  const auto c = SystemConstants::from_average(4 * kPi, 2, 0.7);
  EXPECT_NEAR(1e6 * systolic_value(c, 1e6).value, kPi / 0.7, 1e-5);
  EXPECT_EQ(code_of([] { systolic_value(kGenus2, 1.0); }), ErrorCode::NonpositiveMagneticCurvature);
}

// [PAPER]
TEST(Mane, Values) {
  const ManeValue a = mane_h(kGenus2, -1.0, 1.0);
  EXPECT_NEAR(a.value, 1.0, 1e-15);
  EXPECT_FALSE(a.upper_bound);
  EXPECT_NEAR(mane_h(SystemConstants::from_average(kPi, -2, 2.0), -4.0, 2.0).value, 1.0, 1e-15);
  const ManeValue b = mane_h(kGenus2);
  EXPECT_TRUE(b.upper_bound);
  EXPECT_NEAR(b.value, 1.0, 1e-12);
}

// [PAPER]
TEST(DriftBound, ClosedForm) {
  const DriftBound b = drift_bound({1.0, 1.0, 10.0, 0.0, 2.0});
  EXPECT_NEAR(100 * b.delta, 8.660254037844386 / 19, 1e-12);
  EXPECT_NEAR(b.two_delta, 0.00911606, 1e-8);
  EXPECT_NEAR(100 * b.delta, drift_closed_form(1.0, 1.0, 10.0), 1e-12);
  ASSERT_EQ(b.sensitivity.size(), 2u);
  EXPECT_EQ(drift_bound({1.0, 0.0, 10.0, 0.0, 2.0}).delta, 0.0);
  EXPECT_NEAR(drift_closed_form(1.5, 0.7, 1e9), 0.7 * std::sqrt(3.0) / 2 / (2 * std::pow(1.5, 3)), 1e-9);
  EXPECT_EQ(code_of([] { drift_bound({1.0, 1.0, 0.4, 0.0, 2.0}); }), ErrorCode::DenominatorNonpositive);
  EXPECT_EQ(code_of([] { drift_bound({1.0, 1.0, 0.5, 0.5, 2.0}); }), ErrorCode::DenominatorNonpositive);
}

// [TRIVIAL]
TEST(DriftMeasurement, ConstantFieldDoesNotDrift) {
  EXPECT_NEAR(measure_drift(10.0, 1.0, 0.0, 5).mean_dx, 0.0, 1e-9);
}

// [DERIVED]
TEST(DriftMeasurement, GuidingCenterAtTen) {
  EXPECT_NEAR(measure_drift(10.0, 1.0, 1.0, 20).mean_dx / guiding_center_drift(1.0, 1.0, 10.0), 1.0, 0.1);
}

// [PAPER]
TEST(DriftMeasurement, ScalingAndBound) {
  std::vector<double> scaled;
  for (double lambda : {20.0, 40.0, 80.0}) {
    const double dx = measure_drift(lambda, 1.0, 1.0, 20).mean_dx;
    EXPECT_GE(dx, drift_bound({1.0, 1.0, lambda, 0.0, 2.0}).two_delta);
    scaled.push_back(lambda * lambda * dx);
  }
  for (double s : scaled) EXPECT_NEAR(s / scaled.front(), 1.0, 0.05);
}

// [PAPER]
// The drifting curve closed by a short chord crosses itself.
TEST(DriftMeasurement, SelfIntersectsWithinThreeLoops) {
  const auto plane = MagneticSurface::plane(Expression::parse("1 + y"));
  for (double lambda : {10.0, 40.0}) {
    const DriftMeasurement m = measure_drift(lambda, 1.0, 1.0, 3, 1e-10, true);
    ASSERT_GE(m.crossing_times.size(), 3u);
    const double t_end = m.crossing_times[2];
    std::vector<Vec2> pts;
    for (int k = 0; k < 1200; ++k) pts.push_back(m.trajectory.interpolate(plane, t_end * k / 1200.0).q);
    const DiscreteLoop loop = DiscreteLoop::make(plane, pts, 1.0);
    EXPECT_GE(self_intersections(loop, plane), 1u) << lambda;
  }
}

// [TRIVIAL]
TEST(DriftMeasurement, SignChangeIsReported) {
  EXPECT_EQ(code_of([] { measure_drift(1.0, 0.1, 1.0, 3); }), ErrorCode::CrossingNotFound);
}
