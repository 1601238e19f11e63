#include <gtest/gtest.h>

#include <cstdlib>
#include <random>

#include "magzoll/kernels/segment_pairs.hpp"

using namespace magzoll::kernels;

namespace {

struct Soup {
  std::vector<double> xs, ys, xe, ye;
};

// Random segments plus exact touching, collinear and shared-endpoint cases.
Soup make_soup(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> kind(0, 5);
  Soup s;
  for (std::size_t i = 0; i < n; ++i) {
    double ax = u(rng), ay = u(rng), bx = ax + 0.3 * u(rng), by = ay + 0.3 * u(rng);
    switch (kind(rng)) {
      case 0: ax = 0.0, ay = 0.0; break;
      case 1: ay = ax, by = bx; break;
      case 2: bx = ax, by = 0.5; break;
      case 3: ax = 0.25, ay = -0.5, bx = 0.25, by = 0.5; break;
      default: break;
    }
    s.xs.push_back(ax), s.ys.push_back(ay), s.xe.push_back(bx), s.ye.push_back(by);
  }
  return s;
}

std::vector<QuerySegment> queries(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<QuerySegment> q{{0.0, 0.0, 1.0, 1.0, 0.0}, {-0.5, 0.0, 0.5, 0.0, 0.0}, {0.25, -1.0, 0.25, 1.0, 0.0}};
  for (int i = 0; i < 60; ++i) {
    const double px = u(rng), py = u(rng);
    q.push_back({px, py, px + 0.5 * u(rng), py + 0.5 * u(rng), 0.0});
  }
  for (auto& s : q) s.len = std::hypot(s.qx - s.px, s.qy - s.py);
  return q;
}

double orient(double ax, double ay, double bx, double by, double cx, double cy) {
  return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
}

}  // namespace

// [TRIVIAL]
TEST(SegmentKernel, DispatchHonoursForceScalar) {
  const char* env = std::getenv("MAGZOLL_FORCE_SCALAR");
  if (env && std::string(env) == "1") EXPECT_EQ(active_isa(), Isa::Scalar);
  EXPECT_FALSE(to_string(active_isa()).empty());
}

// [DERIVED]
TEST(SegmentKernel, ScalarAgreesWithOrientationOracle) {
  std::mt19937_64 rng(1);
  const Soup soup = make_soup(rng, 301);
  SegmentBlock block;
  block.assign(soup.xs, soup.ys, soup.xe, soup.ye);
  std::vector<Contact> out(block.size);
  for (const auto& q : queries(rng)) {
    classify_scalar(q, block, 0, block.size, 0.0, out.data());
    for (std::size_t i = 0; i < block.size; ++i) {
      const double o1 = orient(q.px, q.py, q.qx, q.qy, soup.xs[i], soup.ys[i]);
      const double o2 = orient(q.px, q.py, q.qx, q.qy, soup.xe[i], soup.ye[i]);
      const double o3 = orient(soup.xs[i], soup.ys[i], soup.xe[i], soup.ye[i], q.px, q.py);
      const double o4 = orient(soup.xs[i], soup.ys[i], soup.xe[i], soup.ye[i], q.qx, q.qy);
      const bool strict = o1 * o2 < 0 && o3 * o4 < 0;
      const double m = std::min({std::abs(o1), std::abs(o2), std::abs(o3), std::abs(o4)});
      // Away from the collar the crossing verdict is unambiguous.
      if (m > 1e-9) EXPECT_EQ(out[i] == Contact::Crossing, strict) << i;
      if (out[i] == Contact::Crossing) EXPECT_TRUE(strict);
    }
  }
}

#if defined(MAGZOLL_HAVE_AVX2)
// [DERIVED]
TEST(SegmentKernel, Avx2BitwiseEqualsScalar) {
  if (!__builtin_cpu_supports("avx2")) GTEST_SKIP() << "no AVX2 on this CPU";
  std::mt19937_64 rng(2);
  for (std::size_t n : {1u, 3u, 4u, 7u, 64u, 257u}) {
    const Soup soup = make_soup(rng, n);
    SegmentBlock block;
    block.assign(soup.xs, soup.ys, soup.xe, soup.ye);
    std::vector<Contact> a(block.size + 4), b(block.size + 4);
    for (const auto& q : queries(rng)) {
      for (double collar : {0.0, 1e-12, 1e-3}) {
        for (std::size_t begin : {std::size_t{0}, std::size_t{1}, n / 2}) {
          if (begin > block.size) continue;
          classify_scalar(q, block, begin, block.size, collar, a.data());
          classify_avx2(q, block, begin, block.size, collar, b.data());
          for (std::size_t i = 0; i < block.size - begin; ++i) ASSERT_EQ(a[i], b[i]) << n << " " << begin << " " << i;
        }
      }
    }
  }
}
#endif

// [DERIVED]
TEST(SegmentKernel, DispatchMatchesScalar) {
  std::mt19937_64 rng(3);
  const Soup soup = make_soup(rng, 99);
  SegmentBlock block;
  block.assign(soup.xs, soup.ys, soup.xe, soup.ye);
  std::vector<Contact> a(block.size), b(block.size);
  for (const auto& q : queries(rng)) {
    classify_scalar(q, block, 0, block.size, 1e-12, a.data());
    classify(q, block, 0, block.size, 1e-12, b.data());
    EXPECT_EQ(a, b);
  }
}
