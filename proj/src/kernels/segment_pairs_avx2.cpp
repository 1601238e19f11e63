#include <immintrin.h>

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>

#include "magzoll/kernels/segment_pairs.hpp"

namespace magzoll::kernels {

namespace {

// Four packed Contact bytes for each (crossing mask, degenerate mask) pair.
constexpr std::array<std::uint32_t, 256> make_table() {
  std::array<std::uint32_t, 256> t{};
  for (unsigned cross = 0; cross < 16; ++cross) {
    for (unsigned degen = 0; degen < 16; ++degen) {
      std::uint32_t packed = 0;
      for (unsigned lane = 0; lane < 4; ++lane) {
        const unsigned c = (cross >> lane) & 1u;
        const unsigned d = (degen >> lane) & 1u & (c ^ 1u);
        packed |= (c | (d << 1)) << (8 * lane);
      }
      t[cross * 16 + degen] = packed;
    }
  }
  return t;
}

constexpr auto kTable = make_table();

}  // namespace

void classify_avx2(const QuerySegment& s, const SegmentBlock& block, std::size_t begin, std::size_t end,
                   double collar, Contact* out) {
  const double ux_s = s.qx - s.px;
  const double uy_s = s.qy - s.py;
  const double c1_s = collar * s.len;
  const __m256d ux = _mm256_set1_pd(ux_s);
  const __m256d uy = _mm256_set1_pd(uy_s);
  const __m256d px = _mm256_set1_pd(s.px), py = _mm256_set1_pd(s.py);
  const __m256d qx = _mm256_set1_pd(s.qx), qy = _mm256_set1_pd(s.qy);
  const __m256d c1 = _mm256_set1_pd(c1_s);
  const __m256d nc1 = _mm256_set1_pd(-c1_s);
  const __m256d col = _mm256_set1_pd(collar);
  const __m256d sminx = _mm256_set1_pd(std::min(s.px, s.qx) - collar);
  const __m256d smaxx = _mm256_set1_pd(std::max(s.px, s.qx) + collar);
  const __m256d sminy = _mm256_set1_pd(std::min(s.py, s.qy) - collar);
  const __m256d smaxy = _mm256_set1_pd(std::max(s.py, s.qy) + collar);
  const __m256d zero = _mm256_setzero_pd();

  std::size_t j = begin;
  for (; j + 4 <= end; j += 4) {
    const __m256d ax = _mm256_loadu_pd(&block.ax[j]);
    const __m256d ay = _mm256_loadu_pd(&block.ay[j]);
    const __m256d bx = _mm256_loadu_pd(&block.bx[j]);
    const __m256d by = _mm256_loadu_pd(&block.by[j]);
    const __m256d wx = _mm256_sub_pd(bx, ax);
    const __m256d wy = _mm256_sub_pd(by, ay);
    const __m256d c2 = _mm256_mul_pd(col, _mm256_loadu_pd(&block.len[j]));
    const __m256d nc2 = _mm256_sub_pd(zero, c2);

    const __m256d o1 = _mm256_sub_pd(_mm256_mul_pd(ux, _mm256_sub_pd(ay, py)), _mm256_mul_pd(uy, _mm256_sub_pd(ax, px)));
    const __m256d o2 = _mm256_sub_pd(_mm256_mul_pd(ux, _mm256_sub_pd(by, py)), _mm256_mul_pd(uy, _mm256_sub_pd(bx, px)));
    const __m256d o3 = _mm256_sub_pd(_mm256_mul_pd(wx, _mm256_sub_pd(py, ay)), _mm256_mul_pd(wy, _mm256_sub_pd(px, ax)));
    const __m256d o4 = _mm256_sub_pd(_mm256_mul_pd(wx, _mm256_sub_pd(qy, ay)), _mm256_mul_pd(wy, _mm256_sub_pd(qx, ax)));

    const __m256d p1 = _mm256_cmp_pd(o1, c1, _CMP_GT_OQ), n1 = _mm256_cmp_pd(o1, nc1, _CMP_LT_OQ);
    const __m256d p2 = _mm256_cmp_pd(o2, c1, _CMP_GT_OQ), n2 = _mm256_cmp_pd(o2, nc1, _CMP_LT_OQ);
    const __m256d p3 = _mm256_cmp_pd(o3, c2, _CMP_GT_OQ), n3 = _mm256_cmp_pd(o3, nc2, _CMP_LT_OQ);
    const __m256d p4 = _mm256_cmp_pd(o4, c2, _CMP_GT_OQ), n4 = _mm256_cmp_pd(o4, nc2, _CMP_LT_OQ);

    const __m256d cross = _mm256_and_pd(_mm256_or_pd(_mm256_and_pd(p1, n2), _mm256_and_pd(n1, p2)),
                                        _mm256_or_pd(_mm256_and_pd(p3, n4), _mm256_and_pd(n3, p4)));
    const __m256d apart = _mm256_or_pd(_mm256_or_pd(_mm256_and_pd(p1, p2), _mm256_and_pd(n1, n2)),
                                       _mm256_or_pd(_mm256_and_pd(p3, p4), _mm256_and_pd(n3, n4)));
    const __m256d bminx = _mm256_min_pd(ax, bx), bmaxx = _mm256_max_pd(ax, bx);
    const __m256d bminy = _mm256_min_pd(ay, by), bmaxy = _mm256_max_pd(ay, by);
    const __m256d sep = _mm256_or_pd(
        _mm256_or_pd(_mm256_cmp_pd(bmaxx, sminx, _CMP_LT_OQ), _mm256_cmp_pd(bminx, smaxx, _CMP_GT_OQ)),
        _mm256_or_pd(_mm256_cmp_pd(bmaxy, sminy, _CMP_LT_OQ), _mm256_cmp_pd(bminy, smaxy, _CMP_GT_OQ)));

    const int mcross = _mm256_movemask_pd(cross);
    const int mdegen = _mm256_movemask_pd(_mm256_andnot_pd(_mm256_or_pd(apart, sep), _mm256_cmp_pd(zero, zero, _CMP_EQ_OQ)));
    static_assert(sizeof(Contact) == 1);
    const std::uint32_t packed = kTable[static_cast<unsigned>(mcross) * 16 + static_cast<unsigned>(mdegen)];
    std::memcpy(out + (j - begin), &packed, 4);
  }
  if (j < end) classify_scalar(s, block, j, end, collar, out + (j - begin));
}

}  // namespace magzoll::kernels
