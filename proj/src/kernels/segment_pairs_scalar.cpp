#include <algorithm>
#include <cmath>

#include "magzoll/kernels/segment_pairs.hpp"

namespace magzoll::kernels {

void SegmentBlock::assign(const std::vector<double>& xs, const std::vector<double>& ys, const std::vector<double>& xe,
                          const std::vector<double>& ye) {
  size = xs.size();
  const std::size_t padded = (size + 3) / 4 * 4;
  // Padding segments sit far away and never touch anything.
  ax.assign(padded, 1e300);
  ay.assign(padded, 1e300);
  bx.assign(padded, 1e300);
  by.assign(padded, 1e300);
  len.assign(padded, 1.0);
  for (std::size_t i = 0; i < size; ++i) {
    ax[i] = xs[i];
    ay[i] = ys[i];
    bx[i] = xe[i];
    by[i] = ye[i];
    const double dx = xe[i] - xs[i];
    const double dy = ye[i] - ys[i];
    len[i] = std::sqrt(dx * dx + dy * dy);
  }
}

// The arithmetic below is mirrored lane by lane in the AVX2 kernel; keep the
// operation order identical.
void classify_scalar(const QuerySegment& s, const SegmentBlock& block, std::size_t begin, std::size_t end,
                     double collar, Contact* out) {
  const double ux = s.qx - s.px;
  const double uy = s.qy - s.py;
  const double c1 = collar * s.len;
  const double sminx = std::min(s.px, s.qx) - collar, smaxx = std::max(s.px, s.qx) + collar;
  const double sminy = std::min(s.py, s.qy) - collar, smaxy = std::max(s.py, s.qy) + collar;
  for (std::size_t j = begin; j < end; ++j) {
    const double ax = block.ax[j], ay = block.ay[j], bx = block.bx[j], by = block.by[j];
    const double wx = bx - ax;
    const double wy = by - ay;
    const double c2 = collar * block.len[j];
    // Orientation of the block endpoints relative to the query, and vice versa.
    const double o1 = ux * (ay - s.py) - uy * (ax - s.px);
    const double o2 = ux * (by - s.py) - uy * (bx - s.px);
    const double o3 = wx * (s.py - ay) - wy * (s.px - ax);
    const double o4 = wx * (s.qy - ay) - wy * (s.qx - ax);

    const bool p1 = o1 > c1, n1 = o1 < -c1;
    const bool p2 = o2 > c1, n2 = o2 < -c1;
    const bool p3 = o3 > c2, n3 = o3 < -c2;
    const bool p4 = o4 > c2, n4 = o4 < -c2;
    const bool cross = ((p1 & n2) | (n1 & p2)) & ((p3 & n4) | (n3 & p4));
    const bool apart = (p1 & p2) | (n1 & n2) | (p3 & p4) | (n3 & n4);
    const double bminx = std::min(ax, bx), bmaxx = std::max(ax, bx);
    const double bminy = std::min(ay, by), bmaxy = std::max(ay, by);
    const bool sep = (bmaxx < sminx) | (bminx > smaxx) | (bmaxy < sminy) | (bminy > smaxy);
    const auto c = static_cast<Contact>(static_cast<unsigned>(cross) | (static_cast<unsigned>(!cross & !apart & !sep) << 1));
    out[j - begin] = c;
  }
}

}  // namespace magzoll::kernels
