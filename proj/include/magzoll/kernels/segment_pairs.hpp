#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace magzoll::kernels {

/// Outcome of testing one segment against another.
enum class Contact : std::uint8_t { None = 0, Crossing = 1, Degenerate = 2 };

/// Segments in structure-of-arrays layout, padded to a multiple of 4.
struct SegmentBlock {
  std::vector<double> ax, ay, bx, by, len;
  std::size_t size = 0;

  void assign(const std::vector<double>& xs, const std::vector<double>& ys, const std::vector<double>& xe,
              const std::vector<double>& ye);
};

/// Query segment (px,py)-(qx,qy) with precomputed length.
struct QuerySegment {
  double px, py, qx, qy, len;
};

/// Classifies the query against block[begin, end) into out[0 .. end-begin).
/// Crossing: both segments strictly separate the other's endpoints by more
/// than `collar` (a signed distance). Degenerate: neither strictly separated
/// nor strictly on one side, with bounding boxes overlapping by the collar.
void classify_scalar(const QuerySegment& s, const SegmentBlock& block, std::size_t begin, std::size_t end,
                     double collar, Contact* out);
#if defined(MAGZOLL_HAVE_AVX2)
void classify_avx2(const QuerySegment& s, const SegmentBlock& block, std::size_t begin, std::size_t end,
                   double collar, Contact* out);
#endif

enum class Isa { Scalar, Avx2 };

/// Best instruction set available on the running CPU (MAGZOLL_FORCE_SCALAR=1 disables AVX2).
Isa active_isa();
std::string_view to_string(Isa isa);

/// Dispatches to the active implementation.
void classify(const QuerySegment& s, const SegmentBlock& block, std::size_t begin, std::size_t end, double collar,
              Contact* out);

}  // namespace magzoll::kernels
