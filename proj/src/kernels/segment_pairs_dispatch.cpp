#include <cstdlib>
#include <cstring>

#include "magzoll/kernels/segment_pairs.hpp"

namespace magzoll::kernels {

namespace {

Isa detect() {
  if (const char* env = std::getenv("MAGZOLL_FORCE_SCALAR"); env && std::strcmp(env, "1") == 0) return Isa::Scalar;
#if defined(MAGZOLL_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  if (__builtin_cpu_supports("avx2")) return Isa::Avx2;
#endif
  return Isa::Scalar;
}

}  // namespace

Isa active_isa() {
  static const Isa isa = detect();
  return isa;
}

std::string_view to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

void classify(const QuerySegment& s, const SegmentBlock& block, std::size_t begin, std::size_t end, double collar,
              Contact* out) {
#if defined(MAGZOLL_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) {
    classify_avx2(s, block, begin, end, collar, out);
    return;
  }
#endif
  classify_scalar(s, block, begin, end, collar, out);
}

}  // namespace magzoll::kernels
