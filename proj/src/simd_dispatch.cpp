#include "hpss/simd.hpp"

#include <cstdlib>
#include <string>

namespace hpss::simd {
namespace {

bool cpu_has_avx2() {
#if defined(HPSS_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa select_isa() {
  if (const char* env = std::getenv("HPSS_SIMD"); env && std::string(env) == "scalar")
    return Isa::Scalar;
  return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return &scalar::table();
    case Isa::Avx2:
#if defined(HPSS_BUILD_AVX2)
      if (cpu_has_avx2()) return &avx2::table();
#endif
      return nullptr;
  }
  return nullptr;
}

Isa active_isa() {
  static const Isa isa = select_isa();
  return isa;
}

const KernelTable& active() {
  static const KernelTable& t = *table_for(active_isa());
  return t;
}

}  // namespace hpss::simd
