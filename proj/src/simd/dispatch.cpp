#include <atomic>

#include "slch/error.hpp"
#include "slch/simd.hpp"

namespace slch::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(SLCH_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

Isa detect() noexcept { return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar; }

std::atomic<Isa>& selected() noexcept {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
  }
  return "unknown";
}

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
      return cpu_has_avx2();
  }
  return false;
}

std::vector<Isa> supported_isas() {
  std::vector<Isa> out{Isa::Scalar};
  if (isa_supported(Isa::Avx2)) out.push_back(Isa::Avx2);
  return out;
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_supported(isa)) {
    throw ConfigError("instruction set '" + std::string(isa_name(isa)) + "' is not available");
  }
#if defined(SLCH_HAVE_AVX2)
  if (isa == Isa::Avx2) return detail::avx2_table();
#endif
  return detail::scalar_table();
}

const KernelTable& kernels() noexcept {
#if defined(SLCH_HAVE_AVX2)
  if (selected().load(std::memory_order_relaxed) == Isa::Avx2) return detail::avx2_table();
#endif
  return detail::scalar_table();
}

Isa active_isa() noexcept { return selected().load(std::memory_order_relaxed); }

void select_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw ConfigError("instruction set '" + std::string(isa_name(isa)) + "' is not available");
  }
  selected().store(isa, std::memory_order_relaxed);
}

}  // namespace slch::simd
