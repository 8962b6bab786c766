#pragma once

// Data-parallel inner loops of the lattice algebra.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The variant is chosen once at startup from the CPU features and can
// be overridden (tests compare the variants against each other). Elementwise
// kernels are bit-identical across variants; reductions use compensated
// summation in every variant and agree to a few ulps of sum |terms|.

#include <cstddef>
#include <string_view>
#include <vector>

namespace slch::simd {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa) noexcept;

struct KernelTable {
  // out_i = 2 x_i - x_{i-1} - x_{i+1}; off-window neighbours are 0 or wrapped.
  void (*stencil_a)(const double* x, double* out, std::size_t n, bool periodic);
  // out_i = x_{i+1} - x_i
  void (*diff_forward)(const double* x, double* out, std::size_t n, bool periodic);
  // out_i = x_{i-1} - x_i
  void (*diff_backward)(const double* x, double* out, std::size_t n, bool periodic);
  // out_i = a_i * b_i
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  // out_i = alpha * x_i + beta * y_i
  void (*lincomb)(double alpha, const double* x, double beta, const double* y, double* out,
                  std::size_t n);
  // sum_i a_i b_i
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum_i x_i^2
  double (*sum_sq)(const double* x, std::size_t n);
  // sum_i |x_i|
  double (*sum_abs)(const double* x, std::size_t n);
  // max_i |x_i|, 0 for n = 0
  double (*max_abs)(const double* x, std::size_t n);
};

/// Table for the currently selected instruction set.
const KernelTable& kernels() noexcept;

/// Table for a specific instruction set; throws ConfigError when not built or not supported.
const KernelTable& kernels_for(Isa isa);

Isa active_isa() noexcept;
bool isa_supported(Isa isa) noexcept;
std::vector<Isa> supported_isas();

/// Force a variant (process-wide). Throws ConfigError when unsupported.
void select_isa(Isa isa);

namespace detail {
const KernelTable& scalar_table() noexcept;
#if defined(SLCH_HAVE_AVX2)
const KernelTable& avx2_table() noexcept;
#endif
}  // namespace detail

}  // namespace slch::simd
