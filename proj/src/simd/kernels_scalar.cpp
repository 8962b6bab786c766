#include <cmath>

#include "slch/simd.hpp"

namespace slch::simd::detail {
namespace {

void stencil_a(const double* x, double* out, std::size_t n, bool periodic) {
  if (n == 0) return;
  for (std::size_t i = 0; i < n; ++i) {
    double left = 0.0;
    double right = 0.0;
    if (i > 0) {
      left = x[i - 1];
    } else if (periodic) {
      left = x[n - 1];
    }
    if (i + 1 < n) {
      right = x[i + 1];
    } else if (periodic) {
      right = x[0];
    }
    out[i] = (2.0 * x[i] - left) - right;
  }
}

void diff_forward(const double* x, double* out, std::size_t n, bool periodic) {
  if (n == 0) return;
  for (std::size_t i = 0; i + 1 < n; ++i) out[i] = x[i + 1] - x[i];
  out[n - 1] = (periodic ? x[0] : 0.0) - x[n - 1];
}

void diff_backward(const double* x, double* out, std::size_t n, bool periodic) {
  if (n == 0) return;
  // Walk downwards so that out may alias x.
  for (std::size_t i = n - 1; i > 0; --i) out[i] = x[i - 1] - x[i];
  out[0] = (periodic ? x[n - 1] : 0.0) - x[0];
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void lincomb(double alpha, const double* x, double beta, const double* y, double* out,
             std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = alpha * x[i] + beta * y[i];
}

// Kahan summation; the compensation term carries the low-order bits.
struct Kahan {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

double dot(const double* a, const double* b, std::size_t n) {
  Kahan acc;
  for (std::size_t i = 0; i < n; ++i) acc.add(a[i] * b[i]);
  return acc.sum;
}

double sum_sq(const double* x, std::size_t n) {
  Kahan acc;
  for (std::size_t i = 0; i < n; ++i) acc.add(x[i] * x[i]);
  return acc.sum;
}

double sum_abs(const double* x, std::size_t n) {
  Kahan acc;
  for (std::size_t i = 0; i < n; ++i) acc.add(std::fabs(x[i]));
  return acc.sum;
}

double max_abs(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::fabs(x[i]);
    if (v > m || std::isnan(v)) m = v;
    if (std::isnan(m)) return m;
  }
  return m;
}

constexpr KernelTable kTable{stencil_a, diff_forward, diff_backward, mul, lincomb,
                             dot,       sum_sq,       sum_abs,       max_abs};

}  // namespace

const KernelTable& scalar_table() noexcept { return kTable; }

}  // namespace slch::simd::detail
