// AVX2 variants. Compiled with -mavx2 only (no FMA), so the elementwise kernels
// round exactly like the scalar reference.

#include <immintrin.h>

#include <cmath>
#include <limits>

#include "slch/simd.hpp"

namespace slch::simd::detail {
namespace {

constexpr std::size_t kLanes = 4;

inline double edge_left(const double* x, std::size_t n, bool periodic) {
  return periodic ? x[n - 1] : 0.0;
}
inline double edge_right(const double* x, bool periodic) { return periodic ? x[0] : 0.0; }

void stencil_a(const double* x, double* out, std::size_t n, bool periodic) {
  if (n == 0) return;
  if (n < kLanes + 2) {
    scalar_table().stencil_a(x, out, n, periodic);
    return;
  }
  const double first = (2.0 * x[0] - edge_left(x, n, periodic)) - x[1];
  const double last = (2.0 * x[n - 1] - x[n - 2]) - edge_right(x, periodic);
  const __m256d two = _mm256_set1_pd(2.0);
  std::size_t i = 1;
  for (; i + kLanes <= n - 1; i += kLanes) {
    const __m256d c = _mm256_loadu_pd(x + i);
    const __m256d l = _mm256_loadu_pd(x + i - 1);
    const __m256d r = _mm256_loadu_pd(x + i + 1);
    const __m256d v = _mm256_sub_pd(_mm256_sub_pd(_mm256_mul_pd(two, c), l), r);
    _mm256_storeu_pd(out + i, v);
  }
  for (; i < n - 1; ++i) out[i] = (2.0 * x[i] - x[i - 1]) - x[i + 1];
  out[0] = first;
  out[n - 1] = last;
}

void diff_forward(const double* x, double* out, std::size_t n, bool periodic) {
  if (n == 0) return;
  const double last = edge_right(x, periodic) - x[n - 1];
  std::size_t i = 0;
  for (; i + kLanes < n; i += kLanes) {
    const __m256d c = _mm256_loadu_pd(x + i);
    const __m256d r = _mm256_loadu_pd(x + i + 1);
    _mm256_storeu_pd(out + i, _mm256_sub_pd(r, c));
  }
  for (; i + 1 < n; ++i) out[i] = x[i + 1] - x[i];
  out[n - 1] = last;
}

void diff_backward(const double* x, double* out, std::size_t n, bool periodic) {
  if (n == 0) return;
  if (out == x) {
    scalar_table().diff_backward(x, out, n, periodic);
    return;
  }
  const double first = edge_left(x, n, periodic) - x[0];
  std::size_t i = 1;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d c = _mm256_loadu_pd(x + i);
    const __m256d l = _mm256_loadu_pd(x + i - 1);
    _mm256_storeu_pd(out + i, _mm256_sub_pd(l, c));
  }
  for (; i < n; ++i) out[i] = x[i - 1] - x[i];
  out[0] = first;
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void lincomb(double alpha, const double* x, double beta, const double* y, double* out,
             std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d vb = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d ax = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    const __m256d by = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(ax, by));
  }
  for (; i < n; ++i) out[i] = alpha * x[i] + beta * y[i];
}

// Four independent Kahan accumulators, folded with a scalar Kahan pass.
struct LaneKahan {
  __m256d sum = _mm256_setzero_pd();
  __m256d comp = _mm256_setzero_pd();
  void add(__m256d v) {
    const __m256d y = _mm256_sub_pd(v, comp);
    const __m256d t = _mm256_add_pd(sum, y);
    comp = _mm256_sub_pd(_mm256_sub_pd(t, sum), y);
    sum = t;
  }
};

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

double fold(const LaneKahan& lanes, Kahan& tail) {
  alignas(32) double s[kLanes];
  alignas(32) double c[kLanes];
  _mm256_store_pd(s, lanes.sum);
  _mm256_store_pd(c, lanes.comp);
  Kahan acc;
  for (std::size_t l = 0; l < kLanes; ++l) acc.add(s[l]);
  for (std::size_t l = 0; l < kLanes; ++l) acc.add(-c[l]);
  acc.add(tail.sum);
  acc.add(-tail.comp);
  return acc.sum;
}

double dot(const double* a, const double* b, std::size_t n) {
  LaneKahan lanes;
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    lanes.add(_mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  Kahan tail;
  for (; i < n; ++i) tail.add(a[i] * b[i]);
  return fold(lanes, tail);
}

double sum_sq(const double* x, std::size_t n) {
  LaneKahan lanes;
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d v = _mm256_loadu_pd(x + i);
    lanes.add(_mm256_mul_pd(v, v));
  }
  Kahan tail;
  for (; i < n; ++i) tail.add(x[i] * x[i]);
  return fold(lanes, tail);
}

inline __m256d abs_pd(__m256d v) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  return _mm256_andnot_pd(sign, v);
}

double sum_abs(const double* x, std::size_t n) {
  LaneKahan lanes;
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) lanes.add(abs_pd(_mm256_loadu_pd(x + i)));
  Kahan tail;
  for (; i < n; ++i) tail.add(std::fabs(x[i]));
  return fold(lanes, tail);
}

double max_abs(const double* x, std::size_t n) {
  __m256d m = _mm256_setzero_pd();
  __m256d nan_seen = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d v = abs_pd(_mm256_loadu_pd(x + i));
    nan_seen = _mm256_or_pd(nan_seen, _mm256_cmp_pd(v, v, _CMP_UNORD_Q));
    m = _mm256_max_pd(m, v);
  }
  if (_mm256_movemask_pd(nan_seen) != 0) return std::numeric_limits<double>::quiet_NaN();
  alignas(32) double lanes[kLanes];
  _mm256_store_pd(lanes, m);
  double r = 0.0;
  for (double v : lanes) r = v > r ? v : r;
  for (; i < n; ++i) {
    const double v = std::fabs(x[i]);
    if (std::isnan(v)) return v;
    r = v > r ? v : r;
  }
  return r;
}

constexpr KernelTable kTable{stencil_a, diff_forward, diff_backward, mul, lincomb,
                             dot,       sum_sq,       sum_abs,       max_abs};

}  // namespace

const KernelTable& avx2_table() noexcept { return kTable; }

}  // namespace slch::simd::detail
