// AVX2/FMA variants. This translation unit is compiled with -mavx2 -mfma on
// x86-64; dispatch.cpp only hands these out after a runtime CPUID check.

#include "tensrig/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>

namespace tensrig::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

void axpy(std::size_t n, double a, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void xpay(std::size_t n, const double* x, double a, const double* y,
          double* out) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_fmadd_pd(va, _mm256_loadu_pd(y + i),
                                _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(out + i, v);
  }
  for (; i < n; ++i) out[i] = x[i] + a * y[i];
}

void rk4_combine(std::size_t n, const double* x0, double dt, const double* k1,
                 const double* k2, const double* k3, const double* k4,
                 double* out) {
  const double w = dt / 6.0;
  const __m256d vw = _mm256_set1_pd(w);
  const __m256d two = _mm256_set1_pd(2.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d s = _mm256_add_pd(_mm256_loadu_pd(k1 + i), _mm256_loadu_pd(k4 + i));
    s = _mm256_fmadd_pd(two, _mm256_loadu_pd(k2 + i), s);
    s = _mm256_fmadd_pd(two, _mm256_loadu_pd(k3 + i), s);
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(vw, s, _mm256_loadu_pd(x0 + i)));
  }
  for (; i < n; ++i) {
    out[i] = x0[i] + w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
}

double dot(std::size_t n, const double* x, const double* y) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += x[i] * y[i];
  return hsum(acc) + tail;
}

double max_abs(std::size_t n, const double* x) {
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  __m256d vm = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    vm = _mm256_max_pd(vm, _mm256_and_pd(mask, _mm256_loadu_pd(x + i)));
  }
  double m = 0.0;
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, vm);
  for (double lane : lanes) m = std::max(m, lane);
  for (; i < n; ++i) m = std::max(m, std::abs(x[i]));
  return m;
}

void edge_deltas(std::size_t m, const double* pos, const std::int32_t* idx0,
                 const std::int32_t* idx1, double* out) {
  const std::size_t total = 3 * m;
  std::size_t i = 0;
  for (; i + 4 <= total; i += 4) {
    const __m128i i0 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx0 + i));
    const __m128i i1 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx1 + i));
    const __m256d p0 = _mm256_i32gather_pd(pos, i0, 8);
    const __m256d p1 = _mm256_i32gather_pd(pos, i1, 8);
    _mm256_storeu_pd(out + i, _mm256_sub_pd(p1, p0));
  }
  for (; i < total; ++i) out[i] = pos[idx1[i]] - pos[idx0[i]];
}

void edge_norms(std::size_t m, const double* deltas, double* out) {
  const __m128i base = _mm_set_epi32(9, 6, 3, 0);
  std::size_t j = 0;
  for (; j + 4 <= m; j += 4) {
    const __m128i off = _mm_add_epi32(base, _mm_set1_epi32(static_cast<int>(3 * j)));
    const __m256d dx = _mm256_i32gather_pd(deltas, off, 8);
    const __m256d dy = _mm256_i32gather_pd(deltas + 1, off, 8);
    const __m256d dz = _mm256_i32gather_pd(deltas + 2, off, 8);
    __m256d s = _mm256_mul_pd(dx, dx);
    s = _mm256_fmadd_pd(dy, dy, s);
    s = _mm256_fmadd_pd(dz, dz, s);
    _mm256_storeu_pd(out + j, _mm256_sqrt_pd(s));
  }
  for (; j < m; ++j) {
    const double dx = deltas[3 * j];
    const double dy = deltas[3 * j + 1];
    const double dz = deltas[3 * j + 2];
    out[j] = std::sqrt(dx * dx + dy * dy + dz * dz);
  }
}

// Members sharing a node write to the same slots; kept scalar (see header).
void scatter_edge_forces(std::size_t m, const double* deltas,
                         const double* coeff, const std::int32_t* end0,
                         const std::int32_t* end1, double* force) {
  for (std::size_t j = 0; j < m; ++j) {
    const double c = coeff[j];
    const std::int32_t a = 3 * end0[j];
    const std::int32_t b = 3 * end1[j];
    for (int k = 0; k < 3; ++k) {
      const double f = c * deltas[3 * j + k];
      force[a + k] -= f;
      force[b + k] += f;
    }
  }
}

}  // namespace

const Backend* avx2_backend() {
  static const Backend backend{
      "avx2",   axpy,       xpay,       rk4_combine,
      dot,      max_abs,    edge_deltas, edge_norms,
      scatter_edge_forces,
  };
  return &backend;
}

}  // namespace tensrig::kernels

#else  // non-x86 or AVX2 not enabled for this TU

namespace tensrig::kernels {
const Backend* avx2_backend() { return nullptr; }
}  // namespace tensrig::kernels

#endif
