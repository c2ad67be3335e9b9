#include "hpss/simd.hpp"

#include <immintrin.h>

// Two complex<double> per 256-bit register, interleaved (re, im, re, im).

namespace hpss::simd::avx2 {
namespace {

inline const double* dp(const Complex* p) { return reinterpret_cast<const double*>(p); }
inline double* dp(Complex* p) { return reinterpret_cast<double*>(p); }

// x * (ar + i ai), lane-wise on interleaved pairs.
inline __m256d cmul_scalar(__m256d x, __m256d ar, __m256d ai) {
  const __m256d xs = _mm256_permute_pd(x, 0b0101);
  return _mm256_fmaddsub_pd(x, ar, _mm256_mul_pd(xs, ai));
}

inline Complex hsum_pairs(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  alignas(16) double out[2];
  _mm_store_pd(out, s);
  return {out[0], out[1]};
}

void axpy(std::size_t n, Complex alpha, const Complex* x, Complex* y) {
  const __m256d ar = _mm256_set1_pd(alpha.real());
  const __m256d ai = _mm256_set1_pd(alpha.imag());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x0 = _mm256_loadu_pd(dp(x + i));
    const __m256d x1 = _mm256_loadu_pd(dp(x + i + 2));
    __m256d y0 = _mm256_loadu_pd(dp(y + i));
    __m256d y1 = _mm256_loadu_pd(dp(y + i + 2));
    y0 = _mm256_add_pd(y0, cmul_scalar(x0, ar, ai));
    y1 = _mm256_add_pd(y1, cmul_scalar(x1, ar, ai));
    _mm256_storeu_pd(dp(y + i), y0);
    _mm256_storeu_pd(dp(y + i + 2), y1);
  }
  for (; i + 2 <= n; i += 2) {
    const __m256d x0 = _mm256_loadu_pd(dp(x + i));
    _mm256_storeu_pd(dp(y + i), _mm256_add_pd(_mm256_loadu_pd(dp(y + i)), cmul_scalar(x0, ar, ai)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_n(std::size_t m, std::size_t n, const Complex* a, std::size_t lda, const Complex* x,
            Complex* y) {
  std::size_t j = 0;
  // Four columns per sweep so y is loaded and stored once per four updates.
  for (; j + 4 <= n; j += 4) {
    const Complex* c0 = a + j * lda;
    const Complex* c1 = c0 + lda;
    const Complex* c2 = c1 + lda;
    const Complex* c3 = c2 + lda;
    const __m256d r0 = _mm256_set1_pd(x[j].real()), i0 = _mm256_set1_pd(x[j].imag());
    const __m256d r1 = _mm256_set1_pd(x[j + 1].real()), i1 = _mm256_set1_pd(x[j + 1].imag());
    const __m256d r2 = _mm256_set1_pd(x[j + 2].real()), i2 = _mm256_set1_pd(x[j + 2].imag());
    const __m256d r3 = _mm256_set1_pd(x[j + 3].real()), i3 = _mm256_set1_pd(x[j + 3].imag());
    std::size_t i = 0;
    for (; i + 2 <= m; i += 2) {
      __m256d acc = _mm256_loadu_pd(dp(y + i));
      acc = _mm256_add_pd(acc, cmul_scalar(_mm256_loadu_pd(dp(c0 + i)), r0, i0));
      acc = _mm256_add_pd(acc, cmul_scalar(_mm256_loadu_pd(dp(c1 + i)), r1, i1));
      acc = _mm256_add_pd(acc, cmul_scalar(_mm256_loadu_pd(dp(c2 + i)), r2, i2));
      acc = _mm256_add_pd(acc, cmul_scalar(_mm256_loadu_pd(dp(c3 + i)), r3, i3));
      _mm256_storeu_pd(dp(y + i), acc);
    }
    for (; i < m; ++i)
      y[i] += c0[i] * x[j] + c1[i] * x[j + 1] + c2[i] * x[j + 2] + c3[i] * x[j + 3];
  }
  for (; j < n; ++j) axpy(m, x[j], a + j * lda, y);
}

Complex dotu(std::size_t n, const Complex* x, const Complex* y) {
  __m256d acc_a = _mm256_setzero_pd();
  __m256d acc_b = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(dp(x + i));
    const __m256d yv = _mm256_loadu_pd(dp(y + i));
    acc_a = _mm256_fmadd_pd(xv, _mm256_movedup_pd(yv), acc_a);
    acc_b = _mm256_fmadd_pd(_mm256_permute_pd(xv, 0b0101), _mm256_permute_pd(yv, 0b1111), acc_b);
  }
  Complex s = hsum_pairs(_mm256_addsub_pd(acc_a, acc_b));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

Complex dotc(std::size_t n, const Complex* x, const Complex* y) {
  __m256d acc_a = _mm256_setzero_pd();
  __m256d acc_b = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(dp(x + i));
    const __m256d yv = _mm256_loadu_pd(dp(y + i));
    acc_a = _mm256_fmadd_pd(yv, _mm256_movedup_pd(xv), acc_a);
    acc_b = _mm256_fmadd_pd(_mm256_permute_pd(yv, 0b0101), _mm256_permute_pd(xv, 0b1111), acc_b);
  }
  const __m256d neg_b = _mm256_sub_pd(_mm256_setzero_pd(), acc_b);
  Complex s = hsum_pairs(_mm256_addsub_pd(acc_a, neg_b));
  for (; i < n; ++i) s += std::conj(x[i]) * y[i];
  return s;
}

void gemv_t(std::size_t m, std::size_t n, const Complex* a, std::size_t lda, const Complex* x,
            Complex* y, bool conj) {
  for (std::size_t j = 0; j < n; ++j) {
    const Complex* col = a + j * lda;
    y[j] += conj ? dotc(m, col, x) : dotu(m, col, x);
  }
}

}  // namespace

const KernelTable& table() {
  static const KernelTable t{gemv_n, gemv_t, dotc, dotu, axpy};
  return t;
}

}  // namespace hpss::simd::avx2
