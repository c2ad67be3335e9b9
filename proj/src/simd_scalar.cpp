#include "hpss/simd.hpp"

namespace hpss::simd::scalar {
namespace {

void gemv_n(std::size_t m, std::size_t n, const Complex* a, std::size_t lda, const Complex* x,
            Complex* y) {
  for (std::size_t j = 0; j < n; ++j) {
    const Complex xj = x[j];
    const Complex* col = a + j * lda;
    for (std::size_t i = 0; i < m; ++i) y[i] += col[i] * xj;
  }
}

void gemv_t(std::size_t m, std::size_t n, const Complex* a, std::size_t lda, const Complex* x,
            Complex* y, bool conj) {
  for (std::size_t j = 0; j < n; ++j) {
    const Complex* col = a + j * lda;
    Complex acc{};
    if (conj)
      for (std::size_t i = 0; i < m; ++i) acc += std::conj(col[i]) * x[i];
    else
      for (std::size_t i = 0; i < m; ++i) acc += col[i] * x[i];
    y[j] += acc;
  }
}

Complex dotc(std::size_t n, const Complex* x, const Complex* y) {
  Complex acc{};
  for (std::size_t i = 0; i < n; ++i) acc += std::conj(x[i]) * y[i];
  return acc;
}

Complex dotu(std::size_t n, const Complex* x, const Complex* y) {
  Complex acc{};
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy(std::size_t n, Complex alpha, const Complex* x, Complex* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

const KernelTable& table() {
  static const KernelTable t{gemv_n, gemv_t, dotc, dotu, axpy};
  return t;
}

}  // namespace hpss::simd::scalar
