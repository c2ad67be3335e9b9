#pragma once

// Complex BLAS-1/2 primitives used by every matvec path. Each routine has a
// portable scalar reference and, on x86-64, an AVX2+FMA variant picked at
// runtime. HPSS_SIMD=scalar in the environment forces the reference path.

#include "hpss/core.hpp"

#include <cstddef>
#include <string_view>

namespace hpss::simd {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);

struct KernelTable {
  // y[0..m) += A x, A column-major m x n with leading dimension lda.
  void (*gemv_n)(std::size_t m, std::size_t n, const Complex* a, std::size_t lda, const Complex* x,
                 Complex* y);
  // y[0..n) += op(A)^T x, op = conj when conj is set.
  void (*gemv_t)(std::size_t m, std::size_t n, const Complex* a, std::size_t lda, const Complex* x,
                 Complex* y, bool conj);
  Complex (*dotc)(std::size_t n, const Complex* x, const Complex* y);  // sum conj(x) y
  Complex (*dotu)(std::size_t n, const Complex* x, const Complex* y);  // sum x y
  void (*axpy)(std::size_t n, Complex alpha, const Complex* x, Complex* y);
};

namespace scalar {
const KernelTable& table();
}
#if defined(HPSS_BUILD_AVX2)
namespace avx2 {
const KernelTable& table();
}
#endif

/// Kernel table for a given ISA, or nullptr when this build or CPU lacks it.
const KernelTable* table_for(Isa isa);

/// The table chosen at first use.
const KernelTable& active();
Isa active_isa();

// Convenience wrappers over Eigen storage.
inline void gemv(const CMatrix& a, const Complex* x, Complex* y) {
  active().gemv_n(static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(a.cols()),
                  a.data(), static_cast<std::size_t>(a.rows()), x, y);
}
inline void gemv_trans(const CMatrix& a, const Complex* x, Complex* y, bool conj) {
  active().gemv_t(static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(a.cols()),
                  a.data(), static_cast<std::size_t>(a.rows()), x, y, conj);
}
inline Complex dotc(const CVector& x, const CVector& y) {
  return active().dotc(static_cast<std::size_t>(x.size()), x.data(), y.data());
}
inline void axpy(Complex alpha, const CVector& x, CVector& y) {
  active().axpy(static_cast<std::size_t>(x.size()), alpha, x.data(), y.data());
}

}  // namespace hpss::simd
