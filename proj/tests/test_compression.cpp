#include "hpss/compression.hpp"

#include "hpss/kernels.hpp"

#include "doctest.h"
#include "support.hpp"

#include <Eigen/SVD>

using namespace hpss;

namespace {

CMatrix block_of(const EntryFn& f, IndexRange r, IndexRange c) {
  CMatrix z(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(c.size()));
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < c.size(); ++j)
      z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f(r.begin + i, c.begin + j);
  return z;
}

}  // namespace

TEST_CASE("ACA reproduces an exactly low-rank matrix") {
  gen::Gen g(31);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = static_cast<std::size_t>(g.integer(5, 60));
    const std::size_t n = static_cast<std::size_t>(g.integer(5, 60));
    const std::size_t r = static_cast<std::size_t>(g.integer(1, 4));
    const CMatrix a = g.matrix(m, r) * g.matrix(r, n);
    const EntryFn f = [&](std::size_t i, std::size_t j) {
      return a(static_cast<Eigen::Index>(i - 100), static_cast<Eigen::Index>(j - 7));
    };
    const IndexRange rows{100, 100 + m}, cols{7, 7 + n};
    const LowRankBlock b = aca(f, rows, cols, 1e-10);
    INFO("trial " << trial << " m=" << m << " n=" << n << " r=" << r);
    CHECK(b.rank() <= std::min(m, n));
    CHECK((a - b.dense()).norm() <= 1e-8 * a.norm());
    const LowRankBlock c = recompress(b, 1e-10);
    CHECK(c.rank() == r);
    CHECK((a - c.dense()).norm() <= 1e-8 * a.norm());
    CHECK(c.stored_entries() == (m + n) * r);
  }
}

TEST_CASE("ACA on a Helmholtz far block meets its tolerance") {
  const Mesh mesh = discretize_strip(6.0, 20);
  const KernelSpec ks(mesh);
  const EntryFn f = [&](std::size_t i, std::size_t j) { return ks.entry(i, j); };
  const IndexRange rows{0, 20}, cols{60, 120};
  const CMatrix z = block_of(f, rows, cols);
  for (double tol : {1e-2, 1e-3, 1e-5}) {
    const LowRankBlock b = recompress(aca(f, rows, cols, tol), tol);
    CHECK((z - b.dense()).norm() <= 3 * tol * z.norm());
    CHECK(b.rank() < 20);
    CHECK(b.tol_used == tol);
  }
  // tighter tolerance never lowers the rank
  CHECK(recompress(aca(f, rows, cols, 1e-6), 1e-6).rank() >= recompress(aca(f, rows, cols, 1e-2), 1e-2).rank());
}

TEST_CASE("ACA handles zero rows and zero blocks") {
  CMatrix a = CMatrix::Zero(6, 5);
  a.row(3) << 1, 2, 3, 4, 5;
  const EntryFn f = [&](std::size_t i, std::size_t j) {
    return a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  };
  const LowRankBlock b = aca(f, {0, 6}, {0, 5}, 1e-12);
  CHECK((a - b.dense()).norm() < 1e-12);
  const EntryFn zero = [](std::size_t, std::size_t) { return Complex(0.0); };
  const LowRankBlock z = aca(zero, {0, 4}, {0, 4}, 1e-3);
  CHECK(z.rank() == 0);
  CHECK(z.dense().norm() == 0.0);
  CHECK(recompress(z, 1e-3).rank() == 0);
  CHECK_THROWS_AS(aca(f, {0, 0}, {0, 5}, 1e-3), Error);
  CHECK_THROWS_AS(aca(f, {0, 6}, {0, 5}, 0.0), Error);
}

TEST_CASE("recompression truncates relative to the largest singular value") {
  gen::Gen g(32);
  // U diag(s) V with singular values 1, 1e-2, 1e-5
  const CMatrix q1 = g.matrix(12, 3).householderQr().householderQ() * CMatrix::Identity(12, 3);
  const CMatrix q2 = g.matrix(9, 3).householderQr().householderQ() * CMatrix::Identity(9, 3);
  Eigen::Vector3d s(1.0, 1e-2, 1e-5);
  LowRankBlock b;
  b.rows = {0, 12};
  b.cols = {0, 9};
  b.u = q1 * s.asDiagonal();
  b.v = q2.adjoint();
  CHECK(recompress(b, 1e-3).rank() == 2);
  CHECK(recompress(b, 1e-1).rank() == 1);
  CHECK(recompress(b, 0.0).rank() == 3);
  const LowRankBlock t = recompress(b, 1e-3);
  CHECK((t.dense() - b.dense()).norm() == doctest::Approx(1e-5).epsilon(1e-6));
  CHECK_THROWS_AS(recompress(b, -1.0), Error);
}
