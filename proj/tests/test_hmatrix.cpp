#include "hpss/hmatrix.hpp"

#include "hpss/kernels.hpp"
#include "hpss/parallel.hpp"

#include "doctest.h"
#include "support.hpp"

#include <map>
#include <set>
#include <sstream>

using namespace hpss;

namespace {

// Every (row leaf, col leaf) entry pair must be covered exactly once.
void check_partition_covers(const ClusterTree& t, const BlockPartition& p) {
  const std::size_t n = t.size();
  std::vector<int> hits(n * n, 0);
  auto mark = [&](const BlockPair& b) {
    const auto r = t.node(b.row_node).range, c = t.node(b.col_node).range;
    for (std::size_t i = r.begin; i < r.end; ++i)
      for (std::size_t j = c.begin; j < c.end; ++j) ++hits[i * n + j];
  };
  for (const auto& b : p.near) mark(b);
  for (const auto& lvl : p.far)
    for (const auto& b : lvl) mark(b);
  for (int h : hits) CHECK(h == 1);
}

}  // namespace

TEST_CASE("block partition covers the matrix once and respects admissibility (property)") {
  gen::Gen g(41);
  for (int trial = 0; trial < 15; ++trial) {
    const Mesh m = trial % 3 == 0 ? discretize_disk(g.real(0.15, 0.4), 12, 2.0) : g.strip();
    const ClusterTree t = build_cluster_tree(m, static_cast<std::size_t>(g.integer(4, 24)));
    const double eta = g.real(0.5, 2.0);
    const BlockPartition p = build_block_partition(t, eta);
    INFO("trial " << trial << " n=" << m.size());
    check_partition_covers(t, p);
    CHECK(p.far[0].empty());
    for (const auto& b : p.near) {
      CHECK(t.node(b.row_node).is_leaf());
      CHECK(t.node(b.col_node).is_leaf());
      CHECK(!is_admissible(t, b.row_node, b.col_node, eta));
    }
    for (std::size_t l = 0; l < p.far.size(); ++l)
      for (const auto& b : p.far[l]) {
        CHECK(b.level == static_cast<int>(l));
        CHECK(is_admissible(t, b.row_node, b.col_node, eta));
      }
  }
}

TEST_CASE("single-leaf tree has no far field") {
  const Mesh m = discretize_strip(1.0, 10);
  const ClusterTree t = build_cluster_tree(m, 16);
  CHECK(t.depth() == 0);
  const BlockPartition p = build_block_partition(t);
  CHECK(p.near.size() == 1);
  CHECK(p.far_count() == 0);
}

TEST_CASE("H-matrix matvec against the dense oracle (property)") {
  gen::Gen g(42);
  for (int trial = 0; trial < 8; ++trial) {
    const Mesh m = trial % 4 == 3 ? discretize_disk(0.35, 12, 2.0) : discretize_strip(g.real(2.0, 6.0), g.integer(10, 24));
    const KernelSpec ks(m);
    const ClusterTree t = build_cluster_tree(m, static_cast<std::size_t>(g.integer(8, 24)));
    AssemblyOptions o;
    o.tol = trial % 2 ? 1e-3 : 1e-5;
    const HMatrix h = assemble_hmatrix(ks, t, o);
    const CMatrix z = assemble_dense(ks, &t);
    const CVector x = g.vector(m.size());
    INFO("trial " << trial << " n=" << m.size() << " depth=" << t.depth());
    CHECK(oracle::rel_error(h.matvec(x), z * x) <= 3 * o.tol);
    // parts sum to the whole
    CVector parts = h.matvec_near(x);
    for (int l = 1; l <= h.depth(); ++l) parts += h.matvec_level(l, x);
    CHECK(oracle::rel_error(parts, h.matvec(x)) < 1e-13);
    // adjoint consistency <y, A x> = <A^H y, x>
    const CVector y = g.vector(m.size());
    for (int l = 1; l <= h.depth(); ++l) {
      const Complex lhs = y.dot(h.matvec_level(l, x));
      const Complex rhs_ = h.matvec_level_adjoint(l, y).dot(x);
      CHECK(std::abs(lhs - rhs_) <= 1e-11 * (1 + std::abs(lhs)));
    }
    const Complex lhs = y.dot(h.matvec_near_offdiag(x));
    CHECK(std::abs(lhs - h.matvec_near_offdiag_adjoint(y).dot(x)) <= 1e-11 * (1 + std::abs(lhs)));
    // linearity
    const Complex a = g.complex();
    CHECK(oracle::rel_error(h.matvec(a * x + y), a * h.matvec(x) + h.matvec(y)) < 1e-12);
  }
}

TEST_CASE("sampled far blocks meet three times the ACA tolerance") {
  const Mesh m = discretize_strip(8.0, 20);
  const KernelSpec ks(m);
  const ClusterTree t = build_cluster_tree(m, 20);
  const HMatrix h = assemble_hmatrix(ks, t, {});
  std::size_t checked = 0;
  for (int l = 1; l <= h.depth(); ++l)
    for (const LowRankBlock& b : h.far_blocks(l)) {
      CMatrix z(static_cast<Eigen::Index>(b.rows.size()), static_cast<Eigen::Index>(b.cols.size()));
      for (Eigen::Index i = 0; i < z.rows(); ++i)
        for (Eigen::Index j = 0; j < z.cols(); ++j)
          z(i, j) = ks.entry(t.permutation()[b.rows.begin + static_cast<std::size_t>(i)],
                             t.permutation()[b.cols.begin + static_cast<std::size_t>(j)]);
      CHECK((z - b.dense()).norm() <= 3e-3 * z.norm());
      CHECK(b.level == l);
      ++checked;
    }
  CHECK(checked >= 10);
}

TEST_CASE("level filter skips far levels") {
  const Mesh m = discretize_strip(8.0, 16);
  const KernelSpec ks(m);
  const ClusterTree t = build_cluster_tree(m, 16);
  REQUIRE(t.depth() == 3);
  AssemblyOptions o;
  o.level_filter = std::set<int>{3};
  const HMatrix leaf = assemble_hmatrix(ks, t, o);
  const HMatrix full = assemble_hmatrix(ks, t, {});
  CHECK(!leaf.level_assembled(2));
  CHECK(leaf.level_assembled(3));
  CHECK(!leaf.all_levels_assembled());
  CHECK(full.all_levels_assembled());
  CHECK(leaf.far_blocks(2).empty());
  CHECK(!full.far_blocks(2).empty());
  const CVector x = CVector::Ones(static_cast<Eigen::Index>(m.size()));
  CHECK(leaf.matvec_level(2, x).norm() == 0.0);
  CHECK(oracle::rel_error(leaf.matvec_level(3, x), full.matvec_level(3, x)) < 1e-14);
  const MemoryReport lr = leaf.memory_report(), fr = full.memory_report();
  CHECK(lr.total_entries < fr.total_entries);
  CHECK(lr.near_entries == fr.near_entries);
  CHECK_THROWS_AS(full.far_blocks(0), Error);
  CHECK_THROWS_AS(full.far_blocks(4), Error);
  CHECK_THROWS_AS(full.matvec(CVector::Ones(3)), Error);
}

TEST_CASE("symmetric storage halves the mirrored blocks and keeps the product") {
  const Mesh m = discretize_strip(6.0, 16);
  const KernelSpec ks(m);
  const ClusterTree t = build_cluster_tree(m, 12);
  AssemblyOptions o;
  o.symmetric = true;
  const HMatrix hs = assemble_hmatrix(ks, t, o);
  const HMatrix hf = assemble_hmatrix(ks, t, {});
  CHECK(hs.symmetric());
  CHECK(hs.memory_report().total_entries < hf.memory_report().total_entries);
  gen::Gen g(43);
  const CVector x = g.vector(m.size()), y = g.vector(m.size());
  CHECK(oracle::rel_error(hs.matvec(x), hf.matvec(x)) < 3e-3);
  CHECK(oracle::rel_error(hs.matvec_near(x), hf.matvec_near(x)) < 1e-13);
  for (int l = 1; l <= hs.depth(); ++l) {
    const Complex lhs = y.dot(hs.matvec_level(l, x));
    CHECK(std::abs(lhs - hs.matvec_level_adjoint(l, y).dot(x)) <= 1e-11 * (1 + std::abs(lhs)));
  }
  CHECK(hs.expanded_near_blocks().size() == hf.near_blocks().size());

  Mesh uneven = m;
  for (std::size_t i = 0; i < uneven.size(); i += 2) uneven.elements[i].extent *= 0.5;
  const KernelSpec ku(uneven);
  CHECK_THROWS_AS(assemble_hmatrix(ku, build_cluster_tree(uneven, 12), o), Error);
}

TEST_CASE("diagonal blocks and memory CSV") {
  const Mesh m = discretize_strip(4.0, 20);
  const KernelSpec ks(m);
  const ClusterTree t = build_cluster_tree(m, 20);
  const HMatrix h = assemble_hmatrix(ks, t, {});
  const auto diag = h.diagonal_blocks();
  REQUIRE(diag.size() == t.leaves().size());
  for (std::size_t i = 0; i < diag.size(); ++i) {
    CHECK(diag[i]->is_diagonal());
    CHECK(diag[i]->rows == t.node(t.leaves()[i]).range);
  }
  const MemoryReport r = h.memory_report();
  CHECK(r.n == m.size());
  CHECK(r.dense_entries == m.size() * m.size());
  std::size_t sum = r.near_entries;
  for (const auto& l : r.levels) sum += l.entries;
  CHECK(sum == r.total_entries);
  std::stringstream ss;
  write_memory_csv(r, ss);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "level,blocks,entries,megabytes");
  std::getline(ss, line);
  CHECK(line.rfind("near,", 0) == 0);
  std::string last;
  while (std::getline(ss, line))
    if (!line.empty()) last = line;
  CHECK(last.rfind("total,", 0) == 0);
}

TEST_CASE("assembly is deterministic and independent of the worker count") {
  const Mesh m = discretize_strip(6.0, 20);
  const KernelSpec ks(m);
  const ClusterTree t = build_cluster_tree(m, 20);
  const HMatrix a = assemble_hmatrix(ks, t, {});
  const HMatrix b = assemble_hmatrix(ks, t, {});
  const CVector x = gen::Gen(44).vector(m.size());
  CHECK(a.matvec(x) == b.matvec(x));
  MESSAGE("workers: " << worker_count());
}

TEST_CASE("assembly errors") {
  const Mesh m = discretize_strip(2.0, 10);
  const KernelSpec ks(m);
  const ClusterTree other = build_cluster_tree(discretize_strip(3.0, 10), 8);
  CHECK_THROWS_AS(assemble_hmatrix(ks, other, {}), Error);
  AssemblyOptions bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(assemble_hmatrix(ks, build_cluster_tree(m, 8), bad), Error);
}

TEST_CASE("parallel_for propagates exceptions and covers every index") {
  std::vector<int> seen(1000, 0);
  parallel_for(seen.size(), [&](std::size_t, std::size_t i) { seen[i] += 1; });
  for (int s : seen) CHECK(s == 1);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t, std::size_t i) {
                    if (i == 7) throw Error("boom");
                  }),
                  Error);
}
