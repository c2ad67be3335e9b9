#include "hpss/hmatrix.hpp"

#include "hpss/parallel.hpp"
#include "hpss/simd.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <string>

namespace hpss {

std::size_t BlockPartition::far_count() const {
  std::size_t c = 0;
  for (const auto& l : far) c += l.size();
  return c;
}

BlockPartition build_block_partition(const ClusterTree& tree, double eta) {
  BlockPartition p;
  p.depth = tree.depth();
  p.far.resize(static_cast<std::size_t>(tree.depth()) + 1);
  // Explicit stack keeps the traversal order fixed: row-major over children.
  std::vector<std::pair<int, int>> stack{{ClusterTree::root(), ClusterTree::root()}};
  while (!stack.empty()) {
    const auto [t, s] = stack.back();
    stack.pop_back();
    const ClusterNode& nt = tree.node(t);
    const ClusterNode& ns = tree.node(s);
    if (is_admissible(tree, t, s, eta)) {
      p.far[static_cast<std::size_t>(nt.level)].push_back({t, s, nt.level});
    } else if (nt.is_leaf() || ns.is_leaf()) {
      p.near.push_back({t, s, nt.level});
    } else {
      for (int a = 1; a >= 0; --a)
        for (int b = 1; b >= 0; --b) stack.push_back({nt.children[a], ns.children[b]});
    }
  }
  return p;
}

void write_memory_csv(const MemoryReport& r, std::ostream& out) {
  auto mb = [](std::size_t entries) { return static_cast<double>(entries) * 16.0 / (1024.0 * 1024.0); };
  out << "level,blocks,entries,megabytes\n" << std::fixed << std::setprecision(6);
  out << "near," << r.near_blocks << ',' << r.near_entries << ',' << mb(r.near_entries) << '\n';
  std::size_t blocks = r.near_blocks;
  for (const LevelStats& l : r.levels) {
    out << l.level << ',' << l.blocks << ',' << l.entries << ',' << mb(l.entries) << '\n';
    blocks += l.blocks;
  }
  out << "total," << blocks << ',' << r.total_entries << ',' << mb(r.total_entries) << '\n';
}

const std::vector<LowRankBlock>& HMatrix::far_blocks(int level) const {
  if (level < 1 || level > depth_) throw Error("hmatrix: level " + std::to_string(level) + " out of range");
  return far_[static_cast<std::size_t>(level)];
}

bool HMatrix::level_assembled(int level) const {
  if (level < 1 || level > depth_) return false;
  return assembled_[static_cast<std::size_t>(level)];
}

bool HMatrix::all_levels_assembled() const {
  for (int l = 1; l <= depth_; ++l)
    if (!assembled_[static_cast<std::size_t>(l)]) return false;
  return true;
}

void HMatrix::check(const CVector& x) const {
  if (static_cast<std::size_t>(x.size()) != n_)
    throw Error("hmatrix: vector length " + std::to_string(x.size()) + " != N = " + std::to_string(n_));
}

namespace {

const Complex* at(const CVector& v, std::size_t i) { return v.data() + i; }
Complex* at(CVector& v, std::size_t i) { return v.data() + i; }

// One block contribution: y += B x (or B^H x). A mirrored block also stands in
// for its transpose at the reflected position.
void apply_dense(const DenseBlock& b, bool mirrored, const CVector& x, CVector& y, bool adjoint) {
  if (!adjoint) {
    simd::gemv(b.data, at(x, b.cols.begin), at(y, b.rows.begin));
    if (mirrored) simd::gemv_trans(b.data, at(x, b.rows.begin), at(y, b.cols.begin), false);
    return;
  }
  simd::gemv_trans(b.data, at(x, b.rows.begin), at(y, b.cols.begin), true);
  if (mirrored) {
    // conj(B) x = conj(B conj(x))
    const CVector xc = x.segment(static_cast<Eigen::Index>(b.cols.begin),
                                 static_cast<Eigen::Index>(b.cols.size())).conjugate();
    CVector t = CVector::Zero(static_cast<Eigen::Index>(b.rows.size()));
    simd::gemv(b.data, xc.data(), t.data());
    y.segment(static_cast<Eigen::Index>(b.rows.begin), t.size()) += t.conjugate();
  }
}

void apply_lowrank(const LowRankBlock& b, bool mirrored, const CVector& x, CVector& y,
                   bool adjoint) {
  const auto k = static_cast<Eigen::Index>(b.rank());
  if (k == 0) return;
  CVector t(k);
  if (!adjoint) {
    t.setZero();
    simd::gemv(b.v, at(x, b.cols.begin), t.data());
    simd::gemv(b.u, t.data(), at(y, b.rows.begin));
    if (mirrored) {
      t.setZero();
      simd::gemv_trans(b.u, at(x, b.rows.begin), t.data(), false);
      simd::gemv_trans(b.v, t.data(), at(y, b.cols.begin), false);
    }
    return;
  }
  t.setZero();
  simd::gemv_trans(b.u, at(x, b.rows.begin), t.data(), true);
  simd::gemv_trans(b.v, t.data(), at(y, b.cols.begin), true);
  if (mirrored) {
    const CVector xc = x.segment(static_cast<Eigen::Index>(b.cols.begin),
                                 static_cast<Eigen::Index>(b.cols.size())).conjugate();
    t.setZero();
    simd::gemv(b.v, xc.data(), t.data());
    CVector w = CVector::Zero(static_cast<Eigen::Index>(b.rows.size()));
    simd::gemv(b.u, t.data(), w.data());
    y.segment(static_cast<Eigen::Index>(b.rows.begin), w.size()) += w.conjugate();
  }
}

// Per-worker accumulators reduced in worker order, so results depend only on
// the worker count.
template <class Block, class Apply>
void accumulate(const std::vector<const Block*>& blocks, std::size_t n, CVector& y, Apply apply) {
  const std::size_t workers = std::min(worker_count(), blocks.size());
  if (workers <= 1) {
    for (const Block* b : blocks) apply(*b, y);
    return;
  }
  std::vector<CVector> partial(workers, CVector::Zero(static_cast<Eigen::Index>(n)));
  parallel_for(blocks.size(), [&](std::size_t w, std::size_t i) { apply(*blocks[i], partial[w]); });
  for (const CVector& p : partial) y += p;
}

}  // namespace

void HMatrix::apply_near(NearPart part, const CVector& x, CVector& y, bool adjoint) const {
  std::vector<const DenseBlock*> sel;
  for (const DenseBlock& b : near_)
    if (part == NearPart::All || !b.is_diagonal()) sel.push_back(&b);
  accumulate(sel, n_, y, [&](const DenseBlock& b, CVector& out) {
    apply_dense(b, symmetric_ && !b.is_diagonal(), x, out, adjoint);
  });
}

void HMatrix::apply_level(int level, const CVector& x, CVector& y, bool adjoint) const {
  std::vector<const LowRankBlock*> sel;
  for (const LowRankBlock& b : far_blocks(level)) sel.push_back(&b);
  accumulate(sel, n_, y, [&](const LowRankBlock& b, CVector& out) {
    apply_lowrank(b, symmetric_, x, out, adjoint);
  });
}

CVector HMatrix::matvec(const CVector& x) const {
  check(x);
  CVector y = CVector::Zero(x.size());
  apply_near(NearPart::All, x, y, false);
  for (int l = 1; l <= depth_; ++l) apply_level(l, x, y, false);
  return y;
}

CVector HMatrix::matvec_level(int level, const CVector& x) const {
  check(x);
  CVector y = CVector::Zero(x.size());
  apply_level(level, x, y, false);
  return y;
}

CVector HMatrix::matvec_near(const CVector& x) const {
  check(x);
  CVector y = CVector::Zero(x.size());
  apply_near(NearPart::All, x, y, false);
  return y;
}

CVector HMatrix::matvec_near_offdiag(const CVector& x) const {
  check(x);
  CVector y = CVector::Zero(x.size());
  apply_near(NearPart::OffDiagonal, x, y, false);
  return y;
}

CVector HMatrix::matvec_level_adjoint(int level, const CVector& x) const {
  check(x);
  CVector y = CVector::Zero(x.size());
  apply_level(level, x, y, true);
  return y;
}

CVector HMatrix::matvec_near_offdiag_adjoint(const CVector& x) const {
  check(x);
  CVector y = CVector::Zero(x.size());
  apply_near(NearPart::OffDiagonal, x, y, true);
  return y;
}

std::vector<const DenseBlock*> HMatrix::diagonal_blocks() const {
  std::vector<const DenseBlock*> out;
  for (const DenseBlock& b : near_)
    if (b.is_diagonal()) out.push_back(&b);
  std::sort(out.begin(), out.end(),
            [](const DenseBlock* a, const DenseBlock* b) { return a->rows.begin < b->rows.begin; });
  return out;
}

std::vector<DenseBlock> HMatrix::expanded_near_blocks() const {
  std::vector<DenseBlock> out;
  for (const DenseBlock& b : near_) {
    out.push_back(b);
    if (symmetric_ && !b.is_diagonal()) out.push_back({b.cols, b.rows, b.data.transpose()});
  }
  return out;
}

MemoryReport HMatrix::memory_report() const {
  MemoryReport r;
  r.n = n_;
  r.near_blocks = near_.size();
  for (const DenseBlock& b : near_) r.near_entries += static_cast<std::size_t>(b.data.size());
  r.total_entries = r.near_entries;
  for (int l = 1; l <= depth_; ++l) {
    LevelStats s;
    s.level = l;
    s.assembled = assembled_[static_cast<std::size_t>(l)];
    for (const LowRankBlock& b : far_[static_cast<std::size_t>(l)]) {
      ++s.blocks;
      s.entries += b.stored_entries();
      s.max_rank = std::max(s.max_rank, b.rank());
      if (2 * b.rank() > std::min(b.rows.size(), b.cols.size())) ++s.rank_flags;
    }
    r.total_entries += s.entries;
    r.levels.push_back(s);
  }
  r.dense_entries = n_ * n_;
  r.compression_ratio = r.dense_entries ? static_cast<double>(r.total_entries) /
                                              static_cast<double>(r.dense_entries)
                                        : 1.0;
  return r;
}

HMatrix assemble_hmatrix(const KernelSpec& spec, const ClusterTree& tree,
                         const AssemblyOptions& options) {
  if (tree.size() != spec.size()) throw Error("assemble: tree does not match the kernel's mesh");
  if (!(options.tol > 0.0)) throw Error("assemble: tol must be positive");
  if (options.symmetric && !reciprocity_probe(spec, options.probe_seed))
    throw Error("assemble: symmetric storage refused, kernel failed the reciprocity probe");

  const BlockPartition part = build_block_partition(tree, options.eta);
  const auto& perm = tree.permutation();
  const EntryFn entry = [&](std::size_t i, std::size_t j) { return spec.entry(perm[i], perm[j]); };
  auto keep = [&](const BlockPair& p) { return !options.symmetric || p.row_node <= p.col_node; };

  HMatrix h;
  h.n_ = tree.size();
  h.depth_ = tree.depth();
  h.symmetric_ = options.symmetric;
  h.tol_ = options.tol;
  h.far_.resize(static_cast<std::size_t>(h.depth_) + 1);
  h.assembled_.assign(static_cast<std::size_t>(h.depth_) + 1, false);

  std::vector<BlockPair> near_pairs;
  for (const BlockPair& p : part.near)
    if (keep(p)) near_pairs.push_back(p);
  h.near_.resize(near_pairs.size());
  parallel_for(near_pairs.size(), [&](std::size_t, std::size_t b) {
    const IndexRange rows = tree.node(near_pairs[b].row_node).range;
    const IndexRange cols = tree.node(near_pairs[b].col_node).range;
    CMatrix d(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j)
      for (std::size_t i = 0; i < rows.size(); ++i)
        d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            entry(rows.begin + i, cols.begin + j);
    h.near_[b] = {rows, cols, std::move(d)};
  });

  for (int l = 1; l <= h.depth_; ++l) {
    if (options.level_filter && !options.level_filter->contains(l)) continue;
    h.assembled_[static_cast<std::size_t>(l)] = true;
    std::vector<BlockPair> pairs;
    for (const BlockPair& p : part.far[static_cast<std::size_t>(l)])
      if (keep(p)) pairs.push_back(p);
    auto& out = h.far_[static_cast<std::size_t>(l)];
    out.resize(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t, std::size_t b) {
      const IndexRange rows = tree.node(pairs[b].row_node).range;
      const IndexRange cols = tree.node(pairs[b].col_node).range;
      try {
        LowRankBlock blk = recompress(aca(entry, rows, cols, options.tol), options.tol);
        blk.level = l;
        out[b] = std::move(blk);
      } catch (const std::exception& e) {
        throw Error("assemble: far block rows [" + std::to_string(rows.begin) + "," +
                    std::to_string(rows.end) + ") cols [" + std::to_string(cols.begin) + "," +
                    std::to_string(cols.end) + ") level " + std::to_string(l) + ": " + e.what());
      }
    });
  }
  return h;
}

}  // namespace hpss
