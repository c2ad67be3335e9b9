#pragma once

#include "hpss/compression.hpp"
#include "hpss/geometry.hpp"
#include "hpss/kernels.hpp"

#include <iosfwd>
#include <optional>
#include <set>
#include <vector>

namespace hpss {

struct BlockPair {
  int row_node = 0;
  int col_node = 0;
  int level = 0;
};

/// Minimal admissible block partition: far pairs attach at the coarsest
/// admissible level, near pairs are non-admissible leaf pairs.
struct BlockPartition {
  std::vector<BlockPair> near;
  std::vector<std::vector<BlockPair>> far;  // indexed by level 0..depth; level 0 stays empty
  int depth = 0;

  std::size_t far_count() const;
};

BlockPartition build_block_partition(const ClusterTree& tree, double eta = 1.0);

struct DenseBlock {
  IndexRange rows;
  IndexRange cols;
  CMatrix data;

  bool is_diagonal() const { return rows == cols; }
};

struct AssemblyOptions {
  double tol = 1e-3;
  double eta = 1.0;
  /// Far levels to assemble; nullopt assembles all of them.
  std::optional<std::set<int>> level_filter;
  /// Store one of each mirrored block pair. Needs a reciprocal kernel.
  bool symmetric = false;
  std::uint64_t probe_seed = 0x5eed;
};

struct LevelStats {
  int level = 0;
  bool assembled = true;
  std::size_t blocks = 0;
  std::size_t entries = 0;
  std::size_t max_rank = 0;
  /// Blocks whose rank exceeds min(m, n) / 2.
  std::size_t rank_flags = 0;
};

struct MemoryReport {
  std::size_t n = 0;
  std::size_t near_blocks = 0;
  std::size_t near_entries = 0;
  std::vector<LevelStats> levels;  // levels 1..depth
  std::size_t total_entries = 0;
  std::size_t dense_entries = 0;
  double compression_ratio = 1.0;  // total / N^2
};

/// CSV "level,blocks,entries,megabytes" at 16 bytes per stored entry, with a
/// "near" row first and a "total" row last.
void write_memory_csv(const MemoryReport& report, std::ostream& out);

class HMatrix {
 public:
  std::size_t size() const { return n_; }
  int depth() const { return depth_; }
  bool symmetric() const { return symmetric_; }
  double tol() const { return tol_; }

  const std::vector<DenseBlock>& near_blocks() const { return near_; }
  /// Far blocks of level l (1..depth). Empty for skipped levels.
  const std::vector<LowRankBlock>& far_blocks(int level) const;
  bool level_assembled(int level) const;
  bool all_levels_assembled() const;

  CVector matvec(const CVector& x) const;
  CVector matvec_level(int level, const CVector& x) const;
  CVector matvec_near(const CVector& x) const;
  /// Near-field part outside the diagonal leaf blocks.
  CVector matvec_near_offdiag(const CVector& x) const;

  CVector matvec_level_adjoint(int level, const CVector& x) const;
  CVector matvec_near_offdiag_adjoint(const CVector& x) const;

  /// Diagonal near block of each leaf, in leaf order.
  std::vector<const DenseBlock*> diagonal_blocks() const;
  /// Every near block including mirrored ones expanded (row leaf, col leaf).
  std::vector<DenseBlock> expanded_near_blocks() const;

  MemoryReport memory_report() const;

 private:
  friend HMatrix assemble_hmatrix(const KernelSpec&, const ClusterTree&, const AssemblyOptions&);

  enum class NearPart { All, OffDiagonal };
  void check(const CVector& x) const;
  void apply_near(NearPart part, const CVector& x, CVector& y, bool adjoint) const;
  void apply_level(int level, const CVector& x, CVector& y, bool adjoint) const;

  std::size_t n_ = 0;
  int depth_ = 0;
  bool symmetric_ = false;
  double tol_ = 0.0;
  std::vector<DenseBlock> near_;
  std::vector<std::vector<LowRankBlock>> far_;  // 0..depth
  std::vector<bool> assembled_;                 // 0..depth
};

/// Dense near blocks plus ACA-compressed, recompressed far blocks. Skipped
/// levels are never evaluated.
HMatrix assemble_hmatrix(const KernelSpec& spec, const ClusterTree& tree,
                         const AssemblyOptions& options = {});

}  // namespace hpss
