#pragma once

#include "hpss/core.hpp"

#include <functional>

namespace hpss {

/// Entry oracle in global (tree-ordered) indices.
using EntryFn = std::function<Complex(std::size_t row, std::size_t col)>;

/// Z_sub ~ U * V with U m x k and V k x n.
struct LowRankBlock {
  IndexRange rows;
  IndexRange cols;
  CMatrix u;
  CMatrix v;
  int level = 0;
  double tol_used = 0.0;

  std::size_t rank() const { return static_cast<std::size_t>(u.cols()); }
  std::size_t stored_entries() const {
    return static_cast<std::size_t>(u.size() + v.size());
  }
  CMatrix dense() const;
};

/// Partially pivoted adaptive cross approximation. Starts on the first local
/// row; pivot ties resolve to the lowest index. Stops once
/// |u_k| |v_k| <= tol |S_k|_F with S_k the running approximation.
LowRankBlock aca(const EntryFn& entry, IndexRange rows, IndexRange cols, double tol);

/// QR of both factors, SVD of the k x k core, drop singular values at or
/// below tol * sigma_max. tol = 0 keeps every nonzero singular value.
LowRankBlock recompress(const LowRankBlock& block, double tol);

}  // namespace hpss
