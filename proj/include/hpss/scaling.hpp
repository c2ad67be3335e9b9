#pragma once

#include "hpss/hmatrix.hpp"

#include <Eigen/LU>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <memory>
#include <string_view>
#include <vector>

namespace hpss {

/// How alpha is built from the near field Z_N.
enum class ScalingMode {
  /// alpha = Z_N^-1 over the whole block-sparse near field, so alpha Z_N = I.
  NearField,
  /// alpha = blockwise inverse of the diagonal leaf blocks only. The scaled
  /// off-diagonal near coupling is left over and joins the leaf-level factor.
  BlockDiagonal,
};

std::string_view scaling_mode_name(ScalingMode mode);

/// alpha_i Z_ij for an off-diagonal near pair (BlockDiagonal mode only).
struct ScaledCoupling {
  IndexRange rows;
  IndexRange cols;
  CMatrix data;
};

class ScaledSystem {
 public:
  ScalingMode mode() const { return mode_; }
  /// Multiplier on alpha; 1 unless the system was deliberately de-scaled.
  double gain() const { return gain_; }
  std::size_t size() const { return n_; }

  const CVector& b() const { return b_; }
  const CVector& b_tilde() const { return b_tilde_; }
  const std::vector<ScaledCoupling>& offdiag_near() const { return offdiag_; }

  CVector apply_alpha(const CVector& v) const;
  CVector apply_alpha_adjoint(const CVector& v) const;

  /// (gain alpha Z_N - I) v: what is left of the scaled near field once the
  /// identity is taken out. Zero when alpha inverts Z_N exactly.
  CVector near_residual(const CVector& v) const;
  CVector near_residual_adjoint(const CVector& v) const;
  bool near_residual_is_zero() const { return mode_ == ScalingMode::NearField && gain_ == 1.0; }

  /// Same factorizations with alpha replaced by gain * alpha (b_tilde follows).
  ScaledSystem with_gain(double gain) const;
  /// Same alpha for a different right-hand side.
  ScaledSystem with_rhs(const CVector& b) const;

 private:
  friend ScaledSystem compute_scaling(const HMatrix&, const CVector&, ScalingMode);
  using SparseC = Eigen::SparseMatrix<Complex, Eigen::ColMajor, int>;
  using SparseLu = Eigen::SparseLU<SparseC, Eigen::COLAMDOrdering<int>>;

  ScalingMode mode_ = ScalingMode::NearField;
  double gain_ = 1.0;
  std::size_t n_ = 0;
  CVector b_;
  CVector b_tilde_;
  std::vector<IndexRange> leaves_;
  std::shared_ptr<const std::vector<Eigen::PartialPivLU<CMatrix>>> diag_lu_;
  std::shared_ptr<SparseLu> near_lu_;  // adjoint() is non-const in Eigen
  std::vector<ScaledCoupling> offdiag_;
};

/// Factorizes the near field per `mode` and scales b (tree order).
ScaledSystem compute_scaling(const HMatrix& h, const CVector& b,
                             ScalingMode mode = ScalingMode::NearField);

enum class NormMode {
  SpectralRadius,  // power iteration on T itself
  TwoNorm,         // power iteration on T^H T; needs the adjoint
  FrobeniusProxy,  // Hutchinson estimate of |T|_F, an upper bound on |T|_2
};

std::string_view norm_mode_name(NormMode mode);

struct NormEstimate {
  double value = 0.0;
  NormMode mode = NormMode::SpectralRadius;
};

/// Randomized estimate. TwoNorm without an adjoint falls back to
/// FrobeniusProxy; the returned mode says which one ran.
NormEstimate estimate_operator_norm(const LinearOp& apply, std::size_t n, int iters,
                                    NormMode mode = NormMode::SpectralRadius,
                                    const LinearOp* adjoint = nullptr, std::uint64_t seed = 1);

}  // namespace hpss
