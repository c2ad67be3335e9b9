#include "hpss/scaling.hpp"

#include "hpss/simd.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace hpss {

std::string_view scaling_mode_name(ScalingMode mode) {
  return mode == ScalingMode::NearField ? "near-field" : "block-diagonal";
}

std::string_view norm_mode_name(NormMode mode) {
  switch (mode) {
    case NormMode::SpectralRadius:
      return "spectral-radius";
    case NormMode::TwoNorm:
      return "two-norm";
    case NormMode::FrobeniusProxy:
      return "frobenius-proxy";
  }
  return "?";
}

CVector ScaledSystem::apply_alpha(const CVector& v) const {
  if (static_cast<std::size_t>(v.size()) != n_) throw Error("alpha: size mismatch");
  CVector out(v.size());
  if (mode_ == ScalingMode::NearField) {
    out = near_lu_->solve(v);
  } else {
    for (std::size_t i = 0; i < leaves_.size(); ++i) {
      const auto b = static_cast<Eigen::Index>(leaves_[i].begin);
      const auto m = static_cast<Eigen::Index>(leaves_[i].size());
      out.segment(b, m) = (*diag_lu_)[i].solve(v.segment(b, m));
    }
  }
  if (gain_ != 1.0) out *= gain_;
  return out;
}

CVector ScaledSystem::apply_alpha_adjoint(const CVector& v) const {
  if (static_cast<std::size_t>(v.size()) != n_) throw Error("alpha: size mismatch");
  CVector out(v.size());
  if (mode_ == ScalingMode::NearField) {
    out = near_lu_->adjoint().solve(v);
  } else {
    for (std::size_t i = 0; i < leaves_.size(); ++i) {
      const auto b = static_cast<Eigen::Index>(leaves_[i].begin);
      const auto m = static_cast<Eigen::Index>(leaves_[i].size());
      out.segment(b, m) = (*diag_lu_)[i].adjoint().solve(v.segment(b, m));
    }
  }
  if (gain_ != 1.0) out *= gain_;
  return out;
}

CVector ScaledSystem::near_residual(const CVector& v) const {
  // gain alpha Z_N = gain I (+ gain alpha Z_offdiag in block-diagonal mode)
  CVector y = (gain_ - 1.0) * v;
  for (const ScaledCoupling& c : offdiag_) {
    CVector t = CVector::Zero(static_cast<Eigen::Index>(c.rows.size()));
    simd::gemv(c.data, v.data() + c.cols.begin, t.data());
    y.segment(static_cast<Eigen::Index>(c.rows.begin), t.size()) += gain_ * t;
  }
  return y;
}

CVector ScaledSystem::near_residual_adjoint(const CVector& v) const {
  CVector y = (gain_ - 1.0) * v;
  for (const ScaledCoupling& c : offdiag_) {
    CVector t = CVector::Zero(static_cast<Eigen::Index>(c.cols.size()));
    simd::gemv_trans(c.data, v.data() + c.rows.begin, t.data(), true);
    y.segment(static_cast<Eigen::Index>(c.cols.begin), t.size()) += gain_ * t;
  }
  return y;
}

ScaledSystem ScaledSystem::with_gain(double gain) const {
  if (!(gain > 0.0)) throw Error("scaling: gain must be positive");
  ScaledSystem s = *this;
  s.gain_ = gain;
  s.b_tilde_ = s.apply_alpha(b_);
  return s;
}

ScaledSystem ScaledSystem::with_rhs(const CVector& b) const {
  ScaledSystem s = *this;
  s.b_ = b;
  s.b_tilde_ = s.apply_alpha(b);
  return s;
}

ScaledSystem compute_scaling(const HMatrix& h, const CVector& b, ScalingMode mode) {
  if (static_cast<std::size_t>(b.size()) != h.size()) throw Error("scaling: rhs length != N");
  ScaledSystem s;
  s.mode_ = mode;
  s.n_ = h.size();
  s.b_ = b;

  const auto diag = h.diagonal_blocks();
  std::size_t covered = 0;
  for (const DenseBlock* d : diag) covered += d->rows.size();
  if (covered != h.size()) throw Error("scaling: some leaf has no diagonal near block");
  for (const DenseBlock* d : diag) s.leaves_.push_back(d->rows);

  if (mode == ScalingMode::BlockDiagonal) {
    auto lus = std::make_shared<std::vector<Eigen::PartialPivLU<CMatrix>>>();
    for (std::size_t i = 0; i < diag.size(); ++i) {
      lus->emplace_back(diag[i]->data);
      const CMatrix& lu = lus->back().matrixLU();
      const double dmax = lu.diagonal().cwiseAbs().maxCoeff();
      const double dmin = lu.diagonal().cwiseAbs().minCoeff();
      if (!(dmin > std::numeric_limits<double>::epsilon() * dmax))
        throw Error("scaling: diagonal near block of leaf " + std::to_string(i) + " (rows [" +
                    std::to_string(diag[i]->rows.begin) + "," + std::to_string(diag[i]->rows.end) +
                    ")) is singular");
    }
    s.diag_lu_ = lus;
    for (const DenseBlock& blk : h.expanded_near_blocks()) {
      if (blk.is_diagonal()) continue;
      std::size_t leaf = 0;
      while (s.leaves_[leaf] != blk.rows) ++leaf;
      s.offdiag_.push_back({blk.rows, blk.cols, (*lus)[leaf].solve(blk.data)});
    }
  } else {
    std::vector<Eigen::Triplet<Complex, int>> trip;
    for (const DenseBlock& blk : h.expanded_near_blocks())
      for (Eigen::Index j = 0; j < blk.data.cols(); ++j)
        for (Eigen::Index i = 0; i < blk.data.rows(); ++i)
          trip.emplace_back(static_cast<int>(blk.rows.begin) + static_cast<int>(i),
                            static_cast<int>(blk.cols.begin) + static_cast<int>(j), blk.data(i, j));
    ScaledSystem::SparseC zn(static_cast<int>(s.n_), static_cast<int>(s.n_));
    zn.setFromTriplets(trip.begin(), trip.end());
    zn.makeCompressed();
    auto lu = std::make_shared<ScaledSystem::SparseLu>();
    lu->compute(zn);
    if (lu->info() != Eigen::Success)
      throw Error("scaling: near-field factorization failed: " + lu->lastErrorMessage());
    // SparseLU only reports exact zero pivots; probe the solve instead.
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CVector r(static_cast<Eigen::Index>(s.n_));
    for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = {u(rng), u(rng)};
    const CVector x = lu->solve(r);
    const double res = (zn * x - r).norm() / r.norm();
    if (!x.allFinite() || !(res <= 1e-8))
      throw Error("scaling: near-field matrix is singular to working precision (probe residual " +
                  std::to_string(res) + ")");
    s.near_lu_ = lu;
  }
  s.b_tilde_ = s.apply_alpha(b);
  return s;
}

namespace {

CVector random_unit(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CVector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = Complex(g(rng), g(rng));
  return v / v.norm();
}

}  // namespace

NormEstimate estimate_operator_norm(const LinearOp& apply, std::size_t n, int iters, NormMode mode,
                                    const LinearOp* adjoint, std::uint64_t seed) {
  if (iters < 5) throw Error("norm estimate: at least 5 iterations required");
  if (n == 0) return {0.0, mode};
  std::mt19937_64 rng(seed);
  if (mode == NormMode::TwoNorm && !adjoint) mode = NormMode::FrobeniusProxy;

  if (mode == NormMode::FrobeniusProxy) {
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    double acc = 0.0;
    for (int s = 0; s < iters; ++s) {
      CVector z(static_cast<Eigen::Index>(n));
      for (auto& x : z) x = std::polar(1.0, phase(rng));
      acc += apply(z).squaredNorm();
    }
    return {std::sqrt(acc / iters), mode};
  }

  CVector v = random_unit(n, rng);
  if (mode == NormMode::TwoNorm) {
    double lambda = 0.0;
    for (int k = 0; k < iters; ++k) {
      const CVector w = (*adjoint)(apply(v));
      lambda = w.norm();
      if (lambda == 0.0) return {0.0, mode};
      v = w / lambda;
    }
    return {std::sqrt(lambda), mode};
  }

  // Spectral radius: geometric mean of the growth factors over the second
  // half of the iterations, after the non-normal transient has decayed.
  double log_sum = 0.0;
  int counted = 0;
  for (int k = 0; k < iters; ++k) {
    const CVector w = apply(v);
    const double g = w.norm();
    if (g == 0.0) return {0.0, mode};
    v = w / g;
    if (k >= iters / 2) {
      log_sum += std::log(g);
      ++counted;
    }
  }
  return {std::exp(log_sum / counted), mode};
}

}  // namespace hpss
