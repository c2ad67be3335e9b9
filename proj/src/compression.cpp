#include "hpss/compression.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <vector>

namespace hpss {

CMatrix LowRankBlock::dense() const {
  if (rank() == 0)
    return CMatrix::Zero(static_cast<Eigen::Index>(rows.size()),
                         static_cast<Eigen::Index>(cols.size()));
  return u * v;
}

LowRankBlock aca(const EntryFn& entry, IndexRange rows, IndexRange cols, double tol) {
  if (!(tol > 0.0)) throw Error("aca: tol must be positive");
  if (rows.empty() || cols.empty()) throw Error("aca: empty block");
  const auto m = static_cast<Eigen::Index>(rows.size());
  const auto n = static_cast<Eigen::Index>(cols.size());
  const Eigen::Index max_rank = std::min(m, n);

  std::vector<CVector> us, vs;
  std::vector<bool> row_used(static_cast<std::size_t>(m), false);
  std::vector<bool> col_used(static_cast<std::size_t>(n), false);
  double frob2 = 0.0;  // running |S_k|_F^2
  Eigen::Index pivot_row = 0;

  auto next_unused_row = [&](Eigen::Index after) -> Eigen::Index {
    for (Eigen::Index i = after; i < m; ++i)
      if (!row_used[static_cast<std::size_t>(i)]) return i;
    for (Eigen::Index i = 0; i < after && i < m; ++i)
      if (!row_used[static_cast<std::size_t>(i)]) return i;
    return -1;
  };

  while (static_cast<Eigen::Index>(us.size()) < max_rank && pivot_row >= 0) {
    row_used[static_cast<std::size_t>(pivot_row)] = true;
    CVector r(n);
    for (Eigen::Index j = 0; j < n; ++j)
      r[j] = entry(rows.begin + static_cast<std::size_t>(pivot_row),
                   cols.begin + static_cast<std::size_t>(j));
    for (std::size_t k = 0; k < us.size(); ++k) r -= us[k][pivot_row] * vs[k];

    Eigen::Index pivot_col = -1;
    double best = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (col_used[static_cast<std::size_t>(j)]) continue;
      const double a = std::abs(r[j]);
      if (a > best) {
        best = a;
        pivot_col = j;
      }
    }
    if (pivot_col < 0 || best == 0.0) {
      // Residual row vanished: try the next untouched row.
      pivot_row = next_unused_row(pivot_row + 1);
      continue;
    }
    col_used[static_cast<std::size_t>(pivot_col)] = true;
    CVector v = r / r[pivot_col];
    CVector u(m);
    for (Eigen::Index i = 0; i < m; ++i)
      u[i] = entry(rows.begin + static_cast<std::size_t>(i),
                   cols.begin + static_cast<std::size_t>(pivot_col));
    for (std::size_t k = 0; k < us.size(); ++k) u -= vs[k][pivot_col] * us[k];

    const double un = u.norm(), vn = v.norm();
    double cross = 0.0;
    for (std::size_t k = 0; k < us.size(); ++k)
      cross += (us[k].dot(u) * vs[k].dot(v)).real();  // <u_k,u> <v_k,v>
    frob2 += 2.0 * cross + un * un * vn * vn;
    us.push_back(std::move(u));
    vs.push_back(std::move(v));
    if (un * vn <= tol * std::sqrt(std::max(frob2, 0.0))) break;

    // Next pivot row: largest entry of the new column among unused rows.
    const CVector& last = us.back();
    pivot_row = -1;
    best = -1.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (row_used[static_cast<std::size_t>(i)]) continue;
      const double a = std::abs(last[i]);
      if (a > best) {
        best = a;
        pivot_row = i;
      }
    }
  }

  LowRankBlock out;
  out.rows = rows;
  out.cols = cols;
  out.tol_used = tol;
  const auto k = static_cast<Eigen::Index>(us.size());
  out.u.resize(m, k);
  out.v.resize(k, n);
  for (Eigen::Index c = 0; c < k; ++c) {
    out.u.col(c) = us[static_cast<std::size_t>(c)];
    out.v.row(c) = vs[static_cast<std::size_t>(c)].transpose();
  }
  return out;
}

LowRankBlock recompress(const LowRankBlock& block, double tol) {
  if (tol < 0.0) throw Error("recompress: tol must be >= 0");
  LowRankBlock out;
  out.rows = block.rows;
  out.cols = block.cols;
  out.level = block.level;
  out.tol_used = std::max(block.tol_used, tol);
  const Eigen::Index m = block.u.rows(), n = block.v.cols(), k = block.u.cols();
  if (k == 0) {
    out.u.resize(m, 0);
    out.v.resize(0, n);
    return out;
  }

  Eigen::HouseholderQR<CMatrix> qu(block.u);
  Eigen::HouseholderQR<CMatrix> qv(block.v.transpose());
  const Eigen::Index ku = std::min(m, k), kv = std::min(n, k);
  const CMatrix ru = qu.matrixQR().topRows(ku).template triangularView<Eigen::Upper>();
  const CMatrix rv = qv.matrixQR().topRows(kv).template triangularView<Eigen::Upper>();
  const CMatrix core = ru * rv.transpose();  // ku x kv

  Eigen::JacobiSVD<CMatrix> svd(core, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  Eigen::Index keep = 0;
  if (sigma.size() > 0) {
    const double cut = tol * sigma[0];
    while (keep < sigma.size() && sigma[keep] > cut && sigma[keep] > 0.0) ++keep;
  }

  const CMatrix q_u = qu.householderQ() * CMatrix::Identity(m, ku);
  const CMatrix q_v = qv.householderQ() * CMatrix::Identity(n, kv);
  out.u = q_u * (svd.matrixU().leftCols(keep) * sigma.head(keep).asDiagonal());
  // core = W S X^H  =>  U V = Q_u W S X^H Q_v^T
  out.v = svd.matrixV().leftCols(keep).adjoint() * q_v.transpose();
  return out;
}

}  // namespace hpss
