#include "hpss/reference.hpp"

#include <Eigen/LU>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

namespace hpss {

void write_iterative_csv(const IterativeReport& report, std::ostream& out) {
  out << "iteration,relative_residual\n";
  char buf[64];
  for (std::size_t i = 0; i < report.history.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.9e\n", i, report.history[i]);
    out << buf;
  }
}

namespace {

// Rotation that zeroes b in (a, b): [c s; -conj(s) c] with real c.
void make_givens(Complex a, Complex b, double& c, Complex& s) {
  const double na = std::abs(a);
  const double nb = std::abs(b);
  if (nb == 0.0) {
    c = 1.0;
    s = 0.0;
  } else if (na == 0.0) {
    c = 0.0;
    s = std::conj(b) / nb;
  } else {
    const double r = std::hypot(na, nb);
    c = na / r;
    s = (a / na) * std::conj(b) / r;
  }
}

}  // namespace

GmresResult gmres(const LinearOp& apply, const CVector& b, const GmresOptions& opt) {
  if (opt.restart < 1 || opt.max_iterations < 1) throw Error("gmres: restart and max_iterations must be >= 1");
  const double bnorm = b.norm();
  if (!(bnorm > 0.0)) throw Error("gmres: right-hand side is zero");
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::Index n = b.size();
  const int m = opt.restart;

  GmresResult res;
  IterativeReport& rep = res.report;
  CVector x = CVector::Zero(n);
  rep.history.push_back(1.0);

  CMatrix v(n, m + 1);
  CMatrix hh = CMatrix::Zero(m + 1, m);
  std::vector<double> cs(static_cast<std::size_t>(m));
  std::vector<Complex> sn(static_cast<std::size_t>(m));
  CVector g(m + 1);

  CVector r = b;
  double beta = bnorm;
  while (rep.iterations < opt.max_iterations) {
    v.col(0) = r / beta;
    g.setZero();
    g(0) = beta;
    hh.setZero();
    int k = 0;
    bool done = false;
    for (; k < m && rep.iterations < opt.max_iterations; ++k) {
      CVector w = apply(v.col(k));
      for (int i = 0; i <= k; ++i) {
        hh(i, k) = v.col(i).dot(w);
        w -= hh(i, k) * v.col(i);
      }
      const double wn = w.norm();
      hh(k + 1, k) = wn;
      if (wn > 0.0) v.col(k + 1) = w / wn;
      for (int i = 0; i < k; ++i) {
        const Complex a = hh(i, k), c2 = hh(i + 1, k);
        hh(i, k) = cs[i] * a + sn[i] * c2;
        hh(i + 1, k) = -std::conj(sn[i]) * a + cs[i] * c2;
      }
      make_givens(hh(k, k), hh(k + 1, k), cs[k], sn[k]);
      hh(k, k) = cs[k] * hh(k, k) + sn[k] * hh(k + 1, k);
      hh(k + 1, k) = 0.0;
      g(k + 1) = -std::conj(sn[k]) * g(k);
      g(k) = cs[k] * g(k);
      ++rep.iterations;
      const double est = std::abs(g(k + 1)) / bnorm;
      rep.history.push_back(est);
      if (est <= opt.tol || wn == 0.0) {
        ++k;
        done = true;
        break;
      }
    }
    // back substitution on the k x k triangle
    CVector y = hh.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    x += v.leftCols(k) * y;
    r = b - apply(x);
    beta = r.norm();
    rep.final_residual = beta / bnorm;
    rep.restarts.push_back(static_cast<int>(rep.history.size()) - 1);
    if (rep.final_residual <= opt.tol) break;
    if (done && beta == 0.0) break;
  }
  rep.converged = rep.final_residual <= opt.tol;
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  res.x = std::move(x);
  return res;
}

LuResult lu_solve(const CMatrix& a, const CVector& b) {
  if (a.rows() != a.cols() || a.rows() != b.size()) throw Error("lu_solve: dimension mismatch");
  if (a.rows() == 0) throw Error("lu_solve: empty system");
  Eigen::PartialPivLU<CMatrix> lu(a);
  const auto d = lu.matrixLU().diagonal().cwiseAbs();
  const double dmax = d.maxCoeff();
  const double dmin = d.minCoeff();
  if (!(dmin > std::numeric_limits<double>::epsilon() * dmax) || !std::isfinite(dmax))
    throw Error("lu_solve: matrix is singular to working precision");
  LuResult r;
  r.x = lu.solve(b);
  r.rcond = lu.rcond();
  const double bn = b.norm();
  r.residual = bn > 0.0 ? (a * r.x - b).norm() / bn : (a * r.x).norm();
  r.residual_ok = r.residual <= 1e-10;
  char buf[160];
  if (r.rcond < 1e-12) {
    std::snprintf(buf, sizeof buf, "ill-conditioned matrix (rcond %.3e)", r.rcond);
    r.warning = buf;
  }
  if (!r.residual_ok) {
    std::snprintf(buf, sizeof buf, "%sresidual %.3e exceeds 1e-10", r.warning.empty() ? "" : "; ", r.residual);
    r.warning += buf;
  }
  return r;
}

}  // namespace hpss
