#pragma once

#include "hpss/core.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace hpss {

struct IterativeReport {
  int iterations = 0;
  /// Relative residual after every inner step; entry 0 is the initial 1.
  std::vector<double> history;
  /// Indices into history where a restart cycle ended.
  std::vector<int> restarts;
  bool converged = false;
  double final_residual = 1.0;  // true residual ||b - A x|| / ||b||
  double wall_seconds = 0.0;
};

/// CSV "iteration,relative_residual".
void write_iterative_csv(const IterativeReport& report, std::ostream& out);

struct GmresOptions {
  double tol = 1e-6;
  int restart = 50;
  int max_iterations = 1000;
};

struct GmresResult {
  CVector x;
  IterativeReport report;
};

/// Restarted GMRES with modified Gram-Schmidt and Givens rotations, x0 = 0.
/// Running out of iterations returns the best iterate with converged = false.
GmresResult gmres(const LinearOp& apply, const CVector& b, const GmresOptions& options = {});

struct LuResult {
  CVector x;
  double residual = 0.0;  // ||A x - b|| / ||b||
  double rcond = 0.0;     // reciprocal 1-norm condition estimate
  bool residual_ok = true;
  std::string warning;
};

/// Partial-pivot LU. Singular to working precision throws; poor
/// conditioning or a residual above 1e-10 is reported through `warning`.
LuResult lu_solve(const CMatrix& a, const CVector& b);

}  // namespace hpss
