#pragma once

#include "hpss/scaling.hpp"

#include <atomic>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace hpss {

/// Raised when a factor norm estimate reaches the divergence threshold.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

struct PssConfig {
  int series_order = 2;
  double norm_warn = 0.1;
  double norm_fail = 1.0;
  /// Active levels are [first_active_level, L]; 0 or 1 means all levels.
  /// A value above L is clamped to L (leaf-only).
  int first_active_level = 1;
  int norm_iters = 20;
  NormMode norm_mode = NormMode::SpectralRadius;
  std::uint64_t seed = 1;
  bool check_norms = true;
};

/// Sum_{p=0..order} (-1)^p T^p v, using exactly `order` applications of T.
CVector neumann_apply(const LinearOp& factor, const CVector& v, int order);

struct LevelReport {
  int level = 0;
  bool active = false;
  /// Contributes a non-identity factor (active with far blocks or, at the
  /// leaf level, a nonzero near residual).
  bool in_chain = false;
  std::size_t far_blocks = 0;
  std::optional<NormEstimate> norm;
  /// Applications of U_l issued by one solve.
  std::size_t u_applications = 0;
};

struct PssReport {
  int series_order = 0;
  std::vector<LevelReport> levels;  // 1..L
  std::vector<std::string> warnings;
  /// Outer reading: series terms per chain level, summed (order * levels).
  std::size_t outer_iterations = 0;
  /// Nested reading: every U_l application, inner chains included.
  std::size_t matvec_level_calls = 0;
  double build_seconds = 0.0;
  double solve_seconds = 0.0;
  /// ||Z x - b|| / ||b|| with the full H-matrix, when every level is assembled.
  std::optional<double> residual;
};

/// Plain-text report: per-level norms, call counts, timings, warnings.
void write_pss_report(const PssReport& report, std::ostream& out);
/// CSV "level,active,in_chain,far_blocks,norm,norm_mode,u_applications".
void write_pss_levels_csv(const PssReport& report, std::ostream& out);

/// The ordered chain Ap_1..Ap_L over an immutable scaled system.
class FactorChain {
 public:
  FactorChain(const ScaledSystem& s, const HMatrix& h, const PssConfig& cfg);

  const PssReport& report() const { return report_; }
  const std::vector<int>& chain_levels() const { return chain_; }

  /// U_l v = gain alpha Z_Fl v, plus the near residual at the leaf level.
  CVector apply_u(int level, const CVector& v) const;
  CVector apply_u_adjoint(int level, const CVector& v) const;
  /// T_l = Ap_{l-1} o ... o Ap_1 o U_l
  CVector apply_t(int level, const CVector& v) const;
  CVector apply_t_adjoint(int level, const CVector& v) const;
  CVector apply_ap(int level, const CVector& v) const;
  CVector apply_ap_adjoint(int level, const CVector& v) const;

  /// Ap_L(...Ap_1(v)...), on an already scaled right-hand side.
  CVector apply(const CVector& b_tilde) const;
  /// Number of U_l applications one call of apply() issues.
  std::size_t calls_per_apply() const;
  /// U_l applications actually issued so far, norm estimation included.
  std::size_t issued_calls() const { return counter_->load(); }

 private:
  friend FactorChain build_factor_chain(const ScaledSystem&, const HMatrix&, const PssConfig&);
  void count(int level) const;
  std::size_t t_cost(std::size_t idx) const;

  const ScaledSystem* s_;
  const HMatrix* h_;
  PssConfig cfg_;
  std::vector<int> chain_;
  int depth_ = 0;
  PssReport report_;
  std::shared_ptr<std::atomic<std::size_t>> counter_ = std::make_shared<std::atomic<std::size_t>>(0);
};

/// Builds the chain and runs every norm guard. Throws ConvergenceError when
/// an estimate reaches cfg.norm_fail.
FactorChain build_factor_chain(const ScaledSystem& s, const HMatrix& h, const PssConfig& cfg);

struct PssResult {
  CVector x;  // tree order
  PssReport report;
};

PssResult solve(const ScaledSystem& s, const HMatrix& h, const PssConfig& cfg);
/// Reuses a built chain; only timing, counts and residual are refreshed.
PssResult solve(const FactorChain& chain, const ScaledSystem& s, const HMatrix& h);

}  // namespace hpss
