#include "hpss/pss.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iomanip>
#include <sstream>

namespace hpss {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

CVector neumann_apply(const LinearOp& factor, const CVector& v, int order) {
  if (order < 1) throw Error("neumann_apply: order must be >= 1");
  CVector sum = v;
  CVector term = v;
  for (int p = 1; p <= order; ++p) {
    term = factor(term);
    if (p % 2) sum -= term;
    else sum += term;
  }
  return sum;
}

FactorChain::FactorChain(const ScaledSystem& s, const HMatrix& h, const PssConfig& cfg)
    : s_(&s), h_(&h), cfg_(cfg), depth_(h.depth()) {
  if (cfg.series_order < 1) throw Error("pss: series_order must be >= 1");
  if (s.size() != h.size()) throw Error("pss: scaled system and H-matrix sizes differ");
  const int first = std::clamp(cfg.first_active_level, 1, std::max(depth_, 1));
  report_.series_order = cfg.series_order;
  for (int l = 1; l <= depth_; ++l) {
    LevelReport lr;
    lr.level = l;
    lr.active = l >= first;
    lr.far_blocks = h.far_blocks(l).size();
    const bool near_part = l == depth_ && !s.near_residual_is_zero();
    lr.in_chain = lr.active && (lr.far_blocks > 0 || near_part);
    if (lr.in_chain) chain_.push_back(l);
    report_.levels.push_back(lr);
  }
  if (depth_ == 0 && !s.near_residual_is_zero())
    throw Error("pss: a single-leaf tree needs an exact near-field alpha");
  report_.outer_iterations = chain_.size() * static_cast<std::size_t>(cfg.series_order);
  report_.matvec_level_calls = calls_per_apply();
  // Ap_i runs once at the outer level and once per application of any later T_j.
  const auto order = static_cast<std::size_t>(cfg.series_order);
  std::vector<std::size_t> ap_runs(chain_.size(), 1);
  for (std::size_t i = chain_.size(); i-- > 0;) {
    for (std::size_t j = i + 1; j < chain_.size(); ++j) ap_runs[i] += order * ap_runs[j];
    report_.levels[static_cast<std::size_t>(chain_[i] - 1)].u_applications = order * ap_runs[i];
  }
}

// Cost of one T_i application in U applications: c(T_i) = 1 + sum_{j<i} order * c(T_j)
std::size_t FactorChain::t_cost(std::size_t idx) const {
  std::size_t c = 1;
  for (std::size_t j = 0; j < idx; ++j) c += static_cast<std::size_t>(cfg_.series_order) * t_cost(j);
  return c;
}

std::size_t FactorChain::calls_per_apply() const {
  std::size_t c = 0;
  for (std::size_t i = 0; i < chain_.size(); ++i)
    c += static_cast<std::size_t>(cfg_.series_order) * t_cost(i);
  return c;
}

void FactorChain::count(int) const { counter_->fetch_add(1, std::memory_order_relaxed); }

CVector FactorChain::apply_u(int level, const CVector& v) const {
  count(level);
  CVector y = h_->level_assembled(level) ? s_->apply_alpha(h_->matvec_level(level, v))
                                         : CVector::Zero(v.size());
  if (level == depth_ && !s_->near_residual_is_zero()) y += s_->near_residual(v);
  return y;
}

CVector FactorChain::apply_u_adjoint(int level, const CVector& v) const {
  CVector y = h_->level_assembled(level) ? h_->matvec_level_adjoint(level, s_->apply_alpha_adjoint(v))
                                         : CVector::Zero(v.size());
  if (level == depth_ && !s_->near_residual_is_zero()) y += s_->near_residual_adjoint(v);
  return y;
}

CVector FactorChain::apply_t(int level, const CVector& v) const {
  CVector y = apply_u(level, v);
  for (int j : chain_) {
    if (j >= level) break;
    y = apply_ap(j, y);
  }
  return y;
}

CVector FactorChain::apply_t_adjoint(int level, const CVector& v) const {
  CVector y = v;
  for (auto it = chain_.rbegin(); it != chain_.rend(); ++it)
    if (*it < level) y = apply_ap_adjoint(*it, y);
  return apply_u_adjoint(level, y);
}

CVector FactorChain::apply_ap(int level, const CVector& v) const {
  return neumann_apply([&](const CVector& x) { return apply_t(level, x); }, v, cfg_.series_order);
}

CVector FactorChain::apply_ap_adjoint(int level, const CVector& v) const {
  return neumann_apply([&](const CVector& x) { return apply_t_adjoint(level, x); }, v,
                       cfg_.series_order);
}

CVector FactorChain::apply(const CVector& b_tilde) const {
  CVector x = b_tilde;
  for (int l : chain_) x = apply_ap(l, x);
  return x;
}

FactorChain build_factor_chain(const ScaledSystem& s, const HMatrix& h, const PssConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  FactorChain chain(s, h, cfg);
  PssReport& rep = chain.report_;
  if (cfg.check_norms) {
    for (int l : chain.chain_levels()) {
      const LinearOp t = [&](const CVector& v) { return chain.apply_t(l, v); };
      const LinearOp ta = [&](const CVector& v) { return chain.apply_t_adjoint(l, v); };
      const NormEstimate est = estimate_operator_norm(t, s.size(), cfg.norm_iters, cfg.norm_mode, &ta,
                                                      cfg.seed + static_cast<std::uint64_t>(l));
      rep.levels[static_cast<std::size_t>(l - 1)].norm = est;
      const std::string what = "level " + std::to_string(l) + " factor T_" + std::to_string(l) +
                               " " + std::string(norm_mode_name(est.mode)) + " estimate " + fmt(est.value);
      if (est.value >= cfg.norm_fail)
        throw ConvergenceError(what + " >= " + fmt(cfg.norm_fail) +
                               ": the power series for [I+T]^-1 converges only when the factor norm "
                               "is below 1; the series diverges");
      if (est.value >= cfg.norm_warn)
        rep.warnings.push_back(what + " >= warning threshold " + fmt(cfg.norm_warn));
    }
  }
  rep.build_seconds = seconds_since(t0);
  return chain;
}

PssResult solve(const FactorChain& chain, const ScaledSystem& s, const HMatrix& h) {
  const auto t0 = std::chrono::steady_clock::now();
  PssResult r;
  r.x = chain.apply(s.b_tilde());
  r.report = chain.report();
  r.report.solve_seconds = seconds_since(t0);
  if (h.all_levels_assembled()) {
    const double bn = s.b().norm();
    if (bn > 0.0) r.report.residual = (h.matvec(r.x) - s.b()).norm() / bn;
  }
  return r;
}

PssResult solve(const ScaledSystem& s, const HMatrix& h, const PssConfig& cfg) {
  const FactorChain chain = build_factor_chain(s, h, cfg);
  return solve(chain, s, h);
}

void write_pss_report(const PssReport& r, std::ostream& out) {
  out << "series_order " << r.series_order << "\n";
  out << "outer_iterations " << r.outer_iterations << "\n";
  out << "matvec_level_calls " << r.matvec_level_calls << "\n";
  for (const LevelReport& l : r.levels) {
    out << "level " << l.level << (l.active ? " active" : " inactive")
        << (l.in_chain ? " in-chain" : " identity") << " far_blocks " << l.far_blocks;
    if (l.norm) out << " norm " << fmt(l.norm->value) << " (" << norm_mode_name(l.norm->mode) << ")";
    out << " u_applications " << l.u_applications << "\n";
  }
  out << "build_seconds " << fmt(r.build_seconds) << "\n";
  out << "solve_seconds " << fmt(r.solve_seconds) << "\n";
  if (r.residual) out << "residual " << fmt(*r.residual) << "\n";
  for (const std::string& w : r.warnings) out << "warning: " << w << "\n";
}

void write_pss_levels_csv(const PssReport& r, std::ostream& out) {
  out << "level,active,in_chain,far_blocks,norm,norm_mode,u_applications\n";
  for (const LevelReport& l : r.levels) {
    out << l.level << ',' << int(l.active) << ',' << int(l.in_chain) << ',' << l.far_blocks << ',';
    if (l.norm) out << fmt(l.norm->value) << ',' << norm_mode_name(l.norm->mode);
    else out << ',';
    out << ',' << l.u_applications << "\n";
  }
}

}  // namespace hpss
