#pragma once

#include "hpss/config.hpp"
#include "hpss/hmatrix.hpp"
#include "hpss/postproc.hpp"
#include "hpss/pss.hpp"
#include "hpss/reference.hpp"

#include <memory>
#include <optional>
#include <ostream>
#include <string>

namespace hpss {

/// Mesh, kernel and cluster tree for one configuration. Not copyable: the
/// kernel refers to the mesh.
struct Problem {
  std::unique_ptr<Mesh> mesh;
  std::unique_ptr<KernelSpec> spec;
  ClusterTree tree;
  Excitation excitation;
};

Mesh build_mesh(const RunConfig& cfg);
/// leaf_size when set, else about one wavelength of elements per leaf.
std::size_t effective_leaf_size(const RunConfig& cfg, const Mesh& mesh);
Problem build_problem(const RunConfig& cfg);

/// "all" -> 1, "leaf" -> depth, a number -> that level (clamped to depth).
int first_active_level(const RunConfig& cfg, int depth);
PssConfig make_pss_config(const RunConfig& cfg, int depth);
std::optional<std::set<int>> level_filter_for(const RunConfig& cfg, int depth);

struct SolveOutcome {
  std::string solver;
  CVector x;  // mesh order
  RcsCurve rcs;
  double seconds = 0.0;  // assembly included
  std::size_t matvec_count = 0;
  std::optional<PssReport> pss;
  std::optional<IterativeReport> gmres;
  std::optional<LuResult> lu;
  std::optional<MemoryReport> memory;
};

SolveOutcome run_solver(const std::string& solver, const Problem& problem, const RunConfig& cfg);

/// Build, host and run-time description written at the top of text reports.
std::string environment_header();

struct BenchRow {
  std::size_t n = 0;
  int depth = 0;
  std::size_t full_entries = 0;
  std::size_t leaf_entries = 0;
  double full_assembly_s = 0.0;
  double leaf_assembly_s = 0.0;
  double matvec_s = 0.0;
};

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);
BenchRow bench_size(const RunConfig& cfg, std::size_t n);

/// Runs solve, compare, bench or oracle-check, writing artifacts to
/// cfg.output. Returns 0 iff every configured assertion passed.
int run_command(const std::string& command, const RunConfig& cfg, std::ostream& log);

}  // namespace hpss
