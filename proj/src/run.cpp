#include "hpss/run.hpp"

#include "hpss/parallel.hpp"
#include "hpss/simd.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

namespace hpss {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  return out;
}

ScalingMode scaling_mode(const RunConfig& cfg) {
  return cfg.scaling == "block-diagonal" ? ScalingMode::BlockDiagonal : ScalingMode::NearField;
}

NormMode norm_mode(const RunConfig& cfg) {
  if (cfg.norm_mode == "two-norm") return NormMode::TwoNorm;
  if (cfg.norm_mode == "frobenius-proxy") return NormMode::FrobeniusProxy;
  return NormMode::SpectralRadius;
}

std::vector<double> observation_angles(const RunConfig& cfg) {
  return angle_grid_deg(cfg.angle_start_deg, cfg.angle_stop_deg, cfg.angle_count);
}

struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

void report_checks(const std::vector<Check>& checks, std::ostream& log, std::ostream& file) {
  for (const Check& c : checks) {
    const std::string line = std::string(c.pass ? "PASS " : "FAIL ") + c.name + ": " + c.detail + "\n";
    log << line;
    file << line;
  }
}

bool all_pass(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

void write_common(const Problem& p, const RunConfig& cfg, const fs::path& dir) {
  auto mesh_out = open_out(dir / "mesh.csv");
  write_mesh_csv(*p.mesh, mesh_out);
  if (cfg.export_dense) {
    auto out = open_out(dir / "dense.bin");
    write_dense_binary(assemble_dense(*p.spec), out);
  }
}

}  // namespace

Mesh build_mesh(const RunConfig& cfg) {
  if (cfg.geometry == "strip") return discretize_strip(cfg.length, cfg.density);
  if (cfg.geometry == "circle") return discretize_circle(cfg.radius, cfg.density);
  if (cfg.geometry == "disk") {
    DiskOptions o;
    o.match_area = cfg.match_area;
    return discretize_disk(cfg.radius, cfg.density, Complex(cfg.eps_r, cfg.eps_r_imag), o);
  }
  if (cfg.geometry == "mesh") {
    std::ifstream in(cfg.mesh_file);
    if (!in) throw Error("cannot read mesh file '" + cfg.mesh_file + "'");
    return read_mesh_csv(in);
  }
  throw Error("unknown geometry '" + cfg.geometry + "'");
}

std::size_t effective_leaf_size(const RunConfig& cfg, const Mesh& mesh) {
  if (cfg.leaf_size > 0) return static_cast<std::size_t>(cfg.leaf_size);
  if (cfg.leaf_size < 0) throw Error("leaf_size must be >= 0");
  if (mesh.kind == MeshKind::Volume) return 8;
  // About a wavelength of contour per leaf: smaller leaves push the leaf
  // factor's spectral radius above one on strips.
  const double lambda_elems = mesh.wavelength / mesh.elements.front().extent;
  std::size_t leaf = std::max<std::size_t>(8, static_cast<std::size_t>(std::lround(lambda_elems)));
  // Closed contours diverge for any tree deeper than quarter arcs.
  if (cfg.geometry == "circle") leaf = std::max(leaf, (mesh.size() + 3) / 4);
  return leaf;
}

Problem build_problem(const RunConfig& cfg) {
  Problem p;
  p.mesh = std::make_unique<Mesh>(build_mesh(cfg));
  p.mesh->validate();
  p.spec = std::make_unique<KernelSpec>(*p.mesh);
  p.tree = build_cluster_tree(*p.mesh, effective_leaf_size(cfg, *p.mesh));
  p.excitation = {cfg.incidence_deg * kPi / 180.0, 1.0};
  return p;
}

int first_active_level(const RunConfig& cfg, int depth) {
  if (cfg.levels == "all") return 1;
  if (cfg.levels == "leaf") return std::max(depth, 1);
  const int l = std::stoi(cfg.levels);
  if (l < 1) throw Error("levels must be all, leaf or >= 1");
  return std::min(l, std::max(depth, 1));
}

PssConfig make_pss_config(const RunConfig& cfg, int depth) {
  PssConfig pc;
  pc.series_order = cfg.series_order;
  pc.first_active_level = first_active_level(cfg, depth);
  pc.norm_mode = norm_mode(cfg);
  pc.seed = cfg.seed;
  return pc;
}

std::optional<std::set<int>> level_filter_for(const RunConfig& cfg, int depth) {
  const int first = first_active_level(cfg, depth);
  if (first <= 1) return std::nullopt;
  std::set<int> s;
  for (int l = first; l <= depth; ++l) s.insert(l);
  return s;
}

SolveOutcome run_solver(const std::string& solver, const Problem& p, const RunConfig& cfg) {
  SolveOutcome out;
  out.solver = solver;
  const auto t0 = Clock::now();
  const CVector b_mesh = rhs(*p.spec, p.excitation);
  AssemblyOptions ao;
  ao.tol = cfg.aca_tol;
  ao.eta = cfg.eta;
  ao.symmetric = cfg.symmetric;
  ao.probe_seed = cfg.seed;
  if (solver == "pss") {
    ao.level_filter = level_filter_for(cfg, p.tree.depth());
    const HMatrix h = assemble_hmatrix(*p.spec, p.tree, ao);
    const ScaledSystem s = compute_scaling(h, p.tree.to_tree_order(b_mesh), scaling_mode(cfg));
    const FactorChain chain = build_factor_chain(s, h, make_pss_config(cfg, p.tree.depth()));
    PssResult r = solve(chain, s, h);
    out.x = p.tree.to_mesh_order(r.x);
    out.matvec_count = r.report.matvec_level_calls;
    out.pss = std::move(r.report);
    out.memory = h.memory_report();
  } else if (solver == "gmres") {
    const HMatrix h = assemble_hmatrix(*p.spec, p.tree, ao);
    std::size_t calls = 0;
    const LinearOp a = [&](const CVector& v) {
      ++calls;
      return h.matvec(v);
    };
    GmresOptions go{cfg.gmres_tol, cfg.gmres_restart, cfg.gmres_maxit};
    GmresResult r = gmres(a, p.tree.to_tree_order(b_mesh), go);
    out.x = p.tree.to_mesh_order(r.x);
    out.matvec_count = calls;
    out.gmres = std::move(r.report);
    out.memory = h.memory_report();
  } else if (solver == "lu") {
    LuResult r = lu_solve(assemble_dense(*p.spec), b_mesh);
    out.x = r.x;
    out.lu = std::move(r);
  } else {
    throw Error("unknown solver '" + solver + "'");
  }
  out.seconds = since(t0);
  out.rcs = bistatic_rcs(*p.spec, out.x, observation_angles(cfg), solver);
  return out;
}

std::string environment_header() {
  std::ostringstream s;
  const std::time_t now = std::time(nullptr);
  char date[32];
  std::strftime(date, sizeof date, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  s << "# hpss run " << date << "\n";
#if defined(__VERSION__)
  s << "# compiler " << __VERSION__ << "\n";
#endif
  s << "# simd " << simd::isa_name(simd::active_isa()) << "\n";
  s << "# workers " << worker_count() << " (hardware " << std::thread::hardware_concurrency() << ")\n";
  return s.str();
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("slope: need two or more points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw Error("slope: values must be positive");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

BenchRow bench_size(const RunConfig& base, std::size_t n) {
  RunConfig cfg = base;
  cfg.geometry = "strip";
  cfg.length = static_cast<double>(n) / cfg.density;
  const Problem p = build_problem(cfg);
  BenchRow row;
  row.n = p.mesh->size();
  row.depth = p.tree.depth();
  AssemblyOptions full;
  full.tol = cfg.aca_tol;
  full.eta = cfg.eta;
  AssemblyOptions leaf = full;
  leaf.level_filter = std::set<int>{p.tree.depth()};
  const int reps = std::max(1, cfg.repeats);
  row.full_assembly_s = row.leaf_assembly_s = row.matvec_s = 1e300;
  std::optional<HMatrix> hf;
  for (int r = 0; r < reps; ++r) {
    auto t0 = Clock::now();
    hf = assemble_hmatrix(*p.spec, p.tree, full);
    row.full_assembly_s = std::min(row.full_assembly_s, since(t0));
    t0 = Clock::now();
    const HMatrix hl = assemble_hmatrix(*p.spec, p.tree, leaf);
    row.leaf_assembly_s = std::min(row.leaf_assembly_s, since(t0));
    row.leaf_entries = hl.memory_report().total_entries;
  }
  row.full_entries = hf->memory_report().total_entries;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> g;
  CVector x(static_cast<Eigen::Index>(row.n));
  for (auto& v : x) v = Complex(g(rng), g(rng));
  // Several products per sample so short matvecs stay above timer noise.
  const int inner = std::max(1, static_cast<int>(20000 / std::max<std::size_t>(row.n, 1)));
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    for (int i = 0; i < inner; ++i) x = hf->matvec(x).normalized();
    row.matvec_s = std::min(row.matvec_s, since(t0) / inner);
  }
  return row;
}

namespace {

int cmd_solve(const RunConfig& cfg, const fs::path& dir, std::ostream& log) {
  const Problem p = build_problem(cfg);
  write_common(p, cfg, dir);
  const SolveOutcome o = run_solver(cfg.solver, p, cfg);
  {
    auto out = open_out(dir / ("rcs_" + o.solver + ".csv"));
    write_rcs_csv(o.rcs, out);
  }
  if (o.memory) {
    auto out = open_out(dir / "memory.csv");
    write_memory_csv(*o.memory, out);
  }
  auto rep = open_out(dir / "report.txt");
  rep << environment_header() << format_config(cfg);
  rep << "n " << p.mesh->size() << "\ndepth " << p.tree.depth() << "\nleaf_size " << p.tree.leaf_size()
      << "\nsolver " << o.solver << "\nseconds " << fmt("%.6g", o.seconds) << "\n";
  if (o.pss) {
    write_pss_report(*o.pss, rep);
    auto out = open_out(dir / "pss_levels.csv");
    write_pss_levels_csv(*o.pss, out);
  }
  if (o.gmres) {
    rep << "gmres_iterations " << o.gmres->iterations << "\ngmres_converged " << o.gmres->converged
        << "\ngmres_residual " << fmt("%.6g", o.gmres->final_residual) << "\n";
    auto out = open_out(dir / "gmres.csv");
    write_iterative_csv(*o.gmres, out);
  }
  if (o.lu) {
    rep << "lu_residual " << fmt("%.6g", o.lu->residual) << "\nlu_rcond " << fmt("%.6g", o.lu->rcond) << "\n";
    if (!o.lu->warning.empty()) rep << "warning: " << o.lu->warning << "\n";
  }
  log << "solve " << o.solver << ": N=" << p.mesh->size() << " depth=" << p.tree.depth()
      << " seconds=" << fmt("%.3f", o.seconds) << " matvecs=" << o.matvec_count << "\n";
  bool ok = true;
  if (o.gmres && !o.gmres->converged) {
    log << "FAIL gmres did not converge\n";
    ok = false;
  }
  return ok ? 0 : 1;
}

int cmd_compare(const RunConfig& cfg, const fs::path& dir, std::ostream& log) {
  const Problem p = build_problem(cfg);
  write_common(p, cfg, dir);
  std::vector<SolveOutcome> runs;
  for (const std::string& s : cfg.solvers) runs.push_back(run_solver(s, p, cfg));
  std::vector<RcsCurve> curves;
  for (const auto& r : runs) curves.push_back(r.rcs);
  const auto angles = observation_angles(cfg);
  if (cfg.geometry == "circle")
    curves.push_back(series_pec_cylinder(cfg.radius, angles, p.excitation.angle));
  else if (cfg.geometry == "disk" && cfg.eps_r_imag == 0.0)
    curves.push_back(series_dielectric_cylinder(cfg.radius, cfg.eps_r, angles, p.excitation.angle));
  for (const RcsCurve& c : curves) {
    auto out = open_out(dir / ("rcs_" + c.label + ".csv"));
    write_rcs_csv(c, out);
  }
  auto cmp = open_out(dir / "comparison.csv");
  cmp << "a,b,rms_db\n";
  std::vector<Check> checks;
  for (std::size_t i = 0; i < curves.size(); ++i)
    for (std::size_t j = i + 1; j < curves.size(); ++j) {
      const double rms = rcs_rms_error(curves[i], curves[j]);
      cmp << curves[i].label << ',' << curves[j].label << ',' << fmt("%.6f", rms) << "\n";
      if (cfg.assert_rms_db >= 0.0)
        checks.push_back({curves[i].label + " vs " + curves[j].label, rms <= cfg.assert_rms_db,
                          fmt("%.4f dB", rms) + fmt(" (bound %.4g)", cfg.assert_rms_db)});
    }
  auto sum = open_out(dir / "summary.txt");
  sum << environment_header() << format_config(cfg) << "n " << p.mesh->size() << "\n";
  for (const auto& r : runs) {
    sum << r.solver << " seconds " << fmt("%.6g", r.seconds) << " matvecs " << r.matvec_count;
    if (r.gmres) sum << " iterations " << r.gmres->iterations;
    if (r.pss) sum << " outer_iterations " << r.pss->outer_iterations;
    sum << "\n";
    log << r.solver << ": seconds=" << fmt("%.3f", r.seconds) << " matvecs=" << r.matvec_count << "\n";
  }
  for (std::size_t i = 0; i < curves.size(); ++i)
    for (std::size_t j = i + 1; j < curves.size(); ++j) {
      const std::string line = "rms " + curves[i].label + " vs " + curves[j].label + " " +
                               fmt("%.4f dB", rcs_rms_error(curves[i], curves[j])) + "\n";
      sum << line;
      log << line;
    }
  report_checks(checks, log, sum);
  return all_pass(checks) ? 0 : 1;
}

int cmd_bench(const RunConfig& cfg, const fs::path& dir, std::ostream& log) {
  std::vector<BenchRow> rows;
  for (int n : cfg.sizes) {
    rows.push_back(bench_size(cfg, static_cast<std::size_t>(n)));
    const BenchRow& r = rows.back();
    log << "n=" << r.n << " depth=" << r.depth << " full_entries=" << r.full_entries
        << " leaf_entries=" << r.leaf_entries << " full_s=" << fmt("%.4f", r.full_assembly_s)
        << " leaf_s=" << fmt("%.4f", r.leaf_assembly_s) << " matvec_s=" << fmt("%.3e", r.matvec_s) << "\n";
  }
  {
    auto out = open_out(dir / "bench.csv");
    out << "n,depth,full_entries,leaf_entries,dense_entries\n";
    for (const auto& r : rows)
      out << r.n << ',' << r.depth << ',' << r.full_entries << ',' << r.leaf_entries << ',' << r.n * r.n << "\n";
    auto t = open_out(dir / "bench_timing.csv");
    t << "n,full_assembly_s,leaf_assembly_s,matvec_s\n";
    for (const auto& r : rows)
      t << r.n << ',' << fmt("%.6e", r.full_assembly_s) << ',' << fmt("%.6e", r.leaf_assembly_s) << ','
        << fmt("%.6e", r.matvec_s) << "\n";
  }
  std::vector<double> n, e, mv;
  for (const auto& r : rows) {
    n.push_back(static_cast<double>(r.n));
    e.push_back(static_cast<double>(r.full_entries));
    mv.push_back(r.matvec_s);
  }
  const double se = loglog_slope(n, e);
  const double sm = loglog_slope(n, mv);
  std::vector<Check> checks;
  checks.push_back({"entries slope", se <= cfg.assert_slope, fmt("%.3f", se) + fmt(" (bound %.3g)", cfg.assert_slope)});
  checks.push_back({"matvec slope", sm <= cfg.assert_slope, fmt("%.3f", sm) + fmt(" (bound %.3g)", cfg.assert_slope)});
  for (const auto& r : rows) {
    const std::string tag = "n=" + std::to_string(r.n);
    const double n2 = static_cast<double>(r.n) * static_cast<double>(r.n);
    checks.push_back({tag + " stores < N^2", r.full_entries < n2 && r.leaf_entries < n2,
                      std::to_string(r.full_entries) + " full, " + std::to_string(r.leaf_entries) + " leaf"});
    if (r.n >= 2048) {
      checks.push_back({tag + " leaf-only stores fewer entries", r.leaf_entries < r.full_entries,
                        std::to_string(r.leaf_entries) + " < " + std::to_string(r.full_entries)});
      checks.push_back({tag + " leaf-only assembles faster", r.leaf_assembly_s < r.full_assembly_s,
                        fmt("%.4f s", r.leaf_assembly_s) + fmt(" < %.4f s", r.full_assembly_s)});
    }
  }
  auto sum = open_out(dir / "summary.txt");
  sum << environment_header() << format_config(cfg);
  sum << "entries_slope " << fmt("%.4f", se) << "\nmatvec_slope " << fmt("%.4f", sm) << "\n";
  log << "fitted slopes: entries " << fmt("%.3f", se) << ", matvec " << fmt("%.3f", sm) << "\n";
  report_checks(checks, log, sum);
  return all_pass(checks) ? 0 : 1;
}

int cmd_oracle_check(const RunConfig& cfg, const fs::path& dir, std::ostream& log) {
  std::vector<Check> checks;
  const auto angles = observation_angles(cfg);
  {
    const Mesh m = discretize_circle(cfg.radius, std::max(cfg.density, 20));
    const KernelSpec ks(m);
    const LuResult lu = lu_solve(assemble_dense(ks), rhs(ks, {0.0, 1.0}));
    const double rms = rcs_rms_error(bistatic_rcs(ks, lu.x, angles), series_pec_cylinder(cfg.radius, angles, 0.0));
    checks.push_back({"PEC cylinder LU vs series", rms <= 0.3, fmt("%.4f dB (bound 0.3)", rms)});
    checks.push_back({"kernel reciprocity", reciprocity_probe(ks, cfg.seed), "16 sampled pairs"});
  }
  {
    DiskOptions o;
    o.match_area = true;
    const Mesh m = discretize_disk(0.3, 10, 2.0, o);
    const KernelSpec ks(m);
    const LuResult lu = lu_solve(assemble_dense(ks), rhs(ks, {0.0, 1.0}));
    const double rms =
        rcs_rms_error(bistatic_rcs(ks, lu.x, angles), series_dielectric_cylinder(0.3, 2.0, angles, 0.0));
    checks.push_back({"dielectric disk LU vs series", rms <= 0.75, fmt("%.4f dB (bound 0.75)", rms)});
  }
  {
    const Mesh m = discretize_strip(4.0, 40);
    const KernelSpec ks(m);
    const ClusterTree tree = build_cluster_tree(m, 40);
    AssemblyOptions ao;
    ao.tol = cfg.aca_tol;
    const HMatrix h = assemble_hmatrix(ks, tree, ao);
    const CVector b = tree.to_tree_order(rhs(ks, {kPi / 2, 1.0}));
    const LuResult lu = lu_solve(assemble_dense(ks, &tree), b);
    PssConfig pc;
    pc.series_order = 8;
    const PssResult r = solve(compute_scaling(h, b), h, pc);
    const double err = (r.x - lu.x).norm() / lu.x.norm();
    const double bound = std::max(1e-6, 10 * cfg.aca_tol);
    checks.push_back({"PSS order 8 vs LU", err <= bound, fmt("%.3e", err) + fmt(" (bound %.3g)", bound)});

    std::mt19937_64 rng(cfg.seed);
    double worst = 0.0;
    std::size_t sampled = 0;
    for (int l = 1; l <= h.depth(); ++l)
      for (const LowRankBlock& blk : h.far_blocks(l)) {
        CMatrix z(static_cast<Eigen::Index>(blk.rows.size()), static_cast<Eigen::Index>(blk.cols.size()));
        for (Eigen::Index i = 0; i < z.rows(); ++i)
          for (Eigen::Index j = 0; j < z.cols(); ++j)
            z(i, j) = ks.entry(tree.permutation()[blk.rows.begin + static_cast<std::size_t>(i)],
                               tree.permutation()[blk.cols.begin + static_cast<std::size_t>(j)]);
        worst = std::max(worst, (z - blk.dense()).norm() / z.norm());
        ++sampled;
      }
    checks.push_back({"far blocks vs dense", worst <= 3 * cfg.aca_tol,
                      std::to_string(sampled) + " blocks, worst " + fmt("%.3e", worst) +
                          fmt(" (bound %.3g)", 3 * cfg.aca_tol)});
  }
  auto out = open_out(dir / "oracle.txt");
  out << environment_header();
  report_checks(checks, log, out);
  return all_pass(checks) ? 0 : 1;
}

}  // namespace

int run_command(const std::string& command, const RunConfig& cfg, std::ostream& log) {
  const fs::path dir(cfg.output);
  fs::create_directories(dir);
  if (command == "solve") return cmd_solve(cfg, dir, log);
  if (command == "compare") return cmd_compare(cfg, dir, log);
  if (command == "bench") return cmd_bench(cfg, dir, log);
  if (command == "oracle-check") return cmd_oracle_check(cfg, dir, log);
  throw Error("unknown command '" + command + "'");
}

}  // namespace hpss
