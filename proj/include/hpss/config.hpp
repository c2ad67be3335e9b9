#pragma once

#include "hpss/core.hpp"

#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <vector>

namespace hpss {

struct RunConfig {
  // geometry
  std::string geometry = "strip";  // strip | circle | disk | mesh
  double length = 4.0;             // strip length, wavelengths
  double radius = 1.0;             // circle or disk radius, wavelengths
  double eps_r = 2.0;              // disk permittivity (real part)
  double eps_r_imag = 0.0;
  int density = 20;  // elements (surface) or cells (volume) per wavelength
  bool match_area = true;
  std::string mesh_file;
  // hierarchy
  int leaf_size = 0;  // 0 picks about one wavelength of elements per leaf
  double eta = 1.0;
  double aca_tol = 1e-3;
  bool symmetric = false;
  // solvers
  std::string solver = "pss";                            // solve: pss | gmres | lu
  std::vector<std::string> solvers{"pss", "gmres", "lu"};  // compare
  std::string levels = "all";                            // all | leaf | first active level
  int series_order = 2;
  std::string scaling = "near-field";  // near-field | block-diagonal
  std::string norm_mode = "spectral-radius";
  double gmres_tol = 1e-6;
  int gmres_restart = 50;
  int gmres_maxit = 2000;
  // excitation and observation
  double incidence_deg = 90.0;
  double angle_start_deg = 0.0;
  double angle_stop_deg = 180.0;
  int angle_count = 181;
  // bench
  std::vector<int> sizes{512, 1024, 2048, 4096};
  int repeats = 3;
  // assertions; a negative bound disables the check
  double assert_rms_db = -1.0;
  double assert_slope = 1.35;
  // misc
  std::string output = "hpss_out";
  bool export_dense = false;  // write dense.bin (N <= 4096)
  std::uint64_t seed = 1;
};

/// Valid keys, in declaration order.
const std::vector<std::string>& config_keys();
/// Help text for a key.
std::string config_key_help(const std::string& key);

/// Sets one field. Dashes in the key read as underscores. Unknown keys and
/// malformed values throw; the message for an unknown key lists the valid ones.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Plain key=value lines; '#' starts a comment, blank lines are ignored.
RunConfig parse_config(std::istream& in, RunConfig base = {});
/// File settings first, then the overrides in order (flags win).
RunConfig parse_config(std::istream& in, const std::vector<std::pair<std::string, std::string>>& overrides);

/// key=value lines for every field, in key order.
std::string format_config(const RunConfig& cfg);

}  // namespace hpss
