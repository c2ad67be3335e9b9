#include "hpss/config.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <sstream>

namespace hpss {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw Error("config: " + key + " expects a number, got '" + v + "'");
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    throw Error("config: " + key + " expects an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw Error("config: " + key + " expects true/false, got '" + v + "'");
}

std::string one_of(const std::string& key, const std::string& v, std::initializer_list<const char*> opts) {
  for (const char* o : opts)
    if (v == o) return v;
  std::string msg = "config: " + key + " must be one of";
  for (const char* o : opts) msg += std::string(" ") + o;
  throw Error(msg + ", got '" + v + "'");
}

std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
  return s;
}

struct Field {
  const char* key;
  const char* help;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define HPSS_DOUBLE(name, help)                                                   \
  Field{#name, help, [](RunConfig& c, const std::string& v) { c.name = to_double(#name, v); }, \
        [](const RunConfig& c) { return num(c.name); }}
#define HPSS_INT(name, help)                                                                       \
  Field{#name, help,                                                                               \
        [](RunConfig& c, const std::string& v) { c.name = static_cast<decltype(c.name)>(to_int(#name, v)); }, \
        [](const RunConfig& c) { return std::to_string(c.name); }}
#define HPSS_BOOL(name, help)                                                                 \
  Field{#name, help, [](RunConfig& c, const std::string& v) { c.name = to_bool(#name, v); }, \
        [](const RunConfig& c) { return std::string(c.name ? "true" : "false"); }}
#define HPSS_STRING(name, help)                                                      \
  Field{#name, help, [](RunConfig& c, const std::string& v) { c.name = v; }, \
        [](const RunConfig& c) { return c.name; }}
#define HPSS_CHOICE(name, help, ...)                                                                 \
  Field{#name, help, [](RunConfig& c, const std::string& v) { c.name = one_of(#name, v, {__VA_ARGS__}); }, \
        [](const RunConfig& c) { return c.name; }}

const std::vector<Field>& fields() {
  static const std::vector<Field> f{
      HPSS_CHOICE(geometry, "strip, circle, disk or mesh", "strip", "circle", "disk", "mesh"),
      HPSS_DOUBLE(length, "strip length in wavelengths"),
      HPSS_DOUBLE(radius, "circle or disk radius in wavelengths"),
      HPSS_DOUBLE(eps_r, "disk relative permittivity, real part"),
      HPSS_DOUBLE(eps_r_imag, "disk relative permittivity, imaginary part"),
      HPSS_INT(density, "elements or cells per wavelength (>= 10)"),
      HPSS_BOOL(match_area, "shrink disk cells until the rasterized area matches"),
      HPSS_STRING(mesh_file, "mesh CSV read when geometry=mesh"),
      HPSS_INT(leaf_size, "maximum leaf cluster size, 0 for automatic"),
      HPSS_DOUBLE(eta, "admissibility parameter"),
      HPSS_DOUBLE(aca_tol, "ACA and recompression tolerance"),
      HPSS_BOOL(symmetric, "store one of each mirrored block pair"),
      HPSS_CHOICE(solver, "solver for the solve command", "pss", "gmres", "lu"),
      Field{"solvers", "comma-separated solvers for compare",
            [](RunConfig& c, const std::string& v) {
              auto list = split(v);
              if (list.empty()) throw Error("config: solvers must not be empty");
              for (const auto& s : list) one_of("solvers", s, {"pss", "gmres", "lu"});
              c.solvers = list;
            },
            [](const RunConfig& c) { return join(c.solvers); }},
      Field{"levels", "all, leaf, or the first active level",
            [](RunConfig& c, const std::string& v) {
              if (v != "all" && v != "leaf" && to_int("levels", v) < 1)
                throw Error("config: levels must be all, leaf or a level >= 1");
              c.levels = v;
            },
            [](const RunConfig& c) { return c.levels; }},
      HPSS_INT(series_order, "power-series truncation order (>= 1)"),
      HPSS_CHOICE(scaling, "alpha construction", "near-field", "block-diagonal"),
      HPSS_CHOICE(norm_mode, "factor norm estimator", "spectral-radius", "two-norm", "frobenius-proxy"),
      HPSS_DOUBLE(gmres_tol, "GMRES relative residual tolerance"),
      HPSS_INT(gmres_restart, "GMRES restart length"),
      HPSS_INT(gmres_maxit, "GMRES iteration cap"),
      HPSS_DOUBLE(incidence_deg, "direction the plane wave arrives from, degrees"),
      HPSS_DOUBLE(angle_start_deg, "first observation angle, degrees"),
      HPSS_DOUBLE(angle_stop_deg, "last observation angle, degrees"),
      HPSS_INT(angle_count, "number of observation angles"),
      Field{"sizes", "comma-separated unknown counts for bench",
            [](RunConfig& c, const std::string& v) {
              std::vector<int> out;
              for (const auto& s : split(v)) {
                const long long n = to_int("sizes", s);
                if (n < 2) throw Error("config: sizes entries must be >= 2");
                out.push_back(static_cast<int>(n));
              }
              if (out.size() < 2) throw Error("config: sizes needs at least two entries");
              c.sizes = out;
            },
            [](const RunConfig& c) {
              std::vector<std::string> s;
              for (int n : c.sizes) s.push_back(std::to_string(n));
              return join(s);
            }},
      HPSS_INT(repeats, "timing repeats in bench (minimum is kept)"),
      HPSS_DOUBLE(assert_rms_db, "fail compare when a pairwise RMS exceeds this, negative disables"),
      HPSS_DOUBLE(assert_slope, "fail bench when a fitted log-log slope exceeds this"),
      HPSS_STRING(output, "output directory"),
      HPSS_BOOL(export_dense, "also write the dense matrix as dense.bin"),
      HPSS_INT(seed, "seed for randomized probes"),
  };
  return f;
}

#undef HPSS_DOUBLE
#undef HPSS_INT
#undef HPSS_BOOL
#undef HPSS_STRING
#undef HPSS_CHOICE

const Field* find_field(std::string key) {
  for (char& ch : key)
    if (ch == '-') ch = '_';
  for (const Field& f : fields())
    if (key == f.key) return &f;
  return nullptr;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const Field& f : fields()) k.emplace_back(f.key);
    return k;
  }();
  return keys;
}

std::string config_key_help(const std::string& key) {
  const Field* f = find_field(key);
  return f ? f->help : "";
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  const Field* f = find_field(trim(key));
  if (!f) throw Error("config: unknown key '" + trim(key) + "'; valid keys: " + join(config_keys()));
  f->set(cfg, trim(value));
}

RunConfig parse_config(std::istream& in, RunConfig cfg) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("config line " + std::to_string(lineno) + ": expected key=value");
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
  return cfg;
}

RunConfig parse_config(std::istream& in, const std::vector<std::pair<std::string, std::string>>& overrides) {
  RunConfig cfg = parse_config(in, RunConfig{});
  for (const auto& [k, v] : overrides) apply_setting(cfg, k, v);
  return cfg;
}

std::string format_config(const RunConfig& cfg) {
  std::string s;
  for (const Field& f : fields()) s += std::string(f.key) + "=" + f.get(cfg) + "\n";
  return s;
}

}  // namespace hpss
