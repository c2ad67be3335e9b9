#include "hpss/postproc.hpp"

#include <cmath>
#include <cstdio>

namespace hpss {

namespace {

double to_db(double sigma_over_lambda) {
  if (!(sigma_over_lambda > 0.0)) return kRcsFloorDb;
  return std::max(kRcsFloorDb, 10.0 * std::log10(sigma_over_lambda));
}

void check_grid(const std::vector<double>& angles) {
  for (std::size_t i = 0; i < angles.size(); ++i) {
    if (!std::isfinite(angles[i])) throw Error("rcs: non-finite angle");
    if (i && !(angles[i] > angles[i - 1])) throw Error("rcs: angles must be strictly increasing");
  }
}

double bessel_j(int n, double x) {
  const double v = std::cyl_bessel_j(static_cast<double>(std::abs(n)), x);
  return (n < 0 && (n % 2)) ? -v : v;
}

double bessel_y(int n, double x) {
  const double v = std::cyl_neumann(static_cast<double>(std::abs(n)), x);
  return (n < 0 && (n % 2)) ? -v : v;
}

Complex h2(int n, double x) { return {bessel_j(n, x), -bessel_y(n, x)}; }
double dj(int n, double x) { return 0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x)); }
Complex dh2(int n, double x) { return 0.5 * (h2(n - 1, x) - h2(n + 1, x)); }

// sigma / lambda = (2 / pi) |sum_n c_n exp(j n (phi - phi_i - pi))|^2, c_{-n} = c_n
RcsCurve series_curve(const std::vector<Complex>& c, const std::vector<double>& angles,
                      double incidence, std::string label) {
  check_grid(angles);
  RcsCurve out;
  out.angles = angles;
  out.label = std::move(label);
  for (double phi : angles) {
    const double psi = phi - incidence - kPi;
    Complex s = c[0];
    for (std::size_t n = 1; n < c.size(); ++n) s += 2.0 * c[n] * std::cos(static_cast<double>(n) * psi);
    out.sigma_db.push_back(to_db(2.0 / kPi * std::norm(s)));
  }
  return out;
}

}  // namespace

std::vector<double> angle_grid_deg(double start_deg, double stop_deg, int count) {
  if (count < 2 || !(stop_deg > start_deg)) throw Error("angle grid: need count >= 2 and stop > start");
  std::vector<double> a(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    a[static_cast<std::size_t>(i)] = (start_deg + (stop_deg - start_deg) * i / (count - 1)) * kPi / 180.0;
  return a;
}

std::vector<Complex> far_field(const KernelSpec& spec, const CVector& current,
                               const std::vector<double>& angles) {
  if (static_cast<std::size_t>(current.size()) != spec.size())
    throw Error("rcs: current length does not match the mesh");
  const double k = spec.k0();
  const auto& el = spec.mesh().elements;
  std::vector<Complex> f;
  f.reserve(angles.size());
  for (double phi : angles) {
    const Point dir(std::cos(phi), std::sin(phi));
    Complex s = 0.0;
    for (std::size_t j = 0; j < el.size(); ++j)
      s += current(static_cast<Eigen::Index>(j)) * spec.radiation_weight(j) *
           std::polar(1.0, k * dir.dot(el[j].center));
    f.push_back(s);
  }
  return f;
}

RcsCurve bistatic_rcs(const KernelSpec& spec, const CVector& current,
                      const std::vector<double>& angles, std::string label) {
  check_grid(angles);
  const auto f = far_field(spec, current, angles);
  const double k = spec.k0();
  const double lambda = spec.mesh().wavelength;
  RcsCurve out;
  out.angles = angles;
  out.label = std::move(label);
  for (const Complex& v : f) out.sigma_db.push_back(to_db(k * kEta0 * kEta0 / 4.0 * std::norm(v) / lambda));
  return out;
}

RcsCurve series_pec_cylinder(double radius, const std::vector<double>& angles, double incidence,
                             int extra_terms) {
  if (!(radius > 0.0)) throw Error("series: radius must be positive");
  const double ka = 2.0 * kPi * radius;
  const int m = static_cast<int>(std::ceil(ka)) + extra_terms;
  std::vector<Complex> c;
  for (int n = 0; n <= m; ++n) c.push_back(bessel_j(n, ka) / h2(n, ka));
  return series_curve(c, angles, incidence, "series-pec");
}

RcsCurve series_dielectric_cylinder(double radius, Complex eps_r, const std::vector<double>& angles,
                                    double incidence, int extra_terms) {
  if (!(radius > 0.0)) throw Error("series: radius must be positive");
  if (eps_r.imag() != 0.0) throw Error("series: only lossless (real) permittivity is supported");
  if (eps_r.real() < 1.0) throw Error("series: Re(eps_r) must be >= 1");
  const double n_r = std::sqrt(eps_r.real());
  const double ka = 2.0 * kPi * radius;
  const double k1a = n_r * ka;
  const int m = static_cast<int>(std::ceil(k1a)) + extra_terms;
  std::vector<Complex> c;
  for (int n = 0; n <= m; ++n) {
    const double num = n_r * dj(n, k1a) * bessel_j(n, ka) - bessel_j(n, k1a) * dj(n, ka);
    const Complex den = n_r * dj(n, k1a) * h2(n, ka) - bessel_j(n, k1a) * dh2(n, ka);
    c.push_back(-num / den);
  }
  return series_curve(c, angles, incidence, "series-dielectric");
}

double rcs_rms_error(const RcsCurve& a, const RcsCurve& b) {
  if (a.angles != b.angles || a.sigma_db.size() != b.sigma_db.size())
    throw Error("rcs_rms_error: angle grids differ");
  if (a.sigma_db.empty()) throw Error("rcs_rms_error: empty curves");
  double s = 0.0;
  for (std::size_t i = 0; i < a.sigma_db.size(); ++i) {
    const double d = a.sigma_db[i] - b.sigma_db[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(a.sigma_db.size()));
}

void write_rcs_csv(const RcsCurve& curve, std::ostream& out) {
  out << "angle_deg,sigma_dB\n";
  char buf[64];
  for (std::size_t i = 0; i < curve.angles.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f\n", curve.angles[i] * 180.0 / kPi, curve.sigma_db[i]);
    out << buf;
  }
}

}  // namespace hpss
