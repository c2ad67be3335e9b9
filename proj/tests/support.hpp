#pragma once

// Test-side oracles and random generators. Everything here is computed
// independently of the library: Bessel functions come from Boost.Math,
// integrals from adaptive quadrature, dense solves from Householder QR.

#include "hpss/core.hpp"
#include "hpss/geometry.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/bessel_prime.hpp>

#include <Eigen/QR>

#include <cmath>
#include <random>

namespace oracle {

using hpss::Complex;
using hpss::CMatrix;
using hpss::CVector;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kEta0 = 376.730313668;

inline double jn(int n, double x) { return boost::math::cyl_bessel_j(n, x); }
inline double yn(int n, double x) { return boost::math::cyl_neumann(n, x); }
inline Complex h2(int n, double x) { return {jn(n, x), -yn(n, x)}; }

template <class F>
Complex integrate_tanh_sinh(F&& f, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> q;
  const double re = q.integrate([&](double t) { return f(t).real(); }, a, b);
  const double im = q.integrate([&](double t) { return f(t).imag(); }, a, b);
  return {re, im};
}

/// (k eta / 4) * integral of H0^(2)(k |t|) over a segment of length d.
inline Complex surface_self_term(double k, double d) {
  const Complex half = integrate_tanh_sinh([&](double t) { return h2(0, k * t); }, 0.0, 0.5 * d);
  return k * kEta0 / 4.0 * 2.0 * half;
}

/// (k eta / 4) * integral of H0^(2)(k |c - r'|) over the disk of radius a at
/// the origin; c outside the disk. Plain tensor Gauss in polar coordinates.
inline Complex disk_integral(double k, double a, const Eigen::Vector2d& c) {
  using G = boost::math::quadrature::gauss<double, 40>;
  Complex acc = 0.0;
  const auto radial = [&](double r) {
    Complex s = 0.0;
    for (std::size_t i = 0; i < G::abscissa().size(); ++i) {
      const double x = G::abscissa()[i];
      const double w = G::weights()[i];
      for (double sgn : {-1.0, 1.0}) {
        if (x == 0.0 && sgn > 0) continue;
        const double th = kPi * (1.0 + sgn * x);
        const Eigen::Vector2d p(r * std::cos(th), r * std::sin(th));
        s += w * kPi * h2(0, k * (c - p).norm());
      }
    }
    return s * r;
  };
  for (std::size_t i = 0; i < G::abscissa().size(); ++i) {
    const double x = G::abscissa()[i];
    const double w = G::weights()[i];
    for (double sgn : {-1.0, 1.0}) {
      if (x == 0.0 && sgn > 0) continue;
      const double r = 0.5 * a * (1.0 + sgn * x);
      acc += 0.5 * a * w * radial(r);
    }
  }
  return k * kEta0 / 4.0 * acc;
}

/// (k eta / 4) int_disk H0^(2)(k r) dA, self cell integral, by quadrature.
inline Complex disk_self_integral(double k, double a) {
  const Complex radial = integrate_tanh_sinh([&](double r) { return 2.0 * kPi * r * h2(0, k * r); }, 0.0, a);
  return k * kEta0 / 4.0 * radial;
}

inline CVector dense_solve(const CMatrix& a, const CVector& b) { return a.householderQr().solve(b); }

inline double rel_error(const CVector& x, const CVector& ref) { return (x - ref).norm() / ref.norm(); }

/// Echo width series summed over n = -M..M term by term, sigma / lambda.
inline double pec_series_sigma(double ka, double psi, int m) {
  Complex s = 0.0;
  for (int n = -m; n <= m; ++n) {
    const int an = std::abs(n);
    const double sign = (an % 2) ? -1.0 : 1.0;  // J_-n = (-1)^n J_n, same for H
    const Complex c = (sign * jn(an, ka)) / (sign * h2(an, ka));
    s += c * std::polar(1.0, n * psi);
  }
  return 2.0 / kPi * std::norm(s);
}

inline double dielectric_series_sigma(double ka, double eps, double psi, int m) {
  const double nr = std::sqrt(eps);
  const double k1a = nr * ka;
  Complex s = 0.0;
  for (int n = -m; n <= m; ++n) {
    const int an = std::abs(n);
    const double jp1 = boost::math::cyl_bessel_j_prime(an, k1a);
    const double jp0 = boost::math::cyl_bessel_j_prime(an, ka);
    const Complex hp0{jp0, -boost::math::cyl_neumann_prime(an, ka)};
    const Complex c = -(nr * jp1 * jn(an, ka) - jn(an, k1a) * jp0) / (nr * jp1 * h2(an, ka) - jn(an, k1a) * hp0);
    s += c * std::polar(1.0, n * psi);
  }
  return 2.0 / kPi * std::norm(s);
}

inline double to_db(double v) { return v > 0 ? std::max(-200.0, 10.0 * std::log10(v)) : -200.0; }

}  // namespace oracle

namespace gen {

/// Hand-rolled generator for property tests; every case is reproducible from
/// the seed printed on failure.
struct Gen {
  explicit Gen(std::uint64_t seed) : seed(seed), rng(seed) {}

  double real(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }
  bool coin() { return integer(0, 1) == 1; }
  hpss::Complex complex() { return {normal(), normal()}; }
  double normal() { return std::normal_distribution<double>()(rng); }

  hpss::CVector vector(std::size_t n) {
    hpss::CVector v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = complex();
    return v;
  }
  hpss::CMatrix matrix(std::size_t m, std::size_t n) {
    hpss::CMatrix a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = complex();
    return a;
  }
  /// Strip of 0.5..4 wavelengths at 10..40 elements per wavelength.
  hpss::Mesh strip() { return hpss::discretize_strip(real(0.5, 4.0), integer(10, 40)); }
  /// Random point cloud surface mesh, extents small enough for the density rule.
  hpss::Mesh cloud(std::size_t n, double spread) {
    hpss::Mesh m;
    m.kind = hpss::MeshKind::Surface;
    for (std::size_t i = 0; i < n; ++i) m.elements.push_back({hpss::Point(real(-spread, spread), real(-spread, spread)), 0.05});
    return m;
  }

  std::uint64_t seed;
  std::mt19937_64 rng;
};

}  // namespace gen
