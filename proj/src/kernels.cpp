#include "hpss/kernels.hpp"

#include "hpss/parallel.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>
#include <string>

namespace hpss {
namespace {

// exp(Euler-Mascheroni)
constexpr double kGamma = 1.781072417990198;

// H0^(2)(x) ~ 1 - j (2/pi) ln(gamma x / 2) as x -> 0.
// H0^(2) through the x^2 terms of its small-argument expansion.
Complex hankel_small(double x) {
  const double l = std::log(kGamma * x / 2.0), q = 0.25 * x * x;
  return {1.0 - q, -(2.0 / kPi) * (l * (1.0 - q) + q)};
}

// Integral of H0^(2)(k t) over t in [-d/2, d/2]: the small-argument expansion
// is integrated in closed form, the O(x^4 log x) remainder by 3-point
// Gauss-Legendre on each half.
Complex segment_self_integral(double k, double d) {
  const double h = 0.5 * d;
  const double l = std::log(kGamma * k * h / 2.0);
  const double c = k * k * h * h * h / 12.0;
  const Complex analytic{h - c, -(2.0 / kPi) * (h * (l - 1.0) - c * (l - 1.0 / 3.0) + c)};
  static constexpr double nodes[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
  static constexpr double weights[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  Complex remainder{};
  for (int q = 0; q < 3; ++q) {
    const double t = 0.5 * h * (nodes[q] + 1.0);
    remainder += 0.5 * h * weights[q] * (hankel2(0, k * t) - hankel_small(k * t));
  }
  return 2.0 * (analytic + remainder);
}

}  // namespace

Complex hankel2(int order, double x) {
  const double nu = static_cast<double>(order);
  return {std::cyl_bessel_j(nu, x), -std::cyl_neumann(nu, x)};
}

KernelSpec::KernelSpec(const Mesh& mesh)
    : KernelSpec(mesh, mesh.kind == MeshKind::Surface ? Equation::SurfaceEfie
                                                      : Equation::VolumeEfie) {}

KernelSpec::KernelSpec(const Mesh& mesh, Equation equation)
    : mesh_(&mesh), equation_(equation), k0_(mesh.k0()) {
  if (mesh.empty()) throw Error("kernel: mesh is empty");
  const bool surface = mesh.kind == MeshKind::Surface;
  if (surface != (equation == Equation::SurfaceEfie))
    throw Error("kernel: equation does not match mesh kind (surface <-> S-EFIE, volume <-> V-EFIE)");
  mesh.validate();

  const std::size_t n = mesh.size();
  weight_.resize(n);
  self_.resize(n);
  const double c = k0_ * kEta0 / 4.0;
  for (std::size_t j = 0; j < n; ++j) {
    const Element& e = mesh.elements[j];
    if (surface) {
      weight_[j] = e.extent;
      self_[j] = c * segment_self_integral(k0_, e.extent);
    } else {
      const Complex contrast = e.eps_r - 1.0;
      if (std::abs(contrast) < 1e-14)
        throw Error("kernel: volume cell " + std::to_string(j) +
                    " has zero contrast (eps_r = 1); remove it from the mesh");
      const double a = e.extent / std::sqrt(kPi);  // equal-area radius
      const double ka = k0_ * a;
      weight_[j] = 2.0 * kPi * a * std::cyl_bessel_j(1.0, ka) / k0_;
      // int_0^a H0(k r) 2 pi r dr = (2 pi / k^2) [k a H1(k a) - 2j/pi]
      const Complex green =
          c * (2.0 * kPi / (k0_ * k0_)) * (ka * hankel2(1, ka) - Complex(0.0, 2.0 / kPi));
      self_[j] = green + kEta0 / (Complex(0.0, k0_) * contrast);
    }
  }
}

Complex KernelSpec::entry(std::size_t i, std::size_t j) const {
  if (i == j) return self_[i];
  const double r = (mesh_->elements[i].center - mesh_->elements[j].center).norm();
  return (k0_ * kEta0 / 4.0) * weight_[j] * hankel2(0, k0_ * r);
}

CVector rhs(const KernelSpec& spec, const Excitation& exc) {
  if (!(exc.amplitude > 0.0)) throw Error("excitation: amplitude must be positive");
  const Point dir(std::cos(exc.angle), std::sin(exc.angle));
  CVector b(static_cast<Eigen::Index>(spec.size()));
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double phase = spec.k0() * spec.mesh().elements[i].center.dot(dir);
    b[static_cast<Eigen::Index>(i)] = exc.amplitude * std::polar(1.0, phase);
  }
  return b;
}

CMatrix assemble_dense(const KernelSpec& spec, const ClusterTree* tree, std::size_t cap) {
  const std::size_t n = spec.size();
  if (n > cap)
    throw Error("assemble_dense: N = " + std::to_string(n) + " exceeds the dense cap of " +
                std::to_string(cap));
  if (tree && tree->size() != n) throw Error("assemble_dense: tree does not match mesh");
  CMatrix z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  parallel_for(n, [&](std::size_t, std::size_t j) {
    const std::size_t mj = tree ? tree->permutation()[j] : j;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t mi = tree ? tree->permutation()[i] : i;
      z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = spec.entry(mi, mj);
    }
  });
  return z;
}

bool reciprocity_probe(const KernelSpec& spec, std::uint64_t seed, int samples, double rel_tol) {
  const std::size_t n = spec.size();
  if (n < 2) return true;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (int s = 0; s < samples; ++s) {
    std::size_t i = pick(rng), j = pick(rng);
    while (j == i) j = pick(rng);
    const Complex a = spec.entry(i, j), b = spec.entry(j, i);
    if (std::abs(a - b) > rel_tol * std::abs(a)) return false;
  }
  return true;
}

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f32(std::ostream& out, float f) {
  const auto v = std::bit_cast<std::uint32_t>(f);
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw Error("dense binary: truncated header");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[i]} << (8 * i);
  return v;
}

float get_f32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error("dense binary: truncated payload");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{b[i]} << (8 * i);
  return std::bit_cast<float>(v);
}

}  // namespace

void write_dense_binary(const CMatrix& z, std::ostream& out) {
  if (z.rows() != z.cols()) throw Error("dense binary: matrix must be square");
  put_u64(out, static_cast<std::uint64_t>(z.rows()));
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      put_f32(out, static_cast<float>(z(i, j).real()));
      put_f32(out, static_cast<float>(z(i, j).imag()));
    }
}

CMatrix read_dense_binary(std::istream& in) {
  const std::uint64_t n = get_u64(in);
  if (n > (std::uint64_t{1} << 20)) throw Error("dense binary: implausible dimension");
  const auto dim = static_cast<Eigen::Index>(n);
  CMatrix z(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) {
      const float re = get_f32(in);
      const float im = get_f32(in);
      z(i, j) = Complex(re, im);
    }
  return z;
}

}  // namespace hpss
