#pragma once

// 2D TM-z moment-method kernels, e^{+j omega t} time convention, pulse basis
// with point matching:
//   surface EFIE (PEC contour):  Z_ij = (k eta / 4) H0^(2)(k |c_i - c_j|) w_j
//   volume EFIE (dielectric):    Z_ij = d_ij eta / (j k (eps_j - 1))
//                                       + (k eta / 4) int_cell_j H0^(2)(k |c_i - r'|) dA'
// The volume unknown is the polarization current density; each square cell is
// integrated as the circle of equal area.

#include "hpss/core.hpp"
#include "hpss/geometry.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace hpss {

enum class Equation { SurfaceEfie, VolumeEfie };

Complex hankel2(int order, double x);

class KernelSpec {
 public:
  /// Equation follows mesh.kind.
  explicit KernelSpec(const Mesh& mesh);
  KernelSpec(const Mesh& mesh, Equation equation);

  Equation equation() const { return equation_; }
  const Mesh& mesh() const { return *mesh_; }
  double k0() const { return k0_; }
  std::size_t size() const { return mesh_->size(); }

  /// Matrix entry in mesh ordering.
  Complex entry(std::size_t i, std::size_t j) const;
  /// Far-field radiation weight of a unit current on element j.
  double radiation_weight(std::size_t j) const { return weight_[j]; }

 private:
  const Mesh* mesh_;
  Equation equation_;
  double k0_;
  std::vector<double> weight_;  // segment length, or 2 pi a J1(k a)/k for cells
  std::vector<Complex> self_;
};

struct Excitation {
  double angle = 0.0;  // radians; the wave arrives from this direction
  double amplitude = 1.0;
};

/// b_i = A exp(+j k0 c_i . (cos phi, sin phi)), mesh ordering.
CVector rhs(const KernelSpec& spec, const Excitation& exc);

inline constexpr std::size_t kDefaultDenseCap = 4096;

/// Dense matrix in tree order when a tree is given, else mesh order.
CMatrix assemble_dense(const KernelSpec& spec, const ClusterTree* tree = nullptr,
                       std::size_t cap = kDefaultDenseCap);

/// True when |Z_ij - Z_ji| <= rel_tol |Z_ij| on `samples` random off-diagonal pairs.
bool reciprocity_probe(const KernelSpec& spec, std::uint64_t seed, int samples = 16,
                       double rel_tol = 1e-10);

/// Little-endian: uint64 N, then N*N (float re, float im) pairs row-major.
void write_dense_binary(const CMatrix& z, std::ostream& out);
CMatrix read_dense_binary(std::istream& in);

}  // namespace hpss
