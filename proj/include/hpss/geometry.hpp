#pragma once

#include "hpss/core.hpp"

#include <array>
#include <functional>
#include <iosfwd>
#include <vector>

namespace hpss {

enum class MeshKind { Surface, Volume };

struct Element {
  Point center;
  double extent;  // segment length (surface) or square cell side (volume), meters
  Complex eps_r{1.0, 0.0};
};

/// Desk-scale 2D discretization. Lengths are in meters; the wavelength sets k0.
struct Mesh {
  MeshKind kind = MeshKind::Surface;
  std::vector<Element> elements;
  double wavelength = 1.0;

  std::size_t size() const { return elements.size(); }
  bool empty() const { return elements.empty(); }
  double k0() const { return 2.0 * kPi / wavelength; }
  /// Throws unless every element satisfies the extent and density rules.
  void validate() const;
};

inline constexpr int kMinElementsPerWavelength = 10;

/// Flat PEC strip centered on the origin along x.
Mesh discretize_strip(double length_in_wavelengths, int elements_per_wavelength,
                      double wavelength = 1.0);

/// Closed circular PEC contour centered on the origin.
Mesh discretize_circle(double radius_in_wavelengths, int elements_per_wavelength,
                       double wavelength = 1.0);

struct DiskOptions {
  // Shrink the cell side (never grow it) until the rasterized area is within
  // 0.5 % of the disk area. Staircased boundaries otherwise bias the cross
  // section by the area mismatch.
  bool match_area = false;
  // Optional per-cell permittivity, evaluated at cell centers (meters).
  std::function<Complex(const Point&)> permittivity;
  double wavelength = 1.0;
};

/// Square-cell rasterization of a dielectric disk, one cell centered at the
/// origin. Cell side is lambda / (cells_per_wavelength * sqrt(Re eps_r)).
Mesh discretize_disk(double radius_in_wavelengths, int cells_per_wavelength, Complex eps_r,
                     const DiskOptions& options = {});

/// CSV with header "cx,cy,extent,eps_r_re,eps_r_im", one element per row.
void write_mesh_csv(const Mesh& mesh, std::ostream& out);
/// A mesh is volume iff some element has eps_r != 1.
Mesh read_mesh_csv(std::istream& in, double wavelength = 1.0);

struct BoundingBox {
  Point lo{0.0, 0.0};
  Point hi{0.0, 0.0};

  double diameter() const { return (hi - lo).norm(); }
  double distance(const BoundingBox& other) const;
  bool contains(const Point& p, double slack = 0.0) const;
};

struct ClusterNode {
  IndexRange range;
  BoundingBox bbox;
  int level = 0;
  std::array<int, 2> children{-1, -1};

  bool is_leaf() const { return children[0] < 0; }
};

/// Balanced binary cluster tree with every leaf at the same level.
class ClusterTree {
 public:
  ClusterTree() = default;
  ClusterTree(std::vector<ClusterNode> nodes, std::vector<std::size_t> permutation,
              std::size_t leaf_size, int depth);

  const std::vector<ClusterNode>& nodes() const { return nodes_; }
  const ClusterNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  static constexpr int root() { return 0; }
  /// permutation()[tree_index] = mesh_index
  const std::vector<std::size_t>& permutation() const { return permutation_; }
  std::size_t leaf_size() const { return leaf_size_; }
  int depth() const { return depth_; }
  std::size_t size() const { return permutation_.size(); }

  std::vector<int> nodes_at_level(int level) const;
  std::vector<int> leaves() const { return nodes_at_level(depth_); }

  CVector to_tree_order(const CVector& mesh_ordered) const;
  CVector to_mesh_order(const CVector& tree_ordered) const;

 private:
  std::vector<ClusterNode> nodes_;
  std::vector<std::size_t> permutation_;
  std::size_t leaf_size_ = 0;
  int depth_ = 0;
};

ClusterTree build_cluster_tree(const Mesh& mesh, std::size_t leaf_size);

/// eta * dist(t, s) >= min(diam t, diam s) for two nodes on the same level.
bool is_admissible(const ClusterTree& tree, int t, int s, double eta = 1.0);
bool is_admissible(const BoundingBox& t, const BoundingBox& s, double eta = 1.0);

}  // namespace hpss
