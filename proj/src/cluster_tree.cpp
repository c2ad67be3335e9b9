#include "hpss/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hpss {

double BoundingBox::distance(const BoundingBox& other) const {
  const Point gap = (other.lo - hi).cwiseMax(lo - other.hi).cwiseMax(Point::Zero());
  return gap.norm();
}

bool BoundingBox::contains(const Point& p, double slack) const {
  return p.x() >= lo.x() - slack && p.x() <= hi.x() + slack && p.y() >= lo.y() - slack &&
         p.y() <= hi.y() + slack;
}

ClusterTree::ClusterTree(std::vector<ClusterNode> nodes, std::vector<std::size_t> permutation,
                         std::size_t leaf_size, int depth)
    : nodes_(std::move(nodes)),
      permutation_(std::move(permutation)),
      leaf_size_(leaf_size),
      depth_(depth) {}

std::vector<int> ClusterTree::nodes_at_level(int level) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].level == level) out.push_back(static_cast<int>(i));
  return out;
}

CVector ClusterTree::to_tree_order(const CVector& v) const {
  if (static_cast<std::size_t>(v.size()) != size()) throw Error("to_tree_order: size mismatch");
  CVector out(v.size());
  for (std::size_t i = 0; i < permutation_.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = v[static_cast<Eigen::Index>(permutation_[i])];
  return out;
}

CVector ClusterTree::to_mesh_order(const CVector& v) const {
  if (static_cast<std::size_t>(v.size()) != size()) throw Error("to_mesh_order: size mismatch");
  CVector out(v.size());
  for (std::size_t i = 0; i < permutation_.size(); ++i)
    out[static_cast<Eigen::Index>(permutation_[i])] = v[static_cast<Eigen::Index>(i)];
  return out;
}

namespace {

struct Builder {
  const Mesh& mesh;
  int depth;
  std::vector<std::size_t>& perm;
  std::vector<ClusterNode>& nodes;

  BoundingBox box(IndexRange r) const {
    BoundingBox b;
    b.lo = b.hi = mesh.elements[perm[r.begin]].center;
    for (std::size_t i = r.begin + 1; i < r.end; ++i) {
      const Point& c = mesh.elements[perm[i]].center;
      b.lo = b.lo.cwiseMin(c);
      b.hi = b.hi.cwiseMax(c);
    }
    return b;
  }

  int build(IndexRange r, int level) {
    const int id = static_cast<int>(nodes.size());
    nodes.push_back({r, box(r), level, {-1, -1}});
    if (level == depth) return id;

    const BoundingBox b = nodes[static_cast<std::size_t>(id)].bbox;
    const Point ext = b.hi - b.lo;
    const int axis = ext.y() > ext.x() ? 1 : 0;
    auto first = perm.begin() + static_cast<std::ptrdiff_t>(r.begin);
    auto last = perm.begin() + static_cast<std::ptrdiff_t>(r.end);
    std::sort(first, last, [&](std::size_t a, std::size_t c) {
      const double ca = mesh.elements[a].center[axis];
      const double cc = mesh.elements[c].center[axis];
      return ca < cc || (ca == cc && a < c);
    });
    const std::size_t mid = r.begin + (r.size() + 1) / 2;
    const int left = build({r.begin, mid}, level + 1);
    const int right = build({mid, r.end}, level + 1);
    nodes[static_cast<std::size_t>(id)].children = {left, right};
    return id;
  }
};

}  // namespace

ClusterTree build_cluster_tree(const Mesh& mesh, std::size_t leaf_size) {
  if (leaf_size < 2) throw Error("cluster tree: leaf_size must be >= 2");
  if (mesh.empty()) throw Error("cluster tree: mesh is empty");
  const std::size_t n = mesh.size();
  // Smallest uniform depth at which the larger half of every split fits.
  int depth = 0;
  while ((n + (std::size_t{1} << depth) - 1) >> depth > leaf_size) ++depth;

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<ClusterNode> nodes;
  nodes.reserve((std::size_t{2} << depth) - 1);
  Builder{mesh, depth, perm, nodes}.build({0, n}, 0);
  return ClusterTree(std::move(nodes), std::move(perm), leaf_size, depth);
}

bool is_admissible(const BoundingBox& t, const BoundingBox& s, double eta) {
  return eta * t.distance(s) >= std::min(t.diameter(), s.diameter());
}

bool is_admissible(const ClusterTree& tree, int t, int s, double eta) {
  if (t == s) return false;  // self-interaction, even for a one-element leaf
  const ClusterNode& a = tree.node(t);
  const ClusterNode& b = tree.node(s);
  if (a.level != b.level) throw Error("is_admissible: clusters must share a level");
  return is_admissible(a.bbox, b.bbox, eta);
}

}  // namespace hpss
