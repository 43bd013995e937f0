#include "p2m/bvh.hpp"

#include <algorithm>
#include <limits>

namespace p2m {

BvhTree::BvhTree(const Mesh& mesh, std::uint32_t leafSize) : mesh_(&mesh), leafSize_(std::max(1u, leafSize)) {
  std::vector<Aabb> boxes;
  for (Index f = 0; f < mesh.faceCount(); ++f) {
    Aabb b;
    for (Index v : mesh.faces()[f]) b.extend(mesh.vertex(v));
    prims_.push_back({PrimitiveKind::Face, f});
    boxes.push_back(b);
  }
  for (Index e = 0; e < mesh.edgeCount(); ++e) {
    if (!mesh.edgeFaces(e).empty()) continue;
    Aabb b;
    for (Index v : mesh.edges()[e]) b.extend(mesh.vertex(v));
    prims_.push_back({PrimitiveKind::Edge, e});
    boxes.push_back(b);
  }
  for (Index v = 0; v < mesh.vertexCount(); ++v) {
    if (!mesh.vertexEdges(v).empty()) continue;
    prims_.push_back({PrimitiveKind::Vertex, v});
    boxes.push_back(Aabb(mesh.vertex(v), mesh.vertex(v)));
  }
  if (prims_.empty()) return;
  std::vector<Vec3> centers(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) centers[i] = boxes[i].center();
  nodes_.reserve(2 * prims_.size() / leafSize_ + 1);
  build(boxes, centers, 0, std::uint32_t(prims_.size()));
}

std::uint32_t BvhTree::build(std::vector<Aabb>& boxes, std::vector<Vec3>& centers, std::uint32_t begin,
                             std::uint32_t end) {
  const auto self = std::uint32_t(nodes_.size());
  nodes_.emplace_back();
  Aabb box;
  Aabb centroidBox;
  for (std::uint32_t i = begin; i < end; ++i) {
    box.extend(boxes[i]);
    centroidBox.extend(centers[i]);
  }
  nodes_[self].box = box;
  if (end - begin <= leafSize_) {
    nodes_[self].first = begin;
    nodes_[self].count = end - begin;
    return self;
  }
  int axis;
  centroidBox.sizes().maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  // Sort a permutation, then apply it to the three parallel arrays.
  std::vector<std::uint32_t> perm(end - begin);
  for (std::uint32_t i = 0; i < perm.size(); ++i) perm[i] = begin + i;
  std::nth_element(perm.begin(), perm.begin() + (mid - begin), perm.end(), [&](std::uint32_t a, std::uint32_t b) {
    return centers[a][axis] < centers[b][axis] || (centers[a][axis] == centers[b][axis] && a < b);
  });
  std::vector<Aabb> b2;
  std::vector<Vec3> c2;
  std::vector<PrimitiveRef> p2;
  b2.reserve(perm.size());
  c2.reserve(perm.size());
  p2.reserve(perm.size());
  for (std::uint32_t i : perm) {
    b2.push_back(boxes[i]);
    c2.push_back(centers[i]);
    p2.push_back(prims_[i]);
  }
  std::copy(b2.begin(), b2.end(), boxes.begin() + begin);
  std::copy(c2.begin(), c2.end(), centers.begin() + begin);
  std::copy(p2.begin(), p2.end(), prims_.begin() + begin);

  const std::uint32_t left = build(boxes, centers, begin, mid);
  const std::uint32_t right = build(boxes, centers, mid, end);
  nodes_[self].first = left;
  nodes_[self].right = right;
  nodes_[self].count = 0;
  return self;
}

QueryResult BvhTree::query(const Vec3& q, std::uint64_t* primitivesTested) const {
  QueryResult best;
  best.distance = std::numeric_limits<double>::infinity();
  if (nodes_.empty()) return best;
  const Mesh& mesh = *mesh_;
  double best2 = std::numeric_limits<double>::infinity();
  std::uint64_t tested = 0;

  struct Item {
    std::uint32_t node;
    double d2;
  };
  Item stack[128];
  int top = 0;
  stack[top++] = {0, boxSquaredDistance(nodes_[0].box, q)};
  while (top > 0) {
    const Item it = stack[--top];
    // Keep equal-distance subtrees alive so ties resolve like the oracle.
    if (it.d2 > best2) continue;
    const Node& n = nodes_[it.node];
    if (n.count > 0) {
      for (std::uint32_t i = n.first; i < n.first + n.count; ++i) {
        const PrimitiveRef p = prims_[i];
        const QueryResult r = p.kind == PrimitiveKind::Face   ? evalFace(mesh, p.id, q)
                              : p.kind == PrimitiveKind::Edge ? evalEdge(mesh, p.id, q)
                                                              : evalVertex(mesh, p.id, q);
        ++tested;
        if (betterThan(r, best)) {
          best = r;
          // Pruning bound with 1e-12 relative slack; exact ties are kept.
          best2 = r.distance * r.distance * (1.0 + 1e-12);
        }
      }
      continue;
    }
    const double dl = boxSquaredDistance(nodes_[n.first].box, q);
    const double dr = boxSquaredDistance(nodes_[n.right].box, q);
    if (dl <= dr) {
      if (dr <= best2) stack[top++] = {n.right, dr};
      if (dl <= best2) stack[top++] = {n.first, dl};
    } else {
      if (dl <= best2) stack[top++] = {n.first, dl};
      if (dr <= best2) stack[top++] = {n.right, dr};
    }
  }
  if (primitivesTested) *primitivesTested += tested;
  return best;
}

std::size_t BvhTree::memoryBytes() const {
  return nodes_.capacity() * sizeof(Node) + prims_.capacity() * sizeof(PrimitiveRef);
}

}  // namespace p2m
