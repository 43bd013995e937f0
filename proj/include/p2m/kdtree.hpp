#pragma once

#include "p2m/geom.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace p2m {

/// Static KD-tree over a point set with median splits on alternating axes.
/// Traversal prunes on tight per-node bounding boxes.
/// Queries are exact; equidistant points resolve to the smallest id.
class KdTree {
 public:
  struct Node {
    double split = 0;
    std::uint32_t first = 0;  // internal: left child (right = first + 1 is not assumed); leaf: begin
    std::uint32_t second = 0; // internal: right child; leaf: end
    std::uint8_t axis = 0;
    std::uint8_t leaf = 0;
  };

  struct Neighbor {
    std::uint32_t id;
    double distance;
  };

  KdTree() = default;
  explicit KdTree(std::span<const Vec3> points, std::uint32_t leafSize = 8);

  /// Reassembles a tree from serialized parts.
  static KdTree fromParts(std::vector<Node> nodes, std::vector<std::uint32_t> ids, std::vector<Vec3> points,
                          std::uint32_t leafSize);

  bool empty() const { return ids_.empty(); }
  std::size_t size() const { return ids_.size(); }
  std::uint32_t leafSize() const { return leafSize_; }

  /// Exact nearest point. `visited`, when given, is incremented per examined node.
  Neighbor nearest(const Vec3& q, std::uint64_t* visited = nullptr) const;

  /// The k nearest points in increasing (distance, id) order.
  std::vector<Neighbor> kNearest(const Vec3& q, std::size_t k) const;

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<std::uint32_t>& ids() const { return ids_; }
  const std::vector<Vec3>& points() const { return points_; }

  std::size_t memoryBytes() const;

 private:
  std::uint32_t build(std::uint32_t begin, std::uint32_t end, int depth);
  void computeBoxes();

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> ids_;  // leaf order
  std::vector<Vec3> points_;        // points in leaf order
  std::vector<Aabb> boxes_;         // tight per-node bounds, derived from points
  std::uint32_t leafSize_ = 8;
};

}  // namespace p2m
