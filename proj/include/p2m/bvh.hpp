#pragma once

#include "p2m/query.hpp"

#include <cstdint>
#include <vector>

namespace p2m {

/// Baseline closest-point structure: binary AABB hierarchy with median
/// splits on the longest axis. Leaves hold faces, wire edges and isolated
/// vertices; results equal bruteForceQuery.
class BvhTree {
 public:
  struct Node {
    Aabb box;
    std::uint32_t first = 0;  // leaf: offset into prims; internal: left child
    std::uint32_t count = 0;  // leaf: primitive count; internal: 0
    std::uint32_t right = 0;
  };

  BvhTree() = default;
  explicit BvhTree(const Mesh& mesh, std::uint32_t leafSize = 4);

  /// Exact branch-and-bound closest primitive.
  QueryResult query(const Vec3& q, std::uint64_t* primitivesTested = nullptr) const;

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<PrimitiveRef>& primitives() const { return prims_; }
  std::size_t memoryBytes() const;

 private:
  std::uint32_t build(std::vector<Aabb>& boxes, std::vector<Vec3>& centers, std::uint32_t begin, std::uint32_t end);

  const Mesh* mesh_ = nullptr;
  std::vector<Node> nodes_;
  std::vector<PrimitiveRef> prims_;
  std::uint32_t leafSize_ = 4;
};

}  // namespace p2m
