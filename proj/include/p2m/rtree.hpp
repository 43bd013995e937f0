#pragma once

#include "p2m/geom.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace p2m {

/// Static R-tree over boxes, bulk loaded with sort-tile-recursive packing.
/// Point queries are boundary inclusive. Fanout is clamped to [2, 64].
class RTree {
 public:
  struct Node {
    Aabb box;
    std::uint32_t first = 0;  // leaf: offset into items(); internal: offset into nodes()
    std::uint16_t count = 0;
    std::uint8_t leaf = 0;
  };

  RTree() = default;
  explicit RTree(std::span<const Aabb> boxes, std::uint32_t fanout = 8);

  /// Reassembles a tree from serialized parts; `boxes` are indexed by item id.
  static RTree fromParts(std::vector<Node> nodes, std::vector<std::uint32_t> items, std::span<const Aabb> boxes);

  bool empty() const { return nodes_.empty(); }
  const Node& root() const { return nodes_.back(); }

  /// Calls fn(item) for every box containing q.
  template <typename Fn>
  void forEachContaining(const Vec3& q, Fn&& fn) const {
    if (nodes_.empty()) return;
    std::uint32_t stack[512];
    int top = 0;
    stack[top++] = std::uint32_t(nodes_.size() - 1);
    while (top > 0) {
      const Node& n = nodes_[stack[--top]];
      if (!n.box.contains(q)) continue;
      if (n.leaf) {
        for (std::uint32_t i = n.first; i < n.first + n.count; ++i)
          if (itemBoxes_[i].contains(q)) fn(items_[i]);
      } else {
        for (std::uint32_t c = n.first + n.count; c-- > n.first;) stack[top++] = c;
      }
    }
  }

  /// Items whose box contains q, in tree order.
  std::vector<std::uint32_t> query(const Vec3& q) const;

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<std::uint32_t>& items() const { return items_; }

  std::size_t memoryBytes() const {
    return nodes_.capacity() * sizeof(Node) + items_.capacity() * sizeof(std::uint32_t) +
           itemBoxes_.capacity() * sizeof(Aabb);
  }

 private:
  std::vector<Node> nodes_;  // levels bottom-up, root last
  std::vector<std::uint32_t> items_;
  std::vector<Aabb> itemBoxes_;  // leaf order, parallel to items_
};

}  // namespace p2m
