#include "p2m/rtree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace p2m {
namespace {

// Sort-tile-recursive ordering of [first, last) by box centers. Consecutive
// runs of `fanout` entries form spatially coherent groups.
void strOrder(std::vector<std::uint32_t>::iterator first, std::vector<std::uint32_t>::iterator last,
              const std::vector<Vec3>& centers, int axis, std::size_t fanout) {
  const std::size_t n = std::size_t(last - first);
  if (n <= fanout || axis > 2) return;
  auto byAxis = [&](std::uint32_t a, std::uint32_t b) {
    return centers[a][axis] < centers[b][axis] || (centers[a][axis] == centers[b][axis] && a < b);
  };
  std::sort(first, last, byAxis);
  if (axis == 2) return;
  const double pages = std::ceil(double(n) / double(fanout));
  const double slices = std::ceil(std::pow(pages, 1.0 / double(3 - axis)));
  const std::size_t sliceSize = fanout * std::size_t(std::ceil(pages / slices));
  for (std::size_t s = 0; s < n; s += sliceSize)
    strOrder(first + std::ptrdiff_t(s), first + std::ptrdiff_t(std::min(n, s + sliceSize)), centers, axis + 1, fanout);
}

std::vector<std::uint32_t> strPermutation(const std::vector<Aabb>& boxes, std::size_t fanout) {
  std::vector<Vec3> centers(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) centers[i] = boxes[i].center();
  std::vector<std::uint32_t> order(boxes.size());
  std::iota(order.begin(), order.end(), 0u);
  strOrder(order.begin(), order.end(), centers, 0, fanout);
  return order;
}

}  // namespace

RTree::RTree(std::span<const Aabb> boxes, std::uint32_t fanout) {
  if (boxes.empty()) return;
  fanout = std::clamp<std::uint32_t>(fanout, 2, 64);
  std::vector<Aabb> all(boxes.begin(), boxes.end());
  items_ = strPermutation(all, fanout);
  itemBoxes_.reserve(items_.size());
  for (std::uint32_t i : items_) itemBoxes_.push_back(all[i]);

  std::vector<Node> level;
  for (std::size_t i = 0; i < items_.size(); i += fanout) {
    Node n;
    n.leaf = 1;
    n.first = std::uint32_t(i);
    n.count = std::uint16_t(std::min<std::size_t>(fanout, items_.size() - i));
    for (std::uint32_t k = n.first; k < n.first + n.count; ++k) n.box.extend(boxes[items_[k]]);
    level.push_back(n);
  }
  while (level.size() > 1) {
    std::vector<Aabb> levelBoxes;
    levelBoxes.reserve(level.size());
    for (const Node& n : level) levelBoxes.push_back(n.box);
    const auto order = strPermutation(levelBoxes, fanout);
    const auto base = std::uint32_t(nodes_.size());
    for (std::uint32_t i : order) nodes_.push_back(level[i]);
    std::vector<Node> parents;
    for (std::size_t i = 0; i < order.size(); i += fanout) {
      Node p;
      p.first = base + std::uint32_t(i);
      p.count = std::uint16_t(std::min<std::size_t>(fanout, order.size() - i));
      for (std::uint32_t k = p.first; k < p.first + p.count; ++k) p.box.extend(nodes_[k].box);
      parents.push_back(p);
    }
    level = std::move(parents);
  }
  nodes_.push_back(level.front());
}

RTree RTree::fromParts(std::vector<Node> nodes, std::vector<std::uint32_t> items, std::span<const Aabb> boxes) {
  RTree t;
  t.nodes_ = std::move(nodes);
  t.items_ = std::move(items);
  t.itemBoxes_.reserve(t.items_.size());
  for (std::uint32_t i : t.items_) t.itemBoxes_.push_back(boxes[i]);
  return t;
}

std::vector<std::uint32_t> RTree::query(const Vec3& q) const {
  std::vector<std::uint32_t> out;
  forEachContaining(q, [&](std::uint32_t i) { out.push_back(i); });
  return out;
}

}  // namespace p2m
