#include "p2m/kdtree.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

namespace p2m {

KdTree::KdTree(std::span<const Vec3> points, std::uint32_t leafSize) : leafSize_(std::max<std::uint32_t>(1, leafSize)) {
  ids_.resize(points.size());
  std::iota(ids_.begin(), ids_.end(), 0u);
  points_.assign(points.begin(), points.end());
  if (points.empty()) return;
  nodes_.reserve(2 * points.size() / leafSize_ + 2);
  build(0, std::uint32_t(points.size()), 0);
  std::vector<Vec3> ordered(points.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) ordered[i] = points[ids_[i]];
  points_ = std::move(ordered);
  computeBoxes();
}

KdTree KdTree::fromParts(std::vector<Node> nodes, std::vector<std::uint32_t> ids, std::vector<Vec3> points,
                         std::uint32_t leafSize) {
  KdTree t;
  t.nodes_ = std::move(nodes);
  t.ids_ = std::move(ids);
  t.points_ = std::move(points);
  t.leafSize_ = leafSize;
  t.computeBoxes();
  return t;
}

std::uint32_t KdTree::build(std::uint32_t begin, std::uint32_t end, int depth) {
  const auto self = std::uint32_t(nodes_.size());
  nodes_.emplace_back();
  if (end - begin <= leafSize_) {
    nodes_[self].leaf = 1;
    nodes_[self].first = begin;
    nodes_[self].second = end;
    return self;
  }
  const int axis = depth % 3;
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(ids_.begin() + begin, ids_.begin() + mid, ids_.begin() + end, [&](std::uint32_t a, std::uint32_t b) {
    const double pa = points_[a][axis], pb = points_[b][axis];
    return pa < pb || (pa == pb && a < b);
  });
  nodes_[self].axis = std::uint8_t(axis);
  nodes_[self].split = points_[ids_[mid]][axis];
  const std::uint32_t left = build(begin, mid, depth + 1);
  const std::uint32_t right = build(mid, end, depth + 1);
  nodes_[self].first = left;
  nodes_[self].second = right;
  return self;
}

void KdTree::computeBoxes() {
  boxes_.assign(nodes_.size(), Aabb());
  // Children always follow their parent, so a reverse sweep sees them first.
  for (std::size_t k = nodes_.size(); k-- > 0;) {
    const Node& n = nodes_[k];
    Aabb box;
    if (n.leaf) {
      for (std::uint32_t i = n.first; i < n.second; ++i) box.extend(points_[i]);
    } else {
      box.extend(boxes_[n.first]).extend(boxes_[n.second]);
    }
    boxes_[k] = box;
  }
}

KdTree::Neighbor KdTree::nearest(const Vec3& q, std::uint64_t* visited) const {
  double best2 = std::numeric_limits<double>::infinity();
  std::uint32_t bestId = std::numeric_limits<std::uint32_t>::max();
  if (nodes_.empty()) return {bestId, best2};
  std::uint64_t count = 0;

  struct Frame {
    std::uint32_t node;
    double bound;
  };
  std::array<Frame, 128> stack;
  int top = 0;
  stack[top++] = {0, boxSquaredDistance(boxes_[0], q)};
  while (top > 0) {
    const Frame f = stack[--top];
    if (f.bound > best2) continue;
    ++count;
    const Node& n = nodes_[f.node];
    if (n.leaf) {
      for (std::uint32_t i = n.first; i < n.second; ++i) {
        const double d2 = (points_[i] - q).squaredNorm();
        if (d2 < best2 || (d2 == best2 && ids_[i] < bestId)) {
          best2 = d2;
          bestId = ids_[i];
        }
      }
      continue;
    }
    const double dl = boxSquaredDistance(boxes_[n.first], q);
    const double dr = boxSquaredDistance(boxes_[n.second], q);
    // Push the farther child first so the nearer one is explored first.
    if (dl <= dr) {
      if (dr <= best2) stack[top++] = {n.second, dr};
      if (dl <= best2) stack[top++] = {n.first, dl};
    } else {
      if (dl <= best2) stack[top++] = {n.first, dl};
      if (dr <= best2) stack[top++] = {n.second, dr};
    }
  }
  if (visited) *visited += count;
  return {bestId, std::sqrt(best2)};
}

std::vector<KdTree::Neighbor> KdTree::kNearest(const Vec3& q, std::size_t k) const {
  std::vector<Neighbor> out;
  if (nodes_.empty() || k == 0) return out;
  std::priority_queue<std::pair<double, std::uint32_t>> heap;
  auto worst = [&] { return heap.size() < k ? std::numeric_limits<double>::infinity() : heap.top().first; };

  std::vector<std::pair<std::uint32_t, double>> stack;
  stack.emplace_back(0, boxSquaredDistance(boxes_[0], q));
  while (!stack.empty()) {
    const auto [node, bound] = stack.back();
    stack.pop_back();
    if (bound > worst()) continue;
    const Node& n = nodes_[node];
    if (n.leaf) {
      for (std::uint32_t i = n.first; i < n.second; ++i) {
        const std::pair<double, std::uint32_t> item{(points_[i] - q).squaredNorm(), ids_[i]};
        if (heap.size() < k) {
          heap.push(item);
        } else if (item < heap.top()) {
          heap.pop();
          heap.push(item);
        }
      }
      continue;
    }
    const double dl = boxSquaredDistance(boxes_[n.first], q);
    const double dr = boxSquaredDistance(boxes_[n.second], q);
    if (dl <= dr) {
      stack.emplace_back(n.second, dr);
      stack.emplace_back(n.first, dl);
    } else {
      stack.emplace_back(n.first, dl);
      stack.emplace_back(n.second, dr);
    }
  }
  out.resize(heap.size());
  for (std::size_t i = heap.size(); i-- > 0;) {
    out[i] = {heap.top().second, std::sqrt(heap.top().first)};
    heap.pop();
  }
  return out;
}

std::size_t KdTree::memoryBytes() const {
  return nodes_.capacity() * sizeof(Node) + boxes_.capacity() * sizeof(Aabb) + ids_.capacity() * sizeof(std::uint32_t) + points_.capacity() * sizeof(Vec3);
}

}  // namespace p2m
