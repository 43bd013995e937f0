#pragma once

#include "p2m/kdtree.hpp"
#include "p2m/polytope.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace p2m {

/// Cubic domain [center - halfExtent, center + halfExtent]^3 that bounds every
/// Voronoi cell and every admissible query point.
struct VoronoiConfig {
  Vec3 center = Vec3::Zero();
  double halfExtent = 1.0;

  /// Ten times the half-diagonal of `bounds`, centered on it.
  static VoronoiConfig around(const Aabb& bounds);

  double tolerance() const { return 1e-10 * halfExtent; }
};

struct VoronoiError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct VoronoiCell {
  std::uint32_t vertex = 0;
  ConvexPolytope polytope;
  /// Vertices whose bisector carries a facet of the final cell, ascending.
  std::vector<std::uint32_t> neighbors;
};

/// Symmetric adjacency over vertex ids (CSR).
class NeighborGraph {
 public:
  NeighborGraph() = default;
  explicit NeighborGraph(const std::vector<VoronoiCell>& cells);

  std::span<const std::uint32_t> neighbors(std::uint32_t v) const {
    return {ids_.data() + offsets_[v], ids_.data() + offsets_[v + 1]};
  }
  std::size_t vertexCount() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edgeCount() const { return ids_.size() / 2; }

 private:
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> ids_;
};

struct CellBuildOptions {
  /// Nearest neighbors clipped up front before corner certification.
  std::size_t initialNeighbors = 16;
  unsigned threads = 1;
};

/// Cell of one generator: the domain cube clipped by bisectors until every
/// corner is certified to have no strictly closer generator than `v`.
VoronoiCell buildCell(std::span<const Vec3> points, std::uint32_t v, const KdTree& tree, const VoronoiConfig& cfg,
                      const CellBuildOptions& opts = {});

/// Cells of all points. Throws VoronoiError on coincident points or points
/// outside the domain.
std::vector<VoronoiCell> buildCells(std::span<const Vec3> points, const KdTree& tree, const VoronoiConfig& cfg,
                                    const CellBuildOptions& opts = {});

}  // namespace p2m
