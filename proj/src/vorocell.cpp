#include "p2m/vorocell.hpp"

#include "p2m/parallel.hpp"

#include <algorithm>
#include <string>

namespace p2m {

VoronoiConfig VoronoiConfig::around(const Aabb& bounds) {
  VoronoiConfig cfg;
  cfg.center = bounds.center();
  const double halfDiagonal = 0.5 * bounds.diagonal().norm();
  cfg.halfExtent = 10.0 * (halfDiagonal > 0 ? halfDiagonal : 1.0);
  return cfg;
}

VoronoiCell buildCell(std::span<const Vec3> points, std::uint32_t v, const KdTree& tree, const VoronoiConfig& cfg,
                      const CellBuildOptions& opts) {
  const Vec3& site = points[v];
  if ((site - cfg.center).cwiseAbs().maxCoeff() > cfg.halfExtent)
    throw VoronoiError("vertex " + std::to_string(v) + " lies outside the Voronoi domain");

  VoronoiCell cell;
  cell.vertex = v;
  cell.polytope = ConvexPolytope::cube(cfg.center, cfg.halfExtent);
  ConvexPolytope& poly = cell.polytope;
  const double tol = poly.tolerance();

  for (const auto& nb : tree.kNearest(site, opts.initialNeighbors + 1)) {
    if (nb.id == v) continue;
    if (nb.distance == 0.0)
      throw VoronoiError("coincident vertices " + std::to_string(v) + " and " + std::to_string(nb.id));
    poly.clip(bisector(site, points[nb.id]), PlaneSource::Bisector, nb.id);
  }

  // Certify each corner: no generator may be strictly closer to it than v.
  // Corners that survive a clip keep their exact position, so certified
  // positions can be remembered across rounds.
  std::vector<Vec3> certified;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& corner : poly.corners()) {
      const Vec3& x = corner.position;
      if (std::find(certified.begin(), certified.end(), x) != certified.end()) continue;
      const auto nb = tree.nearest(x);
      if (nb.id != v) {
        if (nb.distance == 0.0 && x == site) throw VoronoiError("coincident vertices at " + std::to_string(v));
        const Plane3 h = bisector(site, points[nb.id]);
        if (h.signedDistance(x) > tol && poly.clip(h, PlaneSource::Bisector, nb.id)) {
          changed = true;
          break;
        }
      }
      certified.push_back(x);
    }
  }
  if (poly.empty()) throw VoronoiError("empty Voronoi cell for vertex " + std::to_string(v));

  for (std::int32_t p : poly.supportingPlanes(3)) {
    const TaggedPlane& tp = poly.planes()[p];
    if (tp.source == PlaneSource::Bisector) cell.neighbors.push_back(std::uint32_t(tp.tag));
  }
  std::sort(cell.neighbors.begin(), cell.neighbors.end());
  cell.neighbors.erase(std::unique(cell.neighbors.begin(), cell.neighbors.end()), cell.neighbors.end());
  return cell;
}

std::vector<VoronoiCell> buildCells(std::span<const Vec3> points, const KdTree& tree, const VoronoiConfig& cfg,
                                    const CellBuildOptions& opts) {
  std::vector<VoronoiCell> cells(points.size());
  parallelChunks(points.size(), opts.threads, [&](unsigned, std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v) cells[v] = buildCell(points, std::uint32_t(v), tree, cfg, opts);
  });
  return cells;
}

NeighborGraph::NeighborGraph(const std::vector<VoronoiCell>& cells) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (const VoronoiCell& c : cells)
    for (std::uint32_t u : c.neighbors) {
      if (u == c.vertex) continue;
      pairs.emplace_back(c.vertex, u);
      pairs.emplace_back(u, c.vertex);
    }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  offsets_.assign(cells.size() + 1, 0);
  for (const auto& [a, b] : pairs) ++offsets_[a + 1];
  for (std::size_t i = 0; i < cells.size(); ++i) offsets_[i + 1] += offsets_[i];
  ids_.reserve(pairs.size());
  for (const auto& [a, b] : pairs) ids_.push_back(b);
}

}  // namespace p2m
