#pragma once

#include "p2m/mesh.hpp"
#include "p2m/polytope.hpp"
#include "p2m/vorocell.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace p2m {

enum class PrimitiveKind : std::uint8_t { Vertex = 0, Edge = 1, Face = 2 };

struct PrimitiveRef {
  PrimitiveKind kind = PrimitiveKind::Vertex;
  Index id = 0;

  auto operator<=>(const PrimitiveRef&) const = default;
};

/// Half-space intersection holding every point whose orthogonal projection
/// falls inside the anchor primitive.
///
/// Faces carry three planes, one per bounding edge. Edges carry the two
/// endpoint planes first, then one plane per adjacent face.
struct VerticalSpace {
  PrimitiveRef anchor;
  std::vector<Plane3> planes;

  bool contains(const Vec3& q, double slack = 0.0) const {
    for (const Plane3& p : planes)
      if (p.signedDistance(q) > slack) return false;
    return true;
  }
};

VerticalSpace verticalSpaceFace(const Mesh& mesh, Index face);
VerticalSpace verticalSpaceEdge(const Mesh& mesh, Index edge);
VerticalSpace verticalSpace(const Mesh& mesh, PrimitiveRef prim);

/// The cell of a vertex clipped to a primitive's vertical space.
ConvexPolytope convexPoly(const VoronoiCell& cell, const VerticalSpace& space);

/// True when `v` provably cannot intercept `edge`: `poly` is empty, or every
/// corner is closer to v than to the edge's line by at least `margin`.
/// Endpoints of the edge always intercept it.
bool cannotInterceptEdge(const Mesh& mesh, Index v, Index edge, const ConvexPolytope& poly, double margin);

/// Face analogue of cannotInterceptEdge against the face's supporting plane.
bool cannotInterceptFace(const Mesh& mesh, Index v, Index face, const ConvexPolytope& poly, double margin);

bool cannotIntercept(const Mesh& mesh, Index v, PrimitiveRef prim, const ConvexPolytope& poly, double margin);

struct Interceptor {
  Index vertex;
  Aabb box;  // conservative enclosure of the region the vertex covers for the primitive
};

/// Reusable per-thread buffers for flooding.
class FloodScratch {
 public:
  explicit FloodScratch(std::size_t vertexCount) : stamp_(vertexCount, 0) {}

 private:
  friend std::vector<Interceptor> floodInterceptors(const Mesh&, PrimitiveRef, const std::vector<VoronoiCell>&,
                                                    const NeighborGraph&, double, FloodScratch&);
  std::vector<std::uint32_t> stamp_;
  std::uint32_t round_ = 0;
  std::vector<Index> queue_;
  ConvexPolytope poly_;
};

/// Breadth-first search over the Voronoi neighbor graph from the primitive's
/// own vertices. A vertex is expanded only when it passes the interception
/// filter; every accepted vertex is reported once with the inflated bounding
/// box of its clipped cell.
std::vector<Interceptor> floodInterceptors(const Mesh& mesh, PrimitiveRef prim, const std::vector<VoronoiCell>& cells,
                                           const NeighborGraph& graph, double margin, FloodScratch& scratch);

struct InterceptionEntry {
  PrimitiveRef primitive;
  Aabb box;
};

/// Per-vertex lists of intercepted edges and faces. Within a list, edges come
/// first, then faces, each in ascending id.
struct InterceptionTable {
  std::vector<std::vector<InterceptionEntry>> lists;

  std::size_t totalEntries() const;
  std::size_t memoryBytes() const;
};

struct TableBuildOptions {
  double margin = 0.0;  // filter clearance, normally 1e-10 * domain half extent
  unsigned threads = 1;
};

/// Floods every edge, then every face, and groups the interceptors per vertex.
InterceptionTable buildTable(const Mesh& mesh, const std::vector<VoronoiCell>& cells, const NeighborGraph& graph,
                             const TableBuildOptions& opts);

struct ListStats {
  double average = 0;         // unweighted mean list length
  double weightedAverage = 0; // mean weighted by Voronoi cell volume
  std::size_t maximum = 0;
};

struct TableStats {
  ListStats edges;
  ListStats faces;
  ListStats total;
};

TableStats tableStats(const InterceptionTable& table, const std::vector<double>& cellVolumes);

/// Histogram of list lengths over power-of-two bins: bin k counts lengths in
/// [2^k, 2^(k+1)), bin 0 also holds length 0.
std::vector<std::size_t> listLengthHistogram(const InterceptionTable& table);

/// CSV dump "length,vertices" of the exact list-length distribution.
void writeLengthHistogramCsv(const InterceptionTable& table, std::ostream& out);

}  // namespace p2m
