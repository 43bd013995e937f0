#include "p2m/interception.hpp"

#include "p2m/parallel.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <ostream>

namespace p2m {
namespace {

Vec3 faceNormal(const Mesh& mesh, Index f) {
  const auto& t = mesh.faces()[f];
  const Vec3& a = mesh.vertex(t[0]);
  return (mesh.vertex(t[1]) - a).cross(mesh.vertex(t[2]) - a).normalized();
}

// Unit direction lying in face f, perpendicular to the edge (a, b), pointing
// into the face.
Vec3 inwardDirection(const Mesh& mesh, Index f, const Vec3& a, const Vec3& b, const Vec3& opposite) {
  const Vec3 d = (b - a).normalized();
  Vec3 u = faceNormal(mesh, f).cross(d).normalized();
  if (u.dot(opposite - a) < 0) u = -u;
  return u;
}

Aabb inflated(Aabb box, double by) {
  if (box.isEmpty()) return box;
  box.min().array() -= by;
  box.max().array() += by;
  return box;
}

}  // namespace

VerticalSpace verticalSpaceFace(const Mesh& mesh, Index face) {
  const auto& t = mesh.faces()[face];
  VerticalSpace vs;
  vs.anchor = {PrimitiveKind::Face, face};
  for (int i = 0; i < 3; ++i) {
    const Vec3& a = mesh.vertex(t[i]);
    const Vec3& b = mesh.vertex(t[(i + 1) % 3]);
    const Vec3& c = mesh.vertex(t[(i + 2) % 3]);
    const Vec3 u = inwardDirection(mesh, face, a, b, c);
    vs.planes.push_back(Plane3::through(a, -u));
  }
  return vs;
}

VerticalSpace verticalSpaceEdge(const Mesh& mesh, Index edge) {
  const auto& e = mesh.edges()[edge];
  const Vec3& a = mesh.vertex(e[0]);
  const Vec3& b = mesh.vertex(e[1]);
  const Vec3 d = (b - a).normalized();
  VerticalSpace vs;
  vs.anchor = {PrimitiveKind::Edge, edge};
  vs.planes.push_back(Plane3::through(a, -d));
  vs.planes.push_back(Plane3::through(b, d));
  for (Index f : mesh.edgeFaces(edge)) {
    const auto& t = mesh.faces()[f];
    Index third = t[0];
    for (Index k : t)
      if (k != e[0] && k != e[1]) third = k;
    const Vec3 u = inwardDirection(mesh, f, a, b, mesh.vertex(third));
    vs.planes.push_back(Plane3::through(a, u));
  }
  return vs;
}

VerticalSpace verticalSpace(const Mesh& mesh, PrimitiveRef prim) {
  return prim.kind == PrimitiveKind::Edge ? verticalSpaceEdge(mesh, prim.id) : verticalSpaceFace(mesh, prim.id);
}

ConvexPolytope convexPoly(const VoronoiCell& cell, const VerticalSpace& space) {
  ConvexPolytope poly = cell.polytope;
  for (const Plane3& p : space.planes) {
    if (poly.empty()) break;
    poly.clip(p, PlaneSource::VerticalSpace, space.anchor.id);
  }
  return poly;
}

bool cannotInterceptEdge(const Mesh& mesh, Index v, Index edge, const ConvexPolytope& poly, double margin) {
  const auto& e = mesh.edges()[edge];
  if (e[0] == v || e[1] == v) return false;
  if (poly.empty()) return true;
  const Line3 line = Line3::through(mesh.vertex(e[0]), mesh.vertex(e[1]));
  const Vec3& site = mesh.vertex(v);
  for (const auto& c : poly.corners())
    if (!closerToPointThanLine(c.position, site, line, margin)) return false;
  return true;
}

bool cannotInterceptFace(const Mesh& mesh, Index v, Index face, const ConvexPolytope& poly, double margin) {
  const auto& t = mesh.faces()[face];
  if (t[0] == v || t[1] == v || t[2] == v) return false;
  if (poly.empty()) return true;
  const Plane3 plane = Plane3::through(mesh.vertex(t[0]), faceNormal(mesh, face));
  const Vec3& site = mesh.vertex(v);
  for (const auto& c : poly.corners())
    if (!closerToPointThanPlane(c.position, site, plane, margin)) return false;
  return true;
}

bool cannotIntercept(const Mesh& mesh, Index v, PrimitiveRef prim, const ConvexPolytope& poly, double margin) {
  return prim.kind == PrimitiveKind::Edge ? cannotInterceptEdge(mesh, v, prim.id, poly, margin)
                                          : cannotInterceptFace(mesh, v, prim.id, poly, margin);
}

std::vector<Interceptor> floodInterceptors(const Mesh& mesh, PrimitiveRef prim, const std::vector<VoronoiCell>& cells,
                                           const NeighborGraph& graph, double margin, FloodScratch& scratch) {
  std::vector<Interceptor> out;
  const VerticalSpace space = verticalSpace(mesh, prim);

  if (++scratch.round_ == 0) {
    std::fill(scratch.stamp_.begin(), scratch.stamp_.end(), 0u);
    scratch.round_ = 1;
  }
  const std::uint32_t round = scratch.round_;
  auto& queue = scratch.queue_;
  queue.clear();
  auto enqueue = [&](Index v) {
    if (scratch.stamp_[v] == round) return;
    scratch.stamp_[v] = round;
    queue.push_back(v);
  };
  if (prim.kind == PrimitiveKind::Edge) {
    for (Index v : mesh.edges()[prim.id]) enqueue(v);
  } else {
    for (Index v : mesh.faces()[prim.id]) enqueue(v);
  }

  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Index v = queue[head];
    ConvexPolytope& poly = scratch.poly_;
    poly = cells[v].polytope;
    for (const Plane3& p : space.planes) {
      if (poly.empty()) break;
      poly.clip(p, PlaneSource::VerticalSpace, prim.id);
    }
    if (cannotIntercept(mesh, v, prim, poly, margin)) continue;
    out.push_back({v, inflated(poly.bbox(), margin)});
    for (Index u : graph.neighbors(v)) enqueue(u);
  }
  std::sort(out.begin(), out.end(), [](const Interceptor& a, const Interceptor& b) { return a.vertex < b.vertex; });
  return out;
}

InterceptionTable buildTable(const Mesh& mesh, const std::vector<VoronoiCell>& cells, const NeighborGraph& graph,
                             const TableBuildOptions& opts) {
  const std::size_t ne = mesh.edgeCount();
  const std::size_t total = ne + mesh.faceCount();
  auto primAt = [&](std::size_t i) {
    return i < ne ? PrimitiveRef{PrimitiveKind::Edge, Index(i)} : PrimitiveRef{PrimitiveKind::Face, Index(i - ne)};
  };

  const unsigned threads = std::max(1u, opts.threads);
  std::vector<std::vector<std::pair<PrimitiveRef, Interceptor>>> perWorker(threads);
  parallelChunks(total, threads, [&](unsigned w, std::size_t begin, std::size_t end) {
    FloodScratch scratch(mesh.vertexCount());
    auto& sink = perWorker[w];
    for (std::size_t i = begin; i < end; ++i) {
      const PrimitiveRef prim = primAt(i);
      for (const Interceptor& it : floodInterceptors(mesh, prim, cells, graph, opts.margin, scratch))
        sink.emplace_back(prim, it);
    }
  });

  InterceptionTable table;
  table.lists.resize(mesh.vertexCount());
  std::vector<std::size_t> counts(mesh.vertexCount(), 0);
  for (const auto& sink : perWorker)
    for (const auto& [prim, it] : sink) ++counts[it.vertex];
  for (std::size_t v = 0; v < counts.size(); ++v) table.lists[v].reserve(counts[v]);
  // Workers cover ascending primitive ranges, so appending in worker order
  // keeps edges before faces and ids ascending.
  for (auto& sink : perWorker) {
    for (const auto& [prim, it] : sink) table.lists[it.vertex].push_back({prim, it.box});
    std::vector<std::pair<PrimitiveRef, Interceptor>>().swap(sink);
  }
  return table;
}

std::size_t InterceptionTable::totalEntries() const {
  std::size_t n = 0;
  for (const auto& l : lists) n += l.size();
  return n;
}

std::size_t InterceptionTable::memoryBytes() const {
  std::size_t n = lists.capacity() * sizeof(lists[0]);
  for (const auto& l : lists) n += l.capacity() * sizeof(InterceptionEntry);
  return n;
}

TableStats tableStats(const InterceptionTable& table, const std::vector<double>& cellVolumes) {
  TableStats s;
  const std::size_t n = table.lists.size();
  if (n == 0) return s;
  double wsum = 0;
  double e1 = 0, f1 = 0, e2 = 0, f2 = 0;
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t ne = 0, nf = 0;
    for (const auto& entry : table.lists[v]) (entry.primitive.kind == PrimitiveKind::Edge ? ne : nf)++;
    const double w = v < cellVolumes.size() ? cellVolumes[v] : 0.0;
    e1 += double(ne);
    f1 += double(nf);
    e2 += w * double(ne);
    f2 += w * double(nf);
    wsum += w;
    s.edges.maximum = std::max(s.edges.maximum, ne);
    s.faces.maximum = std::max(s.faces.maximum, nf);
    s.total.maximum = std::max(s.total.maximum, ne + nf);
  }
  s.edges.average = e1 / double(n);
  s.faces.average = f1 / double(n);
  s.total.average = (e1 + f1) / double(n);
  if (wsum > 0) {
    s.edges.weightedAverage = e2 / wsum;
    s.faces.weightedAverage = f2 / wsum;
    s.total.weightedAverage = (e2 + f2) / wsum;
  }
  return s;
}

std::vector<std::size_t> listLengthHistogram(const InterceptionTable& table) {
  std::vector<std::size_t> bins;
  for (const auto& l : table.lists) {
    const std::size_t bin = l.empty() ? 0 : std::size_t(std::bit_width(l.size()) - 1);
    if (bins.size() <= bin) bins.resize(bin + 1, 0);
    ++bins[bin];
  }
  return bins;
}

void writeLengthHistogramCsv(const InterceptionTable& table, std::ostream& out) {
  std::map<std::size_t, std::size_t> counts;
  for (const auto& l : table.lists) ++counts[l.size()];
  out << "length,vertices\n";
  for (const auto& [len, n] : counts) out << len << ',' << n << '\n';
}

}  // namespace p2m
