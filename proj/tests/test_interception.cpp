#include "oracles.hpp"

#include "p2m/bvh.hpp"
#include "p2m/corpus.hpp"
#include "p2m/interception.hpp"
#include "p2m/query.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

using namespace p2m;

namespace {

struct Prepared {
  Mesh mesh;
  VoronoiConfig cfg;
  KdTree tree;
  std::vector<VoronoiCell> cells;
  NeighborGraph graph;
  double margin = 0;
};

Prepared prepare(Mesh mesh) {
  Prepared p;
  p.mesh = std::move(mesh);
  p.cfg = VoronoiConfig::around(p.mesh.bounds());
  p.tree = KdTree(p.mesh.vertices());
  p.cells = buildCells(p.mesh.vertices(), p.tree, p.cfg);
  p.graph = NeighborGraph(p.cells);
  p.margin = p.cfg.tolerance();
  return p;
}

std::vector<PrimitiveRef> primitives(const Mesh& m) {
  std::vector<PrimitiveRef> out;
  for (Index e = 0; e < m.edgeCount(); ++e) out.push_back({PrimitiveKind::Edge, e});
  for (Index f = 0; f < m.faceCount(); ++f) out.push_back({PrimitiveKind::Face, f});
  return out;
}

std::vector<Index> vertexIds(const std::vector<Interceptor>& its) {
  std::vector<Index> out;
  for (const auto& it : its) out.push_back(it.vertex);
  return out;
}

// Distance to the face interior when q projects strictly inside it, else +inf.
double faceInteriorDistance(const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 n = (b - a).cross(c - a).normalized();
  const Vec3 p = q - n * (q - a).dot(n);
  const bool inside = (b - a).cross(p - a).dot(n) > 0 && (c - b).cross(p - b).dot(n) > 0 &&
                      (a - c).cross(p - c).dot(n) > 0;
  return inside ? std::abs((q - a).dot(n)) : std::numeric_limits<double>::infinity();
}

}  // namespace

TEST(VerticalSpace, RightTrianglePrism) {
  const Mesh m = Mesh::fromFaces({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
  const VerticalSpace vs = verticalSpaceFace(m, 0);
  ASSERT_EQ(vs.planes.size(), 3u);
  EXPECT_TRUE(vs.contains(Vec3(0.25, 0.25, 5)));
  EXPECT_FALSE(vs.contains(Vec3(-1, -1, 0)));
  const Vec3 centroid(1.0 / 3, 1.0 / 3, 0);
  for (const Plane3& p : vs.planes) EXPECT_LT(p.signedDistance(centroid), 0.0);
}

TEST(VerticalSpace, FaceMembershipEqualsProjectionInside) {
  Rng rng(501);
  for (int t = 0; t < 20; ++t) {
    const Vec3 a = oracle::randomPoint(rng, -1, 1), b = oracle::randomPoint(rng, -1, 1),
               c = oracle::randomPoint(rng, -1, 1);
    if ((b - a).cross(c - a).norm() < 0.05) continue;
    const Mesh m = Mesh::fromFaces({a, b, c}, {{0, 1, 2}});
    const VerticalSpace vs = verticalSpaceFace(m, 0);
    const Vec3 n = (b - a).cross(c - a);
    for (int i = 0; i < 10000; ++i) {
      const Vec3 q = oracle::randomPoint(rng, -2, 2);
      // Barycentric coordinates of the projection.
      const Vec3 p = q - n * ((q - a).dot(n) / n.squaredNorm());
      const double wa = (c - b).cross(p - b).dot(n) / n.squaredNorm();
      const double wb = (a - c).cross(p - c).dot(n) / n.squaredNorm();
      const double wc = 1 - wa - wb;
      if (std::min({std::abs(wa), std::abs(wb), std::abs(wc)}) < 1e-9) continue;
      EXPECT_EQ(vs.contains(q), wa > 0 && wb > 0 && wc > 0);
    }
  }
}

TEST(VerticalSpace, PlaneCounts) {
  const Mesh wire = Mesh::fromFaces({{0, 0, 0}, {2, 0, 0}}, {}, {{0, 1}});
  const VerticalSpace slab = verticalSpaceEdge(wire, 0);
  EXPECT_EQ(slab.planes.size(), 2u);
  EXPECT_TRUE(slab.contains(Vec3(1, 5, -3)));
  EXPECT_FALSE(slab.contains(Vec3(-0.1, 0, 0)));
  EXPECT_FALSE(slab.contains(Vec3(2.1, 0, 0)));
  // Endpoints lie on the slab boundary.
  EXPECT_EQ(slab.planes[0].signedDistance(Vec3(0, 0, 0)), 0.0);
  EXPECT_EQ(slab.planes[1].signedDistance(Vec3(2, 0, 0)), 0.0);

  const Mesh open = Mesh::fromFaces({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
  for (Index e = 0; e < open.edgeCount(); ++e) EXPECT_EQ(verticalSpaceEdge(open, e).planes.size(), 3u);
  const Mesh closed = corpus::tetrahedron();
  for (Index e = 0; e < closed.edgeCount(); ++e) EXPECT_EQ(verticalSpaceEdge(closed, e).planes.size(), 4u);
  for (Index f = 0; f < closed.faceCount(); ++f) EXPECT_EQ(verticalSpaceFace(closed, f).planes.size(), 3u);
}

TEST(VerticalSpace, RoofEdgeMatchesClosestFeature) {
  // Ridge along x; faces in z = 0 (towards +y) and y = 0 (towards -z).
  const Mesh roof = Mesh::fromFaces({{0, 0, 0}, {1, 0, 0}, {0.5, 10, 0}, {0.5, 0, -10}}, {{0, 1, 2}, {1, 0, 3}});
  Index ridge = 0;
  for (Index e = 0; e < roof.edgeCount(); ++e)
    if (roof.edgeFaces(e).size() == 2) ridge = e;
  const VerticalSpace vs = verticalSpaceEdge(roof, ridge);
  EXPECT_TRUE(vs.contains(Vec3(0.5, -1, 1)));
  EXPECT_FALSE(vs.contains(Vec3(0.5, 0.3, -0.3)));

  Rng rng(502);
  const Vec3 a(0, 0, 0), b(1, 0, 0);
  for (int i = 0; i < 10000; ++i) {
    const Vec3 q(rng.uniform(0.2, 0.8), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const double de = oracle::segmentDistance(q, a, b);
    const double df = std::min(faceInteriorDistance(q, roof.vertex(0), roof.vertex(1), roof.vertex(2)),
                               faceInteriorDistance(q, roof.vertex(1), roof.vertex(0), roof.vertex(3)));
    if (std::abs(de - df) < 1e-9 || de < 1e-9) continue;
    EXPECT_EQ(vs.contains(q), de < df) << q.transpose();
  }
}

TEST(ConvexPoly, UnchangedOrEmpty) {
  const Prepared p = prepare(corpus::cube());
  VerticalSpace everything;
  everything.planes.push_back(Plane3{Vec3::UnitX(), 1e6});
  const ConvexPolytope same = convexPoly(p.cells[0], everything);
  EXPECT_EQ(same.extremePoints(), p.cells[0].polytope.extremePoints());
  VerticalSpace nothing;
  nothing.planes.push_back(Plane3{Vec3::UnitX(), -1e6});
  EXPECT_TRUE(convexPoly(p.cells[0], nothing).empty());
}

TEST(ConvexPoly, MatchesPlaneTripleEnumeration) {
  const Prepared p = prepare(corpus::gear(6));
  Rng rng(503);
  const auto prims = primitives(p.mesh);
  int compared = 0;
  for (int i = 0; i < 300; ++i) {
    const Index v = Index(rng.next() % p.mesh.vertexCount());
    const PrimitiveRef prim = prims[rng.next() % prims.size()];
    const VerticalSpace vs = verticalSpace(p.mesh, prim);
    const ConvexPolytope poly = convexPoly(p.cells[v], vs);
    std::vector<Plane3> planes;
    for (const auto& tp : p.cells[v].polytope.planes()) planes.push_back(tp.plane);
    planes.insert(planes.end(), vs.planes.begin(), vs.planes.end());
    const auto expected = oracle::enumerateVertices(planes, 1e-9 * p.cfg.halfExtent);
    if (expected.size() < 4) {
      EXPECT_LE(poly.corners().size(), 4u);
      continue;
    }
    ++compared;
    EXPECT_LE(oracle::hausdorff(poly.extremePoints(), expected), 1e-8 * p.cfg.halfExtent) << "case " << i;
  }
  EXPECT_GT(compared, 20);
}

TEST(Filter, IncidentAndEmpty) {
  const Prepared p = prepare(corpus::tetrahedron());
  const ConvexPolytope empty;
  for (Index e = 0; e < p.mesh.edgeCount(); ++e) {
    const auto& ev = p.mesh.edges()[e];
    EXPECT_FALSE(cannotInterceptEdge(p.mesh, ev[0], e, empty, p.margin));
    EXPECT_FALSE(cannotInterceptEdge(p.mesh, ev[1], e, empty, p.margin));
    for (Index v = 0; v < 4; ++v)
      if (v != ev[0] && v != ev[1]) { EXPECT_TRUE(cannotInterceptEdge(p.mesh, v, e, empty, p.margin)); }
  }
  for (Index f = 0; f < p.mesh.faceCount(); ++f)
    for (Index v : p.mesh.faces()[f]) EXPECT_FALSE(cannotInterceptFace(p.mesh, v, f, empty, p.margin));
}

TEST(Filter, RejectionsAreSoundBySampling) {
  // Wherever the filter excludes (v, prim) with a non-empty poly, no sampled
  // point of the poly may have prim's open interior as its closest feature.
  const Prepared p = prepare(corpus::gear(8));
  const BvhTree bvh(p.mesh);
  Rng rng(504);
  const auto prims = primitives(p.mesh);
  int pairs = 0, attempts = 0;
  while (pairs < 20 && attempts < 100000) {
    ++attempts;
    const Index v = Index(rng.next() % p.mesh.vertexCount());
    const PrimitiveRef prim = prims[rng.next() % prims.size()];
    const ConvexPolytope poly = convexPoly(p.cells[v], verticalSpace(p.mesh, prim));
    if (poly.empty() || !cannotIntercept(p.mesh, v, prim, poly, p.margin)) continue;
    const Aabb box = poly.bbox();
    int accepted = 0;
    for (int tries = 0; accepted < 100000 && tries < 2000000; ++tries) {
      Vec3 x;
      for (int k = 0; k < 3; ++k) x[k] = rng.uniform(box.min()[k], box.max()[k]);
      if (!oracle::insidePlanes(poly, x)) continue;
      ++accepted;
      const QueryResult r = bvh.query(x);
      ASSERT_FALSE(r.primitive == prim) << "vertex " << v << " prim " << int(prim.kind) << ":" << prim.id;
    }
    // Slivers that rejection sampling cannot hit do not count.
    pairs += accepted > 0;
  }
  EXPECT_EQ(pairs, 20);
}

TEST(Flooding, TetrahedronEdgeInterceptorsMatchExhaustiveFilter) {
  // With the four-plane edge space, the cell of a vertex opposite an edge
  // misses the edge's space entirely, so only the endpoints remain.
  Prepared p = prepare(corpus::tetrahedron());
  FloodScratch scratch(p.mesh.vertexCount());
  for (Index e = 0; e < p.mesh.edgeCount(); ++e) {
    const PrimitiveRef prim{PrimitiveKind::Edge, e};
    const auto flooded = vertexIds(floodInterceptors(p.mesh, prim, p.cells, p.graph, p.margin, scratch));
    EXPECT_EQ(flooded, oracle::exhaustiveInterceptors(p.mesh, prim, p.cells, p.margin));
    const auto& ev = p.mesh.edges()[e];
    EXPECT_EQ(flooded, (std::vector<Index>{ev[0], ev[1]}));
  }
  for (Index f = 0; f < p.mesh.faceCount(); ++f) {
    const PrimitiveRef prim{PrimitiveKind::Face, f};
    const auto flooded = vertexIds(floodInterceptors(p.mesh, prim, p.cells, p.graph, p.margin, scratch));
    EXPECT_EQ(flooded, (std::vector<Index>{0, 1, 2, 3}));
  }
}

TEST(Flooding, EqualsExhaustiveOnSmallMeshes) {
  for (Mesh m : {corpus::cube(), corpus::icosphere(2), corpus::gear(12), corpus::torus(40, 5),
                 corpus::bumpySphere(2, 9)}) {
    Prepared p = prepare(std::move(m));
    FloodScratch scratch(p.mesh.vertexCount());
    for (const PrimitiveRef prim : primitives(p.mesh)) {
      const auto its = floodInterceptors(p.mesh, prim, p.cells, p.graph, p.margin, scratch);
      ASSERT_EQ(vertexIds(its), oracle::exhaustiveInterceptors(p.mesh, prim, p.cells, p.margin))
          << "prim " << int(prim.kind) << ":" << prim.id;
      const auto ids = vertexIds(its);
      auto seeds = prim.kind == PrimitiveKind::Edge ? std::vector<Index>(p.mesh.edges()[prim.id].begin(),
                                                                        p.mesh.edges()[prim.id].end())
                                                    : std::vector<Index>(p.mesh.faces()[prim.id].begin(),
                                                                        p.mesh.faces()[prim.id].end());
      for (Index s : seeds) EXPECT_TRUE(std::binary_search(ids.begin(), ids.end(), s));
    }
  }
}

TEST(Table, ContainsIncidentPrimitivesWithoutRepeats) {
  Prepared p = prepare(corpus::bumpySphere(3, 4));
  const InterceptionTable table = buildTable(p.mesh, p.cells, p.graph, {p.margin, 1});
  for (Index v = 0; v < p.mesh.vertexCount(); ++v) {
    const auto& list = table.lists[v];
    std::set<PrimitiveRef> seen;
    for (std::size_t k = 0; k < list.size(); ++k) {
      EXPECT_TRUE(seen.insert(list[k].primitive).second);
      if (k > 0) { EXPECT_LT(list[k - 1].primitive, list[k].primitive); }
      // No entry without a non-empty poly.
      EXPECT_FALSE(convexPoly(p.cells[v], verticalSpace(p.mesh, list[k].primitive)).empty());
    }
    for (Index e : p.mesh.vertexEdges(v)) EXPECT_TRUE(seen.count({PrimitiveKind::Edge, e}));
    for (Index f : p.mesh.vertexFaces(v)) EXPECT_TRUE(seen.count({PrimitiveKind::Face, f}));
  }
}

TEST(Table, ThreadCountDoesNotChangeTable) {
  Prepared p = prepare(corpus::gear(10));
  const InterceptionTable a = buildTable(p.mesh, p.cells, p.graph, {p.margin, 1});
  const InterceptionTable b = buildTable(p.mesh, p.cells, p.graph, {p.margin, 3});
  ASSERT_EQ(a.lists.size(), b.lists.size());
  for (std::size_t v = 0; v < a.lists.size(); ++v) {
    ASSERT_EQ(a.lists[v].size(), b.lists[v].size());
    for (std::size_t k = 0; k < a.lists[v].size(); ++k) {
      EXPECT_EQ(a.lists[v][k].primitive, b.lists[v][k].primitive);
      EXPECT_EQ(a.lists[v][k].box.min(), b.lists[v][k].box.min());
      EXPECT_EQ(a.lists[v][k].box.max(), b.lists[v][k].box.max());
    }
  }
}

TEST(Table, QueryCriticalCompleteness) {
  for (Mesh m : {corpus::gear(16), corpus::bumpySphere(3, 6), corpus::torus(60, 6)}) {
    Prepared p = prepare(std::move(m));
    const InterceptionTable table = buildTable(p.mesh, p.cells, p.graph, {p.margin, 1});
    const BvhTree bvh(p.mesh);
    const auto pts = samplePoints(p.mesh.bounds(), 3, 100000, 505);
    for (const Vec3& q : pts) {
      const auto nb = p.tree.nearest(q);
      const QueryResult best = bvh.query(q);
      if (best.primitive.kind == PrimitiveKind::Vertex) {
        EXPECT_LE(nb.distance, best.distance);
        continue;
      }
      const auto& list = table.lists[nb.id];
      auto it = std::find_if(list.begin(), list.end(),
                             [&](const InterceptionEntry& e) { return e.primitive == best.primitive; });
      ASSERT_TRUE(it != list.end()) << "missing primitive for q = " << q.transpose();
      EXPECT_TRUE(it->box.contains(q));
    }
  }
}

TEST(Stats, Formulas) {
  InterceptionTable uniform;
  uniform.lists.assign(5, std::vector<InterceptionEntry>(7, InterceptionEntry{{PrimitiveKind::Face, 0}, Aabb()}));
  const TableStats u = tableStats(uniform, std::vector<double>(5, 2.0));
  EXPECT_DOUBLE_EQ(u.total.average, 7);
  EXPECT_DOUBLE_EQ(u.total.weightedAverage, 7);
  EXPECT_EQ(u.total.maximum, 7u);

  InterceptionTable two;
  two.lists.resize(2);
  two.lists[0].assign(2, InterceptionEntry{{PrimitiveKind::Edge, 0}, Aabb()});
  two.lists[1].assign(4, InterceptionEntry{{PrimitiveKind::Edge, 0}, Aabb()});
  const TableStats s = tableStats(two, {3.0, 1.0});
  EXPECT_DOUBLE_EQ(s.total.average, 3.0);
  EXPECT_DOUBLE_EQ(s.total.weightedAverage, 2.5);
  EXPECT_EQ(s.total.maximum, 4u);
  EXPECT_DOUBLE_EQ(s.edges.average, 3.0);
  EXPECT_EQ(s.faces.maximum, 0u);
}

TEST(Stats, HistogramCoversEveryVertex) {
  Prepared p = prepare(corpus::gear(12));
  const InterceptionTable table = buildTable(p.mesh, p.cells, p.graph, {p.margin, 1});
  std::size_t total = 0;
  for (std::size_t c : listLengthHistogram(table)) total += c;
  EXPECT_EQ(total, p.mesh.vertexCount());
  std::ostringstream csv;
  writeLengthHistogramCsv(table, csv);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "length,vertices");
  std::size_t sum = 0;
  while (std::getline(in, line)) sum += std::stoul(line.substr(line.find(',') + 1));
  EXPECT_EQ(sum, p.mesh.vertexCount());
}
