#include "p2m/query.hpp"

#include "p2m/parallel.hpp"

#include <chrono>
#include <sstream>

namespace p2m {

QueryResult evalVertex(const Mesh& mesh, Index v, const Vec3& q) {
  const Vec3& p = mesh.vertex(v);
  return {(q - p).norm(), p, {PrimitiveKind::Vertex, v}};
}

QueryResult evalEdge(const Mesh& mesh, Index e, const Vec3& q) {
  const auto& ev = mesh.edges()[e];
  const auto s = pointSegmentDistance(q, mesh.vertex(ev[0]), mesh.vertex(ev[1]));
  if (s.endpoint >= 0) return evalVertex(mesh, ev[s.endpoint], q);
  return {s.distance, s.closest, {PrimitiveKind::Edge, e}};
}

QueryResult evalFace(const Mesh& mesh, Index f, const Vec3& q) {
  const auto& t = mesh.faces()[f];
  const auto r = pointTriangleDistance(q, mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]));
  switch (r.feature) {
    case Feature::Vertex: return evalVertex(mesh, t[r.index], q);
    case Feature::Edge: return {r.distance, r.closest, {PrimitiveKind::Edge, mesh.faceEdges()[f][r.index]}};
    case Feature::Face: break;
  }
  return {r.distance, r.closest, {PrimitiveKind::Face, f}};
}

namespace {

void checkDomain(const P2MIndex& index, const Vec3& q) {
  if (!index.inDomain(q)) {
    std::ostringstream msg;
    msg << "query point (" << q.x() << ", " << q.y() << ", " << q.z()
        << ") lies outside the index domain; rebuild with a larger domain";
    throw OutOfDomainError(msg.str());
  }
}

}  // namespace

QueryResult resolveCandidates(const P2MIndex& index, const Vec3& q, Index nearestVertex, QueryCounters* counters) {
  const Mesh& mesh = index.mesh();
  const double slack = index.metadata().tolerance;
  QueryResult best = evalVertex(mesh, nearestVertex, q);
  const auto& list = index.table().lists[nearestVertex];
  std::uint64_t hits = 0, tested = 0;
  index.rtrees()[nearestVertex].forEachContaining(q, [&](std::uint32_t item) {
    ++hits;
    const PrimitiveRef prim = list[item].primitive;
    QueryResult r;
    if (prim.kind == PrimitiveKind::Edge) {
      const auto& slab = index.edgeSlab(prim.id);
      if (slab[0].signedDistance(q) > slack || slab[1].signedDistance(q) > slack) return;
      r = evalEdge(mesh, prim.id, q);
    } else {
      const auto& space = index.faceSpace(prim.id);
      if (space[0].signedDistance(q) > slack || space[1].signedDistance(q) > slack ||
          space[2].signedDistance(q) > slack)
        return;
      r = evalFace(mesh, prim.id, q);
    }
    ++tested;
    if (betterThan(r, best)) best = r;
  });
  if (counters) {
    counters->candidates += hits;
    counters->tested += tested;
  }
  return best;
}

QueryResult p2mQuery(const P2MIndex& index, const Vec3& q, QueryCounters* counters) {
  checkDomain(index, q);
  const auto nb = index.kdtree().nearest(q, counters ? &counters->kdNodes : nullptr);
  return resolveCandidates(index, q, nb.id, counters);
}

QueryResult bruteForceQuery(const Mesh& mesh, const Vec3& q) {
  QueryResult best;
  best.distance = std::numeric_limits<double>::infinity();
  for (Index f = 0; f < mesh.faceCount(); ++f) {
    const QueryResult r = evalFace(mesh, f, q);
    if (betterThan(r, best)) best = r;
  }
  for (Index e = 0; e < mesh.edgeCount(); ++e) {
    if (!mesh.edgeFaces(e).empty()) continue;
    const QueryResult r = evalEdge(mesh, e, q);
    if (betterThan(r, best)) best = r;
  }
  for (Index v = 0; v < mesh.vertexCount(); ++v) {
    const QueryResult r = evalVertex(mesh, v, q);
    if (betterThan(r, best)) best = r;
  }
  return best;
}

BatchResult queryBatch(const P2MIndex& index, std::span<const Vec3> points, unsigned threads) {
  using Clock = std::chrono::steady_clock;
  BatchResult out;
  out.results.resize(points.size());
  for (const Vec3& q : points) checkDomain(index, q);

  threads = std::max(1u, threads);
  std::vector<BatchTimings> perWorker(threads);
  std::vector<QueryCounters> perCounters(threads);
  const auto start = Clock::now();
  parallelChunks(points.size(), threads, [&](unsigned w, std::size_t begin, std::size_t end) {
    std::vector<Index> nearest(end - begin);
    auto& counters = perCounters[w];
    const auto t0 = Clock::now();
    for (std::size_t i = begin; i < end; ++i) nearest[i - begin] = index.kdtree().nearest(points[i], &counters.kdNodes).id;
    const auto t1 = Clock::now();
    for (std::size_t i = begin; i < end; ++i)
      out.results[i] = resolveCandidates(index, points[i], nearest[i - begin], &counters);
    const auto t2 = Clock::now();
    perWorker[w].kdSearch = std::chrono::duration<double>(t1 - t0).count();
    perWorker[w].resolve = std::chrono::duration<double>(t2 - t1).count();
  });
  out.timings.wall = std::chrono::duration<double>(Clock::now() - start).count();
  for (unsigned w = 0; w < threads; ++w) {
    out.timings.kdSearch += perWorker[w].kdSearch;
    out.timings.resolve += perWorker[w].resolve;
    out.counters.kdNodes += perCounters[w].kdNodes;
    out.counters.candidates += perCounters[w].candidates;
    out.counters.tested += perCounters[w].tested;
  }
  return out;
}

}  // namespace p2m
