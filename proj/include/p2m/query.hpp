#pragma once

#include "p2m/index.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace p2m {

/// Closest primitive, closest point and minimum distance for one query.
struct QueryResult {
  double distance = 0;
  Vec3 closest = Vec3::Zero();
  PrimitiveRef primitive;

  bool operator==(const QueryResult& o) const {
    return distance == o.distance && closest == o.closest && primitive == o.primitive;
  }
};

/// Repo-wide ordering: distance, then vertex < edge < face, then id.
inline bool betterThan(const QueryResult& a, const QueryResult& b) {
  if (a.distance != b.distance) return a.distance < b.distance;
  if (a.primitive.kind != b.primitive.kind) return a.primitive.kind < b.primitive.kind;
  return a.primitive.id < b.primitive.id;
}

// Per-primitive evaluations shared by every solver. A feature yields the same
// bitwise distance whichever solver evaluates it.
QueryResult evalVertex(const Mesh& mesh, Index v, const Vec3& q);
QueryResult evalEdge(const Mesh& mesh, Index e, const Vec3& q);
QueryResult evalFace(const Mesh& mesh, Index f, const Vec3& q);

/// Per-query work counters.
struct QueryCounters {
  std::uint64_t kdNodes = 0;
  std::uint64_t candidates = 0;  // R-tree hits
  std::uint64_t tested = 0;      // candidates that passed the vertical-space gate
};

/// Nearest vertex, then the vertex's R-tree candidates gated by their
/// vertical spaces. Throws OutOfDomainError outside the index domain.
QueryResult p2mQuery(const P2MIndex& index, const Vec3& q, QueryCounters* counters = nullptr);

/// Second half of p2mQuery given the nearest vertex.
QueryResult resolveCandidates(const P2MIndex& index, const Vec3& q, Index nearestVertex,
                              QueryCounters* counters = nullptr);

/// Exhaustive minimum over every face, wire edge and vertex.
QueryResult bruteForceQuery(const Mesh& mesh, const Vec3& q);

struct BatchTimings {
  double kdSearch = 0;   // seconds, summed over workers
  double resolve = 0;    // seconds, summed over workers
  double wall = 0;       // elapsed seconds for the whole batch
};

struct BatchResult {
  std::vector<QueryResult> results;
  BatchTimings timings;
  QueryCounters counters;
};

/// Runs p2mQuery over `points` on `threads` workers. Results do not depend
/// on the thread count.
BatchResult queryBatch(const P2MIndex& index, std::span<const Vec3> points, unsigned threads);

}  // namespace p2m
