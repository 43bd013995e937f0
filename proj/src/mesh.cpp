#include "p2m/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>
#include <unordered_set>

namespace p2m {
namespace {

std::uint64_t pairKey(Index a, Index b) {
  if (a > b) std::swap(a, b);
  return (std::uint64_t(a) << 32) | b;
}

struct TripleHash {
  std::size_t operator()(const std::array<Index, 3>& t) const {
    std::uint64_t h = 1469598103934665603ull;
    for (Index i : t) h = (h ^ i) * 1099511628211ull;
    return h;
  }
};

void buildCsr(
    std::size_t count, const std::vector<std::pair<Index, Index>>& pairs, std::vector<Index>& offsets,
    std::vector<Index>& ids) {
  offsets.assign(count + 1, 0);
  for (const auto& [key, _] : pairs) ++offsets[key + 1];
  for (std::size_t i = 0; i < count; ++i) offsets[i + 1] += offsets[i];
  ids.resize(pairs.size());
  std::vector<Index> cursor(offsets.begin(), offsets.end() - 1);
  for (const auto& [key, value] : pairs) ids[cursor[key]++] = value;
}

}  // namespace

Mesh Mesh::fromFaces(
    std::vector<Vec3> vertices, const std::vector<std::array<Index, 3>>& faces,
    const std::vector<std::array<Index, 2>>& wireEdges, LoadReport* report) {
  Mesh m;
  m.vertices_ = std::move(vertices);
  const std::size_t nv = m.vertices_.size();
  for (const Vec3& p : m.vertices_)
    if (!p.allFinite()) throw MeshError("mesh has a non-finite vertex coordinate");

  LoadReport local;
  local.rawVertices = nv;
  local.rawFaces = faces.size();

  std::unordered_set<std::array<Index, 3>, TripleHash> seen;
  seen.reserve(faces.size() * 2);
  m.faces_.reserve(faces.size());
  for (const auto& f : faces) {
    for (Index i : f)
      if (i >= nv) throw MeshError("face references vertex " + std::to_string(i) + " out of range");
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
      ++local.degenerateFaces;
      continue;
    }
    const Vec3& a = m.vertices_[f[0]];
    const Vec3& b = m.vertices_[f[1]];
    const Vec3& c = m.vertices_[f[2]];
    const double longest2 =
        std::max({(b - a).squaredNorm(), (c - b).squaredNorm(), (a - c).squaredNorm()});
    if ((b - a).cross(c - a).norm() <= 1e-12 * longest2) {
      ++local.degenerateFaces;
      continue;
    }
    std::array<Index, 3> key = f;
    std::sort(key.begin(), key.end());
    if (!seen.insert(key).second) {
      ++local.duplicateFaces;
      continue;
    }
    m.faces_.push_back(f);
  }

  std::unordered_map<std::uint64_t, Index> edgeIds;
  edgeIds.reserve(m.faces_.size() * 2);
  auto edgeId = [&](Index a, Index b) {
    auto [it, inserted] = edgeIds.try_emplace(pairKey(a, b), Index(m.edges_.size()));
    if (inserted) m.edges_.push_back({std::min(a, b), std::max(a, b)});
    return it->second;
  };
  m.faceEdges_.resize(m.faces_.size());
  for (std::size_t f = 0; f < m.faces_.size(); ++f)
    for (int i = 0; i < 3; ++i) m.faceEdges_[f][i] = edgeId(m.faces_[f][i], m.faces_[f][(i + 1) % 3]);
  for (const auto& w : wireEdges) {
    if (w[0] >= nv || w[1] >= nv) throw MeshError("wire edge references a vertex out of range");
    if (w[0] != w[1]) edgeId(w[0], w[1]);
  }

  std::vector<std::pair<Index, Index>> pairs;
  pairs.reserve(m.faces_.size() * 3);
  for (std::size_t f = 0; f < m.faces_.size(); ++f)
    for (Index e : m.faceEdges_[f]) pairs.emplace_back(e, Index(f));
  buildCsr(m.edges_.size(), pairs, m.edgeFaceOffsets_, m.edgeFaceIds_);

  pairs.clear();
  for (std::size_t e = 0; e < m.edges_.size(); ++e)
    for (Index v : m.edges_[e]) pairs.emplace_back(v, Index(e));
  buildCsr(nv, pairs, m.vertexEdgeOffsets_, m.vertexEdgeIds_);

  pairs.clear();
  for (std::size_t f = 0; f < m.faces_.size(); ++f)
    for (Index v : m.faces_[f]) pairs.emplace_back(v, Index(f));
  buildCsr(nv, pairs, m.vertexFaceOffsets_, m.vertexFaceIds_);

  if (report) *report = local;
  return m;
}

Aabb Mesh::bounds() const {
  Aabb box;
  for (const Vec3& p : vertices_) box.extend(p);
  return box;
}

std::size_t Mesh::memoryBytes() const {
  auto bytes = [](const auto& v) { return v.capacity() * sizeof(v[0]); };
  return bytes(vertices_) + bytes(faces_) + bytes(edges_) + bytes(faceEdges_) +
         bytes(edgeFaceOffsets_) + bytes(edgeFaceIds_) + bytes(vertexEdgeOffsets_) +
         bytes(vertexEdgeIds_) + bytes(vertexFaceOffsets_) + bytes(vertexFaceIds_);
}

double triangleQuality(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double la = (b - c).norm();
  const double lb = (c - a).norm();
  const double lc = (a - b).norm();
  const double area = 0.5 * (b - a).cross(c - a).norm();
  const double halfPerimeter = 0.5 * (la + lb + lc);
  const double longest = std::max({la, lb, lc});
  if (area <= 0 || longest <= 0) return 0.0;
  return std::min(1.0, 6.0 / std::sqrt(3.0) * area / (halfPerimeter * longest));
}

double minAngleDegrees(const Vec3& a, const Vec3& b, const Vec3& c) {
  auto angle = [](const Vec3& p, const Vec3& q, const Vec3& r) {
    const Vec3 u = q - p;
    const Vec3 w = r - p;
    return std::atan2(u.cross(w).norm(), u.dot(w));
  };
  const double m = std::min({angle(a, b, c), angle(b, c, a), angle(c, a, b)});
  return m * 180.0 / std::numbers::pi;
}

MeshStats meshStats(const Mesh& mesh) {
  MeshStats s;
  s.vertexCount = mesh.vertexCount();
  s.edgeCount = mesh.edgeCount();
  s.faceCount = mesh.faceCount();
  if (mesh.faceCount() == 0) return s;
  double sum = 0;
  double lowest = 1.0;
  std::size_t bad = 0;
  for (const auto& f : mesh.faces()) {
    const Vec3& a = mesh.vertex(f[0]);
    const Vec3& b = mesh.vertex(f[1]);
    const Vec3& c = mesh.vertex(f[2]);
    const double q = triangleQuality(a, b, c);
    sum += q;
    lowest = std::min(lowest, q);
    if (minAngleDegrees(a, b, c) < 10.0) ++bad;
  }
  s.meanQuality = sum / double(mesh.faceCount());
  s.minQuality = lowest;
  s.badTriangleFraction = double(bad) / double(mesh.faceCount());
  return s;
}

}  // namespace p2m
