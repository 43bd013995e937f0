#pragma once

#include "p2m/geom.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace p2m {

using Index = std::uint32_t;

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Counters from ingestion; degenerate and duplicate faces are dropped, not repaired.
struct LoadReport {
  std::size_t rawVertices = 0;
  std::size_t rawFaces = 0;
  std::size_t degenerateFaces = 0;
  std::size_t duplicateFaces = 0;
};

/// Indexed triangle mesh with one copy per vertex, deduplicated edges and
/// incidence maps. Immutable once constructed.
class Mesh {
 public:
  Mesh() = default;

  /// Builds edges and incidence from raw faces. Faces with a repeated index,
  /// zero area, or an index triple already seen are dropped and counted in
  /// `report`. `wireEdges` are extra edges not bounding any face (OBJ `l`).
  static Mesh fromFaces(
      std::vector<Vec3> vertices, const std::vector<std::array<Index, 3>>& faces,
      const std::vector<std::array<Index, 2>>& wireEdges = {}, LoadReport* report = nullptr);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<std::array<Index, 3>>& faces() const { return faces_; }
  /// Unordered vertex pairs stored with the smaller index first.
  const std::vector<std::array<Index, 2>>& edges() const { return edges_; }
  /// Edge ids of a face; entry i is the edge (corner i, corner i+1 mod 3).
  const std::vector<std::array<Index, 3>>& faceEdges() const { return faceEdges_; }

  std::size_t vertexCount() const { return vertices_.size(); }
  std::size_t edgeCount() const { return edges_.size(); }
  std::size_t faceCount() const { return faces_.size(); }

  const Vec3& vertex(Index v) const { return vertices_[v]; }

  // CSR adjacency.
  std::span<const Index> edgeFaces(Index e) const { return slice(edgeFaceOffsets_, edgeFaceIds_, e); }
  std::span<const Index> vertexEdges(Index v) const { return slice(vertexEdgeOffsets_, vertexEdgeIds_, v); }
  std::span<const Index> vertexFaces(Index v) const { return slice(vertexFaceOffsets_, vertexFaceIds_, v); }

  Aabb bounds() const;

  std::size_t memoryBytes() const;

 private:
  static std::span<const Index> slice(
      const std::vector<Index>& offsets, const std::vector<Index>& ids, Index i) {
    return {ids.data() + offsets[i], ids.data() + offsets[i + 1]};
  }

  std::vector<Vec3> vertices_;
  std::vector<std::array<Index, 3>> faces_;
  std::vector<std::array<Index, 2>> edges_;
  std::vector<std::array<Index, 3>> faceEdges_;
  std::vector<Index> edgeFaceOffsets_, edgeFaceIds_;
  std::vector<Index> vertexEdgeOffsets_, vertexEdgeIds_;
  std::vector<Index> vertexFaceOffsets_, vertexFaceIds_;
};

/// Loads OBJ, PLY (ascii / binary little-endian) or STL (ascii / binary).
///
/// weldEpsilon == 0 merges only bitwise-identical positions; a positive value
/// merges positions that fall within epsilon through a grid hash.
Mesh loadMesh(const std::filesystem::path& path, double weldEpsilon = 0.0, LoadReport* report = nullptr);

void saveObj(const Mesh& mesh, const std::filesystem::path& path);

/// Q(t) = 6/sqrt(3) * area / (half_perimeter * longest_edge); 1 for an
/// equilateral triangle, 0 for a degenerate one.
double triangleQuality(const Vec3& a, const Vec3& b, const Vec3& c);

/// Smallest interior angle in degrees.
double minAngleDegrees(const Vec3& a, const Vec3& b, const Vec3& c);

struct MeshStats {
  std::size_t vertexCount = 0;
  std::size_t edgeCount = 0;
  std::size_t faceCount = 0;
  double meanQuality = 0;
  double minQuality = 0;
  double badTriangleFraction = 0;  // min angle below 10 degrees
};

MeshStats meshStats(const Mesh& mesh);

}  // namespace p2m
