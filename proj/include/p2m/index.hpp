#pragma once

#include "p2m/interception.hpp"
#include "p2m/kdtree.hpp"
#include "p2m/mesh.hpp"
#include "p2m/rtree.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace p2m {

struct BuildOptions {
  std::uint32_t leafSize = 8;
  std::uint32_t fanout = 8;
  std::size_t initialNeighbors = 16;
  unsigned threads = 1;
  /// Keep per-vertex Voronoi cell volumes in the build result (for statistics).
  bool cellVolumes = false;
};

/// Wall-clock seconds per preprocessing phase.
struct BuildTimings {
  double kdtree = 0;
  double voronoi = 0;
  double interception = 0;
  double rtree = 0;
  double total = 0;
};

struct IndexMetadata {
  Vec3 center = Vec3::Zero();
  double halfExtent = 1;
  double tolerance = 1e-10;
  std::uint32_t leafSize = 8;
  std::uint32_t fanout = 8;
};

struct OutOfDomainError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

/// Immutable query bundle: mesh, vertical spaces, KD-tree of vertices,
/// interception table and one R-tree per interception list.
class P2MIndex {
 public:
  P2MIndex() = default;

  const Mesh& mesh() const { return mesh_; }
  const KdTree& kdtree() const { return kdtree_; }
  const InterceptionTable& table() const { return table_; }
  const std::vector<RTree>& rtrees() const { return rtrees_; }
  const IndexMetadata& metadata() const { return meta_; }

  /// Endpoint planes of an edge's vertical space (the query-time edge gate).
  const std::array<Plane3, 2>& edgeSlab(Index e) const { return edgeSlabs_[e]; }
  /// The three planes of a face's vertical space.
  const std::array<Plane3, 3>& faceSpace(Index f) const { return faceSpaces_[f]; }

  bool inDomain(const Vec3& q) const {
    return (q - meta_.center).cwiseAbs().maxCoeff() <= meta_.halfExtent;
  }

  struct MemoryUsage {
    std::size_t mesh = 0;
    std::size_t kdtree = 0;
    std::size_t table = 0;
    std::size_t rtrees = 0;
  };
  MemoryUsage memoryUsage() const;

 private:
  friend struct IndexBuilder;
  friend struct IndexCodec;

  Mesh mesh_;
  std::vector<std::array<Plane3, 2>> edgeSlabs_;
  std::vector<std::array<Plane3, 3>> faceSpaces_;
  KdTree kdtree_;
  InterceptionTable table_;
  std::vector<RTree> rtrees_;
  IndexMetadata meta_;
};

struct BuildResult {
  P2MIndex index;
  BuildTimings timings;
  std::vector<double> cellVolumes;  // filled when BuildOptions::cellVolumes is set
};

/// Full preprocessing: KD-tree, Voronoi cells, flooding inspection, R-trees.
BuildResult buildIndex(Mesh mesh, const BuildOptions& opts = {});

enum class IndexErrorCode { Io, BadMagic, VersionMismatch, Truncated, Corrupted };

struct IndexFormatError : std::runtime_error {
  IndexFormatError(IndexErrorCode c, const std::string& what) : std::runtime_error(what), code(c) {}
  IndexErrorCode code;
};

inline constexpr std::uint32_t kIndexFormatVersion = 1;

/// Binary index file: little-endian, 64-bit floats, magic "P2M1", a section
/// table with per-section byte lengths and an FNV-1a checksum. See
/// docs/index_format.md.
void saveIndex(const P2MIndex& index, const std::filesystem::path& path);
std::string encodeIndex(const P2MIndex& index);

P2MIndex loadIndex(const std::filesystem::path& path);
P2MIndex decodeIndex(const std::string& bytes);

}  // namespace p2m
