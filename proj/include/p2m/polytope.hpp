#pragma once

#include "p2m/geom.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace p2m {

/// Where a clipping plane came from.
enum class PlaneSource : std::uint8_t { BoxFace = 0, Bisector = 1, VerticalSpace = 2 };

struct TaggedPlane {
  Plane3 plane;
  PlaneSource source = PlaneSource::BoxFace;
  // Bisector: the other generator's vertex id. VerticalSpace: primitive id.
  // BoxFace: face index 0..5.
  std::int64_t tag = 0;
};

/// Bounded convex polytope kept as corners (each with the three planes that
/// define it) plus the corner graph. Only planes that actually cut are
/// recorded. The empty polytope has no corners and stays empty.
class ConvexPolytope {
 public:
  struct Corner {
    Vec3 position;
    std::array<std::int32_t, 3> planes;
  };

  ConvexPolytope() = default;

  /// Axis-aligned cube [center - halfExtent, center + halfExtent]^3. The
  /// on-plane tolerance of every later clip is 1e-10 * halfExtent.
  static ConvexPolytope cube(const Vec3& center, double halfExtent);

  /// Intersects with the half-space of `h`. Returns true when the shape changed.
  bool clip(const TaggedPlane& h);
  bool clip(const Plane3& h, PlaneSource source = PlaneSource::VerticalSpace, std::int64_t tag = 0) {
    return clip(TaggedPlane{h, source, tag});
  }

  bool empty() const { return corners_.empty(); }
  double tolerance() const { return tolerance_; }

  const std::vector<Corner>& corners() const { return corners_; }
  const std::vector<std::array<std::int32_t, 2>>& edges() const { return edges_; }
  const std::vector<TaggedPlane>& planes() const { return planes_; }

  /// Corner positions; the extreme points of the polytope.
  std::vector<Vec3> extremePoints() const;

  /// Componentwise bounds of the corners; an empty box when empty.
  Aabb bbox() const;

  /// Volume from the facet polygons about the corner centroid.
  double volume() const;

  /// Indices (into planes()) of planes with at least `minCorners` corners on
  /// them within tolerance.
  std::vector<std::int32_t> supportingPlanes(std::size_t minCorners) const;

  /// Facet polygons as ordered corner index loops, one per supporting plane.
  std::vector<std::vector<std::int32_t>> facets() const;

  std::size_t memoryBytes() const;

 private:
  std::vector<Corner> corners_;
  std::vector<std::array<std::int32_t, 2>> edges_;
  std::vector<TaggedPlane> planes_;
  double tolerance_ = 0;
};

/// Value-returning clip.
inline ConvexPolytope clip(ConvexPolytope poly, const TaggedPlane& h) {
  poly.clip(h);
  return poly;
}

/// Writes the polytope's facets in OFF format for inspection.
void writeOff(const ConvexPolytope& poly, std::ostream& out);

}  // namespace p2m
