#pragma once

// Scalar geometry kernel: planes, lines, boxes and exact point-primitive
// distances. Everything here is a pure function over Eigen fixed-size types.

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace p2m {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

using Vec3 = Vector3<double>;

template <typename Scalar>
using AlignedBox3 = Eigen::AlignedBox<Scalar, 3>;

using Aabb = AlignedBox3<double>;

/// Oriented plane. The associated half-space is `normal . x <= offset`.
template <typename Scalar>
struct Plane {
  Vector3<Scalar> normal = Vector3<Scalar>::UnitZ();
  Scalar offset = 0;

  /// Plane through `point` with the given unit normal.
  static Plane through(const Vector3<Scalar>& point, const Vector3<Scalar>& unitNormal) {
    return {unitNormal, unitNormal.dot(point)};
  }

  /// Positive outside the half-space, negative inside.
  Scalar signedDistance(const Vector3<Scalar>& x) const { return normal.dot(x) - offset; }

  bool contains(const Vector3<Scalar>& x, Scalar slack = 0) const {
    return signedDistance(x) <= slack;
  }
};

template <typename Scalar>
struct Line {
  Vector3<Scalar> origin = Vector3<Scalar>::Zero();
  Vector3<Scalar> direction = Vector3<Scalar>::UnitX();

  static Line through(const Vector3<Scalar>& a, const Vector3<Scalar>& b) {
    return {a, (b - a).normalized()};
  }
};

using Plane3 = Plane<double>;
using Line3 = Line<double>;

/// Where on a segment or triangle the closest point was found.
enum class Feature : std::uint8_t { Vertex = 0, Edge = 1, Face = 2 };

template <typename Scalar>
struct SegmentDistance {
  Scalar distance;
  Vector3<Scalar> closest;
  // 0 or 1 when the closest point is the first or second endpoint (in the
  // caller's argument order), -1 when it is interior.
  int endpoint;
};

namespace detail {
template <typename Scalar>
bool lexLess(const Vector3<Scalar>& a, const Vector3<Scalar>& b) {
  if (a.x() != b.x()) return a.x() < b.x();
  if (a.y() != b.y()) return a.y() < b.y();
  return a.z() < b.z();
}
}  // namespace detail

/// Exact distance from q to the closed segment [a, b].
///
/// Endpoints are taken in a canonical order: swapping a and b gives a bitwise
/// identical distance. A degenerate segment reduces to the point distance.
template <typename Scalar>
SegmentDistance<Scalar> pointSegmentDistance(
    const Vector3<Scalar>& q, const Vector3<Scalar>& a, const Vector3<Scalar>& b) {
  const bool swapped = detail::lexLess(b, a);
  const Vector3<Scalar>& p0 = swapped ? b : a;
  const Vector3<Scalar>& p1 = swapped ? a : b;

  const Vector3<Scalar> d = p1 - p0;
  const Scalar len2 = d.squaredNorm();
  int end = 0;
  Vector3<Scalar> closest;
  if (len2 == Scalar(0)) {
    closest = p0;
  } else {
    const Scalar t = (q - p0).dot(d) / len2;
    if (t <= Scalar(0)) {
      closest = p0;
    } else if (t >= Scalar(1)) {
      closest = p1;
      end = 1;
    } else {
      closest = p0 + t * d;
      end = -1;
    }
  }
  if (end >= 0 && swapped) end = 1 - end;
  return {(q - closest).norm(), closest, end};
}

template <typename Scalar>
struct TriangleDistance {
  Scalar distance;
  Vector3<Scalar> closest;
  Feature feature;
  // Vertex: corner index 0..2. Edge: i for the edge (corner i, corner i+1 mod 3).
  // Face: 0.
  int index;
};

struct DegenerateTriangleError : std::invalid_argument {
  DegenerateTriangleError() : std::invalid_argument("degenerate triangle (zero area)") {}
};

/// Exact distance from q to the closed triangle (a, b, c).
///
/// Region classification follows the usual Voronoi-region walk over the
/// triangle's features. Edge regions are resolved through
/// pointSegmentDistance: an edge-closest point gets the same value from
/// either adjacent triangle.
template <typename Scalar>
TriangleDistance<Scalar> pointTriangleDistance(
    const Vector3<Scalar>& q, const Vector3<Scalar>& a, const Vector3<Scalar>& b,
    const Vector3<Scalar>& c) {
  const Vector3<Scalar> ab = b - a;
  const Vector3<Scalar> ac = c - a;
  if (ab.cross(ac).squaredNorm() == Scalar(0)) throw DegenerateTriangleError();

  auto vertex = [&](int i, const Vector3<Scalar>& p) {
    return TriangleDistance<Scalar>{(q - p).norm(), p, Feature::Vertex, i};
  };
  auto edge = [&](int i, const Vector3<Scalar>& p0, const Vector3<Scalar>& p1) {
    const SegmentDistance<Scalar> s = pointSegmentDistance(q, p0, p1);
    if (s.endpoint == 0) return TriangleDistance<Scalar>{s.distance, s.closest, Feature::Vertex, i};
    if (s.endpoint == 1)
      return TriangleDistance<Scalar>{s.distance, s.closest, Feature::Vertex, (i + 1) % 3};
    return TriangleDistance<Scalar>{s.distance, s.closest, Feature::Edge, i};
  };

  const Vector3<Scalar> ap = q - a;
  const Scalar d1 = ab.dot(ap);
  const Scalar d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return vertex(0, a);

  const Vector3<Scalar> bp = q - b;
  const Scalar d3 = ab.dot(bp);
  const Scalar d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return vertex(1, b);

  const Scalar vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return edge(0, a, b);

  const Vector3<Scalar> cp = q - c;
  const Scalar d5 = ab.dot(cp);
  const Scalar d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return vertex(2, c);

  const Scalar vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return edge(2, c, a);

  const Scalar va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) return edge(1, b, c);

  const Scalar denom = Scalar(1) / (va + vb + vc);
  const Scalar v = vb * denom;
  const Scalar w = vc * denom;
  const Vector3<Scalar> closest = a + ab * v + ac * w;
  return {(q - closest).norm(), closest, Feature::Face, 0};
}

template <typename Scalar>
Scalar distPointLine(const Vector3<Scalar>& q, const Line<Scalar>& l) {
  const Vector3<Scalar> r = q - l.origin;
  return (r - r.dot(l.direction) * l.direction).norm();
}

template <typename Scalar>
Scalar distPointPlane(const Vector3<Scalar>& q, const Plane<Scalar>& p) {
  return std::abs(p.signedDistance(q));
}

/// True when x lies on v's side of the point/line bisector with at least
/// `margin` of clearance: ||x - v|| + margin <= dist(x, l).
template <typename Scalar>
bool closerToPointThanLine(
    const Vector3<Scalar>& x, const Vector3<Scalar>& v, const Line<Scalar>& l, Scalar margin) {
  return (x - v).norm() + margin <= distPointLine(x, l);
}

/// Point/plane analogue of closerToPointThanLine.
template <typename Scalar>
bool closerToPointThanPlane(
    const Vector3<Scalar>& x, const Vector3<Scalar>& v, const Plane<Scalar>& p, Scalar margin) {
  return (x - v).norm() + margin <= distPointPlane(x, p);
}

/// Squared distance from q to a box; zero inside.
template <typename Scalar>
Scalar boxSquaredDistance(const AlignedBox3<Scalar>& box, const Vector3<Scalar>& q) {
  const Vector3<Scalar> lo = (box.min() - q).cwiseMax(Scalar(0));
  const Vector3<Scalar> hi = (q - box.max()).cwiseMax(Scalar(0));
  return (lo + hi).squaredNorm();
}

/// Bisector half-space of generators v and u that keeps v's side.
template <typename Scalar>
Plane<Scalar> bisector(const Vector3<Scalar>& v, const Vector3<Scalar>& u) {
  const Vector3<Scalar> n = (u - v).normalized();
  return {n, n.dot(Scalar(0.5) * (u + v))};
}

}  // namespace p2m
