#include "p2m/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace p2m {
namespace {

// Monotone stand-in for atan2(y, x) with range [0, 4).
double pseudoAngle(double y, double x) {
  const double r = std::abs(x) + std::abs(y);
  if (r == 0) return 0;
  const double p = x / r;
  return y < 0 ? 3 + p : 1 - p;
}

// Orders points lying on a plane by angle about their centroid.
void sortByAngle(const Vec3& normal, const std::vector<Vec3>& pts, std::vector<std::int32_t>& order) {
  Vec3 c = Vec3::Zero();
  for (std::int32_t i : order) c += pts[i];
  c /= double(order.size());
  const Vec3 helper = std::abs(normal.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 u = normal.cross(helper).normalized();
  const Vec3 w = normal.cross(u);
  thread_local std::vector<std::pair<double, std::int32_t>> keyed;
  keyed.clear();
  for (std::int32_t i : order) {
    const Vec3 d = pts[i] - c;
    keyed.emplace_back(pseudoAngle(d.dot(w), d.dot(u)), i);
  }
  std::sort(keyed.begin(), keyed.end());
  for (std::size_t k = 0; k < keyed.size(); ++k) order[k] = keyed[k].second;
}

}  // namespace

ConvexPolytope ConvexPolytope::cube(const Vec3& center, double halfExtent) {
  ConvexPolytope p;
  p.tolerance_ = 1e-10 * halfExtent;
  // Planes 0..5: -x, +x, -y, +y, -z, +z.
  for (int axis = 0; axis < 3; ++axis) {
    for (int sign = -1; sign <= 1; sign += 2) {
      Vec3 n = Vec3::Zero();
      n[axis] = sign;
      p.planes_.push_back({Plane3{n, n.dot(center) + halfExtent}, PlaneSource::BoxFace, 2 * axis + (sign > 0)});
    }
  }
  for (int i = 0; i < 8; ++i) {
    const int bx = i & 1, by = (i >> 1) & 1, bz = (i >> 2) & 1;
    const Vec3 pos = center + halfExtent * Vec3(bx ? 1 : -1, by ? 1 : -1, bz ? 1 : -1);
    p.corners_.push_back({pos, {bx, 2 + by, 4 + bz}});
  }
  for (int i = 0; i < 8; ++i)
    for (int bit = 0; bit < 3; ++bit) {
      const int j = i ^ (1 << bit);
      if (i < j) p.edges_.push_back({i, j});
    }
  return p;
}

bool ConvexPolytope::clip(const TaggedPlane& h) {
  const std::size_t n = corners_.size();
  if (n == 0) return false;
  const double tol = tolerance_;

  thread_local std::vector<double> s;
  s.resize(n);
  std::size_t above = 0;
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = h.plane.signedDistance(corners_[i].position);
    if (s[i] > tol) ++above;
  }
  if (above == 0) return false;
  if (above == n) {
    corners_.clear();
    edges_.clear();
    return true;
  }

  const auto pid = std::int32_t(planes_.size());
  planes_.push_back(h);

  thread_local std::vector<std::int32_t> remap;
  thread_local std::vector<Corner> kept;
  thread_local std::vector<std::array<std::int32_t, 2>> keptEdges;
  thread_local std::vector<std::int32_t> ring;
  remap.assign(n, -1);
  kept.clear();
  keptEdges.clear();
  ring.clear();

  for (std::size_t i = 0; i < n; ++i) {
    if (s[i] <= tol) {
      remap[i] = std::int32_t(kept.size());
      if (s[i] >= -tol) ring.push_back(remap[i]);
      kept.push_back(corners_[i]);
    }
  }
  const auto survivors = std::int32_t(kept.size());

  for (const auto& [a, b] : edges_) {
    const bool ka = s[a] <= tol;
    const bool kb = s[b] <= tol;
    if (ka && kb) {
      keptEdges.push_back({remap[a], remap[b]});
      continue;
    }
    if (!ka && !kb) continue;
    const std::int32_t in = ka ? a : b;
    const std::int32_t out = ka ? b : a;
    // A kept endpoint on the plane already belongs to the cut ring.
    if (s[in] >= -tol) continue;
    const double t = s[in] / (s[in] - s[out]);
    const Vec3& pin = corners_[in].position;
    const Vec3 x = pin + t * (corners_[out].position - pin);

    std::array<std::int32_t, 3> defining{-1, -1, pid};
    int found = 0;
    for (std::int32_t pa : corners_[in].planes)
      for (std::int32_t pb : corners_[out].planes)
        if (pa == pb && found < 2) {
          bool dup = found > 0 && defining[0] == pa;
          if (!dup) defining[found++] = pa;
        }
    for (std::int32_t pa : corners_[in].planes)
      if (found < 2 && (found == 0 || defining[0] != pa)) defining[found++] = pa;

    const auto nc = std::int32_t(kept.size());
    kept.push_back({x, defining});
    keptEdges.push_back({remap[in], nc});
    ring.push_back(nc);
  }

  if (kept.size() < 3) {
    corners_.clear();
    edges_.clear();
    return true;
  }

  if (ring.size() >= 2) {
    thread_local std::vector<Vec3> ringPts;
    ringPts.resize(kept.size());
    for (std::int32_t r : ring) ringPts[r] = kept[r].position;
    sortByAngle(h.plane.normal, ringPts, ring);
    const std::size_t m = ring.size();
    const std::size_t links = m == 2 ? 1 : m;
    const std::size_t before = keptEdges.size();
    for (std::size_t k = 0; k < links; ++k) {
      std::int32_t a = ring[k];
      std::int32_t b = ring[(k + 1) % m];
      if (a == b) continue;
      bool exists = false;
      if (a < survivors && b < survivors) {
        for (std::size_t e = 0; e < before && !exists; ++e)
          exists = (keptEdges[e][0] == a && keptEdges[e][1] == b) || (keptEdges[e][0] == b && keptEdges[e][1] == a);
      }
      if (!exists) keptEdges.push_back({a, b});
    }
  }

  corners_.assign(kept.begin(), kept.end());
  edges_.assign(keptEdges.begin(), keptEdges.end());
  return true;
}

std::vector<Vec3> ConvexPolytope::extremePoints() const {
  std::vector<Vec3> pts;
  pts.reserve(corners_.size());
  for (const Corner& c : corners_) pts.push_back(c.position);
  return pts;
}

Aabb ConvexPolytope::bbox() const {
  Aabb box;
  for (const Corner& c : corners_) box.extend(c.position);
  return box;
}

std::vector<std::int32_t> ConvexPolytope::supportingPlanes(std::size_t minCorners) const {
  std::vector<std::int32_t> out;
  for (std::size_t p = 0; p < planes_.size(); ++p) {
    std::size_t on = 0;
    for (const Corner& c : corners_)
      if (std::abs(planes_[p].plane.signedDistance(c.position)) <= tolerance_) ++on;
    if (on >= minCorners) out.push_back(std::int32_t(p));
  }
  return out;
}

std::vector<std::vector<std::int32_t>> ConvexPolytope::facets() const {
  std::vector<std::vector<std::int32_t>> out;
  const std::vector<Vec3> pts = extremePoints();
  for (const TaggedPlane& tp : planes_) {
    std::vector<std::int32_t> loop;
    for (std::size_t i = 0; i < corners_.size(); ++i)
      if (std::abs(tp.plane.signedDistance(pts[i])) <= tolerance_) loop.push_back(std::int32_t(i));
    if (loop.size() < 3) continue;
    sortByAngle(tp.plane.normal, pts, loop);
    out.push_back(std::move(loop));
  }
  return out;
}

double ConvexPolytope::volume() const {
  if (corners_.size() < 4) return 0.0;
  Vec3 c = Vec3::Zero();
  for (const Corner& k : corners_) c += k.position;
  c /= double(corners_.size());
  const std::vector<Vec3> pts = extremePoints();
  double vol = 0;
  for (const TaggedPlane& tp : planes_) {
    std::vector<std::int32_t> loop;
    for (std::size_t i = 0; i < corners_.size(); ++i)
      if (std::abs(tp.plane.signedDistance(corners_[i].position)) <= tolerance_) loop.push_back(std::int32_t(i));
    if (loop.size() < 3) continue;
    sortByAngle(tp.plane.normal, pts, loop);
    Vec3 fc = Vec3::Zero();
    for (std::int32_t i : loop) fc += pts[i];
    fc /= double(loop.size());
    double area = 0;
    for (std::size_t k = 0; k < loop.size(); ++k)
      area += (pts[loop[k]] - fc).cross(pts[loop[(k + 1) % loop.size()]] - fc).dot(tp.plane.normal);
    area = 0.5 * std::abs(area);
    const double height = tp.plane.offset - tp.plane.normal.dot(c);
    vol += area * height / 3.0;
  }
  return std::max(0.0, vol);
}

std::size_t ConvexPolytope::memoryBytes() const {
  return corners_.capacity() * sizeof(Corner) + edges_.capacity() * sizeof(edges_[0]) +
         planes_.capacity() * sizeof(TaggedPlane);
}

void writeOff(const ConvexPolytope& poly, std::ostream& out) {
  const auto facets = poly.facets();
  out << "OFF\n" << poly.corners().size() << ' ' << facets.size() << " 0\n";
  for (const auto& c : poly.corners()) out << c.position.x() << ' ' << c.position.y() << ' ' << c.position.z() << '\n';
  for (const auto& f : facets) {
    out << f.size();
    for (auto i : f) out << ' ' << i;
    out << '\n';
  }
}

}  // namespace p2m
