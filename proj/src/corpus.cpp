#include "p2m/corpus.hpp"

#include "p2m/sampling.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace p2m::corpus {

namespace {

using Faces = std::vector<std::array<Index, 3>>;

void subdivide(std::vector<Vec3>& v, Faces& f) {
  std::map<std::pair<Index, Index>, Index> mid;
  auto midpoint = [&](Index a, Index b) {
    const auto key = std::minmax(a, b);
    auto it = mid.find(key);
    if (it != mid.end()) return it->second;
    v.push_back((0.5 * (v[a] + v[b])).normalized());
    return mid[key] = Index(v.size() - 1);
  };
  Faces out;
  out.reserve(4 * f.size());
  for (const auto& t : f) {
    const Index ab = midpoint(t[0], t[1]), bc = midpoint(t[1], t[2]), ca = midpoint(t[2], t[0]);
    out.push_back({t[0], ab, ca});
    out.push_back({t[1], bc, ab});
    out.push_back({t[2], ca, bc});
    out.push_back({ab, bc, ca});
  }
  f = std::move(out);
}

// Sum of a few seeded plane waves; smooth, deterministic.
struct BumpField {
  std::vector<Vec3> dirs;
  std::vector<double> freq, phase;

  BumpField(std::uint64_t seed, int count) {
    Rng rng(seed, 1);
    for (int i = 0; i < count; ++i) {
      Vec3 d(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
      dirs.push_back(d.normalized());
      freq.push_back(rng.uniform(1.5, 4.0));
      phase.push_back(rng.uniform(0, 2 * std::numbers::pi));
    }
  }

  double operator()(const Vec3& p) const {
    double s = 0;
    for (std::size_t i = 0; i < dirs.size(); ++i) s += std::sin(freq[i] * dirs[i].dot(p) + phase[i]);
    return s / double(dirs.size());
  }
};

}  // namespace

Mesh cube() {
  std::vector<Vec3> v;
  for (int i = 0; i < 8; ++i) v.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
  const Faces f = {{0, 2, 3}, {0, 3, 1}, {4, 5, 7}, {4, 7, 6}, {0, 1, 5}, {0, 5, 4},
                   {2, 6, 7}, {2, 7, 3}, {0, 4, 6}, {0, 6, 2}, {1, 3, 7}, {1, 7, 5}};
  return Mesh::fromFaces(std::move(v), f);
}

Mesh tetrahedron() {
  std::vector<Vec3> v = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  const Faces f = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
  return Mesh::fromFaces(std::move(v), f);
}

Mesh icosphere(int level) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  Faces f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
             {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int i = 0; i < level; ++i) subdivide(v, f);
  return Mesh::fromFaces(std::move(v), f);
}

Mesh bumpySphere(int level, std::uint64_t seed, double bump, double jitter) {
  const Mesh base = icosphere(level);
  const BumpField field(seed, 6);
  Rng rng(seed, 2);
  std::vector<Vec3> v = base.vertices();
  for (auto& p : v) p *= 1.0 + bump * field(p) + jitter * rng.uniform(-1, 1);
  return Mesh::fromFaces(std::move(v), base.faces());
}

namespace {

Mesh torusImpl(int nu, int nv, double major, double minor, const BumpField* field, Rng* rng) {
  if (nu < 3 || nv < 3) throw std::invalid_argument("torus needs nu, nv >= 3");
  std::vector<Vec3> v;
  v.reserve(std::size_t(nu) * nv);
  for (int i = 0; i < nu; ++i) {
    const double u = 2 * std::numbers::pi * i / nu;
    for (int j = 0; j < nv; ++j) {
      const double w = 2 * std::numbers::pi * j / nv;
      const Vec3 axis(std::cos(u), std::sin(u), 0);
      const Vec3 ring = major * axis;
      Vec3 dir = std::cos(w) * axis + Vec3(0, 0, std::sin(w));
      double r = minor;
      if (field) r *= 1.0 + 0.15 * (*field)(ring + minor * dir) + 0.01 * rng->uniform(-1, 1);
      v.push_back(ring + r * dir);
    }
  }
  Faces f;
  f.reserve(2 * std::size_t(nu) * nv);
  auto id = [&](int i, int j) { return Index(((i + nu) % nu) * nv + (j + nv) % nv); };
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      f.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      f.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return Mesh::fromFaces(std::move(v), f);
}

}  // namespace

Mesh torus(int nu, int nv, double major, double minor) { return torusImpl(nu, nv, major, minor, nullptr, nullptr); }

Mesh bumpyTorus(int nu, int nv, std::uint64_t seed, double major, double minor) {
  const BumpField field(seed, 6);
  Rng rng(seed, 3);
  return torusImpl(nu, nv, major, minor, &field, &rng);
}

Mesh gear(int teeth, double outer, double root, double bore, double thickness) {
  if (teeth < 3) throw std::invalid_argument("gear needs at least 3 teeth");
  // Outline: four points per tooth (root, rise, tip, fall); bore circle with
  // the same number of samples so the cap is a strip of quads.
  const int n = 4 * teeth;
  std::vector<Vec3> v;
  auto outline = [&](int k) {
    const double a = 2 * std::numbers::pi * k / n;
    const double r = (k % 4 == 1 || k % 4 == 2) ? outer : root;
    return Vec3(r * std::cos(a), r * std::sin(a), 0);
  };
  for (int layer = 0; layer < 2; ++layer) {
    const double z = layer == 0 ? -0.5 * thickness : 0.5 * thickness;
    for (int k = 0; k < n; ++k) v.push_back(outline(k) + Vec3(0, 0, z));
    for (int k = 0; k < n; ++k) {
      const double a = 2 * std::numbers::pi * k / n;
      v.emplace_back(bore * std::cos(a), bore * std::sin(a), z);
    }
  }
  auto out = [&](int layer, int k) { return Index(layer * 2 * n + (k % n)); };
  auto in = [&](int layer, int k) { return Index(layer * 2 * n + n + (k % n)); };
  Faces f;
  for (int k = 0; k < n; ++k) {
    // top cap (+z normal) and bottom cap
    f.push_back({in(1, k), out(1, k), out(1, k + 1)});
    f.push_back({in(1, k), out(1, k + 1), in(1, k + 1)});
    f.push_back({in(0, k), out(0, k + 1), out(0, k)});
    f.push_back({in(0, k), in(0, k + 1), out(0, k + 1)});
    // outer wall
    f.push_back({out(0, k), out(0, k + 1), out(1, k + 1)});
    f.push_back({out(0, k), out(1, k + 1), out(1, k)});
    // bore wall, facing inward
    f.push_back({in(0, k), in(1, k + 1), in(0, k + 1)});
    f.push_back({in(0, k), in(1, k), in(1, k + 1)});
  }
  return Mesh::fromFaces(std::move(v), f);
}

std::vector<std::string> names() {
  return {"cube", "tetrahedron", "icosphere", "scan", "gear", "skinny-torus", "torus-good", "torus-bad", "torus-100k"};
}

Mesh byName(const std::string& name) {
  if (name == "cube") return cube();
  if (name == "tetrahedron") return tetrahedron();
  if (name == "icosphere") return icosphere(4);
  if (name == "scan") return bumpySphere(5, 7);
  if (name == "gear") return gear(24);
  if (name == "skinny-torus") return torus(500, 5);
  if (name == "torus-good") return bumpyTorus(200, 50, 11);
  if (name == "torus-bad") return bumpyTorus(1000, 10, 11);
  if (name == "torus-100k") return bumpyTorus(500, 100, 13);
  throw std::invalid_argument("unknown shape '" + name + "'");
}

}  // namespace p2m::corpus
