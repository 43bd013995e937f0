#pragma once

#include "p2m/geom.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace p2m {

/// splitmix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// mt19937_64 seeded from (seed, stream). The engine's output sequence is
/// fixed by the standard, and uniform() maps the top 53 bits to [0, 1) by
/// hand, so sampled values are identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : engine_(splitmix64(seed + splitmix64(stream))) {}

  std::uint64_t next() { return engine_(); }
  double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

/// The box scaled by `scale` about its center.
inline Aabb scaledBox(const Aabb& box, double scale) {
  const Vec3 c = box.center();
  const Vec3 h = 0.5 * scale * box.sizes();
  return Aabb(c - h, c + h);
}

/// n uniform points in `bbox` scaled by `scale` about its center.
inline std::vector<Vec3> samplePoints(const Aabb& bbox, double scale, std::size_t n, std::uint64_t seed) {
  const Aabb box = scaledBox(bbox, scale);
  Rng rng(seed);
  std::vector<Vec3> out(n);
  for (auto& p : out)
    for (int k = 0; k < 3; ++k) p[k] = rng.uniform(box.min()[k], box.max()[k]);
  return out;
}

}  // namespace p2m
