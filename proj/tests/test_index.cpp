#include "oracles.hpp"

#include "p2m/corpus.hpp"
#include "p2m/index.hpp"
#include "p2m/query.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>

using namespace p2m;

namespace {

std::vector<Vec3> randomPoints(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = oracle::randomPoint(rng, -1, 1);
  return pts;
}

IndexErrorCode decodeError(const std::string& bytes) {
  try {
    decodeIndex(bytes);
  } catch (const IndexFormatError& e) {
    return e.code;
  }
  ADD_FAILURE() << "decode succeeded";
  return IndexErrorCode::Io;
}

const P2MIndex& sharedIndex() {
  static const P2MIndex index = buildIndex(corpus::gear(24)).index;
  return index;
}

}  // namespace

TEST(KdTree, SinglePoint) {
  const std::vector<Vec3> pts = {{1, 2, 3}};
  const KdTree tree(pts);
  const auto n = tree.nearest(Vec3(-5, 0, 9));
  EXPECT_EQ(n.id, 0u);
  EXPECT_DOUBLE_EQ(n.distance, (Vec3(-5, 0, 9) - pts[0]).norm());
}

TEST(KdTree, CubeCorners) {
  const Mesh cube = corpus::cube();
  const KdTree tree(cube.vertices());
  for (Index v = 0; v < 8; ++v) {
    const auto n = tree.nearest(cube.vertex(v) * 1.1 - Vec3::Constant(0.05));
    EXPECT_EQ(n.id, v);
  }
  // The centre is equidistant from all corners: the smallest id wins.
  EXPECT_EQ(tree.nearest(Vec3::Constant(0.5)).id, 0u);
}

TEST(KdTree, MatchesLinearScan) {
  const auto pts = randomPoints(10000, 601);
  const KdTree tree(pts);
  Rng rng(602);
  for (int i = 0; i < 10000; ++i) {
    const Vec3 q = oracle::randomPoint(rng, -3, 3);
    const auto got = tree.nearest(q);
    const auto want = oracle::nearestLinear(pts, q);
    ASSERT_EQ(got.id, want.id);
    EXPECT_EQ(got.distance, want.distance);
  }
}

TEST(KdTree, KNearestIsSorted) {
  const auto pts = randomPoints(2000, 603);
  const KdTree tree(pts);
  Rng rng(604);
  for (int i = 0; i < 200; ++i) {
    const Vec3 q = oracle::randomPoint(rng, -2, 2);
    const auto got = tree.kNearest(q, 12);
    std::vector<std::pair<double, std::uint32_t>> all;
    for (std::uint32_t k = 0; k < pts.size(); ++k) all.push_back({(pts[k] - q).norm(), k});
    std::sort(all.begin(), all.end());
    ASSERT_EQ(got.size(), 12u);
    for (std::size_t k = 0; k < 12; ++k) EXPECT_EQ(got[k].id, all[k].second);
  }
}

TEST(KdTree, ExaminedNodesGrowSublinearly) {
  double previous = 0;
  for (std::size_t n = 2000; n <= 64000; n *= 2) {
    const KdTree tree(randomPoints(n, 605));
    Rng rng(606);
    std::uint64_t visited = 0;
    const int queries = 20000;
    for (int i = 0; i < queries; ++i) tree.nearest(oracle::randomPoint(rng, -1.5, 1.5), &visited);
    const double avg = double(visited) / queries;
    if (previous > 0) { EXPECT_LE(avg, 1.6 * previous) << "n = " << n; }
    previous = avg;
  }
}

TEST(RTree, EmptyAndSingle) {
  const RTree none(std::span<const Aabb>{});
  EXPECT_TRUE(none.query(Vec3::Zero()).empty());
  const std::vector<Aabb> one = {Aabb(Vec3(0, 0, 0), Vec3(1, 1, 1))};
  const RTree tree(one);
  EXPECT_EQ(tree.query(Vec3(0.5, 0.5, 0.5)), (std::vector<std::uint32_t>{0}));
  EXPECT_EQ(tree.query(Vec3(1, 1, 1)), (std::vector<std::uint32_t>{0}));  // boundary inclusive
  EXPECT_TRUE(tree.query(Vec3(1.5, 0.5, 0.5)).empty());
}

TEST(RTree, MatchesLinearScan) {
  Rng rng(606);
  std::vector<Aabb> boxes;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 c = oracle::randomPoint(rng, -1, 1);
    const Vec3 h(rng.uniform(0, 0.3), rng.uniform(0, 0.3), rng.uniform(0, 0.3));
    boxes.emplace_back(c - h, c + h);
  }
  for (std::uint32_t fanout : {2u, 8u, 16u}) {
    const RTree tree(boxes, fanout);
    for (int i = 0; i < 2000; ++i) {
      const Vec3 q = oracle::randomPoint(rng, -1.3, 1.3);
      auto got = tree.query(q);
      std::sort(got.begin(), got.end());
      ASSERT_EQ(got, oracle::containingLinear(boxes, q));
    }
  }
}

TEST(Serialization, RoundTripIsBitwise) {
  const BuildResult built = buildIndex(corpus::bumpySphere(5, 7));
  ASSERT_GE(built.index.mesh().vertexCount(), 10000u);
  const std::string bytes = encodeIndex(built.index);
  const P2MIndex loaded = decodeIndex(bytes);
  EXPECT_EQ(encodeIndex(loaded), bytes);
  for (const Vec3& q : samplePoints(built.index.mesh().bounds(), 2, 2000, 607))
    ASSERT_EQ(p2mQuery(loaded, q), p2mQuery(built.index, q));
}

TEST(Serialization, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "p2m_test_index.bin";
  saveIndex(sharedIndex(), path);
  const P2MIndex loaded = loadIndex(path);
  EXPECT_EQ(encodeIndex(loaded), encodeIndex(sharedIndex()));
  std::filesystem::remove(path);
  try {
    loadIndex(path);
    ADD_FAILURE();
  } catch (const IndexFormatError& e) {
    EXPECT_EQ(e.code, IndexErrorCode::Io);
  }
}

TEST(Serialization, RebuildIsByteIdentical) {
  const std::string a = encodeIndex(buildIndex(corpus::gear(24)).index);
  BuildOptions opts;
  opts.threads = 3;
  const std::string b = encodeIndex(buildIndex(corpus::gear(24), opts).index);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, encodeIndex(sharedIndex()));
}

TEST(Serialization, ErrorsAreDistinct) {
  const std::string good = encodeIndex(sharedIndex());
  EXPECT_EQ(decodeError(good.substr(0, good.size() - 100)), IndexErrorCode::Truncated);
  EXPECT_EQ(decodeError(good.substr(0, 10)), IndexErrorCode::Truncated);

  std::string magic = good;
  magic[0] = 'X';
  EXPECT_EQ(decodeError(magic), IndexErrorCode::BadMagic);

  std::string version = good;
  const std::uint32_t v2 = kIndexFormatVersion + 1;
  std::memcpy(version.data() + 4, &v2, 4);
  EXPECT_EQ(decodeError(version), IndexErrorCode::VersionMismatch);

  std::string flipped = good;
  flipped[flipped.size() / 2] ^= 0x40;
  EXPECT_EQ(decodeError(flipped), IndexErrorCode::Corrupted);

  EXPECT_EQ(decodeError(good + "x"), IndexErrorCode::Corrupted);
}

TEST(Index, MemoryAndMetadata) {
  const P2MIndex& idx = sharedIndex();
  const auto mem = idx.memoryUsage();
  EXPECT_GT(mem.mesh, 0u);
  EXPECT_GT(mem.kdtree, 0u);
  EXPECT_GT(mem.table, 0u);
  EXPECT_GT(mem.rtrees, 0u);
  const VoronoiConfig cfg = VoronoiConfig::around(idx.mesh().bounds());
  EXPECT_EQ(idx.metadata().halfExtent, cfg.halfExtent);
  EXPECT_EQ(idx.metadata().tolerance, cfg.tolerance());
  EXPECT_EQ(idx.rtrees().size(), idx.mesh().vertexCount());
  for (Index v = 0; v < idx.mesh().vertexCount(); ++v)
    EXPECT_EQ(idx.rtrees()[v].items().size(), idx.table().lists[v].size());
}
