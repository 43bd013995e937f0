#include "oracles.hpp"

#include "p2m/geom.hpp"

#include <gtest/gtest.h>

using namespace p2m;

TEST(Segment, PerpendicularFootAtEndpoint) {
  const auto r = pointSegmentDistance(Vec3(0, 0, 1), Vec3(0, 0, 0), Vec3(1, 0, 0));
  EXPECT_DOUBLE_EQ(r.distance, 1.0);
  EXPECT_EQ(r.closest, Vec3(0, 0, 0));
  EXPECT_EQ(r.endpoint, 0);
}

TEST(Segment, EndpointClamp) {
  const auto r = pointSegmentDistance(Vec3(2, 0, 0), Vec3(0, 0, 0), Vec3(1, 0, 0));
  EXPECT_DOUBLE_EQ(r.distance, 1.0);
  EXPECT_EQ(r.closest, Vec3(1, 0, 0));
  EXPECT_EQ(r.endpoint, 1);
}

TEST(Segment, DegenerateFallsBackToPoint) {
  const auto r = pointSegmentDistance(Vec3(0, 3, 4), Vec3(0, 0, 0), Vec3(0, 0, 0));
  EXPECT_DOUBLE_EQ(r.distance, 5.0);
}

TEST(Segment, MatchesDenseSampling) {
  Rng rng(101);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 q = oracle::randomPoint(rng, -2, 2), a = oracle::randomPoint(rng, -1, 1),
               b = oracle::randomPoint(rng, -1, 1);
    const double len = (b - a).norm();
    const double sampled = oracle::segmentDistanceSampled(q, a, b, 1000000);
    EXPECT_NEAR(pointSegmentDistance(q, a, b).distance, sampled, 1e-6 * len);
  }
}

TEST(Segment, SymmetricBitwise) {
  Rng rng(102);
  for (int i = 0; i < 10000; ++i) {
    const Vec3 q = oracle::randomPoint(rng, -2, 2), a = oracle::randomPoint(rng, -1, 1),
               b = oracle::randomPoint(rng, -1, 1);
    const auto ab = pointSegmentDistance(q, a, b);
    const auto ba = pointSegmentDistance(q, b, a);
    ASSERT_EQ(ab.distance, ba.distance);
    ASSERT_EQ(ab.closest, ba.closest);
  }
}

TEST(Triangle, AtVertex) {
  const Vec3 a(0, 0, 0), b(1, 0, 0), c(0, 1, 0);
  const auto r = pointTriangleDistance(b, a, b, c);
  EXPECT_EQ(r.distance, 0.0);
  EXPECT_EQ(r.feature, Feature::Vertex);
  EXPECT_EQ(r.index, 1);
}

TEST(Triangle, NormalOffsetFromCentroid) {
  const Vec3 a(0, 0, 0), b(2, 0, 1), c(0, 3, -1);
  const Vec3 n = (b - a).cross(c - a).normalized();
  const Vec3 q = (a + b + c) / 3 + 0.7 * n;
  const auto r = pointTriangleDistance(q, a, b, c);
  EXPECT_NEAR(r.distance, 0.7, 1e-15);
  EXPECT_EQ(r.feature, Feature::Face);
}

TEST(Triangle, DegenerateThrows) {
  EXPECT_THROW(pointTriangleDistance(Vec3(0, 0, 1), Vec3(0, 0, 0), Vec3(1, 1, 1), Vec3(2, 2, 2)),
               DegenerateTriangleError);
}

TEST(Triangle, MatchesDenseBarycentricSampling) {
  Rng rng(103);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 a = oracle::randomPoint(rng, -1, 1), b = oracle::randomPoint(rng, -1, 1),
               c = oracle::randomPoint(rng, -1, 1);
    if ((b - a).cross(c - a).norm() < 1e-3) continue;
    const Vec3 q = oracle::randomPoint(rng, -2, 2);
    const double diag = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
    const double sampled = oracle::triangleDistanceSampled(q, a, b, c, 1000);
    ASSERT_NEAR(pointTriangleDistance(q, a, b, c).distance, sampled, 1e-5 * diag) << "case " << i;
  }
}

TEST(Triangle, CyclicPermutationInvariant) {
  Rng rng(104);
  for (int i = 0; i < 10000; ++i) {
    const Vec3 a = oracle::randomPoint(rng, -1, 1), b = oracle::randomPoint(rng, -1, 1),
               c = oracle::randomPoint(rng, -1, 1), q = oracle::randomPoint(rng, -2, 2);
    const double d0 = pointTriangleDistance(q, a, b, c).distance;
    EXPECT_NEAR(pointTriangleDistance(q, b, c, a).distance, d0, 1e-12);
    EXPECT_NEAR(pointTriangleDistance(q, c, a, b).distance, d0, 1e-12);
  }
}

TEST(Triangle, EdgeRegionSharedAcrossNeighbours) {
  // Two triangles sharing edge (a, b); an edge-region point must get the
  // same bits from either side.
  Rng rng(105);
  for (int i = 0; i < 10000; ++i) {
    const Vec3 a = oracle::randomPoint(rng, -1, 1), b = oracle::randomPoint(rng, -1, 1),
               c = oracle::randomPoint(rng, -1, 1), d = oracle::randomPoint(rng, -1, 1);
    const Vec3 q = 0.5 * (a + b) + 3 * oracle::randomUnit(rng);
    const auto r1 = pointTriangleDistance(q, a, b, c);
    const auto r2 = pointTriangleDistance(q, b, a, d);
    if (r1.feature == Feature::Edge && r1.index == 0 && r2.feature == Feature::Edge && r2.index == 0) {
      ASSERT_EQ(r1.distance, r2.distance);
      ASSERT_EQ(r1.closest, r2.closest);
    }
  }
}

TEST(Triangle, PrismInteriorEqualsPlaneDistance) {
  Rng rng(106);
  for (int i = 0; i < 10000; ++i) {
    const Vec3 a = oracle::randomPoint(rng, -1, 1), b = oracle::randomPoint(rng, -1, 1),
               c = oracle::randomPoint(rng, -1, 1);
    if ((b - a).cross(c - a).norm() < 1e-2) continue;
    double u = rng.uniform(), v = rng.uniform();
    if (u + v > 1) {
      u = 1 - u;
      v = 1 - v;
    }
    const Vec3 n = (b - a).cross(c - a).normalized();
    const Vec3 q = a + u * (b - a) + v * (c - a) + rng.uniform(-3, 3) * n;
    const Plane3 plane = Plane3::through(a, n);
    EXPECT_NEAR(pointTriangleDistance(q, a, b, c).distance, distPointPlane(q, plane), 1e-12);
  }
}

TEST(Triangle, RigidMotionInvariant) {
  Rng rng(107);
  for (int i = 0; i < 2000; ++i) {
    const Vec3 a = oracle::randomPoint(rng, -1, 1), b = oracle::randomPoint(rng, -1, 1),
               c = oracle::randomPoint(rng, -1, 1), q = oracle::randomPoint(rng, -2, 2);
    const Eigen::Matrix3d rot =
        Eigen::AngleAxisd(rng.uniform(0, 6.28), oracle::randomUnit(rng)).toRotationMatrix();
    const Vec3 t = oracle::randomPoint(rng, -5, 5);
    auto move = [&](const Vec3& x) -> Vec3 { return rot * x + t; };
    const double d0 = pointTriangleDistance(q, a, b, c).distance;
    const double d1 = pointTriangleDistance(move(q), move(a), move(b), move(c)).distance;
    EXPECT_GE(d0, 0.0);
    EXPECT_NEAR(d1, d0, 1e-9 * std::max(1.0, d0));
    const double s0 = pointSegmentDistance(q, a, b).distance;
    EXPECT_NEAR(pointSegmentDistance(move(q), move(a), move(b)).distance, s0, 1e-9 * std::max(1.0, s0));
  }
}

TEST(Lines, DistanceToAxis) {
  const Line3 x = Line3::through(Vec3(0, 0, 0), Vec3(1, 0, 0));
  EXPECT_DOUBLE_EQ(distPointLine(Vec3(0, 1, 0), x), 1.0);
  EXPECT_DOUBLE_EQ(distPointLine(Vec3(5, 0, 0), x), 0.0);
}

TEST(Lines, ProjectionIdentity) {
  Rng rng(108);
  for (int i = 0; i < 10000; ++i) {
    const Vec3 o = oracle::randomPoint(rng, -1, 1), q = oracle::randomPoint(rng, -3, 3);
    const Vec3 d = oracle::randomUnit(rng);
    const Line3 l{o, d};
    // Independent: distance through the cross product.
    const double expected = (q - o).cross(d).norm();
    EXPECT_NEAR(distPointLine(q, l), expected, 1e-12);
  }
}

TEST(Planes, Distance) {
  const Plane3 z{Vec3::UnitZ(), 0};
  EXPECT_DOUBLE_EQ(distPointPlane(Vec3(0, 0, 2), z), 2.0);
  EXPECT_DOUBLE_EQ(distPointPlane(Vec3(3, 4, 0), z), 0.0);
}

TEST(Planes, DistanceMatchesSampledPlanePoints) {
  Rng rng(109);
  for (int i = 0; i < 20; ++i) {
    const Vec3 n = oracle::randomUnit(rng);
    const Plane3 p = Plane3::through(oracle::randomPoint(rng, -1, 1), n);
    const Vec3 q = oracle::randomPoint(rng, -2, 2);
    const Vec3 u = n.unitOrthogonal(), w = n.cross(u);
    const Vec3 foot = q - p.signedDistance(q) * n;
    double best = std::numeric_limits<double>::infinity();
    for (int a = -500; a < 500; ++a)
      for (int b = -500; b < 500; ++b) best = std::min(best, (q - (foot + 1e-3 * (a * u + b * w))).norm());
    EXPECT_NEAR(distPointPlane(q, p), best, 1e-6 * std::max(1.0, q.norm()));
  }
}

TEST(Planes, HalfSpaceConvention) {
  const Plane3 p = Plane3::through(Vec3(1, 0, 0), Vec3(1, 0, 0));
  EXPECT_TRUE(p.contains(Vec3(0, 0, 0)));
  EXPECT_FALSE(p.contains(Vec3(2, 0, 0)));
  EXPECT_TRUE(p.contains(Vec3(1, 5, 5)));
  const Plane3 h = bisector(Vec3(0, 0, 0), Vec3(2, 0, 0));
  EXPECT_TRUE(h.contains(Vec3(0.9, 3, 0)));
  EXPECT_FALSE(h.contains(Vec3(1.1, 3, 0)));
}

TEST(Bisectors, PointVsLine) {
  const Line3 l = Line3::through(Vec3(0, 0, 0), Vec3(1, 0, 0));
  const Vec3 v(0, 2, 0);
  EXPECT_TRUE(closerToPointThanLine(v, v, l, 0.0));
  EXPECT_FALSE(closerToPointThanLine(Vec3(3, 0, 0), v, l, 0.0));

  Rng rng(110);
  const double margin = 1e-6;
  for (int i = 0; i < 100000; ++i) {
    const Vec3 x = oracle::randomPoint(rng, -3, 3);
    const double diff = distPointLine(x, l) - (x - v).norm();
    if (std::abs(diff - margin) <= 1e-12) continue;
    EXPECT_EQ(closerToPointThanLine(x, v, l, margin), diff >= margin);
  }
}

TEST(Bisectors, PointVsPlane) {
  const Plane3 p{Vec3::UnitZ(), 0};
  const Vec3 v(0, 0, 1);
  EXPECT_TRUE(closerToPointThanPlane(v, v, p, 0.0));
  EXPECT_FALSE(closerToPointThanPlane(Vec3(4, 4, 0), v, p, 0.0));

  Rng rng(111);
  const double margin = 1e-6;
  for (int i = 0; i < 100000; ++i) {
    const Vec3 x = oracle::randomPoint(rng, -3, 3);
    const double diff = distPointPlane(x, p) - (x - v).norm();
    if (std::abs(diff - margin) <= 1e-12) continue;
    EXPECT_EQ(closerToPointThanPlane(x, v, p, margin), diff >= margin);
  }
}

TEST(Boxes, SquaredDistance) {
  const Aabb box(Vec3(0, 0, 0), Vec3(1, 1, 1));
  EXPECT_EQ(boxSquaredDistance(box, Vec3(0.5, 0.5, 0.5)), 0.0);
  EXPECT_DOUBLE_EQ(boxSquaredDistance(box, Vec3(2, 0.5, 3)), 5.0);
}
