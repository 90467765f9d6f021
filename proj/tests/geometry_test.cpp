#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>

#include <qhl/geometry.hpp>
#include <qhl/qhyp.hpp>

using namespace qhl;

namespace {

Domain half_plane() { return make_domain({{"kind", "half_space"}}); }
Domain unit_disk() { return make_domain({{"kind", "ball"}, {"params", {{"r", 1.0}}}}); }

std::vector<nlohmann::json> all_specs() {
  return {{{"kind", "half_space"}},
          {{"kind", "ball"}, {"params", {{"radius", 1.0}}}},
          {{"kind", "punctured_space"}},
          {{"kind", "slit_plane"}},
          {{"kind", "l_shape"}},
          {{"kind", "polygon"}, {"params", {{"vertices", {{0, 0}, {2, 0}, {2, 1}, {0, 1}}}}}},
          {{"kind", "cusp"}, {"params", {{"power", 2}}}},
          {{"kind", "half_space"}, {"dim", 3}}};
}

}  // namespace

TEST(MakeDomain, CanonicalInstances) {
  const auto hp = half_plane();
  EXPECT_EQ(hp.kind(), DomainKind::half_space);
  EXPECT_TRUE(hp.contains({0.3, 1e-6}));
  EXPECT_FALSE(hp.contains({0.3, 0.0}));
  EXPECT_FALSE(hp.bounded());

  const auto disk = unit_disk();
  EXPECT_DOUBLE_EQ(disk.radius(), 1.0);
  EXPECT_TRUE(disk.contains({0.99, 0}));
  EXPECT_FALSE(disk.contains({1.0, 0}));
  EXPECT_TRUE(disk.bounded());

  const auto cusp = make_domain({{"kind", "cusp"}, {"params", {{"power", 2}}}});
  EXPECT_TRUE(cusp.contains({0.5, 0.2}));
  EXPECT_FALSE(cusp.contains({0.5, 0.3}));
  EXPECT_FALSE(cusp.contains({-0.1, 0}));
}

TEST(MakeDomain, RejectsBadSpecs) {
  EXPECT_THROW(make_domain({{"kind", "torus"}}), Error);
  EXPECT_THROW(make_domain({{"kind", "ball"}, {"params", {{"radius", 0.0}}}}), Error);
  EXPECT_THROW(make_domain({{"kind", "ball"}, {"params", {{"radius", -1.0}}}}), Error);
  EXPECT_THROW(make_domain({{"kind", "slit_plane"}, {"dim", 3}}), Error);
  EXPECT_THROW(make_domain({{"kind", "polygon"}, {"params", {{"vertices", {{0, 0}, {1, 1}}}}}}), Error);
  EXPECT_THROW(make_domain({{"kind", "half_space"}, {"window", {{-1, -2}, {1, -1}}}}), Error);
}

TEST(DistBoundary, ExactValues) {
  EXPECT_DOUBLE_EQ(half_plane().dist_boundary({0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(unit_disk().dist_boundary({0.5, 0}), 0.5);
}

TEST(DistBoundary, RefusesNonInterior) {
  try {
    half_plane().dist_boundary({0, 0});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::not_interior);
    EXPECT_STREQ(e.what(), "not interior");
  }
  EXPECT_THROW(unit_disk().dist_boundary({2, 0}), Error);
}

TEST(DistBoundary, LShapeMatchesDenseBoundarySampling) {
  const auto dom = make_domain({{"kind", "l_shape"}});
  const auto& poly = dom.polygon();
  constexpr int per_edge = 1'000'000 / 6;
  for (const Point p : {Point(0.95, 1.03), Point(1.02, 0.97), Point(0.9, 0.9), Point(0.999, 0.999),
                        Point(1.3, 0.8), Point(0.7, 1.4)}) {
    double best = infinity;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Point& a = poly[i];
      const Point& b = poly[(i + 1) % poly.size()];
      for (int k = 0; k <= per_edge; ++k) best = std::min(best, distance(p, a + (b - a) * (double(k) / per_edge)));
    }
    EXPECT_NEAR(dom.dist_boundary(p), best, 1e-9) << p[0] << "," << p[1];
  }
}

TEST(DistBoundary, SignConsistencyAndLipschitz) {
  for (const auto& spec : all_specs()) {
    const auto dom = make_domain(spec);
    Rng rng(17);
    const Box& w = dom.window();
    std::vector<Point> inside;
    for (int i = 0; i < 10'000; ++i) {
      Point p;
      for (int a = 0; a < dom.dim(); ++a) p[a] = rng.uniform(w.lo[a] - 0.5, w.hi[a] + 0.5);
      bool positive = false;
      try {
        positive = dom.dist_boundary(p) > 0.0;
      } catch (const Error&) {
      }
      ASSERT_EQ(dom.contains(p), positive) << spec.dump();
      if (positive) inside.push_back(p);
    }
    ASSERT_GT(inside.size(), 100u) << spec.dump();
    for (std::size_t i = 1; i < inside.size(); ++i) {
      const Point &p = inside[i - 1], &q = inside[i];
      EXPECT_LE(std::abs(dom.depth(p) - dom.depth(q)), distance(p, q) + 1e-12) << spec.dump();
    }
  }
}

TEST(SampleInterior, DeterministicForSeed) {
  const auto a = sample_interior(half_plane(), 3, 7);
  const auto b = sample_interior(half_plane(), 3, 7);
  ASSERT_EQ(a.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_TRUE(half_plane().contains(a[i]));
    for (int k = 0; k < 3; ++k) EXPECT_EQ(std::bit_cast<std::uint64_t>(a[i][k]), std::bit_cast<std::uint64_t>(b[i][k]));
  }
  EXPECT_NE(sample_interior(half_plane(), 3, 8)[0][0], a[0][0]);
}

TEST(SampleInterior, DiskPointsAreInterior) {
  const auto disk = unit_disk();
  for (const auto& p : sample_interior(disk, 1000, 3)) EXPECT_GT(disk.dist_boundary(p), 0.0);
}

TEST(SampleInterior, ReachesDeepIntoCusp) {
  const auto cusp = make_domain({{"kind", "cusp"}, {"params", {{"power", 2}}}});
  const auto pts = sample_interior(cusp, 100, 5);
  double shallowest = infinity;
  for (const auto& p : pts) {
    EXPECT_TRUE(cusp.contains(p));
    shallowest = std::min(shallowest, cusp.depth(p));
  }
  EXPECT_LT(shallowest, 1e-3);
}

TEST(SampleInterior, HonoursDepthBand) {
  InteriorSampling opts;
  opts.min_depth = 0.2;
  opts.max_depth = 0.4;
  for (const auto& p : sample_interior(unit_disk(), 200, 9, opts)) {
    EXPECT_GE(unit_disk().depth(p), 0.2);
    EXPECT_LE(unit_disk().depth(p), 0.4);
  }
}

TEST(SampleInterior, FailsWhenRegionMissesDomain) {
  InteriorSampling opts;
  opts.region = Box{Point(5, 5), Point(6, 6)};
  opts.max_attempts = 10'000;
  EXPECT_THROW(sample_interior(unit_disk(), 5, 1, opts), Error);
}

TEST(SampleBoundary, LiesOnBoundary) {
  for (const auto& p : sample_boundary(half_plane(), 200, 4)) EXPECT_EQ(p[1], 0.0);
  for (const auto& p : sample_boundary(unit_disk(), 200, 4)) EXPECT_NEAR(p.norm(), 1.0, 1e-12);
}

TEST(SampleBoundary, PolygonCountsProportionalToEdgeLength) {
  const auto rect = make_domain({{"kind", "polygon"}, {"params", {{"vertices", {{0, 0}, {2, 0}, {2, 1}, {0, 1}}}}}});
  const auto pts = sample_boundary(rect, 600, 2);
  ASSERT_EQ(pts.size(), 600u);
  int bottom = 0, right = 0, top = 0, left = 0;
  for (const auto& p : pts) {
    if (p[1] == 0.0) ++bottom;
    else if (p[0] == 2.0) ++right;
    else if (p[1] == 1.0) ++top;
    else if (p[0] == 0.0) ++left;
    else ADD_FAILURE() << "off-boundary point " << p[0] << "," << p[1];
  }
  // perimeter 6: edges of length 2, 1, 2, 1
  EXPECT_EQ(bottom, 200);
  EXPECT_EQ(right, 100);
  EXPECT_EQ(top, 200);
  EXPECT_EQ(left, 100);
}

TEST(AnchorPoints, ScheduleDefinition) {
  const auto z1 = anchor_points(half_plane(), BoundaryAnchor::infinity({0, 1}), 100, {0, 1});
  EXPECT_DOUBLE_EQ(z1[0], 0.0);
  EXPECT_DOUBLE_EQ(z1[1], 100.0);

  const auto z2 = anchor_points(unit_disk(), BoundaryAnchor::at({1, 0}), 100, {0, 0});
  EXPECT_NEAR(z2[0], 1.0 - 1.0 / 100, 1e-15);
  EXPECT_NEAR(z2[1], 0.0, 1e-15);

  const auto z3 = anchor_points(half_plane(), BoundaryAnchor::at({3, 0}), 10, {0, 1});
  EXPECT_DOUBLE_EQ(z3[0], 3.0);
  EXPECT_DOUBLE_EQ(z3[1], 0.1);
}

TEST(AnchorPoints, InfinityOnBoundedDomainFails) {
  EXPECT_THROW(anchor_points(unit_disk(), BoundaryAnchor::infinity({1, 0}), 10, {0, 0}), Error);
}

TEST(AnchorPoints, QuasihyperbolicDistanceDivergesAlongSchedule) {
  const auto dom = make_domain({{"kind", "half_space"}, {"window", {{-3, 0}, {3, 40}}}});
  const auto g = build_graph(dom, 0.1, 8);
  double previous = -1.0;
  for (double R : {2.0, 4.0, 8.0, 16.0, 32.0}) {
    const double k = qh_distance(g, {0, 1}, anchor_points(dom, BoundaryAnchor::infinity({0, 1}), R, {0, 1}));
    EXPECT_GT(k, previous) << R;
    previous = k;
  }
  const auto disk = build_graph(unit_disk(), 0.005, 8);
  previous = -1.0;
  for (double R : {2.0, 4.0, 8.0, 16.0}) {
    const double k = qh_distance(disk, {0, 0}, anchor_points(unit_disk(), BoundaryAnchor::at({1, 0}), R, {0, 0}));
    EXPECT_GT(k, previous) << R;
    previous = k;
  }
}
