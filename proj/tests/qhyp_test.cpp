#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <qhl/qhyp.hpp>
#include <qhl/verify.hpp>

using namespace qhl;

namespace {

const MetricGraph& half_plane_fine() {
  static const MetricGraph g =
      build_graph(make_domain({{"kind", "half_space"}, {"window", {{-2, 0}, {2, 4}}}}), 0.02);
  return g;
}

const MetricGraph& disk_fine() {
  static const MetricGraph g = build_graph(make_domain({{"kind", "ball"}, {"params", {{"radius", 1.0}}}}), 0.02);
  return g;
}

}  // namespace

TEST(QhDistance, VerticalSegment) {
  EXPECT_NEAR(qh_distance(half_plane_fine(), {0, 1}, {0, 3}), std::log(3.0), 0.02 * std::log(3.0));
}

TEST(QhDistance, HorizontalPairMatchesArccosh) {
  const double exact = std::acosh(1.5);
  EXPECT_NEAR(closed_form_qh(ClosedForm::half_space, {0, 1}, {1, 1}), exact, 1e-14);
  EXPECT_NEAR(qh_distance(half_plane_fine(), {0, 1}, {1, 1}), exact, 0.03 * exact);
}

TEST(QhDistance, SamePointIsZero) { EXPECT_EQ(qh_distance(half_plane_fine(), {0.3, 1.1}, {0.3, 1.1}), 0.0); }

TEST(QhDistance, RefusesPointsNearBoundary) {
  try {
    qh_distance(half_plane_fine(), {0, 0.03}, {0, 1});
    FAIL() << "expected refusal";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::near_boundary);
  }
  EXPECT_THROW(qh_distance(half_plane_fine(), {0, -1}, {0, 1}), Error);
}

TEST(QhGeodesic, VerticalGeodesicHugsTheAxis) {
  const auto geo = qh_geodesic(half_plane_fine(), {0, 1}, {0, 3});
  for (VertexId v : geo.path.vertices) EXPECT_LE(std::abs(half_plane_fine().position(v)[0]), 0.02 + 1e-12);
  EXPECT_EQ(geo.k, geo.path.qh_length);
  EXPECT_EQ(geo.h, 0.02);
  EXPECT_EQ(geo.snap_from, 0.0);
}

TEST(QhGeodesic, ArchesLikeTheHyperbolicSemicircle) {
  const auto& g = half_plane_fine();
  const auto geo = qh_geodesic(g, {-1, 0.2}, {1, 0.2});
  double apex = 0.0;
  for (VertexId v : geo.path.vertices) apex = std::max(apex, g.position(v)[1]);
  // circle centred on the boundary through both endpoints
  const double oracle = std::hypot(1.0, 0.2);
  EXPECT_NEAR(apex, oracle, 0.1 * oracle);
}

TEST(QhGeodesic, DiskRadiusIsStraight) {
  const auto& g = disk_fine();
  const auto geo = qh_geodesic(g, {0, 0}, {0.9, 0});
  for (VertexId v : geo.path.vertices) EXPECT_LE(std::abs(g.position(v)[1]), g.spacing() + 1e-12);
  EXPECT_NEAR(geo.k, std::log(10.0), 0.03 * std::log(10.0));  // ∫ dr / (1 - r)
}

TEST(QhGeodesic, SubpathsAreGeodesics) {
  const auto& g = half_plane_fine();
  const auto geo = qh_geodesic(g, {-1.2, 0.3}, {1.4, 2.1});
  const VertexId x = geo.path.vertices.front(), y = geo.path.vertices.back();
  for (std::size_t i = 1; i + 1 < geo.path.vertices.size(); i += 7) {
    const VertexId v = geo.path.vertices[i];
    const double kxv = shortest_path(g, x, v, g.qh_weights()).qh_length;
    const double kvy = shortest_path(g, v, y, g.qh_weights()).qh_length;
    EXPECT_NEAR(kxv + kvy, geo.k, 1e-9);
  }
}

TEST(ClosedForm, KnownValues) {
  const double e = std::exp(1.0);
  EXPECT_NEAR(closed_form_qh(ClosedForm::half_space, {0, 1}, {0, e}), 1.0, 1e-14);
  EXPECT_NEAR(closed_form_qh(ClosedForm::punctured_plane, {1, 0}, {e, 0}), 1.0, 1e-14);
  EXPECT_NEAR(closed_form_qh(ClosedForm::punctured_plane, {1, 0}, {-1, 0}), std::numbers::pi, 1e-14);
  const auto disk = make_domain({{"kind", "ball"}});
  EXPECT_THROW(closed_form_qh(disk, {0, 0}, {0.5, 0}), Error);
}

TEST(ClosedForm, AntipodalPuncturedPlaneAgreesWithGrid) {
  const auto g = build_graph(make_domain({{"kind", "punctured_space"}, {"window", {{-2, -2}, {2, 2}}}}), 0.01);
  EXPECT_NEAR(qh_distance(g, {1, 0}, {-1, 0}), std::numbers::pi, 0.03 * std::numbers::pi);
}

TEST(ClosedForm, SeededPairsAgreeWithGrid) {
  const auto& g = half_plane_fine();
  const auto pairs = sample_pairs(g, 30, 5);
  std::vector<double> err;
  for (const auto& [a, b] : pairs) {
    const Point x = g.position(g.snap(a)), y = g.position(g.snap(b));
    const double exact = closed_form_qh(g.domain(), x, y);
    err.push_back(std::abs(qh_distance(g, x, y) - exact) / exact);
  }
  std::sort(err.begin(), err.end());
  EXPECT_LE(err[err.size() / 2], 0.02);
  EXPECT_LE(err.back(), 0.05);
}

TEST(QhDistance, ComparableToRelativeDistanceInSmallBalls) {
  const auto r = verify_qh_sandwich(disk_fine(), sample_near_pairs(disk_fine(), 120, 3, 1.0), 1.05);
  EXPECT_GE(r.samples, 60u);
  EXPECT_TRUE(r.pass) << r.constants.at("lower_ratio") << " " << r.constants.at("upper_ratio");
}
