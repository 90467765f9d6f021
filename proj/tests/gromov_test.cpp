#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <qhl/gromov.hpp>
#include <qhl/qhyp.hpp>

using namespace qhl;

namespace {

const MetricGraph& half_plane() {
  static const MetricGraph g =
      build_graph(make_domain({{"kind", "half_space"}, {"window", {{-4, 0}, {4, 10}}}}), 0.05);
  return g;
}

double half_plane_delta() {
  static const double d = [] {
    InteriorSampling opts;
    opts.min_depth = 0.3;
    return estimate_delta(half_plane(), 40, 3, 2000, opts).delta;
  }();
  return d;
}

const BusemannField& vertical_field() {
  static const BusemannField f = busemann_field(half_plane(), {0, 1}, BoundaryAnchor::infinity({0, 1}), 4.0);
  return f;
}

}  // namespace

TEST(GromovProduct, DefinitionCollapses) {
  const auto& g = half_plane();
  const Point x(0.5, 2), o(0, 1), y(-1, 0.6);
  EXPECT_NEAR(gromov_product(g, x, x, o), qh_distance(g, x, o), 1e-12);
  EXPECT_NEAR(gromov_product(g, x, o, o), 0.0, 1e-12);
  EXPECT_NEAR(gromov_product(g, x, y, o), gromov_product(g, y, x, o), 1e-12);
}

TEST(GromovProduct, BoundedByDistanceToGeodesic) {
  const auto g = build_graph(make_domain({{"kind", "half_space"}, {"window", {{-3, 0}, {3, 4}}}}), 0.02);
  InteriorSampling opts;
  opts.min_depth = 0.3;
  const double delta = estimate_delta(g, 30, 4, 2000, opts).delta;
  const Point o(0, 1), x(-1, 0.1), y(1, 0.1);
  const double product = gromov_product(g, x, y, o);
  const auto from_o = distances_from(g, g.snap(o), g.qh_weights());
  double to_geodesic = infinity;
  for (VertexId v : qh_geodesic(g, x, y).path.vertices) to_geodesic = std::min(to_geodesic, from_o[v]);
  EXPECT_LE(product, to_geodesic + 1e-9);
  EXPECT_GE(product, to_geodesic - 2.0 * delta);
}

TEST(EstimateDelta, TreeIsZeroHyperbolic) {
  std::vector<std::pair<VertexId, VertexId>> edges;
  const VertexId nodes = 127;
  for (VertexId v = 1; v < nodes; ++v) edges.emplace_back((v - 1) / 2, v);
  const auto [tree, origin] = Csr::from_edges(nodes, edges);
  std::vector<double> ones(tree.targets.size(), 1.0);
  std::vector<VertexId> sample;
  for (VertexId v = 0; v < nodes; v += 4) sample.push_back(v);
  const auto d = distance_matrix(tree, sample, ones);
  EXPECT_EQ(estimate_delta(d, 3000, 1).delta, 0.0);
  EXPECT_LE(four_point_defect(d, 2, 2, 5, 0), 0.0);
}

TEST(EstimateDelta, ReproducibleAndPositiveOnHalfPlane) {
  InteriorSampling opts;
  opts.min_depth = 0.3;
  const auto a = estimate_delta(half_plane(), 30, 9, 1000, opts);
  const auto b = estimate_delta(half_plane(), 30, 9, 1000, opts);
  EXPECT_EQ(a.delta, b.delta);
  EXPECT_EQ(a.witness, b.witness);
  EXPECT_GT(a.delta, 0.0);
  EXPECT_LT(a.delta, std::numbers::ln2);  // four-point δ of the hyperbolic plane
}

TEST(Busemann, VerticalLineCancellation) {
  const auto g = build_graph(make_domain({{"kind", "half_space"}, {"window", {{-3, 0}, {3, 9}}}}), 0.02);
  const auto f = busemann_field(g, {0, 1}, BoundaryAnchor::infinity({0, 1}), 4.0);
  const double e = std::exp(1.0);
  EXPECT_EQ(f(g.snap({0, 1})), 0.0);
  EXPECT_NEAR(f(g.snap({0, e})), -1.0, 0.05);
  EXPECT_NEAR(f(g.snap({0, 1 / e})), 1.0, 0.05);
}

TEST(Busemann, AnchorOutsideWindowFails) {
  EXPECT_THROW(busemann_field(half_plane(), {0, 1}, BoundaryAnchor::infinity({0, 1}), 40.0), Error);
}

TEST(Busemann, LipschitzInQuasihyperbolicMetric) {
  const auto& g = half_plane();
  const auto& f = vertical_field();
  Rng rng(21);
  for (int i = 0; i < 100; ++i) {
    const VertexId x = rng.below(g.vertex_count()), y = rng.below(g.vertex_count());
    const double k = shortest_path(g, x, y, g.qh_weights()).qh_length;
    EXPECT_LE(std::abs(f(x) - f(y)), k + 10.0 * half_plane_delta());
  }
}

TEST(Busemann, AnchorStability) {
  const auto& f = vertical_field();
  const double slack = 2.0 * 3.0 * f.snap_cells * half_plane().spacing();
  for (double gap : f.gap)
    if (std::isfinite(gap)) {
      ASSERT_LE(gap, 4.0 * half_plane_delta() + slack);
    }
}

TEST(Busemann, ShadowProductsSettleAlongSchedule) {
  const auto& g = half_plane();
  const Point o(0, 1);
  const Point z(1.5, 0.5);
  double lo = infinity, hi = -infinity;
  for (double R : {2.0, 3.0, 4.0, 6.0, 8.0}) {
    const Point zr = anchor_points(g.domain(), BoundaryAnchor::infinity({0, 1}), R, o);
    const double p = gromov_product(g, z, zr, o);
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  EXPECT_LE(hi - lo, half_plane_delta() + g.spacing());
}

TEST(BusemannProduct, DefinitionCollapses) {
  const auto& g = half_plane();
  const auto& f = vertical_field();
  const Point x(0.7, 2.2);
  EXPECT_NEAR(gromov_product_busemann(f, g, x, x), f(g.snap(x)), 1e-12);
  EXPECT_EQ(gromov_product_busemann(f, g, {0, 1}, {0, 1}), 0.0);
}

TEST(ChooseEpsilon, Formula) {
  EXPECT_NEAR(choose_epsilon(1.0), 0.03151, 5e-6);
  EXPECT_NEAR(choose_epsilon(0.0), 0.3151, 5e-5);
  EXPECT_NEAR(choose_epsilon(0.5), 0.06301, 5e-6);
  EXPECT_NEAR(std::exp(22.0 * choose_epsilon(0.7) * 0.7), 2.0, 1e-12);
  EXPECT_THROW(choose_epsilon(-0.1), Error);
}

TEST(BoundaryTable, TwoPointsGiveRhoItself) {
  const auto& g = half_plane();
  const std::vector<Point> pts{{-1, 0}, {1.5, 0}};
  const auto t = hamenstadt_table(vertical_field(), g, pts, 0.1);
  EXPECT_EQ(t.d_at(0, 1), t.rho_at(0, 1));
  EXPECT_EQ(t.d_at(0, 0), 0.0);
  EXPECT_EQ(t.rho_at(0, 1), t.rho_at(1, 0));
}

TEST(BoundaryTable, SharedProxy) {
  const auto& g = half_plane();
  const auto& f = vertical_field();
  const std::vector<Point> pts{{0.5, 0}, {0.501, 0}, {-2, 0}};
  const double eps = 0.1;
  const auto t = hamenstadt_table(f, g, pts, eps);
  ASSERT_EQ(t.proxies[0], t.proxies[1]);
  EXPECT_NEAR(t.rho_at(0, 1), std::exp(-eps * f(t.proxies[0])), 1e-12);
  EXPECT_LE(t.d_at(0, 1), t.rho_at(0, 1));
}

TEST(BoundaryTable, Errors) {
  const auto& g = half_plane();
  EXPECT_THROW(hamenstadt_table(vertical_field(), g, std::vector<Point>{{0, 0}, {0, 0}}, 0.1), Error);
  EXPECT_THROW(hamenstadt_table(vertical_field(), g, std::vector<Point>{{0, 0}, {1, 0}}, 0.0), Error);
  try {
    boundary_proxy(g, {0, 2});
    FAIL() << "interior point accepted as boundary";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::not_found);
  }
}

TEST(BoundaryTable, QuasiMetricSandwichAndSnowflake) {
  const auto& g = half_plane();
  const double eps = choose_epsilon(half_plane_delta());
  std::vector<Point> pts;
  for (int i = 0; i < 11; ++i) pts.emplace_back(-2.5 + 0.5 * i, 0.0);
  const auto t = hamenstadt_table(vertical_field(), g, pts, eps);
  const double k = std::exp(22.0 * eps * half_plane_delta());
  double lo = infinity, hi = 0.0;
  for (std::size_t i = 0; i < t.n; ++i)
    for (std::size_t j = 0; j < t.n; ++j) {
      if (i == j) continue;
      EXPECT_LE(0.5 * t.rho_at(i, j), t.d_at(i, j));
      EXPECT_LE(t.d_at(i, j), t.rho_at(i, j));
      for (std::size_t m = 0; m < t.n; ++m)
        if (m != i && m != j) {
          EXPECT_LE(t.rho_at(i, j), k * std::max(t.rho_at(i, m), t.rho_at(m, j)) + 1e-12);
        }
      const double r = t.d_at(i, j) / std::pow(distance(pts[i], pts[j]), eps);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  EXPECT_LE(hi / lo, 4.0);
}
