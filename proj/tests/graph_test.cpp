#include <gtest/gtest.h>

#include <cmath>

#include <qhl/graph.hpp>

using namespace qhl;

namespace {

const Domain& half_plane() {
  static const Domain d = make_domain({{"kind", "half_space"}, {"window", {{-2, 0}, {2, 2}}}});
  return d;
}

const Domain& disk() {
  static const Domain d = make_domain({{"kind", "ball"}, {"params", {{"radius", 1.0}}}});
  return d;
}

const Domain& slit() {
  static const Domain d = make_domain({{"kind", "slit_plane"}, {"window", {{-2, -2}, {2, 2}}}});
  return d;
}

// Worst length ratio of a grid path in the 16-neighbour stencil against the
// straight segment: the bisector of two adjacent stencil directions.
const double stencil16_anisotropy = 1.0 / std::cos(0.5 * std::atan(0.5));

}  // namespace

TEST(BuildGraph, HalfPlaneVertexCountMatchesEnumeration) {
  const double h = 0.1;
  const auto g = build_graph(half_plane(), h, 8);
  std::size_t expected = 0;
  for (int i = 0; i <= 40; ++i)
    for (int j = 0; j <= 20; ++j)
      if (j * h >= 0.5 * h) ++expected;
  EXPECT_EQ(g.vertex_count(), expected);
  EXPECT_EQ(g.component_count(), 1);
  EXPECT_NEAR(static_cast<double>(g.vertex_count()), 800.0, 40.0);
}

TEST(BuildGraph, DiskEdgesLieInside) {
  const auto g = build_graph(disk(), 0.05);
  const auto& adj = g.adjacency();
  ASSERT_GT(g.edge_count(), 0u);
  for (VertexId u = 0; u < g.vertex_count(); ++u)
    for (std::size_t e = adj.begin(u); e < adj.end(u); ++e) {
      const Point& a = g.position(u);
      const Point& b = g.position(adj.targets[e]);
      for (int k = 1; k < 8; ++k) ASSERT_TRUE(disk().contains(a + (b - a) * (k / 8.0)));
    }
}

TEST(BuildGraph, NoEdgeCrossesTheSlit) {
  const auto g = build_graph(slit(), 0.1);
  const auto& adj = g.adjacency();
  std::size_t near_slit = 0;
  for (VertexId u = 0; u < g.vertex_count(); ++u)
    for (std::size_t e = adj.begin(u); e < adj.end(u); ++e) {
      const Point& a = g.position(u);
      const Point& b = g.position(adj.targets[e]);
      if (a[1] * b[1] > 0.0) continue;
      // leftmost point of the segment on the x-axis
      const double x = a[1] == b[1] ? std::min(a[0], b[0]) : a[0] + a[1] / (a[1] - b[1]) * (b[0] - a[0]);
      ++near_slit;
      EXPECT_GT(x, slit().tip()) << a[0] << "," << a[1] << " -> " << b[0] << "," << b[1];
    }
  EXPECT_GT(near_slit, 0u);
}

TEST(BuildGraph, Errors) {
  EXPECT_THROW(build_graph(disk(), 0.0), Error);
  EXPECT_THROW(build_graph(disk(), 0.05, 26), Error);
  EXPECT_THROW(build_graph(disk(), 5.0), Error);  // single lattice point, outside the disk
  try {
    build_graph(disk(), 1e-4);
    FAIL() << "expected budget error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::budget_exceeded);
  }
}

TEST(ShortestPath, SameVertexIsTrivial) {
  const auto g = build_graph(half_plane(), 0.05);
  for (auto w : {Weighting::euclidean, Weighting::quasihyperbolic}) {
    const auto p = shortest_path(g, {0, 1}, {0, 1}, w);
    ASSERT_EQ(p.vertices.size(), 1u);
    EXPECT_EQ(p.euclidean_length, 0.0);
    EXPECT_EQ(p.qh_length, 0.0);
  }
}

TEST(ShortestPath, VerticalQuasihyperbolicPath) {
  const auto g = build_graph(half_plane(), 0.05);
  const auto p = shortest_path(g, {0, 1}, {0, 2}, Weighting::quasihyperbolic);
  EXPECT_NEAR(p.qh_length, std::log(2.0), 0.02 * std::log(2.0));
  for (VertexId v : p.vertices) EXPECT_LE(std::abs(g.position(v)[0]), g.spacing() + 1e-12);

  const auto tall = make_domain({{"kind", "half_space"}, {"window", {{-2, 0}, {2, 4}}}});
  const auto gt = build_graph(tall, 0.05);
  EXPECT_NEAR(shortest_path(gt, {0, 1}, {0, 3}, Weighting::quasihyperbolic).qh_length, std::log(3.0),
              0.02 * std::log(3.0));
}

TEST(ShortestPath, SlitWithoutBypassIsDisconnected) {
  const auto dom = make_domain({{"kind", "slit_plane"}, {"params", {{"tip", 3.0}}}, {"window", {{-2, -2}, {2, 2}}}});
  const auto g = build_graph(dom, 0.1);
  EXPECT_EQ(g.component_count(), 2);
  try {
    shortest_path(g, {0, 1}, {0, -1}, Weighting::euclidean);
    FAIL() << "expected disconnected";
  } catch (const DisconnectedError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::disconnected);
    EXPECT_NE(e.component_a(), e.component_b());
    EXPECT_EQ(e.component_a(), g.component(g.snap({0, 1})));
    EXPECT_EQ(e.component_b(), g.component(g.snap({0, -1})));
  }
}

TEST(InnerDistance, ConvexDomainWithinStencilAnisotropy) {
  const auto g = build_graph(disk(), 0.02);
  Rng rng(4);
  for (int i = 0; i < 40; ++i) {
    const Point x = g.position(g.snap({rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6)}));
    const Point y = g.position(g.snap({rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6)}));
    const double l = inner_distance(g, x, y), e = distance(x, y);
    EXPECT_GE(l, e - 1e-12);
    EXPECT_LE(l, stencil16_anisotropy * e + 1e-12);
  }
  EXPECT_EQ(inner_distance(g, {0.1, 0.2}, {0.1, 0.2}), 0.0);
}

TEST(InnerDistance, GoesAroundTheSlitTip) {
  const auto g = build_graph(slit(), 0.05);
  const Point tip(slit().tip(), 0);
  for (const auto& [x, y] : {std::pair{Point(-1, 0.5), Point(-1, -0.5)}, std::pair{Point(-0.5, 1), Point(-1.5, -0.3)}}) {
    const Point vx = g.position(g.snap(x)), vy = g.position(g.snap(y));
    EXPECT_GE(inner_distance(g, vx, vy), distance(vx, tip) + distance(tip, vy));
  }
}

TEST(PathDiameter, Examples) {
  const auto g = build_graph(half_plane(), 0.01, 8);
  EXPECT_EQ(make_path(g, {g.snap({0, 1})}).diameter, 0.0);

  const VertexId a = g.snap({0, 1}), b = g.snap({0.01, 1.01});
  ASSERT_NE(g.adjacency().find(a, b), Csr::npos);
  EXPECT_DOUBLE_EQ(make_path(g, {a, b}).diameter, distance(g.position(a), g.position(b)));

  // upper half of the unit circle around (0, 0.5)
  std::vector<VertexId> arc;
  for (int i = 0; i <= 1000; ++i) {
    const double t = std::numbers::pi * i / 1000;
    const VertexId v = g.snap({std::cos(t), 0.5 + std::sin(t)});
    if (arc.empty() || arc.back() != v) arc.push_back(v);
  }
  const auto p = make_path(g, arc);
  EXPECT_NEAR(p.diameter, 2.0, 0.02);
  // brute-force pairwise maximum
  double best = 0.0;
  for (VertexId u : arc)
    for (VertexId v : arc) best = std::max(best, distance(g.position(u), g.position(v)));
  EXPECT_DOUBLE_EQ(p.diameter, best);
}

TEST(MetricGraph, DistancesSatisfyMetricAxioms) {
  const auto g = build_graph(slit(), 0.1);
  Rng rng(12);
  const auto n = g.vertex_count();
  for (auto w : {Weighting::euclidean, Weighting::quasihyperbolic}) {
    for (int t = 0; t < 200; ++t) {
      const VertexId x = rng.below(n), y = rng.below(n), z = rng.below(n);
      const auto dx = distances_from(g, x, g.weights(w));
      const auto dy = distances_from(g, y, g.weights(w));
      const double tol = 1e-12 * std::max(1.0, dx[y]);
      EXPECT_NEAR(dx[y], dy[x], tol);
      EXPECT_LE(dx[z], dx[y] + dy[z] + tol);
    }
  }
}

TEST(MetricGraph, PathLengthIsSumOfTrapezoidWeights) {
  const auto g = build_graph(disk(), 0.05);
  const auto p = shortest_path(g, {-0.7, 0.1}, {0.6, -0.4}, Weighting::quasihyperbolic);
  double qh = 0.0, eu = 0.0;
  for (std::size_t i = 1; i < p.vertices.size(); ++i) {
    const VertexId u = p.vertices[i - 1], v = p.vertices[i];
    const double len = distance(g.position(u), g.position(v));
    eu += len;
    qh += len * 0.5 * (1.0 / disk().depth(g.position(u)) + 1.0 / disk().depth(g.position(v)));
  }
  EXPECT_NEAR(p.qh_length, qh, 1e-12 * qh);
  EXPECT_NEAR(p.euclidean_length, eu, 1e-12 * eu);
}

TEST(MetricGraph, RefinementDifferencesShrink) {
  const auto dom = make_domain({{"kind", "half_space"}, {"window", {{-3, 0}, {3, 4}}}});
  const Point x(-1, 0.8), y(1.2, 2.0);
  std::vector<double> k;
  for (double h : {0.2, 0.1, 0.05, 0.025}) {
    const auto g = build_graph(dom, h);
    k.push_back(shortest_path(g, x, y, Weighting::quasihyperbolic).qh_length);
  }
  for (std::size_t i = 2; i < k.size(); ++i)
    EXPECT_LT(std::abs(k[i] - k[i - 1]), std::abs(k[i - 1] - k[i - 2])) << i;
}

TEST(MetricGraph, SnapFindsNearestVertex) {
  const auto g = build_graph(half_plane(), 0.1);
  const VertexId v = g.snap({0.33, 0.96});
  EXPECT_NEAR(g.position(v)[0], 0.3, 1e-12);
  EXPECT_NEAR(g.position(v)[1], 1.0, 1e-12);
  EXPECT_THROW(g.snap({100, 100}), Error);
}
