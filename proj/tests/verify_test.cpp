#include <gtest/gtest.h>

#include <cmath>

#include <qhl/verify.hpp>

using namespace qhl;

namespace {

const MetricGraph& half_plane() {
  static const MetricGraph g =
      build_graph(make_domain({{"kind", "half_space"}, {"window", {{-2, 0}, {2, 4}}}}), 0.05);
  return g;
}

const MetricGraph& disk() {
  static const MetricGraph g = build_graph(make_domain({{"kind", "ball"}}), 0.05);
  return g;
}

const MetricGraph& slit() {
  static const MetricGraph g =
      build_graph(make_domain({{"kind", "slit_plane"}, {"window", {{-1, -1}, {1, 1}}}}), 0.02);
  return g;
}

// Pairs on lattice columns: the qh geodesic and the inner path are the same
// vertical segment.
std::vector<PointPair> vertical_pairs(std::size_t n = 30) {
  std::vector<PointPair> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = -1.0 + 0.05 * static_cast<double>(i % 40);
    const double y0 = 0.5 + 0.05 * static_cast<double>(i % 7);
    out.emplace_back(Point(x, y0), Point(x, y0 + 0.5 + 0.1 * static_cast<double>(i % 13)));
  }
  return out;
}

InteriorSampling fixed_depth(double d) {
  InteriorSampling opts;
  opts.min_depth = d;
  opts.face_margin = 0.2;
  return opts;
}

VerificationReport toy(const std::string& key, double value, bool pass = true) {
  VerificationReport r;
  r.constants[key] = value;
  r.set(pass);
  return r;
}

}  // namespace

TEST(Pairs, SamplersRespectDepthAndCount) {
  const auto& g = disk();
  const auto pairs = sample_pairs(g, 50, 4);
  ASSERT_EQ(pairs.size(), 50u);
  for (const auto& [a, b] : pairs) {
    EXPECT_GE(g.domain().depth(a), 3 * g.spacing());
    EXPECT_GE(g.domain().depth(b), 3 * g.spacing());
  }
  EXPECT_EQ(pairs, sample_pairs(g, 50, 4));
  for (const auto& [a, b] : sample_near_pairs(g, 50, 4, 0.5))
    EXPECT_LE(distance(a, b), 0.5 * g.domain().depth(a) + 1e-12);
}

TEST(Verifiers, RequireThirtySamples) {
  const auto pairs = vertical_pairs(29);
  EXPECT_THROW(verify_gehring_hayman(half_plane(), pairs), Error);
  EXPECT_THROW(verify_pommerenke(half_plane(), pairs), Error);
  EXPECT_THROW(verify_uniformity(half_plane(), pairs), Error);
  EXPECT_THROW(llc_instances(half_plane(), 10, 1), Error);
}

TEST(GehringHayman, VerticalPairsAreStraight) {
  const auto r = verify_gehring_hayman(half_plane(), vertical_pairs());
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.constants.at("C_gh"), 1.0, 0.02);
  EXPECT_EQ(r.property, "gehring_hayman");
  EXPECT_EQ(r.samples, 30u);
}

TEST(GehringHayman, DiskIsRefinementStableAndWitnessReplays) {
  const auto dom = make_domain({{"kind", "ball"}});
  const auto pairs = sample_pairs(disk(), 30, 11, fixed_depth(0.15));
  const auto coarse = verify_gehring_hayman(disk(), pairs);
  const auto fine_g = build_graph(dom, 0.025);
  const auto fine = verify_gehring_hayman(fine_g, pairs);
  const auto r = refine(coarse, fine, 0.10);
  EXPECT_TRUE(r.pass) << r.details.dump();
  EXPECT_GE(coarse.constants.at("C_gh"), 1.0);

  // the witness pair reproduces the constant
  ASSERT_EQ(fine.witness.points.size(), 2u);
  const VertexId x = fine_g.snap(fine.witness.points[0]), y = fine_g.snap(fine.witness.points[1]);
  const double geo = shortest_path(fine_g, x, y, fine_g.qh_weights()).euclidean_length;
  const double inner = shortest_path(fine_g, x, y, fine_g.euclidean_lengths()).euclidean_length;
  EXPECT_DOUBLE_EQ(geo / inner, fine.constants.at("C_gh"));
}

TEST(Separation, GeodesicCompetitorGivesZero) {
  const auto r = verify_separation(half_plane(), vertical_pairs(), 0, 1);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.constants.at("C_sp"), 0.0);
}

TEST(Separation, ArchedGeodesicIsSeparatedFromChord) {
  std::vector<PointPair> pairs;
  for (int i = 0; i < 30; ++i) {
    const double a = 0.6 + 0.02 * i;
    pairs.emplace_back(Point(-a, 0.2), Point(a, 0.2));
  }
  const auto r = verify_separation(half_plane(), pairs, 2, 5);
  EXPECT_TRUE(r.pass);
  EXPECT_GT(r.constants.at("C_sp"), 0.5);
  EXPECT_LT(r.constants.at("C_sp"), 10.0);
  EXPECT_EQ(r.samples, 90u);
}

TEST(Pommerenke, StraightGeodesicsGiveOne) {
  const auto r = verify_pommerenke(half_plane(), vertical_pairs());
  EXPECT_TRUE(r.pass);
  EXPECT_DOUBLE_EQ(r.constants.at("C_po"), 1.0);
}

TEST(Pommerenke, ArcsShorterThanASemicircleKeepTheirChord) {
  // A circular arc spanning less than π has the chord as its diameter.
  const auto g = build_graph(make_domain({{"kind", "half_space"}, {"window", {{-2, 0}, {2, 3}}}}), 0.02);
  std::vector<PointPair> pairs;
  for (int i = 0; i < 30; ++i) {
    const double a = 0.5 + 0.03 * i;
    pairs.emplace_back(Point(-a, 0.1), Point(a, 0.1));
  }
  const auto r = verify_pommerenke(g, pairs);
  EXPECT_NEAR(r.constants.at("C_po"), 1.0, 0.1);
}

TEST(Pommerenke, SlitForcesADetour) {
  std::vector<PointPair> pairs;
  for (int i = 0; i < 30; ++i) {
    const double x = -0.8 + 0.01 * i;
    pairs.emplace_back(Point(x, 0.3), Point(x, -0.3));
  }
  const auto r = verify_pommerenke(slit(), pairs);
  // the geodesic passes near the tip, so its diameter exceeds |x - tip|
  EXPECT_GE(r.constants.at("C_po"), std::hypot(0.51, 0.3) / 0.6);
}

TEST(Faltensatz, RejectsNonSeparatingPolyline) {
  try {
    make_cross_section(disk(), {{-0.2, 0}, {0.2, 0}});
    FAIL() << "accepted a polyline that separates nothing";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("not a cross-section"), std::string::npos);
  }
  EXPECT_THROW(chord_cross_section(disk().domain(), 1.5), Error);
}

TEST(Faltensatz, DiskChordHasFiniteConstant) {
  const auto& g = disk();
  const auto cs = make_cross_section(g, chord_cross_section(g.domain(), 0.3));
  EXPECT_NEAR(cs.diameter, 2 * std::sqrt(1 - 0.09) + 0.1, 1e-12);
  const auto pairs = faltensatz_pairs(g, cs, 30, 3);
  ASSERT_EQ(pairs.size(), 30u);
  for (const auto& [a, b] : pairs) EXPECT_EQ(cs.side[g.snap(a)], cs.side[g.snap(b)]);
  const auto r = verify_faltensatz(g, cs, pairs);
  EXPECT_TRUE(r.pass);
  EXPECT_GE(r.constants.at("A"), 0.0);
  EXPECT_TRUE(std::isfinite(r.constants.at("A")));
}

TEST(Faltensatz, CompositionComparesWithProduct) {
  const auto gh = toy("C_gh", 1.2), sp = toy("C_sp", 2.0), po = toy("C_po", 1.5);
  const auto ok = faltensatz_composition(toy("A", 4.0), gh, sp, po, 1.5);
  EXPECT_TRUE(ok.pass);
  EXPECT_DOUBLE_EQ(ok.constants.at("product"), 3.6);
  EXPECT_FALSE(faltensatz_composition(toy("A", 6.0), gh, sp, po, 1.5).pass);
  EXPECT_FALSE(faltensatz_composition(toy("A", 1.0, false), gh, sp, po, 1.5).pass);
}

TEST(Uniformity, DiskIsFiniteAndRefinementStable) {
  const auto pairs = sample_pairs(disk(), 30, 2, fixed_depth(0.15));
  const auto coarse = verify_uniformity(disk(), pairs);
  EXPECT_GE(coarse.constants.at("A"), 1.0);
  EXPECT_EQ(coarse.constants.at("A"), std::max(coarse.constants.at("A_cone"), coarse.constants.at("A_quasiconvex")));
  const auto fine = verify_uniformity(build_graph(make_domain({{"kind", "ball"}}), 0.025), pairs);
  const auto r = refine(coarse, fine, 0.15);
  EXPECT_TRUE(r.pass) << r.details.dump();
}

TEST(Uniformity, DiskScaleSweepIsFlat) {
  const auto r = verify_uniformity_scales(make_domain({{"kind", "ball"}}), {}, 7);
  EXPECT_TRUE(r.pass) << r.details.dump();
  EXPECT_EQ(r.details["scales"].size(), 3u);
}

TEST(Uniformity, CuspScaleSweepBlowsUp) {
  const auto dom = make_domain(nlohmann::json::parse(R"({"kind": "cusp", "dim": 2, "params": {"power": 3.0}})"));
  const auto r = verify_uniformity_scales(dom, {}, 7);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.status, "blow-up");
  EXPECT_GE(r.constants.at("growth"), 5.0);
}

TEST(Refine, DriftBeyondToleranceIsUnconverged) {
  const auto r = refine(toy("A", 2.0), toy("A", 2.5), 0.15);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.status, "unconverged");
  EXPECT_NEAR(r.details["worst_drift"].get<double>(), 0.25, 1e-12);
  EXPECT_EQ(r.details["worst_drift_constant"], "A");
  EXPECT_TRUE(refine(toy("A", 2.0), toy("A", 2.1), 0.15).pass);
  EXPECT_FALSE(refine(toy("A", 2.0, false), toy("A", 2.0), 0.15).pass);
}

TEST(Llc, HalfPlaneConnectsInsideTheBall) {
  const auto g = build_graph(make_domain({{"kind", "half_space"}, {"window", {{-3, 0}, {3, 3}}}}), 0.1);
  const auto instances = llc_instances(g, 40, 5);
  const auto r = verify_llc(g, instances);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.constants.at("C_llc1"), 1.0);
  EXPECT_TRUE(r.details["bounded_turning_holds"].get<bool>());
}

TEST(Llc, SlitTipNeedsALargerBall) {
  const auto& g = slit();
  std::vector<LlcInstance> instances;
  for (int i = 0; i < 30; ++i) {
    LlcInstance in;
    in.x = Point(-0.5 - 0.01 * i, 0);
    in.r = 0.2;
    in.inner = PointPair{in.x + Point(0, 0.1), in.x + Point(0, -0.1)};
    instances.push_back(in);
  }
  const auto r = verify_llc(g, instances);
  EXPECT_GT(r.constants.at("C_llc1"), 1.0);
  EXPECT_TRUE(std::isfinite(r.constants.at("C")));
  EXPECT_EQ(r.samples, 30u);
}

TEST(BoundaryQs, HalfPlane) {
  const auto g = build_graph(make_domain({{"kind", "half_space"}, {"window", {{-4, 0}, {4, 8}}}}), 0.05);
  const auto field = busemann_field(g, {0, 1}, BoundaryAnchor::infinity({0, 1}), 4.0);
  const double eps = choose_epsilon(estimate_delta(g, 30, 9, 1000, fixed_depth(0.3)).delta);
  const double A = verify_uniformity(g, sample_pairs(g, 30, 9)).constants.at("A");
  const auto r = verify_boundary_qs(g, field, eps, 60, 4, A, 20);
  EXPECT_EQ(r.constants.at("T_degenerate"), 1.0);
  EXPECT_TRUE(r.pass) << r.constants.at("alpha") << " " << r.constants.at("alpha_limit");
  EXPECT_EQ(r.constants.at("alpha_limit"), 4 * A * A);

  EXPECT_THROW(verify_boundary_qs(disk(), busemann_field(disk(), {0, 0}, BoundaryAnchor::at({1, 0}), 0.5), eps, 60,
                                  4, A),
               Error);
}

TEST(BhkBounds, VerticalPairsAttainTheLowerBound) {
  // j = log(y2/y1) = k on a vertical segment
  const auto r = verify_bhk_uniform_bounds(half_plane(), vertical_pairs());
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.constants.at("lower_ratio"), 1.0, 0.02);
}

TEST(BhkBounds, LowerBoundHoldsOnTheCusp) {
  const auto g = build_graph(
      make_domain(nlohmann::json::parse(R"({"kind": "cusp", "params": {"power": 2}, "window": [[0.3, -1], [1, 1]]})")),
      0.01);
  const auto r = verify_bhk_uniform_bounds(g, sample_pairs(g, 30, 3));
  EXPECT_TRUE(r.pass) << r.constants.at("lower_ratio");
  EXPECT_FALSE(r.constants.contains("upper_limit"));
}

TEST(Bhk314, CollinearVerticalTriplesHaveNoDefect) {
  std::vector<Triple> triples;
  for (int i = 0; i < 30; ++i) {
    const double x = -1.0 + 0.05 * i;
    triples.push_back({{x, 1.0}, {x, 3.5}, {x, 1.5}});
  }
  const auto r = verify_bhk314(half_plane(), triples);
  EXPECT_EQ(r.samples, 30u);
  EXPECT_LT(r.constants.at("C_A"), 1e-9);
}

TEST(Bhk314, FiniteOnHalfPlaneAndDisk) {
  for (const MetricGraph* g : {&half_plane(), &disk()}) {
    const auto r = verify_bhk314(*g, bhk314_triples(*g, 30, 8));
    EXPECT_TRUE(r.pass);
    EXPECT_GT(r.samples, 0u);
    EXPECT_TRUE(std::isfinite(r.constants.at("C_A")));
  }
}

TEST(DeformationBounds, CoincidentPairIsSkipped) {
  const auto& g = half_plane();
  const auto field = busemann_field(g, {0, 1}, BoundaryAnchor::infinity({0, 1}), 1.0);
  const auto dg = deform(g, field, 0.2);
  auto pairs = sample_pairs(g, 30, 2, fixed_depth(0.3));
  pairs[0].second = pairs[0].first;
  const auto r = verify_deformation_bounds(g, dg, pairs, 0.5, 1);
  EXPECT_TRUE(std::isfinite(r.constants.at("M")));
  EXPECT_GE(r.constants.at("M"), 1.0);
  EXPECT_TRUE(r.witness.values.contains("comparison_scale"));
}

TEST(RoughStarlike, MoreAnchorsNeverIncreaseK) {
  const auto& g = disk();
  std::vector<Point> anchors{{-0.8, 0}, {0.8, 0}};
  const auto two = estimate_rough_starlike(g, anchors, 60, 3);
  anchors.push_back({0, 0.8});
  anchors.push_back({0, -0.8});
  const auto four = estimate_rough_starlike(g, anchors, 60, 3);
  EXPECT_EQ(two.status, "report-only");
  EXPECT_LE(four.constants.at("K"), two.constants.at("K"));
  EXPECT_EQ(four.constants.at("anchor_pairs"), 6.0);
  EXPECT_THROW(estimate_rough_starlike(g, std::vector<Point>{{0, 0}}, 10, 3), Error);
}

TEST(Report, JsonCarriesEveryField) {
  auto r = verify_pommerenke(half_plane(), vertical_pairs());
  r.config["seed"] = 7;
  const auto j = to_json(r);
  for (const char* key : {"property", "constants", "witness", "samples", "h", "pass", "status", "tolerances",
                          "details", "config"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["status"], "pass");
  EXPECT_EQ(j["witness"]["points"].size(), 2u);
  EXPECT_EQ(j["witness"]["points"][0].size(), 2u);
  EXPECT_EQ(j["h"].get<double>(), 0.05);
  EXPECT_EQ(j["config"]["seed"], 7);
}
