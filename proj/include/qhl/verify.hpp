#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deform.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "graph.hpp"
#include "gromov.hpp"
#include "parallel.hpp"
#include "qhyp.hpp"
#include "random.hpp"

namespace qhl {

/// Outcome of one empirical check. Every constant is a supremum over the
/// enumerated sample and the witness names its arg-sup.
struct VerificationReport {
  struct Witness {
    std::vector<Point> points;
    std::map<std::string, double> values;
  };

  std::string property;
  std::map<std::string, double> constants;
  Witness witness;
  std::size_t samples = 0;
  double h = 0.0;
  bool pass = false;
  /// "pass", "fail", "unconverged", "blow-up" or "report-only".
  std::string status = "fail";
  std::map<std::string, double> tolerances;
  nlohmann::json details = nlohmann::json::object();
  nlohmann::json config = nlohmann::json::object();

  void set(bool ok, const char* failure = "fail") {
    pass = ok;
    status = ok ? "pass" : failure;
  }
};

inline nlohmann::json to_json(const Point& p, int dim) {
  nlohmann::json a = nlohmann::json::array();
  for (int i = 0; i < dim; ++i) a.push_back(p[i]);
  return a;
}

inline nlohmann::json to_json(const VerificationReport& r, int dim = 2) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : r.witness.points) pts.push_back(to_json(p, dim));
  return {{"property", r.property},
          {"constants", r.constants},
          {"witness", {{"points", pts}, {"values", r.witness.values}}},
          {"samples", r.samples},
          {"h", r.h},
          {"pass", r.pass},
          {"status", r.status},
          {"tolerances", r.tolerances},
          {"details", r.details},
          {"config", r.config}};
}

using PointPair = std::pair<Point, Point>;

/// Seeded interior pairs at depth >= 3h, clear of artificial window faces,
/// with both points in the same graph component.
inline std::vector<PointPair> sample_pairs(const MetricGraph& g, std::size_t count, std::uint64_t seed,
                                           InteriorSampling opts = {}) {
  opts.min_depth = std::max(opts.min_depth, 3.0 * g.spacing());
  if (opts.face_margin == 0.0) opts.face_margin = 0.2;
  std::vector<PointPair> out;
  for (std::uint64_t round = 0; out.size() < count; ++round) {
    if (round > 16) throw Error(ErrorKind::not_found, "could not sample connected pairs");
    const auto pts = sample_interior(g.domain(), 2 * (count - out.size()), split_seed(seed, round), opts);
    for (std::size_t i = 0; i + 1 < pts.size() && out.size() < count; i += 2)
      if (g.component(g.snap(pts[i])) == g.component(g.snap(pts[i + 1]))) out.emplace_back(pts[i], pts[i + 1]);
  }
  return out;
}

/// Seeded short-range pairs: y = x + r u with r <= max_ratio d(x), so both
/// points sit in one quasihyperbolic ball.
inline std::vector<PointPair> sample_near_pairs(const MetricGraph& g, std::size_t count, std::uint64_t seed,
                                                double max_ratio = 1.0, InteriorSampling opts = {}) {
  opts.min_depth = std::max(opts.min_depth, 3.0 * g.spacing());
  if (opts.face_margin == 0.0) opts.face_margin = 0.2;
  const Domain& dom = g.domain();
  const auto xs = sample_interior(dom, count, seed, opts);
  std::vector<PointPair> out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    Rng rng(split_seed(seed ^ 0x9e3779b97f4a7c15ULL, i));
    const double d = dom.depth(xs[i]);
    for (int attempt = 0; attempt < 64; ++attempt) {
      Point u;
      for (int a = 0; a < dom.dim(); ++a) u[a] = rng.normal();
      u = u / u.norm();
      const Point y = xs[i] + u * (rng.uniform(0.05, max_ratio) * d);
      if (dom.depth(y) >= opts.min_depth && dom.window().contains(y, dom.dim())) {
        out.emplace_back(xs[i], y);
        break;
      }
    }
  }
  return out;
}

namespace detail {

inline void require_pairs(std::size_t n, std::size_t minimum = 30) {
  if (n < minimum)
    throw Error(ErrorKind::invalid_argument, "at least " + std::to_string(minimum) + " samples required");
}

/// Cumulative Euclidean arclength along a vertex path.
inline std::vector<double> arclength(const MetricGraph& g, std::span<const VertexId> vs) {
  std::vector<double> s(vs.size(), 0.0);
  for (std::size_t i = 1; i < vs.size(); ++i) s[i] = s[i - 1] + distance(g.position(vs[i - 1]), g.position(vs[i]));
  return s;
}

inline double snap_slack(const MetricGraph& g, VertexId v) { return 2.0 * g.spacing() / g.depth(v); }

/// Per-sample result of a supremum scan.
struct Sup {
  double value = -infinity;
  std::vector<Point> points;
  std::map<std::string, double> values;
  bool valid = false;
};

inline Sup reduce(std::vector<Sup>& parts) {
  Sup best;
  for (auto& p : parts)
    if (p.valid && (!best.valid || p.value > best.value)) best = std::move(p);
  return best;
}

inline void fill(VerificationReport& r, const std::string& key, Sup&& best) {
  r.constants[key] = best.valid ? best.value : 0.0;
  r.witness.points = std::move(best.points);
  r.witness.values = std::move(best.values);
}

}  // namespace detail

/// Ĉ_gh = sup ℓ([x,y]_k) / ℓ_G(x,y).
inline VerificationReport verify_gehring_hayman(const MetricGraph& g, std::span<const PointPair> pairs) {
  detail::require_pairs(pairs.size());
  std::vector<detail::Sup> parts(pairs.size());
  std::vector<double> slack(pairs.size(), 0.0);
  parallel_for(pairs.size(), [&](std::size_t i) {
    const VertexId x = g.snap(pairs[i].first), y = g.snap(pairs[i].second);
    if (x == y) return;
    const Path geo = shortest_path(g, x, y, g.qh_weights());
    const double inner = shortest_path(g, x, y, g.euclidean_lengths()).euclidean_length;
    const double r = geo.euclidean_length / inner;
    slack[i] = std::max(detail::snap_slack(g, x), detail::snap_slack(g, y));
    parts[i] = {r, {g.position(x), g.position(y)}, {{"geodesic_length", geo.euclidean_length}, {"inner_distance", inner}}, true};
  });
  VerificationReport r;
  r.property = "gehring_hayman";
  r.samples = pairs.size();
  r.h = g.spacing();
  detail::fill(r, "C_gh", detail::reduce(parts));
  r.tolerances["snap_slack"] = *std::max_element(slack.begin(), slack.end());
  r.set(std::isfinite(r.constants["C_gh"]) && r.constants["C_gh"] > 0.0);
  return r;
}

/// Ĉ_sp = sup over geodesic points z and competitors γ of ℓ_G(z, γ) / d(z).
/// Competitors are the ℓ_G-shortest path and seeded detours through random
/// waypoints near the pair.
inline VerificationReport verify_separation(const MetricGraph& g, std::span<const PointPair> pairs,
                                            std::size_t competitors, std::uint64_t seed) {
  detail::require_pairs(pairs.size());
  const Domain& dom = g.domain();
  const auto euclid = g.euclidean_lengths();
  std::vector<detail::Sup> parts(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    const VertexId x = g.snap(pairs[i].first), y = g.snap(pairs[i].second);
    if (x == y) return;
    const Path geo = shortest_path(g, x, y, g.qh_weights());
    std::vector<std::vector<VertexId>> curves{shortest_path(g, x, y, euclid).vertices};
    Rng rng(split_seed(seed, i));
    const Point mid = (g.position(x) + g.position(y)) * 0.5;
    const double half = std::max(distance(g.position(x), g.position(y)), 4.0 * g.spacing());
    for (std::size_t c = 0; c < competitors; ++c)
      for (int attempt = 0; attempt < 200; ++attempt) {
        Point w = mid;
        for (int a = 0; a < dom.dim(); ++a) w[a] += rng.uniform(-half, half);
        if (!dom.window().contains(w, dom.dim()) || dom.depth(w) < 3.0 * g.spacing()) continue;
        const VertexId vw = g.snap(w);
        if (g.component(vw) != g.component(x)) continue;
        auto a = shortest_path(g, x, vw, euclid).vertices;
        const auto b = shortest_path(g, vw, y, euclid).vertices;
        a.insert(a.end(), b.begin() + 1, b.end());
        curves.push_back(std::move(a));
        break;
      }
    detail::Sup best;
    for (const auto& curve : curves) {
      std::vector<std::pair<VertexId, double>> seeds;
      for (VertexId v : curve) seeds.emplace_back(v, 0.0);
      const auto dist = dijkstra(g.adjacency(), seeds, euclid, {.targets = geo.vertices}).dist;
      for (VertexId z : geo.vertices) {
        const double r = dist[z] / g.depth(z);
        if (!best.valid || r > best.value)
          best = {r, {g.position(x), g.position(y), g.position(z)}, {{"inner_to_competitor", dist[z]}, {"d_z", g.depth(z)}}, true};
      }
    }
    parts[i] = std::move(best);
  });
  VerificationReport r;
  r.property = "separation";
  r.samples = pairs.size() * (1 + competitors);
  r.h = g.spacing();
  detail::fill(r, "C_sp", detail::reduce(parts));
  r.tolerances["snap_slack"] = 2.0;  // in units of h/d
  r.details["competitors_per_pair"] = 1 + competitors;
  r.set(std::isfinite(r.constants["C_sp"]));
  return r;
}

/// R̂ = sup diam([x,y]_k) / |x-y|, which bounds the Pommerenke ratio against
/// any competitor since |x-y| <= diam(γ). The ratio against the ℓ_G-shortest
/// competitor is reported alongside.
inline VerificationReport verify_pommerenke(const MetricGraph& g, std::span<const PointPair> pairs) {
  detail::require_pairs(pairs.size());
  std::vector<detail::Sup> parts(pairs.size());
  std::vector<double> inner_ratio(pairs.size(), 0.0);
  parallel_for(pairs.size(), [&](std::size_t i) {
    const VertexId x = g.snap(pairs[i].first), y = g.snap(pairs[i].second);
    if (x == y) return;
    const Path geo = shortest_path(g, x, y, g.qh_weights());
    const Path inner = shortest_path(g, x, y, g.euclidean_lengths());
    const double chord = distance(g.position(x), g.position(y));
    inner_ratio[i] = geo.diameter / inner.diameter;
    parts[i] = {geo.diameter / chord, {g.position(x), g.position(y)}, {{"diameter", geo.diameter}, {"chord", chord}}, true};
  });
  VerificationReport r;
  r.property = "pommerenke";
  r.samples = pairs.size();
  r.h = g.spacing();
  detail::fill(r, "C_po", detail::reduce(parts));
  r.constants["C_po_inner"] = *std::max_element(inner_ratio.begin(), inner_ratio.end());
  r.set(std::isfinite(r.constants["C_po"]) && r.constants["C_po"] >= 1.0 - 1e-12);
  return r;
}

/// Polyline cross-section Σ: graph vertices within 0.75h of the polyline are
/// Σ's vertex set and every edge crossing the polyline is cut.
struct CrossSection {
  std::vector<Point> polyline;
  std::vector<VertexId> vertices;
  std::vector<char> in_sigma;
  std::vector<char> cut;       // per directed entry
  std::vector<long> side;      // 0 or 1 off Σ, -1 on Σ
  double diameter = 0.0;
};

namespace detail {

inline double cross2(const Point& a, const Point& b, const Point& c) {
  return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
}

inline bool segments_cross(const Point& a, const Point& b, const Point& c, const Point& d) {
  const double d1 = cross2(c, d, a), d2 = cross2(c, d, b), d3 = cross2(a, b, c), d4 = cross2(a, b, d);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

}  // namespace detail

inline CrossSection make_cross_section(const MetricGraph& g, std::vector<Point> polyline) {
  if (g.dim() != 2) throw Error(ErrorKind::unsupported, "cross-sections are 2-D only");
  if (polyline.size() < 2) throw Error(ErrorKind::invalid_argument, "cross-section needs at least two points");
  CrossSection cs;
  const std::size_t n = g.vertex_count();
  cs.in_sigma.assign(n, 0);
  const double band = 0.75 * g.spacing();
  for (VertexId v = 0; v < n; ++v)
    for (std::size_t k = 1; k < polyline.size(); ++k)
      if (segment_distance(g.position(v), polyline[k - 1], polyline[k]) <= band) {
        cs.in_sigma[v] = 1;
        cs.vertices.push_back(v);
        break;
      }
  const Csr& adj = g.adjacency();
  cs.cut.assign(adj.targets.size(), 0);
  for (VertexId u = 0; u < n; ++u)
    for (std::size_t e = adj.begin(u); e < adj.end(u); ++e)
      for (std::size_t k = 1; k < polyline.size(); ++k)
        if (detail::segments_cross(g.position(u), g.position(adj.targets[e]), polyline[k - 1], polyline[k])) {
          cs.cut[e] = 1;
          break;
        }
  cs.side.assign(n, -1);
  long components = 0;
  std::vector<VertexId> stack;
  for (VertexId s = 0; s < n; ++s) {
    if (cs.in_sigma[s] || cs.side[s] >= 0) continue;
    const long c = components++;
    cs.side[s] = c;
    stack.push_back(s);
    while (!stack.empty()) {
      const VertexId u = stack.back();
      stack.pop_back();
      for (std::size_t e = adj.begin(u); e < adj.end(u); ++e) {
        const VertexId v = adj.targets[e];
        if (cs.cut[e] || cs.in_sigma[v] || cs.side[v] >= 0) continue;
        cs.side[v] = c;
        stack.push_back(v);
      }
    }
  }
  if (components != 2 || cs.vertices.empty()) throw Error(ErrorKind::invalid_argument, "not a cross-section");
  cs.diameter = point_set_diameter(polyline);
  cs.polyline = std::move(polyline);
  return cs;
}

/// Chord {x = x0} of a ball, extended slightly past the circle so the cut is
/// complete.
inline std::vector<Point> chord_cross_section(const Domain& dom, double x0) {
  if (dom.kind() != DomainKind::ball || dom.dim() != 2) throw Error(ErrorKind::unsupported, "chord needs a disk");
  const Point c = dom.center();
  const double r = dom.radius();
  if (!(std::abs(x0) < r)) throw Error(ErrorKind::invalid_argument, "chord misses the disk");
  const double half = std::sqrt(r * r - x0 * x0) + 0.05 * r;
  return {c + Point(x0, -half), c + Point(x0, half)};
}

/// Seeded endpoint pairs for the Faltensatz check, alternating between the
/// two sides of Σ. Points sit at depth >= 3h and at least 2h from Σ so their
/// side does not change under refinement.
inline std::vector<PointPair> faltensatz_pairs(const MetricGraph& g, const CrossSection& cs, std::size_t count,
                                               std::uint64_t seed) {
  detail::require_pairs(count);
  InteriorSampling opts;
  opts.min_depth = 3.0 * g.spacing();
  opts.face_margin = 0.2;
  const auto pool = sample_interior(g.domain(), 8 * count, seed, opts);
  std::vector<Point> sides[2];
  for (const auto& p : pool) {
    double gap = infinity;
    for (std::size_t k = 1; k < cs.polyline.size(); ++k)
      gap = std::min(gap, segment_distance(p, cs.polyline[k - 1], cs.polyline[k]));
    const long side = cs.side[g.snap(p)];
    if (gap >= 2.0 * g.spacing() && side >= 0) sides[side].push_back(p);
  }
  std::vector<PointPair> out;
  Rng rng(split_seed(seed, 1));
  for (std::size_t t = 0; out.size() < count && t < 64 * count; ++t) {
    const auto& pool_side = sides[t % 2].size() >= 2 ? sides[t % 2] : sides[1 - t % 2];
    if (pool_side.size() < 2) throw Error(ErrorKind::not_found, "cross-section leaves no room for endpoints");
    // The partner is the farthest of eight candidates: long geodesics are the
    // ones that can stray across Σ.
    const Point x = pool_side[rng.below(pool_side.size())];
    Point y = x;
    for (int c = 0; c < 8; ++c) {
      const Point& q = pool_side[rng.below(pool_side.size())];
      if (distance(x, q) > distance(x, y)) y = q;
    }
    if (distance(x, y) > 0.0 && g.component(g.snap(x)) == g.component(g.snap(y))) out.emplace_back(x, y);
  }
  return out;
}

/// Â = sup ℓ_G(x→Σ) / min(d(x), diam Σ) over geodesic points x that stray
/// into the other side of Σ from their endpoints.
inline VerificationReport verify_faltensatz(const MetricGraph& g, const CrossSection& cs,
                                            std::span<const PointPair> pairs) {
  detail::require_pairs(pairs.size());
  std::vector<std::pair<VertexId, double>> seeds;
  for (VertexId v : cs.vertices) seeds.emplace_back(v, 0.0);
  const auto to_sigma = dijkstra(g.adjacency(), seeds, g.euclidean_lengths()).dist;

  std::vector<detail::Sup> parts(pairs.size());
  std::vector<char> crossed(pairs.size(), 0);
  parallel_for(pairs.size(), [&](std::size_t t) {
    const VertexId x = g.snap(pairs[t].first), y = g.snap(pairs[t].second);
    if (x == y || cs.side[x] < 0 || cs.side[x] != cs.side[y]) return;
    const long home = cs.side[x];
    const Path geo = shortest_path(g, x, y, g.qh_weights());
    detail::Sup best{0.0, {g.position(x), g.position(y)}, {}, true};
    for (VertexId z : geo.vertices) {
      if (cs.side[z] < 0 || cs.side[z] == home) continue;
      crossed[t] = 1;
      const double r = to_sigma[z] / std::min(g.depth(z), cs.diameter);
      if (r > best.value)
        best = {r, {g.position(x), g.position(y), g.position(z)}, {{"escape_length", to_sigma[z]}, {"d_x", g.depth(z)}}, true};
    }
    parts[t] = std::move(best);
  });
  VerificationReport r;
  r.property = "faltensatz";
  r.samples = pairs.size();
  r.h = g.spacing();
  detail::fill(r, "A", detail::reduce(parts));
  r.constants["diam_sigma"] = cs.diameter;
  r.details["crossing_geodesics"] = std::count(crossed.begin(), crossed.end(), 1);
  r.set(std::isfinite(r.constants["A"]));
  return r;
}

/// Composed bound Â <= slack · Ĉ_gh · Ĉ_sp · Ĉ_po from three independent fits.
inline VerificationReport faltensatz_composition(const VerificationReport& faltensatz, const VerificationReport& gh,
                                                 const VerificationReport& sp, const VerificationReport& po,
                                                 double slack = 1.5) {
  VerificationReport r = faltensatz;
  r.property = "faltensatz_composition";
  const double product = gh.constants.at("C_gh") * sp.constants.at("C_sp") * po.constants.at("C_po");
  r.constants["C_gh"] = gh.constants.at("C_gh");
  r.constants["C_sp"] = sp.constants.at("C_sp");
  r.constants["C_po"] = po.constants.at("C_po");
  r.constants["product"] = product;
  r.tolerances["composition_slack"] = slack;
  r.set(faltensatz.pass && r.constants.at("A") <= slack * product);
  return r;
}

/// Â = max(sup ℓ(γ)/|x-y|, sup_z min(ℓ(γ[x,z]), ℓ(γ[z,y]))/d(z)) over
/// quasihyperbolic geodesics γ.
inline VerificationReport verify_uniformity(const MetricGraph& g, std::span<const PointPair> pairs) {
  detail::require_pairs(pairs.size());
  std::vector<detail::Sup> quasiconvex(pairs.size()), cone(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    const VertexId x = g.snap(pairs[i].first), y = g.snap(pairs[i].second);
    if (x == y) return;
    const Path geo = shortest_path(g, x, y, g.qh_weights());
    const auto s = detail::arclength(g, geo.vertices);
    const double L = s.back();
    const double chord = distance(g.position(x), g.position(y));
    quasiconvex[i] = {L / chord, {g.position(x), g.position(y)}, {{"length", L}, {"chord", chord}}, true};
    for (std::size_t k = 0; k < geo.vertices.size(); ++k) {
      const VertexId z = geo.vertices[k];
      const double r = std::min(s[k], L - s[k]) / g.depth(z);
      if (!cone[i].valid || r > cone[i].value)
        cone[i] = {r, {g.position(x), g.position(y), g.position(z)}, {{"arc_to_nearer_end", std::min(s[k], L - s[k])}, {"d_z", g.depth(z)}}, true};
    }
  });
  auto q = detail::reduce(quasiconvex);
  auto c = detail::reduce(cone);
  VerificationReport r;
  r.property = "uniformity";
  r.samples = pairs.size();
  r.h = g.spacing();
  r.constants["A_quasiconvex"] = q.valid ? q.value : 0.0;
  r.constants["A_cone"] = c.valid ? c.value : 0.0;
  auto& worst = r.constants["A_cone"] >= r.constants["A_quasiconvex"] ? c : q;
  r.constants["A"] = std::max(r.constants["A_quasiconvex"], r.constants["A_cone"]);
  r.witness.points = std::move(worst.points);
  r.witness.values = std::move(worst.values);
  r.set(std::isfinite(r.constants["A"]));
  return r;
}

/// Refinement contract: every constant of the fine run is within `tol`
/// (relative) of the coarse run, else the report is "unconverged".
inline VerificationReport refine(const VerificationReport& coarse, const VerificationReport& fine, double tol = 0.15) {
  VerificationReport r = fine;
  double worst = 0.0;
  std::string worst_key;
  for (const auto& [key, c] : coarse.constants) {
    const auto it = fine.constants.find(key);
    if (it == fine.constants.end()) continue;
    const double drift = std::abs(c) > 0.0 ? std::abs(it->second - c) / std::abs(c) : std::abs(it->second);
    r.details["drift"][key] = drift;
    r.details["coarse"][key] = c;
    if (drift > worst) {
      worst = drift;
      worst_key = key;
    }
  }
  r.samples = coarse.samples + fine.samples;
  r.tolerances["refinement"] = tol;
  r.details["coarse_h"] = coarse.h;
  r.details["worst_drift"] = worst;
  r.details["worst_drift_constant"] = worst_key;
  if (!coarse.pass || !fine.pass)
    r.set(false, coarse.status == "pass" ? fine.status.c_str() : coarse.status.c_str());
  else
    r.set(worst <= tol, "unconverged");
  return r;
}

struct ScaleSweepOptions {
  std::vector<double> scales{0.4, 0.2, 0.1};
  /// Grid spacing at scale s is min(d(p_s), s) / cells_per_depth.
  double cells_per_depth = 6.0;
  std::size_t pairs = 30;
  /// Largest tolerated ratio between the finest-scale and coarsest-scale Â.
  double growth_limit = 1.15;
  int stencil = 16;
};

/// Uniformity constant at shrinking scales along the domain's scale probe:
/// at scale s the pairs sit at distances [s, 2s] from the probe focus, on a
/// grid resolving the local depth. A growing constant is a blow-up.
inline VerificationReport verify_uniformity_scales(const Domain& dom, const ScaleSweepOptions& opts,
                                                   std::uint64_t seed) {
  if (opts.scales.size() < 2) throw Error(ErrorKind::invalid_argument, "scale sweep needs two scales");
  const ScaleProbe probe = dom.scale_probe();
  const int n = dom.dim();
  Point lateral;  // any unit vector orthogonal to the probe direction
  lateral[0] = 1.0;
  if (std::abs(lateral.dot(probe.direction)) > 0.9) lateral = Point(0, 1, 0);
  lateral = lateral - probe.direction * lateral.dot(probe.direction);
  lateral = lateral / lateral.norm();

  VerificationReport r;
  r.property = "uniformity_scales";
  nlohmann::json per_scale = nlohmann::json::array();
  std::vector<double> values;
  for (std::size_t si = 0; si < opts.scales.size(); ++si) {
    const double s = opts.scales[si];
    const Point ps = probe.focus + probe.direction * s;
    const double dps = dom.depth(ps);
    if (!(dps > 0.0)) throw Error(ErrorKind::invalid_argument, "scale probe point outside the domain");
    const double h = std::min(dps, s) / opts.cells_per_depth;
    // Window: the probe segment [s/2, 5s/2] widened by s, clipped to the window.
    nlohmann::json spec = dom.description();
    Box box;
    for (int a = 0; a < n; ++a) {
      const double ends[2] = {probe.focus[a] + probe.direction[a] * 0.5 * s,
                              probe.focus[a] + probe.direction[a] * 2.5 * s};
      box.lo[a] = std::max(dom.window().lo[a], std::min(ends[0], ends[1]) - s);
      box.hi[a] = std::min(dom.window().hi[a], std::max(ends[0], ends[1]) + s);
    }
    spec["window"] = {to_json(box.lo, n), to_json(box.hi, n)};
    const Domain local = make_domain(spec);
    const MetricGraph g = build_graph(local, h, opts.stencil);

    // Pairs along the probe ray at distances a s, b s (a, b in [1, 2]) with
    // a lateral jitter of at most a quarter of the local depth. Every second
    // pair moves its partner to a random direction around the focus when
    // that lands at depth >= 3h.
    std::vector<PointPair> pairs{{probe.focus + probe.direction * s, probe.focus + probe.direction * (2.0 * s)}};
    Rng rng(split_seed(seed, si));
    for (std::size_t k = 1; k < opts.pairs; ++k) {
      PointPair pp;
      for (Point* p : {&pp.first, &pp.second}) {
        const Point q = probe.focus + probe.direction * (s * rng.uniform(1.0, 2.0));
        *p = q + lateral * (rng.uniform(-0.25, 0.25) * local.depth(q));
      }
      for (int attempt = 0; k % 2 == 1 && attempt < 20; ++attempt) {
        Point u;
        for (int a = 0; a < n; ++a) u[a] = rng.normal();
        const Point q = probe.focus + u / u.norm() * (s * rng.uniform(1.0, 2.0));
        if (local.window().contains(q, n) && local.depth(q) >= 3.0 * h) {
          pp.second = q;
          break;
        }
      }
      pairs.push_back(pp);
    }
    const auto rep = verify_uniformity(g, pairs);
    values.push_back(rep.constants.at("A"));
    per_scale.push_back({{"s", s}, {"h", h}, {"vertices", g.vertex_count()}, {"A", rep.constants.at("A")}});
    r.samples += rep.samples;
    r.h = h;
    if (si + 1 == opts.scales.size()) {
      r.witness = rep.witness;
    }
  }
  const double growth = values.back() / values.front();
  r.constants["A_coarsest"] = values.front();
  r.constants["A_finest"] = values.back();
  r.constants["growth"] = growth;
  r.tolerances["growth_limit"] = opts.growth_limit;
  r.details["scales"] = per_scale;
  r.set(growth <= opts.growth_limit, "blow-up");
  return r;
}

/// One LLC instance: centre x, radius r, an LLC₁ pair inside B(x, r) and an
/// LLC₂ pair in the shell r < |p - x| < 3r. `turning` instances recentre the
/// LLC₁ test at a1 with radius |a1 - b1| (bounded turning).
struct LlcInstance {
  Point x;
  double r = 0.0;
  std::optional<PointPair> inner, outer;
  bool turning = false;
};

/// Seeded instances with interior and boundary centres (alternating when the
/// domain has a boundary sampler) and log-uniform radii in [8h, side/4].
inline std::vector<LlcInstance> llc_instances(const MetricGraph& g, std::size_t trials, std::uint64_t seed) {
  detail::require_pairs(trials);
  const Domain& dom = g.domain();
  const int n = dom.dim();
  const double h = g.spacing();
  double side = infinity;
  for (int a = 0; a < n; ++a) side = std::min(side, dom.window().extent(a));
  InteriorSampling opts;
  opts.min_depth = 3.0 * h;
  opts.face_margin = 0.2;
  const auto centers_in = sample_interior(dom, trials, seed, opts);
  std::vector<Point> centers_bd;
  try {
    centers_bd = sample_boundary(dom, trials, split_seed(seed, 1), {.face_margin = 0.2, .region = {}});
  } catch (const Error&) {
  }
  std::vector<LlcInstance> out(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(split_seed(seed, 100 + t));
    LlcInstance& in = out[t];
    in.x = (t % 2 == 1 && !centers_bd.empty()) ? centers_bd[t] : centers_in[t];
    in.r = std::exp(rng.uniform(std::log(8.0 * h), std::log(0.25 * side)));
    in.turning = t % 4 == 0;
    const auto draw = [&](double rmin, double rmax) -> std::optional<Point> {
      for (int attempt = 0; attempt < 400; ++attempt) {
        Point u;
        for (int a = 0; a < n; ++a) u[a] = rng.normal();
        const Point p = in.x + u / u.norm() * rng.uniform(rmin, rmax);
        if (dom.window().contains(p, n) && dom.depth(p) >= 3.0 * h) return p;
      }
      return std::nullopt;
    };
    const auto a1 = draw(0.0, 0.9 * in.r), b1 = draw(0.0, 0.9 * in.r);
    if (a1 && b1 && g.component(g.snap(*a1)) == g.component(g.snap(*b1))) in.inner = PointPair{*a1, *b1};
    const auto a2 = draw(1.1 * in.r, 3.0 * in.r), b2 = draw(1.1 * in.r, 3.0 * in.r);
    if (a2 && b2 && g.component(g.snap(*a2)) == g.component(g.snap(*b2))) in.outer = PointPair{*a2, *b2};
  }
  return out;
}

/// LLC: the smallest dyadic C (up to 64) such that every instance connects,
/// LLC₁ inside B(x, Cr) and LLC₂ outside B(x, r/C), by breadth-first search
/// restricted to the region. Regions carry a 2h allowance for the grid.
/// Bounded-turning instances recheck diam(curve) <= 2C|a-b| + 4h.
inline VerificationReport verify_llc(const MetricGraph& g, std::span<const LlcInstance> instances) {
  detail::require_pairs(instances.size());
  const double h = g.spacing();
  const Csr& adj = g.adjacency();
  constexpr double max_c = 64.0;

  const auto connect = [&](VertexId a, VertexId b, auto&& ok) {
    std::vector<VertexId> parent(g.vertex_count(), no_vertex);
    std::vector<VertexId> queue{a};
    parent[a] = a;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const VertexId u = queue[head];
      if (u == b) break;
      for (std::size_t e = adj.begin(u); e < adj.end(u); ++e) {
        const VertexId v = adj.targets[e];
        if (parent[v] != no_vertex || !ok(v)) continue;
        parent[v] = u;
        queue.push_back(v);
      }
    }
    std::vector<VertexId> path;
    if (parent[b] == no_vertex) return path;
    for (VertexId v = b; v != a; v = parent[v]) path.push_back(v);
    path.push_back(a);
    return path;
  };

  struct Trial {
    double c1 = 0.0, c2 = 0.0;
    double turning_ratio = 0.0;
    bool turning_ok = true;
    std::vector<Point> pts;
    bool valid = false;
  };
  std::vector<Trial> out(instances.size());
  parallel_for(instances.size(), [&](std::size_t t) {
    const LlcInstance& in = instances[t];
    Trial tr;
    tr.pts = {in.x};
    if (in.inner) {
      const VertexId a = g.snap(in.inner->first), b = g.snap(in.inner->second);
      const Point centre = in.turning ? in.inner->first : in.x;
      const double radius = in.turning ? distance(in.inner->first, in.inner->second) : in.r;
      double c = 1.0;
      std::vector<VertexId> path;
      for (; c <= max_c; c *= 2.0) {
        path = connect(a, b, [&](VertexId v) { return distance(g.position(v), centre) < c * radius + 2.0 * h; });
        if (!path.empty()) break;
      }
      tr.c1 = path.empty() ? infinity : c;
      if (in.turning && !path.empty() && radius > 0.0) {
        std::vector<Point> pts;
        for (VertexId v : path) pts.push_back(g.position(v));
        const double diam = point_set_diameter(pts);
        tr.turning_ratio = diam / radius;
        tr.turning_ok = diam <= 2.0 * c * radius + 4.0 * h;
      }
      tr.pts.push_back(in.inner->first);
      tr.pts.push_back(in.inner->second);
      tr.valid = true;
    }
    if (in.outer) {
      const VertexId a = g.snap(in.outer->first), b = g.snap(in.outer->second);
      double c = 1.0;
      bool found = false;
      for (; c <= max_c; c *= 2.0)
        if (!connect(a, b, [&](VertexId v) { return distance(g.position(v), in.x) > in.r / c - 2.0 * h; }).empty()) {
          found = true;
          break;
        }
      tr.c2 = found ? c : infinity;
      tr.valid = true;
    }
    out[t] = std::move(tr);
  });

  VerificationReport rep;
  rep.property = "llc";
  rep.h = h;
  double c1 = 0.0, c2 = 0.0, turning = 0.0;
  bool turning_ok = true;
  std::size_t count = 0, worst = 0;
  for (std::size_t t = 0; t < out.size(); ++t) {
    if (!out[t].valid) continue;
    ++count;
    if (std::max(out[t].c1, out[t].c2) > std::max(c1, c2)) worst = t;
    c1 = std::max(c1, out[t].c1);
    c2 = std::max(c2, out[t].c2);
    turning = std::max(turning, out[t].turning_ratio);
    turning_ok = turning_ok && out[t].turning_ok;
  }
  rep.samples = count;
  rep.constants["C_llc1"] = c1;
  rep.constants["C_llc2"] = c2;
  rep.constants["C"] = std::max(c1, c2);
  rep.details["turning_ratio"] = turning;
  rep.details["bounded_turning_holds"] = turning_ok;
  rep.witness.points = out[worst].pts;
  rep.tolerances["region_allowance_h"] = 2.0;
  rep.set(count >= 30 && std::isfinite(rep.constants["C"]) && turning_ok);
  return rep;
}

/// Boundary quasisymmetry: for boundary triples (x, a, b) with t = |x-a|/|x-b|
/// and T = d_{b,ε}(x,a)/d_{b,ε}(x,b), fit the smallest α >= 1 such that
/// T <= λ max(t^{εα}, t^{ε/α}) holds with λ <= 100. Passes when α̂ <= 4Â².
inline VerificationReport verify_boundary_qs(const MetricGraph& g, const BusemannField& field, double eps,
                                             std::size_t triples, std::uint64_t seed, double A,
                                             std::size_t boundary_points = 40) {
  const Domain& dom = g.domain();
  if (dom.bounded() || field.anchor.kind != BoundaryAnchor::Kind::at_infinity)
    throw Error(ErrorKind::invalid_argument, "boundary quasisymmetry needs an unbounded domain and an infinity anchor");
  detail::require_pairs(triples);
  const auto pts = sample_boundary(dom, boundary_points, seed, {.face_margin = 0.25, .region = {}});
  const auto table = hamenstadt_table(field, g, pts, eps);
  const std::size_t m = table.n;

  std::vector<double> ts, Ts;
  std::vector<std::array<std::size_t, 3>> idx;
  Rng rng(split_seed(seed, 7));
  while (ts.size() < triples) {
    const std::size_t x = rng.below(m), a = rng.below(m), b = rng.below(m);
    if (x == a || x == b || a == b) continue;
    ts.push_back(distance(pts[x], pts[a]) / distance(pts[x], pts[b]));
    Ts.push_back(table.d_at(x, a) / table.d_at(x, b));
    idx.push_back({x, a, b});
  }
  // Degenerate triple a = b: T is a ratio of identical entries.
  const double t_degenerate = table.d_at(0, 1) / table.d_at(0, 1);

  const auto lambda_at = [&](double alpha, std::size_t* arg = nullptr) {
    double worst = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double env = std::max(std::pow(ts[i], eps * alpha), std::pow(ts[i], eps / alpha));
      const double v = Ts[i] / env;
      if (v > worst) {
        worst = v;
        if (arg) *arg = i;
      }
    }
    return worst;
  };
  const double alpha_limit = 4.0 * A * A;
  constexpr double lambda_limit = 100.0;
  double alpha_hat = infinity, lambda_hat = infinity;
  // λ(α) is nonincreasing in α, so the first grid point that works is minimal.
  for (double alpha = 1.0; alpha <= std::max(alpha_limit, 1.0) * 4.0; alpha *= 1.02) {
    const double l = lambda_at(alpha);
    if (l <= lambda_limit) {
      alpha_hat = alpha;
      lambda_hat = l;
      break;
    }
  }
  std::size_t arg = 0;
  const double lambda_one = lambda_at(1.0, &arg);

  VerificationReport r;
  r.property = "boundary_qs";
  r.samples = triples;
  r.h = g.spacing();
  r.constants["alpha"] = alpha_hat;
  r.constants["lambda"] = lambda_hat;
  r.constants["lambda_at_alpha_1"] = lambda_one;
  r.constants["epsilon"] = eps;
  r.constants["alpha_limit"] = alpha_limit;
  r.constants["T_degenerate"] = t_degenerate;
  r.witness.points = {pts[idx[arg][0]], pts[idx[arg][1]], pts[idx[arg][2]]};
  r.witness.values = {{"t", ts[arg]}, {"T", Ts[arg]}};
  r.tolerances["lambda_limit"] = lambda_limit;
  r.tolerances["proxy_depth_max"] = *std::max_element(table.proxy_depth.begin(), table.proxy_depth.end());
  r.set(std::isfinite(alpha_hat) && alpha_hat <= alpha_limit && t_degenerate == 1.0);
  return r;
}

/// Deformation bounds: M̂ with M⁻¹k <= k_ε <= Mk, Ĉ_δ for the two-sided
/// comparison d_ε(x,y) ≍ ε⁻¹ e^{-ε(x|y)_b} min(1, εk(x,y)), the Harnack
/// inequality on every edge and on seeded pairs, and the uniformity constant
/// of G_ε measured along quasihyperbolic geodesics of G.
inline VerificationReport verify_deformation_bounds(const MetricGraph& g, const DeformedGraph& dg,
                                                    std::span<const PointPair> pairs, double delta,
                                                    std::uint64_t seed = 0) {
  detail::require_pairs(pairs.size());
  const double eps = dg.epsilon();
  struct Row {
    double M = 0.0, C = 0.0, A = 0.0;
    std::vector<Point> pts;
    std::map<std::string, double> values;
    bool valid = false;
  };
  std::vector<Row> rows(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    const VertexId x = g.snap(pairs[i].first), y = g.snap(pairs[i].second);
    if (x == y) return;
    const Path geo = shortest_path(g, x, y, g.qh_weights(), dg.weights());
    const double k = geo.qh_length;
    const double ke = k_eps_distance(dg, x, y);
    const double de = d_eps_distance(dg, x, y);
    const double prod = 0.5 * (dg.busemann(x) + dg.busemann(y) - k);
    const double q = std::exp(-eps * prod) * std::min(1.0, eps * k) / eps;
    // Uniformity of G_ε along the re-measured geodesic.
    double run = 0.0, cone = 0.0;
    const auto& vs = geo.vertices;
    std::vector<double> s(vs.size(), 0.0);
    for (std::size_t j = 1; j < vs.size(); ++j)
      s[j] = s[j - 1] + dg.weights()[g.adjacency().find(vs[j - 1], vs[j])];
    run = s.back();
    for (std::size_t j = 0; j < vs.size(); ++j) cone = std::max(cone, std::min(s[j], run - s[j]) / dg.d_eps(vs[j]));
    rows[i] = {std::max(ke / k, k / ke),
               std::max(de / q, q / de),
               std::max(run / de, cone),
               {g.position(x), g.position(y)},
               {{"k", k}, {"k_eps", ke}, {"d_eps", de}, {"comparison_scale", q}},
               true};
  });
  VerificationReport r;
  r.property = "deformation_bounds";
  r.samples = pairs.size();
  r.h = g.spacing();
  double M = 0.0, C = 0.0, A = 0.0;
  std::size_t worst = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].valid) continue;
    if (rows[i].M > M) worst = i;
    M = std::max(M, rows[i].M);
    C = std::max(C, rows[i].C);
    A = std::max(A, rows[i].A);
  }
  r.constants["M"] = M;
  r.constants["C_delta"] = C;
  r.constants["A_eps"] = A;
  r.witness.points = rows[worst].pts;
  r.witness.values = rows[worst].values;
  const auto harnack = check_harnack(dg, delta, 500, seed);
  r.constants["harnack_worst_excess"] = harnack.worst_excess;
  r.details["harnack"] = {{"edges", harnack.edges},
                          {"edge_violations", harnack.edge_violations},
                          {"pairs", harnack.pairs},
                          {"pair_violations", harnack.pair_violations}};
  r.tolerances["delta"] = delta;
  r.tolerances["epsilon"] = eps;
  r.set(std::isfinite(M) && std::isfinite(C) && std::isfinite(A) && harnack.holds());
  return r;
}

/// log(1 + |x-y|/min(d(x),d(y))) <= k(x,y) on every domain, and
/// k(x,y) <= 4A² log(1 + |x-y|/min(d(x),d(y))) when A is supplied.
/// Both sides allow a factor `slack` for discretization.
inline VerificationReport verify_bhk_uniform_bounds(const MetricGraph& g, std::span<const PointPair> pairs,
                                                    std::optional<double> A = {}, double slack = 1.05) {
  detail::require_pairs(pairs.size());
  std::vector<std::array<double, 2>> ratios(pairs.size(), {0.0, 0.0});
  std::vector<std::vector<Point>> pts(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    const VertexId x = g.snap(pairs[i].first), y = g.snap(pairs[i].second);
    if (x == y) return;
    const double k = shortest_path(g, x, y, g.qh_weights()).qh_length;
    const double j =
        std::log1p(distance(g.position(x), g.position(y)) / std::min(g.depth(x), g.depth(y)));
    ratios[i] = {j / k, k / j};
    pts[i] = {g.position(x), g.position(y)};
  });
  VerificationReport r;
  r.property = "bhk_uniform_bounds";
  r.samples = pairs.size();
  r.h = g.spacing();
  std::size_t wl = 0, wu = 0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (ratios[i][0] > ratios[wl][0]) wl = i;
    if (ratios[i][1] > ratios[wu][1]) wu = i;
  }
  r.constants["lower_ratio"] = ratios[wl][0];
  r.constants["upper_ratio"] = ratios[wu][1];
  r.tolerances["discretization_factor"] = slack;
  bool ok = ratios[wl][0] <= slack;
  if (A) {
    r.constants["upper_limit"] = 4.0 * *A * *A;
    ok = ok && ratios[wu][1] <= slack * 4.0 * *A * *A;
  }
  const std::size_t w = ratios[wl][0] > slack || !A ? wl : wu;
  r.witness.points = pts[w];
  r.witness.values = {{"j_over_k", ratios[w][0]}, {"k_over_j", ratios[w][1]}};
  r.set(ok);
  return r;
}

struct Triple {
  Point x, y, z;
};

/// Seeded triples with |x - z| in [0.1, 0.45] |x - y|, all at depth >= 3h.
inline std::vector<Triple> bhk314_triples(const MetricGraph& g, std::size_t count, std::uint64_t seed) {
  detail::require_pairs(count);
  const Domain& dom = g.domain();
  const double min_depth = 3.0 * g.spacing();
  const auto base = sample_pairs(g, count, seed);
  std::vector<Triple> out;
  for (std::size_t i = 0; i < base.size(); ++i) {
    Rng rng(split_seed(seed, 1000 + i));
    const auto& [x, y] = base[i];
    for (int attempt = 0; attempt < 200; ++attempt) {
      Point u;
      for (int a = 0; a < dom.dim(); ++a) u[a] = rng.normal();
      const Point z = x + u / u.norm() * (distance(x, y) * rng.uniform(0.1, 0.45));
      if (!dom.window().contains(z, dom.dim()) || dom.depth(z) < min_depth) continue;
      if (g.component(g.snap(z)) != g.component(g.snap(x))) continue;
      out.push_back({x, y, z});
      break;
    }
  }
  if (out.empty()) throw Error(ErrorKind::not_found, "no admissible triple found");
  return out;
}

/// For x, y, z with |x-y| >= 2|x-z|, γ = [x,y]_k, α = [x,z]_k and w on γ at
/// arclength |x-z| from x: Ĉ_A = sup |k(y,w) - dist_k(y, α)|. Triples whose
/// snapped vertices break |x-y| >= 2|x-z| are skipped.
inline VerificationReport verify_bhk314(const MetricGraph& g, std::span<const Triple> triples) {
  detail::require_pairs(triples.size());
  std::vector<detail::Sup> parts(triples.size());
  parallel_for(triples.size(), [&](std::size_t i) {
    const VertexId x = g.snap(triples[i].x), y = g.snap(triples[i].y), z = g.snap(triples[i].z);
    const double xy = distance(g.position(x), g.position(y));
    const double xz = distance(g.position(x), g.position(z));
    if (x == y || x == z || xy < 2.0 * xz) return;
    const auto from_x = dijkstra(g.adjacency(), x, g.qh_weights());
    const auto gamma = from_x.path_to(y);
    const auto alpha = from_x.path_to(z);
    const auto s = detail::arclength(g, gamma);
    std::size_t wi = 0;
    while (wi + 1 < gamma.size() && s[wi] < xz) ++wi;
    const VertexId w = gamma[wi];
    const auto from_y = dijkstra(g.adjacency(), y, g.qh_weights()).dist;
    double to_alpha = infinity;
    for (VertexId v : alpha) to_alpha = std::min(to_alpha, from_y[v]);
    const double defect = std::abs(from_y[w] - to_alpha);
    parts[i] = {defect,
                {g.position(x), g.position(y), g.position(z), g.position(w)},
                {{"k_y_w", from_y[w]}, {"dist_k_y_alpha", to_alpha}},
                true};
  });
  std::size_t used = 0;
  for (const auto& p : parts) used += p.valid;
  if (used == 0) throw Error(ErrorKind::not_found, "no admissible triple found");
  VerificationReport r;
  r.property = "bhk314";
  r.samples = used;
  r.h = g.spacing();
  detail::fill(r, "C_A", detail::reduce(parts));
  r.set(std::isfinite(r.constants["C_A"]));
  return r;
}

/// K̂ = sup over sampled x of min over anchor-pair geodesics γ of dist_k(x, γ).
/// An upper estimate of the rough-starlikeness constant; never asserted.
inline VerificationReport estimate_rough_starlike(const MetricGraph& g, std::span<const Point> anchors,
                                                  std::size_t samples, std::uint64_t seed) {
  if (anchors.size() < 2) throw Error(ErrorKind::invalid_argument, "at least two anchors required");
  std::vector<VertexId> av;
  for (const auto& a : anchors) av.push_back(g.snap(a));
  std::vector<std::pair<std::size_t, std::size_t>> anchor_pairs;
  for (std::size_t i = 0; i < av.size(); ++i)
    for (std::size_t j = i + 1; j < av.size(); ++j)
      if (g.component(av[i]) == g.component(av[j]) && av[i] != av[j]) anchor_pairs.emplace_back(i, j);
  InteriorSampling opts;
  opts.min_depth = 3.0 * g.spacing();
  opts.face_margin = 0.2;
  const auto xs = sample_interior(g.domain(), samples, seed, opts);
  std::vector<VertexId> xv;
  for (const auto& p : xs) xv.push_back(g.snap(p));
  std::vector<std::vector<double>> dist(anchor_pairs.size());
  parallel_for(anchor_pairs.size(), [&](std::size_t k) {
    const auto [i, j] = anchor_pairs[k];
    const auto geo = shortest_path(g, av[i], av[j], g.qh_weights());
    std::vector<std::pair<VertexId, double>> seeds;
    for (VertexId v : geo.vertices) seeds.emplace_back(v, 0.0);
    const auto d = dijkstra(g.adjacency(), seeds, g.qh_weights(), {.targets = xv}).dist;
    for (VertexId v : xv) dist[k].push_back(d[v]);
  });
  VerificationReport r;
  r.property = "rough_starlike";
  r.samples = xs.size();
  r.h = g.spacing();
  double K = 0.0;
  std::size_t arg = 0;
  for (std::size_t s = 0; s < xv.size(); ++s) {
    if (g.component(xv[s]) != g.component(av[0])) continue;
    double best = infinity;
    for (const auto& d : dist) best = std::min(best, d[s]);
    if (best > K) {
      K = best;
      arg = s;
    }
  }
  r.constants["K"] = K;
  r.constants["anchor_pairs"] = static_cast<double>(anchor_pairs.size());
  if (!xs.empty()) r.witness.points = {g.position(xv[arg])};
  r.pass = std::isfinite(K);
  r.status = "report-only";
  return r;
}

/// ½|x-y|/d(x) <= k(x,y) <= 2|x-y|/d(x) for pairs with k̂ <= 1, each side
/// allowed a factor `slack`.
inline VerificationReport verify_qh_sandwich(const MetricGraph& g, std::span<const PointPair> pairs,
                                             double slack = 1.05) {
  std::vector<std::array<double, 3>> rows(pairs.size(), {0.0, 0.0, 0.0});
  parallel_for(pairs.size(), [&](std::size_t i) {
    const VertexId x = g.snap(pairs[i].first), y = g.snap(pairs[i].second);
    if (x == y) return;
    const double k = shortest_path(g, x, y, g.qh_weights()).qh_length;
    if (k > 1.0) return;
    const double t = distance(g.position(x), g.position(y)) / g.depth(x);
    rows[i] = {0.5 * t / k, k / (2.0 * t), 1.0};
  });
  VerificationReport r;
  r.property = "qh_sandwich";
  r.h = g.spacing();
  double lower = 0.0, upper = 0.0;
  std::size_t worst = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i][2] == 0.0) continue;
    ++r.samples;
    if (std::max(rows[i][0], rows[i][1]) > std::max(lower, upper)) worst = i;
    lower = std::max(lower, rows[i][0]);
    upper = std::max(upper, rows[i][1]);
  }
  r.constants["lower_ratio"] = lower;
  r.constants["upper_ratio"] = upper;
  r.tolerances["slack"] = slack;
  if (!pairs.empty()) r.witness.points = {pairs[worst].first, pairs[worst].second};
  r.set(lower <= slack && upper <= slack);
  return r;
}

}  // namespace qhl
