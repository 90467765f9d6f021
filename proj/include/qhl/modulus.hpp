#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "deform.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "graph.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace qhl {

/// Discrete p-modulus of the family of paths joining vertex sets E and F.
/// Densities live on vertices; a path's ρ-length is Σ_e len(e)·½(ρ(u)+ρ(v))
/// and the cost is Σ_v m(v) ρ(v)^p.
struct ModulusProblem {
  const Csr* graph = nullptr;
  std::vector<double> lengths;  // per directed entry
  std::vector<double> measure;  // per vertex
  std::vector<VertexId> E, F;
  double p = 2.0;
  /// Paths shorter than 1 - tolerance count as violated.
  double tolerance = 1e-3;
  /// Relative duality gap at which the solver stops.
  double gap_target = 0.01;
  std::size_t max_rounds = 2000;
  std::size_t paths_per_round = 64;
  std::size_t sweeps_per_round = 3;
};

struct ModulusSolution {
  /// Cost of the admissible density `rho` (an upper bound on the modulus).
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  /// (upper - lower) / upper.
  double gap = 0.0;
  std::vector<double> rho;
  std::vector<std::vector<VertexId>> paths;
  std::size_t iterations = 0;
  /// Shortest ρ-length over all E-F paths for the returned density.
  double min_length = 0.0;
  bool empty_family = false;
  bool converged = false;
};

namespace detail {

inline void require_connected_set(const Csr& g, std::span<const VertexId> set, const char* name) {
  std::vector<char> in(g.vertex_count(), 0);
  for (VertexId v : set) in[v] = 1;
  const std::pair<VertexId, double> seed{set.front(), 0.0};
  const auto sp =
      dijkstra(g, std::span(&seed, 1), [](std::size_t, VertexId, VertexId) { return 1.0; }, {.allowed = &in});
  for (VertexId v : set)
    if (!std::isfinite(sp.dist[v])) throw Error(ErrorKind::invalid_argument, std::string(name) + " must be graph-connected");
}

/// One active constraint: sparse coefficients a_v with a·ρ = ρ-length.
struct Constraint {
  std::vector<std::pair<VertexId, double>> coeff;
  double norm2 = 0.0;  // Σ a_v² / (2 m_v), the p = 2 curvature
  double lambda = 0.0;
};

}  // namespace detail

inline ModulusSolution discrete_modulus(const ModulusProblem& prob) {
  if (!prob.graph) throw Error(ErrorKind::invalid_argument, "modulus problem has no graph");
  const Csr& g = *prob.graph;
  const std::size_t n = g.vertex_count();
  if (prob.E.empty() || prob.F.empty()) throw Error(ErrorKind::invalid_argument, "E and F must be nonempty");
  if (!(prob.p > 1.0)) throw Error(ErrorKind::invalid_argument, "modulus exponent must exceed 1");
  if (prob.lengths.size() != g.targets.size() || prob.measure.size() != n)
    throw Error(ErrorKind::invalid_argument, "modulus problem arrays do not match the graph");
  std::vector<char> inE(n, 0), inF(n, 0);
  for (VertexId v : prob.E) inE[v] = 1;
  for (VertexId v : prob.F) {
    if (inE[v]) throw Error(ErrorKind::invalid_argument, "E and F intersect");
    inF[v] = 1;
  }
  detail::require_connected_set(g, prob.E, "E");
  detail::require_connected_set(g, prob.F, "F");

  const double p = prob.p;
  const double q = 1.0 / (p - 1.0);
  const auto& m = prob.measure;
  std::vector<double> s(n, 0.0);  // (Aᵀλ)_v
  std::vector<double> rho(n, 0.0);
  const auto density = [&](VertexId v) {
    if (s[v] <= 0.0) return 0.0;
    return p == 2.0 ? s[v] / (2.0 * m[v]) : std::pow(s[v] / (p * m[v]), q);
  };
  const auto cost = [&](const std::vector<double>& r) {
    double c = 0.0;
    for (std::size_t v = 0; v < n; ++v)
      if (r[v] > 0.0) c += m[v] * std::pow(r[v], p);
    return c;
  };

  std::vector<std::pair<VertexId, double>> seedsE, seedsF;
  for (VertexId v : prob.E) seedsE.emplace_back(v, 0.0);
  for (VertexId v : prob.F) seedsF.emplace_back(v, 0.0);
  const auto rho_length = [&](std::size_t e, VertexId u, VertexId v) {
    return prob.lengths[e] * 0.5 * (rho[u] + rho[v]);
  };
  const auto search = [&] { return dijkstra(g, seedsE, rho_length, {.sinks = &inF}); };
  const auto search_back = [&] { return dijkstra(g, seedsF, rho_length, {.sinks = &inE}); };

  ModulusSolution sol;
  {
    // Reachability with zero density decides whether the family is empty.
    const auto sp = search();
    if (std::none_of(prob.F.begin(), prob.F.end(), [&](VertexId f) { return std::isfinite(sp.dist[f]); })) {
      sol.empty_family = true;
      sol.converged = true;
      sol.rho.assign(n, 0.0);
      return sol;
    }
  }

  std::vector<detail::Constraint> active;
  std::set<std::vector<VertexId>> seen;
  const auto add_path = [&](std::vector<VertexId> path) {
    // Keep the piece from the last visit of E before F to the first visit
    // of F; it alone already joins E and F.
    std::size_t stop = path.size();
    for (std::size_t i = 0; i < path.size(); ++i)
      if (inF[path[i]]) {
        stop = i + 1;
        break;
      }
    path.resize(stop);
    std::size_t start = 0;
    for (std::size_t i = 0; i < path.size(); ++i)
      if (inE[path[i]]) start = i;
    path.erase(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(start));
    if (path.size() < 2 || !seen.insert(path).second) return false;
    std::vector<std::pair<VertexId, double>> coeff;
    for (std::size_t i = 1; i < path.size(); ++i) {
      const double len = prob.lengths[g.find(path[i - 1], path[i])];
      coeff.emplace_back(path[i - 1], 0.5 * len);
      coeff.emplace_back(path[i], 0.5 * len);
    }
    std::sort(coeff.begin(), coeff.end());
    detail::Constraint c;
    for (const auto& [v, a] : coeff) {
      if (!c.coeff.empty() && c.coeff.back().first == v)
        c.coeff.back().second += a;
      else
        c.coeff.emplace_back(v, a);
    }
    for (const auto& [v, a] : c.coeff) c.norm2 += a * a / (2.0 * m[v]);
    active.push_back(std::move(c));
    sol.paths.push_back(std::move(path));
    return true;
  };

  const auto length_of = [&](const detail::Constraint& c) {
    double l = 0.0;
    for (const auto& [v, a] : c.coeff) l += a * density(v);
    return l;
  };
  const auto shift = [&](detail::Constraint& c, double dl) {
    for (const auto& [v, a] : c.coeff) s[v] += dl * a;
    c.lambda += dl;
  };
  // Exact maximization of the dual along one coordinate.
  const auto update = [&](detail::Constraint& c) {
    const double l = length_of(c);
    if (p == 2.0) {
      const double dl = std::max(-c.lambda, (1.0 - l) / c.norm2);
      shift(c, dl);
      return std::abs(1.0 - l);
    }
    if (l >= 1.0 && c.lambda == 0.0) return 0.0;
    // a·ρ(λ) is increasing in λ: bracket the root and bisect.
    const double base = c.lambda;
    double lo = -base, hi = 0.0;
    if (l < 1.0) {
      hi = std::max(1e-12, base);
      while (true) {
        shift(c, hi);
        const double lh = length_of(c);
        shift(c, -hi);
        if (lh >= 1.0) break;
        hi *= 2.0;
      }
      lo = 0.0;
    } else {
      hi = 0.0;
    }
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      shift(c, mid);
      const double lm = length_of(c);
      shift(c, -mid);
      (lm < 1.0 ? lo : hi) = mid;
    }
    shift(c, 0.5 * (lo + hi));
    return std::abs(1.0 - l);
  };

  for (sol.iterations = 1; sol.iterations <= prob.max_rounds; ++sol.iterations) {
    for (std::size_t v = 0; v < n; ++v) rho[v] = density(static_cast<VertexId>(v));
    const auto sp = search();
    std::vector<VertexId> order;
    for (VertexId f : prob.F)
      if (std::isfinite(sp.dist[f])) order.push_back(f);
    std::sort(order.begin(), order.end(), [&](VertexId a, VertexId b) {
      return sp.dist[a] != sp.dist[b] ? sp.dist[a] < sp.dist[b] : a < b;
    });
    const double lmin = sp.dist[order.front()];

    double dual = 0.0;
    for (const auto& c : active) dual += c.lambda;
    dual -= (p - 1.0) * cost(rho);
    sol.lower = std::max(sol.lower, dual);
    if (lmin > 0.0) {
      const double ub = cost(rho) / std::pow(lmin, p);
      if (sol.upper == 0.0 || ub < sol.upper) {
        sol.upper = ub;
        sol.min_length = 1.0;
        sol.rho = rho;
        for (double& r : sol.rho) r /= lmin;
      }
    }
    sol.gap = sol.upper > 0.0 ? (sol.upper - sol.lower) / sol.upper : 1.0;
    if (sol.upper > 0.0 && sol.gap <= prob.gap_target) {
      sol.converged = true;
      break;
    }

    // Violated walks E -> v -> F through every vertex v, shortest first,
    // skipping ones that mostly retrace walks already taken this round.
    const auto back = search_back();
    std::vector<std::pair<double, VertexId>> via;
    for (VertexId v = 0; v < n; ++v) {
      const double l = sp.dist[v] + back.dist[v];
      if (l < 1.0 - prob.tolerance) via.emplace_back(l, v);
    }
    std::sort(via.begin(), via.end());
    std::size_t added = 0;
    std::vector<char> used(n, 0);
    for (const auto& [l, v] : via) {
      if (added >= prob.paths_per_round) break;
      if (used[v]) continue;
      auto path = sp.path_to(v);
      for (VertexId u = back.parent[v]; u != no_vertex; u = back.parent[u]) path.push_back(u);
      std::size_t overlap = 0;
      for (VertexId u : path) overlap += used[u];
      if (added > 0 && 2 * overlap > path.size()) continue;
      for (VertexId u : path) used[u] = 1;
      if (add_path(std::move(path))) ++added;
    }
    // Sweeps visit constraints with positive multipliers and the new ones;
    // every tenth round revisits the whole active set.
    const bool full = sol.iterations % 10 == 0;
    for (std::size_t sweep = 0; sweep < prob.sweeps_per_round; ++sweep) {
      double worst = 0.0;
      for (std::size_t i = 0; i < active.size(); ++i) {
        auto& c = active[i];
        if (!full && c.lambda == 0.0 && i + added < active.size()) continue;
        worst = std::max(worst, c.lambda > 0.0 || length_of(c) < 1.0 ? update(c) : 0.0);
      }
      if (worst < 1e-6) break;
    }
  }
  sol.iterations = std::min(sol.iterations, prob.max_rounds);
  sol.value = sol.upper;
  return sol;
}

/// Euclidean modulus problem: edge lengths |e|, cell measure h^n, p = n.
inline ModulusProblem euclidean_problem(const MetricGraph& g, std::vector<VertexId> E, std::vector<VertexId> F,
                                        std::optional<double> p = {}) {
  ModulusProblem prob;
  prob.graph = &g.adjacency();
  prob.lengths.assign(g.euclidean_lengths().begin(), g.euclidean_lengths().end());
  prob.measure.assign(g.vertex_count(), g.cell_measure());
  prob.E = std::move(E);
  prob.F = std::move(F);
  prob.p = p.value_or(g.dim());
  return prob;
}

/// Deformed modulus problem: d_ε edge lengths, μ_ε cell masses, p = n.
inline ModulusProblem deformed_problem(const DeformedGraph& dg, std::vector<VertexId> E, std::vector<VertexId> F,
                                       std::optional<double> p = {}) {
  ModulusProblem prob;
  prob.graph = &dg.base().adjacency();
  prob.lengths.assign(dg.weights().begin(), dg.weights().end());
  prob.measure.assign(dg.cell_masses().begin(), dg.cell_masses().end());
  prob.E = std::move(E);
  prob.F = std::move(F);
  prob.p = p.value_or(dg.base().dim());
  return prob;
}

/// Vertices whose positions satisfy `pred`, in id order.
template <class Pred>
std::vector<VertexId> select_vertices(const MetricGraph& g, Pred&& pred) {
  std::vector<VertexId> out;
  for (VertexId v = 0; v < g.vertex_count(); ++v)
    if (pred(g.position(v))) out.push_back(v);
  return out;
}

/// Δ(E, F) = dist(E, F) / min(diam E, diam F) for Euclidean point sets.
inline double separation_ratio(std::span<const Point> E, std::span<const Point> F) {
  if (E.empty() || F.empty()) throw Error(ErrorKind::invalid_argument, "E and F must be nonempty");
  const double diam = std::min(point_set_diameter(E), point_set_diameter(F));
  if (!(diam > 0.0)) throw Error(ErrorKind::invalid_argument, "degenerate continuum");
  double dist = infinity;
  for (const auto& a : E)
    for (const auto& b : F) dist = std::min(dist, distance(a, b));
  return dist / diam;
}

inline double separation_ratio(const MetricGraph& g, std::span<const VertexId> E, std::span<const VertexId> F) {
  std::vector<Point> pe, pf;
  for (VertexId v : E) pe.push_back(g.position(v));
  for (VertexId v : F) pf.push_back(g.position(v));
  return separation_ratio(pe, pf);
}

/// Δ under d_ε: the distance is one multi-source search, diameters are maxima
/// over single-source searches from each member.
inline double separation_ratio(const DeformedGraph& dg, std::span<const VertexId> E, std::span<const VertexId> F) {
  if (E.empty() || F.empty()) throw Error(ErrorKind::invalid_argument, "E and F must be nonempty");
  const Csr& adj = dg.base().adjacency();
  const auto w = dg.weights();
  const auto diam = [&](std::span<const VertexId> S) {
    std::vector<double> best(S.size(), 0.0);
    parallel_for(S.size(), [&](std::size_t i) {
      const auto d = dijkstra(adj, S[i], w, {.targets = S}).dist;
      for (VertexId v : S) best[i] = std::max(best[i], d[v]);
    });
    return *std::max_element(best.begin(), best.end());
  };
  const double dm = std::min(diam(E), diam(F));
  if (!(dm > 0.0)) throw Error(ErrorKind::invalid_argument, "degenerate continuum");
  std::vector<std::pair<VertexId, double>> seeds;
  for (VertexId v : E) seeds.emplace_back(v, 0.0);
  const auto d = dijkstra(adj, seeds, w, {.targets = F}).dist;
  double dist = infinity;
  for (VertexId v : F) dist = std::min(dist, d[v]);
  return dist / dm;
}

/// Vertex set of a segment: samples at spacing h/2 are snapped and joined by
/// Euclidean shortest paths, so the result is graph-connected.
inline std::vector<VertexId> rasterize_segment(const MetricGraph& g, const Point& a, const Point& b) {
  const double len = distance(a, b);
  const std::size_t steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(2.0 * len / g.spacing())));
  std::vector<VertexId> out;
  VertexId prev = no_vertex;
  for (std::size_t i = 0; i <= steps; ++i) {
    const VertexId v = g.snap(a + (b - a) * (static_cast<double>(i) / steps));
    if (v == prev) continue;
    if (prev != no_vertex) {
      const auto path = shortest_path(g, prev, v, g.euclidean_lengths());
      out.insert(out.end(), path.vertices.begin() + 1, path.vertices.end());
    } else {
      out.push_back(v);
    }
    prev = v;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct SegmentPair {
  Point e0, e1, f0, f1;
};

struct LoewnerSample {
  SegmentPair pair;
  double separation = 0.0;
  double modulus = 0.0;
  double gap = 0.0;
};

struct LoewnerPoint {
  double t = 0.0;
  /// Minimum modulus over sampled pairs with Δ <= t: an upper bound on φ(t).
  double value = 0.0;
  bool upper_bound = true;
  std::size_t pairs = 0;
};

struct LoewnerProbe {
  std::vector<LoewnerPoint> points;
  std::vector<LoewnerSample> samples;
};

/// Euclidean n-modulus and Δ for explicit segment pairs.
inline std::vector<LoewnerSample> loewner_samples(const MetricGraph& g, std::span<const SegmentPair> pairs) {
  std::vector<LoewnerSample> out(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    const auto& sp = pairs[i];
    auto E = rasterize_segment(g, sp.e0, sp.e1);
    auto F = rasterize_segment(g, sp.f0, sp.f1);
    out[i].pair = sp;
    out[i].separation = separation_ratio(g, E, F);
    const auto sol = discrete_modulus(euclidean_problem(g, std::move(E), std::move(F)));
    out[i].modulus = sol.value;
    out[i].gap = sol.gap;
  });
  return out;
}

inline LoewnerProbe summarize_loewner(std::span<const double> t_values, std::vector<LoewnerSample> samples) {
  LoewnerProbe probe;
  probe.samples = std::move(samples);
  for (double t : t_values) {
    if (!(t > 0.0)) throw Error(ErrorKind::invalid_argument, "t values must be positive");
    LoewnerPoint pt{t, infinity, true, 0};
    for (const auto& s : probe.samples)
      if (s.separation <= t) {
        pt.value = std::min(pt.value, s.modulus);
        ++pt.pairs;
      }
    if (pt.pairs == 0) throw Error(ErrorKind::not_found, "no sampled pair has separation <= t");
    probe.points.push_back(pt);
  }
  return probe;
}

struct LoewnerOptions {
  double h = 0.05;
  std::size_t trials = 16;
  /// Segment length range as fractions of the sampling region's smaller side.
  double min_length = 0.15;
  double max_length = 0.4;
  std::optional<Box> region;
};

/// Seeded segment pairs inside the domain (depth >= 2h along each segment).
inline std::vector<SegmentPair> random_segment_pairs(const MetricGraph& g, std::size_t count, std::uint64_t seed,
                                                     const LoewnerOptions& opts) {
  const Domain& dom = g.domain();
  Box box = opts.region.value_or(dom.window());
  const double side = std::min(box.extent(0), box.extent(1));
  Rng rng(seed);
  const auto segment_ok = [&](const Point& a, const Point& b) {
    for (int i = 0; i <= 16; ++i) {
      const Point p = a + (b - a) * (i / 16.0);
      if (!box.contains(p, dom.dim()) || dom.depth(p) < 2.0 * g.spacing()) return false;
    }
    return true;
  };
  const auto draw = [&] {
    const Point c(rng.uniform(box.lo[0], box.hi[0]), rng.uniform(box.lo[1], box.hi[1]));
    const double len = side * rng.uniform(opts.min_length, opts.max_length);
    const double th = rng.uniform(0.0, std::numbers::pi);
    const Point d(std::cos(th) * len / 2, std::sin(th) * len / 2);
    return std::pair{c - d, c + d};
  };
  std::vector<SegmentPair> out;
  for (std::size_t attempts = 0; out.size() < count; ++attempts) {
    if (attempts > 1000 * count) throw Error(ErrorKind::not_found, "could not place segment pairs in the region");
    const auto [e0, e1] = draw();
    const auto [f0, f1] = draw();
    if (!segment_ok(e0, e1) || !segment_ok(f0, f1)) continue;
    // Keep the pair disjoint on the grid.
    double gap = infinity;
    for (int i = 0; i <= 16; ++i) gap = std::min(gap, segment_distance(e0 + (e1 - e0) * (i / 16.0), f0, f1));
    if (gap < 3.0 * g.spacing()) continue;
    out.push_back({e0, e1, f0, f1});
  }
  return out;
}

/// Upper bounds on the Loewner function φ(t) from seeded segment pairs.
inline LoewnerProbe loewner_probe(const Domain& dom, std::span<const double> t_values, std::uint64_t seed,
                                  const LoewnerOptions& opts = {}) {
  if (dom.dim() != 2) throw Error(ErrorKind::unsupported, "loewner probe is 2-D only");
  const MetricGraph g = build_graph(dom, opts.h);
  const auto pairs = random_segment_pairs(g, opts.trials, seed, opts);
  return summarize_loewner(t_values, loewner_samples(g, pairs));
}

/// "id,x,y[,z],rho" rows for vertices with positive density.
inline void write_density_csv(const MetricGraph& g, const ModulusSolution& sol, std::ostream& os) {
  os << (g.dim() == 2 ? "id,x,y,rho\n" : "id,x,y,z,rho\n");
  os.precision(17);
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (sol.rho.empty() || !(sol.rho[v] > 0.0)) continue;
    os << v;
    for (int a = 0; a < g.dim(); ++a) os << ',' << g.position(v)[a];
    os << ',' << sol.rho[v] << '\n';
  }
}

inline nlohmann::json to_json(const ModulusSolution& sol) {
  return {{"value", sol.value},
          {"lower", sol.lower},
          {"upper", sol.upper},
          {"gap", sol.gap},
          {"iterations", sol.iterations},
          {"paths", sol.paths.size()},
          {"empty_family", sol.empty_family},
          {"converged", sol.converged}};
}

}  // namespace qhl
