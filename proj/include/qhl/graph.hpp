#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "point.hpp"

namespace qhl {

using VertexId = std::uint32_t;
inline constexpr VertexId no_vertex = std::numeric_limits<VertexId>::max();
inline constexpr double infinity = std::numeric_limits<double>::infinity();

/// Compressed adjacency: neighbours of v are targets[offsets[v] .. offsets[v+1]).
struct Csr {
  std::vector<std::size_t> offsets{0};
  std::vector<VertexId> targets;

  std::size_t vertex_count() const { return offsets.size() - 1; }
  std::size_t begin(VertexId v) const { return offsets[v]; }
  std::size_t end(VertexId v) const { return offsets[v + 1]; }

  /// Index of the directed entry u -> v, or npos.
  std::size_t find(VertexId u, VertexId v) const {
    for (std::size_t e = begin(u); e < end(u); ++e)
      if (targets[e] == v) return e;
    return npos;
  }
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  /// Builds a CSR from an undirected edge list; returns the CSR and, for each
  /// directed entry, the index of the originating undirected edge.
  static std::pair<Csr, std::vector<std::size_t>> from_edges(std::size_t n,
                                                             std::span<const std::pair<VertexId, VertexId>> edges) {
    Csr g;
    g.offsets.assign(n + 1, 0);
    for (const auto& [u, v] : edges) {
      ++g.offsets[u + 1];
      ++g.offsets[v + 1];
    }
    for (std::size_t i = 0; i < n; ++i) g.offsets[i + 1] += g.offsets[i];
    g.targets.resize(g.offsets[n]);
    std::vector<std::size_t> origin(g.offsets[n]);
    std::vector<std::size_t> fill(g.offsets.begin(), g.offsets.end() - 1);
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const auto [u, v] = edges[k];
      origin[fill[u]] = k;
      g.targets[fill[u]++] = v;
      origin[fill[v]] = k;
      g.targets[fill[v]++] = u;
    }
    return {std::move(g), std::move(origin)};
  }
};

struct ShortestPaths {
  std::vector<double> dist;
  std::vector<VertexId> parent;

  /// Vertex sequence from the search root to v (empty if unreachable).
  std::vector<VertexId> path_to(VertexId v) const {
    std::vector<VertexId> out;
    if (!std::isfinite(dist[v])) return out;
    for (VertexId u = v; u != no_vertex; u = parent[u]) out.push_back(u);
    std::reverse(out.begin(), out.end());
    return out;
  }
};

struct SearchOptions {
  /// Stop as soon as this vertex is settled.
  VertexId target = no_vertex;
  /// Settled but never expanded (path endpoints such as modulus targets).
  const std::vector<char>* sinks = nullptr;
  /// When set, only vertices with a nonzero flag are visited.
  const std::vector<char>* allowed = nullptr;
  /// Stop once every listed vertex is settled.
  std::span<const VertexId> targets = {};
};

/// Exact single- or multi-source Dijkstra. `weight(e, u, v)` gives the length
/// of directed entry e. Ties are broken by the smaller vertex id, so results
/// are deterministic.
template <class Weight>
ShortestPaths dijkstra(const Csr& g, std::span<const std::pair<VertexId, double>> seeds, Weight&& weight,
                       const SearchOptions& opts = {}) {
  const std::size_t n = g.vertex_count();
  ShortestPaths sp{std::vector<double>(n, infinity), std::vector<VertexId>(n, no_vertex)};
  using Item = std::pair<double, VertexId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  for (const auto& [s, d0] : seeds) {
    if (opts.allowed && !(*opts.allowed)[s]) continue;
    if (d0 < sp.dist[s]) {
      sp.dist[s] = d0;
      heap.emplace(d0, s);
    }
  }
  std::vector<char> settled(n, 0);
  std::vector<char> wanted;
  std::size_t remaining = 0;
  if (!opts.targets.empty()) {
    wanted.assign(n, 0);
    for (VertexId t : opts.targets)
      if (!wanted[t]) {
        wanted[t] = 1;
        ++remaining;
      }
  }
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (settled[u] || d > sp.dist[u]) continue;
    settled[u] = 1;
    if (u == opts.target) break;
    if (remaining > 0 && wanted[u] && --remaining == 0) break;
    if (opts.sinks && (*opts.sinks)[u]) continue;
    for (std::size_t e = g.begin(u); e < g.end(u); ++e) {
      const VertexId v = g.targets[e];
      if (settled[v]) continue;
      if (opts.allowed && !(*opts.allowed)[v]) continue;
      const double nd = d + weight(e, u, v);
      if (nd < sp.dist[v]) {
        sp.dist[v] = nd;
        sp.parent[v] = u;
        heap.emplace(nd, v);
      }
    }
  }
  return sp;
}

/// Convenience overload for per-entry weight arrays.
inline ShortestPaths dijkstra(const Csr& g, std::span<const std::pair<VertexId, double>> seeds,
                              std::span<const double> weights, const SearchOptions& opts = {}) {
  return dijkstra(g, seeds, [&](std::size_t e, VertexId, VertexId) { return weights[e]; }, opts);
}

inline ShortestPaths dijkstra(const Csr& g, VertexId source, std::span<const double> weights,
                              const SearchOptions& opts = {}) {
  const std::pair<VertexId, double> seed{source, 0.0};
  return dijkstra(g, std::span(&seed, 1), weights, opts);
}

enum class Weighting { euclidean, quasihyperbolic, deformed };

/// Grid discretization of G ∩ window: vertices are lattice points with
/// d(v) >= h/2; edges follow a fixed stencil and are certified to lie in G.
/// Immutable after build_graph().
class MetricGraph {
public:
  const Domain& domain() const { return domain_; }
  int dim() const { return domain_.dim(); }
  double spacing() const { return h_; }
  int stencil() const { return stencil_; }
  std::size_t vertex_count() const { return positions_.size(); }
  std::size_t edge_count() const { return adjacency_.targets.size() / 2; }
  const Point& position(VertexId v) const { return positions_[v]; }
  double depth(VertexId v) const { return depth_[v]; }
  std::span<const Point> positions() const { return positions_; }
  std::span<const double> depths() const { return depth_; }
  double cell_measure() const { return std::pow(h_, dim()); }
  const Csr& adjacency() const { return adjacency_; }
  std::span<const double> euclidean_lengths() const { return euclid_; }
  std::span<const double> qh_weights() const { return qh_; }
  long component(VertexId v) const { return component_[v]; }
  long component_count() const { return components_; }

  std::span<const double> weights(Weighting w) const {
    switch (w) {
      case Weighting::euclidean: return euclid_;
      case Weighting::quasihyperbolic: return qh_;
      case Weighting::deformed: break;
    }
    throw Error(ErrorKind::invalid_argument, "deformed weights live in a DeformedGraph");
  }

  /// Vertex at lattice index, or no_vertex.
  VertexId at_cell(std::span<const long> idx) const {
    std::size_t flat = 0;
    for (int a = dim() - 1; a >= 0; --a) {
      if (idx[a] < 0 || idx[a] >= counts_[a]) return no_vertex;
      flat = flat * counts_[a] + static_cast<std::size_t>(idx[a]);
    }
    return cell_vertex_[flat];
  }

  /// Nearest vertex to p (Euclidean); throws when none lies within 64 cells.
  VertexId snap(const Point& p) const {
    long base[3] = {0, 0, 0};
    for (int a = 0; a < dim(); ++a) base[a] = std::lround((p[a] - domain_.window().lo[a]) / h_);
    VertexId best = no_vertex;
    double best_d = infinity;
    constexpr long max_ring = 64;
    for (long r = 0; r <= max_ring; ++r) {
      if (best != no_vertex && (static_cast<double>(r) - 1.0) * h_ > best_d) break;
      visit_ring(base, r, [&](std::span<const long> idx) {
        const VertexId v = at_cell(idx);
        if (v == no_vertex) return;
        const double d = distance(positions_[v], p);
        if (d < best_d || (d == best_d && v < best)) {
          best_d = d;
          best = v;
        }
      });
    }
    if (best == no_vertex) throw Error(ErrorKind::not_found, "no graph vertex near query point");
    return best;
  }

  friend MetricGraph build_graph(const Domain& dom, double h, int stencil);

private:
  template <class Fn>
  void visit_ring(const long* base, long r, Fn&& fn) const {
    long idx[3] = {0, 0, 0};
    const int n = dim();
    if (n == 2) {
      for (long i = -r; i <= r; ++i)
        for (long j = -r; j <= r; ++j) {
          if (std::max(std::abs(i), std::abs(j)) != r) continue;
          idx[0] = base[0] + i;
          idx[1] = base[1] + j;
          fn(std::span<const long>(idx, 3));
        }
    } else {
      for (long i = -r; i <= r; ++i)
        for (long j = -r; j <= r; ++j)
          for (long k = -r; k <= r; ++k) {
            if (std::max({std::abs(i), std::abs(j), std::abs(k)}) != r) continue;
            idx[0] = base[0] + i;
            idx[1] = base[1] + j;
            idx[2] = base[2] + k;
            fn(std::span<const long>(idx, 3));
          }
    }
  }

  Domain domain_;
  double h_ = 0.0;
  int stencil_ = 16;
  long counts_[3] = {1, 1, 1};
  std::vector<VertexId> cell_vertex_;
  std::vector<Point> positions_;
  std::vector<double> depth_;
  Csr adjacency_;
  std::vector<double> euclid_;
  std::vector<double> qh_;
  std::vector<long> component_;
  long components_ = 0;
};

namespace detail {

inline std::vector<std::array<int, 3>> stencil_offsets(int stencil, int dim) {
  std::vector<std::array<int, 3>> out;
  if (dim == 2 && (stencil == 8 || stencil == 16)) {
    for (int i = -2; i <= 2; ++i)
      for (int j = -2; j <= 2; ++j) {
        if (i == 0 && j == 0) continue;
        const int m = std::max(std::abs(i), std::abs(j));
        if (m == 1) out.push_back({i, j, 0});
        else if (stencil == 16 && std::abs(i) + std::abs(j) == 3) out.push_back({i, j, 0});
      }
    return out;
  }
  if (dim == 3 && stencil == 26) {
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j)
        for (int k = -1; k <= 1; ++k)
          if (i || j || k) out.push_back({i, j, k});
    return out;
  }
  throw Error(ErrorKind::invalid_argument, "stencil must be 8 or 16 in 2-D, 26 in 3-D");
}

/// Certifies [a, b] ⊂ G: the balls B(a, d(a)) and B(b, d(b)) cover the
/// segment when d(a) + d(b) > |a - b|; otherwise bisect.
inline bool segment_inside(const Domain& dom, const Point& a, double da, const Point& b, double db, int levels) {
  if (da + db > distance(a, b)) return true;
  if (levels == 0) return false;
  const Point m = (a + b) * 0.5;
  const double dm = dom.depth(m);
  if (!(dm > 0.0)) return false;
  return segment_inside(dom, a, da, m, dm, levels - 1) && segment_inside(dom, m, dm, b, db, levels - 1);
}

}  // namespace detail

inline constexpr std::size_t max_grid_cells = 20'000'000;

/// Discretizes dom at spacing h. Edge quasihyperbolic weight is the trapezoid
/// rule |u - v| * (1/d(u) + 1/d(v)) / 2.
inline MetricGraph build_graph(const Domain& dom, double h, int stencil = 16) {
  if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorKind::invalid_argument, "h must be positive");
  const auto offsets = detail::stencil_offsets(stencil, dom.dim());
  MetricGraph g;
  g.domain_ = dom;
  g.h_ = h;
  g.stencil_ = stencil;
  const int n = dom.dim();
  double cells = 1.0;
  for (int a = 0; a < n; ++a) {
    g.counts_[a] = static_cast<long>(std::floor(dom.window().extent(a) / h + 1e-9)) + 1;
    cells *= static_cast<double>(g.counts_[a]);
  }
  if (cells > static_cast<double>(max_grid_cells))
    throw Error(ErrorKind::budget_exceeded, "grid exceeds the vertex budget");
  g.cell_vertex_.assign(static_cast<std::size_t>(cells), no_vertex);

  const Point& lo = dom.window().lo;
  for (std::size_t flat = 0; flat < g.cell_vertex_.size(); ++flat) {
    std::size_t rest = flat;
    Point p;
    for (int a = 0; a < n; ++a) {
      const long i = static_cast<long>(rest % g.counts_[a]);
      rest /= g.counts_[a];
      p[a] = lo[a] + static_cast<double>(i) * h;
    }
    if (!dom.may_contain(p)) continue;
    const double d = dom.depth(p);
    if (d >= 0.5 * h) {
      g.cell_vertex_[flat] = static_cast<VertexId>(g.positions_.size());
      g.positions_.push_back(p);
      g.depth_.push_back(d);
    }
  }
  if (g.positions_.empty()) throw Error(ErrorKind::invalid_argument, "empty vertex set");

  std::vector<std::pair<VertexId, VertexId>> edges;
  for (std::size_t flat = 0; flat < g.cell_vertex_.size(); ++flat) {
    const VertexId u = g.cell_vertex_[flat];
    if (u == no_vertex) continue;
    long idx[3] = {0, 0, 0};
    std::size_t rest = flat;
    for (int a = 0; a < n; ++a) {
      idx[a] = static_cast<long>(rest % g.counts_[a]);
      rest /= g.counts_[a];
    }
    for (const auto& off : offsets) {
      long j[3] = {idx[0] + off[0], idx[1] + off[1], idx[2] + off[2]};
      const VertexId v = g.at_cell(std::span<const long>(j, 3));
      if (v == no_vertex || v <= u) continue;
      if (!detail::segment_inside(dom, g.positions_[u], g.depth_[u], g.positions_[v], g.depth_[v], 8)) continue;
      edges.emplace_back(u, v);
    }
  }
  auto [csr, origin] = Csr::from_edges(g.positions_.size(), edges);
  g.adjacency_ = std::move(csr);
  g.euclid_.resize(g.adjacency_.targets.size());
  g.qh_.resize(g.adjacency_.targets.size());
  for (VertexId u = 0; u < g.positions_.size(); ++u)
    for (std::size_t e = g.adjacency_.begin(u); e < g.adjacency_.end(u); ++e) {
      const VertexId v = g.adjacency_.targets[e];
      const double len = distance(g.positions_[u], g.positions_[v]);
      g.euclid_[e] = len;
      g.qh_[e] = len * 0.5 * (1.0 / g.depth_[u] + 1.0 / g.depth_[v]);
    }

  g.component_.assign(g.positions_.size(), -1);
  std::vector<VertexId> stack;
  for (VertexId s = 0; s < g.positions_.size(); ++s) {
    if (g.component_[s] >= 0) continue;
    const long c = g.components_++;
    g.component_[s] = c;
    stack.push_back(s);
    while (!stack.empty()) {
      const VertexId u = stack.back();
      stack.pop_back();
      for (std::size_t e = g.adjacency_.begin(u); e < g.adjacency_.end(u); ++e) {
        const VertexId v = g.adjacency_.targets[e];
        if (g.component_[v] < 0) {
          g.component_[v] = c;
          stack.push_back(v);
        }
      }
    }
  }
  return g;
}

/// Euclidean diameter of a finite point set (exact over the set; planar sets
/// are reduced to their convex hull first).
inline double point_set_diameter(std::span<const Point> pts) {
  if (pts.size() < 2) return 0.0;
  std::vector<Point> cand(pts.begin(), pts.end());
  const bool planar = std::all_of(pts.begin(), pts.end(), [](const Point& p) { return p[2] == 0.0; });
  if (planar && cand.size() > 8) {
    std::sort(cand.begin(), cand.end(), [](const Point& a, const Point& b) {
      return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
    });
    const auto cross = [](const Point& o, const Point& a, const Point& b) {
      return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    std::vector<Point> hull(2 * cand.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      while (k >= 2 && cross(hull[k - 2], hull[k - 1], cand[i]) <= 0) --k;
      hull[k++] = cand[i];
    }
    for (std::size_t i = cand.size() - 1, t = k + 1; i > 0; --i) {
      while (k >= t && cross(hull[k - 2], hull[k - 1], cand[i - 1]) <= 0) --k;
      hull[k++] = cand[i - 1];
    }
    hull.resize(k > 1 ? k - 1 : k);
    cand = std::move(hull);
  }
  double best = 0.0;
  for (std::size_t i = 0; i < cand.size(); ++i)
    for (std::size_t j = i + 1; j < cand.size(); ++j) best = std::max(best, distance(cand[i], cand[j]));
  return best;
}

/// Vertex sequence with cached lengths under each weighting.
struct Path {
  std::vector<VertexId> vertices;
  double euclidean_length = 0.0;
  double qh_length = 0.0;
  double deformed_length = std::numeric_limits<double>::quiet_NaN();
  double diameter = 0.0;

  bool empty() const { return vertices.empty(); }
};

/// Sum of per-entry weights along consecutive vertices; throws if two
/// consecutive vertices are not adjacent.
inline double path_weight(const Csr& g, std::span<const VertexId> vs, std::span<const double> weights) {
  double s = 0.0;
  for (std::size_t i = 1; i < vs.size(); ++i) {
    const std::size_t e = g.find(vs[i - 1], vs[i]);
    if (e == Csr::npos) throw Error(ErrorKind::invalid_argument, "path vertices not adjacent");
    s += weights[e];
  }
  return s;
}

inline Path make_path(const MetricGraph& g, std::vector<VertexId> vs, std::span<const double> deformed = {}) {
  Path p;
  p.euclidean_length = path_weight(g.adjacency(), vs, g.euclidean_lengths());
  p.qh_length = path_weight(g.adjacency(), vs, g.qh_weights());
  if (!deformed.empty()) p.deformed_length = path_weight(g.adjacency(), vs, deformed);
  std::vector<Point> pts;
  pts.reserve(vs.size());
  for (VertexId v : vs) pts.push_back(g.position(v));
  p.diameter = point_set_diameter(pts);
  p.vertices = std::move(vs);
  return p;
}

inline double path_diameter(const Path& p) { return p.diameter; }

inline void require_same_component(const MetricGraph& g, VertexId a, VertexId b) {
  if (g.component(a) != g.component(b)) throw DisconnectedError(g.component(a), g.component(b));
}

/// Weight-minimal path between two vertices under explicit entry weights.
inline Path shortest_path(const MetricGraph& g, VertexId x, VertexId y, std::span<const double> weights,
                          std::span<const double> deformed = {}) {
  require_same_component(g, x, y);
  if (x == y) return make_path(g, {x}, deformed);
  const auto sp = dijkstra(g.adjacency(), x, weights, {.target = y});
  return make_path(g, sp.path_to(y), deformed);
}

inline Path shortest_path(const MetricGraph& g, const Point& x, const Point& y, Weighting w) {
  return shortest_path(g, g.snap(x), g.snap(y), g.weights(w));
}

/// Inner (length) distance ℓ_G between the vertices nearest to x and y.
inline double inner_distance(const MetricGraph& g, const Point& x, const Point& y) {
  return shortest_path(g, x, y, Weighting::euclidean).euclidean_length;
}

/// Full single-source distances under a weighting.
inline std::vector<double> distances_from(const MetricGraph& g, VertexId source, std::span<const double> weights) {
  return dijkstra(g.adjacency(), source, weights).dist;
}

/// Vertex and edge tables: "id,x,y[,z],d" and "u,v,euclid_len,qh_weight".
inline void write_graph_csv(const MetricGraph& g, std::ostream& vertices, std::ostream& edges) {
  const int n = g.dim();
  vertices << (n == 2 ? "id,x,y,d\n" : "id,x,y,z,d\n");
  vertices.precision(17);
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    vertices << v;
    for (int a = 0; a < n; ++a) vertices << ',' << g.position(v)[a];
    vertices << ',' << g.depth(v) << '\n';
  }
  edges << "u,v,euclid_len,qh_weight\n";
  edges.precision(17);
  const Csr& adj = g.adjacency();
  for (VertexId u = 0; u < g.vertex_count(); ++u)
    for (std::size_t e = adj.begin(u); e < adj.end(u); ++e)
      if (adj.targets[e] > u)
        edges << u << ',' << adj.targets[e] << ',' << g.euclidean_lengths()[e] << ',' << g.qh_weights()[e] << '\n';
}

}  // namespace qhl
