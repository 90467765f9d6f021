#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "gromov.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace qhl {

/// Conformally deformed graph with density ρ_ε = e^{-ε b̂}. Holds a reference
/// to the underlying MetricGraph, which must outlive it.
class DeformedGraph {
public:
  const MetricGraph& base() const { return *g_; }
  double epsilon() const { return eps_; }
  double rho(VertexId v) const { return rho_[v]; }
  std::span<const double> rhos() const { return rho_; }
  double busemann(VertexId v) const { return b_[v]; }
  /// Deformed length of each directed entry: qh weight × ½(ρ(u) + ρ(v)).
  std::span<const double> weights() const { return weights_; }
  /// k_ε entry weight: deformed weight × ½(1/d_ε(u) + 1/d_ε(v)).
  std::span<const double> k_weights() const { return k_weights_; }
  /// Deformed boundary distance.
  double d_eps(VertexId v) const { return d_eps_[v]; }
  std::span<const double> d_eps_values() const { return d_eps_; }
  /// Tail term ρ_ε(w)/ε of the proxy w that realizes d_ε(v).
  double tail(VertexId v) const { return tail_[v]; }
  VertexId proxy(VertexId v) const { return proxy_[v]; }
  /// μ_ε mass of the cell at v: (ρ_ε(v)/d(v))^n h^n.
  double cell_mass(VertexId v) const { return mass_[v]; }
  std::span<const double> cell_masses() const { return mass_; }

  friend DeformedGraph deform(const MetricGraph& g, std::span<const double> b, double eps);

private:
  const MetricGraph* g_ = nullptr;
  double eps_ = 0.0;
  std::vector<double> b_, rho_, weights_, k_weights_, d_eps_, tail_, mass_;
  std::vector<VertexId> proxy_;
};

/// Builds the deformation from explicit per-vertex Busemann values.
inline DeformedGraph deform(const MetricGraph& g, std::span<const double> b, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw Error(ErrorKind::invalid_argument, "epsilon must be positive");
  const std::size_t n = g.vertex_count();
  if (b.size() != n) throw Error(ErrorKind::invalid_argument, "Busemann values do not match the graph");
  for (double x : b)
    if (!std::isfinite(x)) throw Error(ErrorKind::invalid_argument, "Busemann field undefined on part of the graph");

  DeformedGraph dg;
  dg.g_ = &g;
  dg.eps_ = eps;
  dg.b_.assign(b.begin(), b.end());
  dg.rho_.resize(n);
  dg.mass_.resize(n);
  const int dim = g.dim();
  for (VertexId v = 0; v < n; ++v) {
    dg.rho_[v] = std::exp(-eps * b[v]);
    dg.mass_[v] = std::pow(dg.rho_[v] / g.depth(v), dim) * g.cell_measure();
  }

  const Csr& adj = g.adjacency();
  const auto qh = g.qh_weights();
  dg.weights_.resize(adj.targets.size());
  for (VertexId u = 0; u < n; ++u)
    for (std::size_t e = adj.begin(u); e < adj.end(u); ++e)
      dg.weights_[e] = qh[e] * 0.5 * (dg.rho_[u] + dg.rho_[adj.targets[e]]);

  // d_ε: multi-source search from the near-boundary layer, each proxy w
  // seeded with the descent tail ∫_0^{d(w)} ρ(w)(s/d(w))^ε ds/s = ρ(w)/ε.
  const double layer = 3.0 * g.spacing();
  std::vector<std::pair<VertexId, double>> seeds;
  for (VertexId v = 0; v < n; ++v)
    if (g.depth(v) <= layer) seeds.emplace_back(v, dg.rho_[v] / eps);
  if (seeds.empty()) throw Error(ErrorKind::not_found, "no vertices near the boundary");
  const auto sp = dijkstra(adj, seeds, std::span<const double>(dg.weights_));
  dg.d_eps_ = sp.dist;
  dg.proxy_.resize(n);
  dg.tail_.resize(n);
  for (VertexId v = 0; v < n; ++v) {
    VertexId w = v;
    if (std::isfinite(sp.dist[v]))
      while (sp.parent[w] != no_vertex) w = sp.parent[w];
    else
      w = no_vertex;
    dg.proxy_[v] = w;
    dg.tail_[v] = w == no_vertex ? infinity : dg.rho_[w] / eps;
  }

  dg.k_weights_.resize(adj.targets.size());
  for (VertexId u = 0; u < n; ++u)
    for (std::size_t e = adj.begin(u); e < adj.end(u); ++e)
      dg.k_weights_[e] = dg.weights_[e] * 0.5 * (1.0 / dg.d_eps_[u] + 1.0 / dg.d_eps_[adj.targets[e]]);
  return dg;
}

inline DeformedGraph deform(const MetricGraph& g, const BusemannField& field, double eps) {
  return deform(g, std::span<const double>(field.b), eps);
}

/// Deformed distance d_ε between the vertices nearest x and y.
inline double d_eps_distance(const DeformedGraph& dg, VertexId x, VertexId y) {
  const MetricGraph& g = dg.base();
  require_same_component(g, x, y);
  if (x == y) return 0.0;
  return dijkstra(g.adjacency(), x, dg.weights(), {.target = y}).dist[y];
}

inline double d_eps_distance(const DeformedGraph& dg, const Point& x, const Point& y) {
  return d_eps_distance(dg, dg.base().snap(x), dg.base().snap(y));
}

/// Quasihyperbolic distance of the deformed space, k_ε.
inline double k_eps_distance(const DeformedGraph& dg, VertexId x, VertexId y) {
  const MetricGraph& g = dg.base();
  require_same_component(g, x, y);
  if (!std::isfinite(dg.d_eps(x)) || !std::isfinite(dg.d_eps(y)))
    throw Error(ErrorKind::invalid_argument, "deformed boundary distance undefined");
  if (x == y) return 0.0;
  return dijkstra(g.adjacency(), x, dg.k_weights(), {.target = y}).dist[y];
}

inline double k_eps_distance(const DeformedGraph& dg, const Point& x, const Point& y) {
  return k_eps_distance(dg, dg.base().snap(x), dg.base().snap(y));
}

/// μ_ε(E) for a set of cells.
inline double mu_eps(const DeformedGraph& dg, std::span<const VertexId> cells) {
  double m = 0.0;
  for (VertexId v : cells) m += dg.cell_mass(v);
  return m;
}

/// Bounded Dijkstra for edge-local checks. Scratch arrays are reused between
/// queries and only touched entries are reset.
class LocalSearch {
public:
  explicit LocalSearch(std::size_t n) : dist_(n, infinity) {}

  /// Distance from u to v, or `bound` when it exceeds bound.
  double distance(const Csr& g, std::span<const double> weights, VertexId u, VertexId v, double bound) {
    using Item = std::pair<double, VertexId>;
    heap_.clear();
    relax(u, 0.0);
    double result = bound;
    while (!heap_.empty()) {
      std::pop_heap(heap_.begin(), heap_.end(), std::greater<Item>());
      const auto [d, a] = heap_.back();
      heap_.pop_back();
      if (d > dist_[a]) continue;
      if (a == v) {
        result = d;
        break;
      }
      for (std::size_t e = g.begin(a); e < g.end(a); ++e) {
        const double nd = d + weights[e];
        if (nd <= bound) relax(g.targets[e], nd);
      }
    }
    for (VertexId t : touched_) dist_[t] = infinity;
    touched_.clear();
    return result;
  }

private:
  void relax(VertexId v, double d) {
    if (!(d < dist_[v])) return;
    if (dist_[v] == infinity) touched_.push_back(v);
    dist_[v] = d;
    heap_.emplace_back(d, v);
    std::push_heap(heap_.begin(), heap_.end(), std::greater<std::pair<double, VertexId>>());
  }

  std::vector<double> dist_;
  std::vector<VertexId> touched_;
  std::vector<std::pair<double, VertexId>> heap_;
};

struct HarnackCheck {
  std::size_t edges = 0;
  std::size_t edge_violations = 0;
  std::size_t pairs = 0;
  std::size_t pair_violations = 0;
  double delta = 0.0;
  double slack = 0.0;
  /// Largest observed ε|b̂(u) - b̂(v)| - ε k̂(u,v) - 10εδ̂ (nonpositive when all hold).
  double worst_excess = -infinity;
  std::array<VertexId, 2> witness{no_vertex, no_vertex};

  bool holds() const { return edge_violations == 0 && pair_violations == 0; }
};

/// e^{-10εδ} e^{-εk(u,v)} <= ρ_ε(u)/ρ_ε(v) <= e^{10εδ} e^{εk(u,v)}, in log
/// form with an additive slack, on every edge and on seeded vertex pairs.
inline HarnackCheck check_harnack(const DeformedGraph& dg, double delta, std::size_t pairs, std::uint64_t seed,
                                  double slack = 0.0) {
  const MetricGraph& g = dg.base();
  const Csr& adj = g.adjacency();
  const auto qh = g.qh_weights();
  const double eps = dg.epsilon();
  const std::size_t n = g.vertex_count();
  HarnackCheck out;
  out.delta = delta;
  out.slack = slack;
  const auto excess = [&](VertexId u, VertexId v, double k) {
    return eps * std::abs(dg.busemann(u) - dg.busemann(v)) - eps * k - 10.0 * eps * delta;
  };

  struct Part {
    std::size_t count = 0, bad = 0;
    double worst = -infinity;
    std::array<VertexId, 2> w{no_vertex, no_vertex};
  };
  const auto merge = [](Part& into, const Part& p) {
    into.count += p.count;
    into.bad += p.bad;
    if (p.worst > into.worst) {
      into.worst = p.worst;
      into.w = p.w;
    }
  };
  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(64, n));
  std::vector<Part> parts(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    Part& p = parts[c];
    LocalSearch search(n);
    for (VertexId u = static_cast<VertexId>(n * c / chunks); u < n * (c + 1) / chunks; ++u)
      for (std::size_t e = adj.begin(u); e < adj.end(u); ++e) {
        const VertexId v = adj.targets[e];
        if (v < u) continue;
        const double k = search.distance(adj, qh, u, v, qh[e]);
        const double x = excess(u, v, k);
        ++p.count;
        if (x > slack) ++p.bad;
        if (x > p.worst) {
          p.worst = x;
          p.w = {u, v};
        }
      }
  });
  Part edges;
  for (const auto& p : parts) merge(edges, p);

  // Pairs share sources in groups so one search serves several targets.
  constexpr std::size_t group = 20;
  const std::size_t groups = (pairs + group - 1) / group;
  std::vector<Part> pp(groups);
  parallel_for(groups, [&](std::size_t gi) {
    Rng rng(split_seed(seed, gi));
    const VertexId u = static_cast<VertexId>(rng.below(n));
    std::vector<VertexId> targets;
    for (std::size_t i = gi * group; i < std::min(pairs, (gi + 1) * group); ++i) {
      const VertexId v = static_cast<VertexId>(rng.below(n));
      if (g.component(v) == g.component(u)) targets.push_back(v);
    }
    if (targets.empty()) return;
    const auto dist = dijkstra(adj, u, qh, {.targets = targets}).dist;
    for (VertexId v : targets) {
      const double x = excess(u, v, dist[v]);
      merge(pp[gi], Part{1, x > slack ? 1u : 0u, x, {u, v}});
    }
  });
  Part pr;
  for (const auto& p : pp) merge(pr, p);

  out.edges = edges.count;
  out.edge_violations = edges.bad;
  out.pairs = pr.count;
  out.pair_violations = pr.bad;
  Part all = edges;
  merge(all, pr);
  out.worst_excess = all.worst;
  out.witness = all.w;
  return out;
}

}  // namespace qhl
