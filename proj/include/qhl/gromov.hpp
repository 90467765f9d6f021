#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <span>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "graph.hpp"
#include "parallel.hpp"
#include "qhyp.hpp"
#include "random.hpp"

namespace qhl {

/// Dense symmetric matrix of pairwise distances.
struct DistanceMatrix {
  std::size_t n = 0;
  std::vector<double> values;

  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t size) : n(size), values(size * size, 0.0) {}
  double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * n + j]; }
};

/// Pairwise distances among `vs` under entry weights; one search per source.
inline DistanceMatrix distance_matrix(const Csr& g, std::span<const VertexId> vs, std::span<const double> weights) {
  DistanceMatrix m(vs.size());
  std::vector<std::vector<double>> rows(vs.size());
  parallel_for(vs.size(), [&](std::size_t i) {
    const auto sp = dijkstra(g, vs[i], weights, {.targets = vs});
    rows[i].resize(vs.size());
    for (std::size_t j = 0; j < vs.size(); ++j) rows[i][j] = sp.dist[vs[j]];
  });
  // Symmetrize by the smaller value; both directions are equal up to rounding.
  for (std::size_t i = 0; i < vs.size(); ++i)
    for (std::size_t j = 0; j < vs.size(); ++j) m.at(i, j) = i == j ? 0.0 : std::min(rows[i][j], rows[j][i]);
  return m;
}

inline DistanceMatrix qh_distance_matrix(const MetricGraph& g, std::span<const VertexId> vs) {
  for (VertexId v : vs) require_same_component(g, vs.front(), v);
  return distance_matrix(g.adjacency(), vs, g.qh_weights());
}

/// (x|y)_o = (d(x,o) + d(y,o) - d(x,y)) / 2.
inline double gromov_product(double dxo, double dyo, double dxy) { return 0.5 * (dxo + dyo - dxy); }

inline double gromov_product(const DistanceMatrix& d, std::size_t x, std::size_t y, std::size_t o) {
  return gromov_product(d(x, o), d(y, o), d(x, y));
}

inline double gromov_product(const MetricGraph& g, const Point& x, const Point& y, const Point& o) {
  const std::array<VertexId, 3> vs{g.snap(x), g.snap(y), g.snap(o)};
  const auto d = qh_distance_matrix(g, vs);
  return gromov_product(d, 0, 1, 2);
}

struct DeltaEstimate {
  enum class Mode { exhaustive, seeded_random };

  double delta = 0.0;
  std::size_t quadruples = 0;
  Mode mode = Mode::seeded_random;
  double h = 0.0;
  std::uint64_t seed = 0;
  /// Arg-max quadruple (x, y, z, o) as indices into the sample.
  std::array<std::size_t, 4> witness{0, 0, 0, 0};
  std::vector<Point> sample;
};

/// Four-point defect min((x|z)_o, (z|y)_o) - (x|y)_o.
inline double four_point_defect(const DistanceMatrix& d, std::size_t x, std::size_t y, std::size_t z, std::size_t o) {
  return std::min(gromov_product(d, x, z, o), gromov_product(d, z, y, o)) - gromov_product(d, x, y, o);
}

/// δ̂ = max four-point defect over quadruples of the sample, clamped at 0.
/// All ordered quadruples are scanned when n^4 fits in the budget; otherwise
/// `quadruples` seeded draws split into fixed chunks (deterministic for any
/// thread count).
inline DeltaEstimate estimate_delta(const DistanceMatrix& d, std::size_t quadruples, std::uint64_t seed) {
  if (d.n < 4) throw Error(ErrorKind::invalid_argument, "sample_size must be >= 4");
  DeltaEstimate est;
  est.seed = seed;
  const std::size_t n = d.n;
  const double all = std::pow(static_cast<double>(n), 4);
  struct Best {
    double value = 0.0;
    std::array<std::size_t, 4> q{0, 0, 0, 0};
  };
  const auto take = [](Best& b, double v, std::array<std::size_t, 4> q) {
    if (v > b.value) {
      b.value = v;
      b.q = q;
    }
  };
  Best best;
  if (all <= static_cast<double>(quadruples)) {
    est.mode = DeltaEstimate::Mode::exhaustive;
    est.quadruples = static_cast<std::size_t>(all);
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        for (std::size_t z = 0; z < n; ++z)
          for (std::size_t o = 0; o < n; ++o) take(best, four_point_defect(d, x, y, z, o), {x, y, z, o});
  } else {
    est.mode = DeltaEstimate::Mode::seeded_random;
    est.quadruples = quadruples;
    constexpr std::size_t chunks = 16;
    std::vector<Best> partial(chunks);
    parallel_for(chunks, [&](std::size_t c) {
      Rng rng(split_seed(seed, c));
      const std::size_t lo = quadruples * c / chunks, hi = quadruples * (c + 1) / chunks;
      for (std::size_t k = lo; k < hi; ++k) {
        const std::array<std::size_t, 4> q{rng.below(n), rng.below(n), rng.below(n), rng.below(n)};
        take(partial[c], four_point_defect(d, q[0], q[1], q[2], q[3]), q);
      }
    });
    for (const auto& p : partial) take(best, p.value, p.q);
  }
  est.delta = best.value;
  est.witness = best.q;
  return est;
}

/// Samples `sample_size` interior points (depth >= 3h, clear of artificial
/// window faces), snaps them and estimates δ̂ from their k̂ matrix.
inline DeltaEstimate estimate_delta(const MetricGraph& g, std::size_t sample_size, std::uint64_t seed,
                                    std::size_t quadruples = 2000, InteriorSampling opts = {}) {
  if (sample_size < 4) throw Error(ErrorKind::invalid_argument, "sample_size must be >= 4");
  opts.min_depth = std::max(opts.min_depth, 3.0 * g.spacing());
  if (opts.face_margin == 0.0) opts.face_margin = 0.2;
  const auto pts = sample_interior(g.domain(), sample_size, seed, opts);
  std::vector<VertexId> vs;
  for (const auto& p : pts) vs.push_back(g.snap(p));
  auto est = estimate_delta(qh_distance_matrix(g, vs), quadruples, seed);
  est.h = g.spacing();
  est.sample = pts;
  return est;
}

/// Approximate Busemann function b̂(v) = k̂(v, z(R)) - k̂(o, z(R)) from a far
/// anchor point, with the second anchor z(2R) kept to measure stability.
struct BusemannField {
  VertexId base = no_vertex;
  Point base_point;
  BoundaryAnchor anchor;
  double radius = 0.0;
  VertexId anchor_near = no_vertex;  // snapped z(R)
  VertexId anchor_far = no_vertex;   // snapped z(2R)
  std::vector<double> b;             // b̂ from z(R)
  std::vector<double> b_far;         // b̂ from z(2R)
  std::vector<double> gap;           // |b̂_R - b̂_2R|
  /// Largest snap distance among o, z(R), z(2R) in units of h.
  double snap_cells = 0.0;

  double operator()(VertexId v) const { return b[v]; }
};

inline BusemannField busemann_field(const MetricGraph& g, const Point& o, const BoundaryAnchor& anchor, double R) {
  const Domain& dom = g.domain();
  const Point z1 = anchor_points(dom, anchor, R, o);
  const Point z2 = anchor_points(dom, anchor, 2.0 * R, o);
  for (const Point* z : {&z1, &z2})
    if (!dom.window().contains(*z, dom.dim())) throw Error(ErrorKind::invalid_argument, "anchor outside window");

  BusemannField f;
  f.base_point = o;
  f.anchor = anchor;
  f.radius = R;
  f.base = g.snap(o);
  f.anchor_near = g.snap(z1);
  f.anchor_far = g.snap(z2);
  const double h = g.spacing();
  for (const auto& [p, v] : {std::pair{o, f.base}, std::pair{z1, f.anchor_near}, std::pair{z2, f.anchor_far}}) {
    const double s = distance(p, g.position(v));
    if (s > h) throw Error(ErrorKind::invalid_argument, "anchor outside window");
    f.snap_cells = std::max(f.snap_cells, s / h);
  }
  require_same_component(g, f.base, f.anchor_near);
  require_same_component(g, f.base, f.anchor_far);

  std::vector<double> dn, df;
  const std::array<VertexId, 2> roots{f.anchor_near, f.anchor_far};
  std::vector<double>* outs[2] = {&dn, &df};
  parallel_for(2, [&](std::size_t i) { *outs[i] = distances_from(g, roots[i], g.qh_weights()); });

  const std::size_t n = g.vertex_count();
  f.b.resize(n);
  f.b_far.resize(n);
  f.gap.resize(n);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (VertexId v = 0; v < n; ++v) {
    if (!std::isfinite(dn[v])) {
      f.b[v] = f.b_far[v] = f.gap[v] = nan;
      continue;
    }
    f.b[v] = dn[v] - dn[f.base];
    f.b_far[v] = df[v] - df[f.base];
    f.gap[v] = std::abs(f.b[v] - f.b_far[v]);
  }
  f.b[f.base] = 0.0;
  f.b_far[f.base] = 0.0;
  f.gap[f.base] = 0.0;
  return f;
}

/// (x|y)_b = (b̂(x) + b̂(y) - k̂(x, y)) / 2.
inline double gromov_product_busemann(const BusemannField& field, double kxy, VertexId x, VertexId y) {
  return 0.5 * (field.b[x] + field.b[y] - kxy);
}

inline double gromov_product_busemann(const BusemannField& field, const MetricGraph& g, const Point& x,
                                      const Point& y) {
  const VertexId vx = g.snap(x), vy = g.snap(y);
  require_same_component(g, vx, vy);
  const double k = vx == vy ? 0.0 : shortest_path(g, vx, vy, g.qh_weights()).qh_length;
  return gromov_product_busemann(field, k, vx, vy);
}

/// δ̂ below this floor is treated as the floor when choosing ε.
inline constexpr double delta_floor = 0.1;

/// Largest ε with e^{22 ε δ} <= 2, i.e. ε = log 2 / (22 max(δ̂, floor)).
inline double choose_epsilon(double delta) {
  if (delta < 0.0) throw Error(ErrorKind::invalid_argument, "delta must be nonnegative");
  return std::numbers::ln2 / (22.0 * std::max(delta, delta_floor));
}

/// Hamenstädt data on sampled boundary points: ρ_{b,ε} = e^{-ε(η|ζ)_b}
/// evaluated at interior proxies, and the chain metric d_{b,ε} (the chain
/// infimum is an all-pairs shortest path problem on the complete graph).
struct BoundaryMetricTable {
  std::size_t n = 0;
  double epsilon = 0.0;
  std::vector<Point> points;
  std::vector<VertexId> proxies;
  std::vector<double> proxy_depth;
  std::vector<double> product;  // (η_i|η_j)_b
  std::vector<double> rho;
  std::vector<double> d;

  double rho_at(std::size_t i, std::size_t j) const { return rho[i * n + j]; }
  double d_at(std::size_t i, std::size_t j) const { return d[i * n + j]; }
  double product_at(std::size_t i, std::size_t j) const { return product[i * n + j]; }
};

/// Interior stand-in for a boundary point: the nearest vertex, required to
/// lie within 3h of the point and at depth <= 3h.
inline VertexId boundary_proxy(const MetricGraph& g, const Point& eta) {
  const VertexId v = g.snap(eta);
  const double tol = 3.0 * g.spacing();
  if (g.depth(v) > tol || distance(g.position(v), eta) > tol)
    throw Error(ErrorKind::not_found, "boundary proxy not found within tolerance");
  return v;
}

inline BoundaryMetricTable hamenstadt_table(const BusemannField& field, const MetricGraph& g,
                                            std::span<const Point> boundary_pts, double epsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorKind::invalid_argument, "epsilon must be positive");
  const std::size_t n = boundary_pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j)
      if (boundary_pts[i] == boundary_pts[j]) throw Error(ErrorKind::invalid_argument, "boundary points must be distinct");
    if (field.anchor.kind == BoundaryAnchor::Kind::boundary_point && boundary_pts[i] == field.anchor.target)
      throw Error(ErrorKind::invalid_argument, "boundary point coincides with the Busemann base point");
  }
  BoundaryMetricTable t;
  t.n = n;
  t.epsilon = epsilon;
  t.points.assign(boundary_pts.begin(), boundary_pts.end());
  std::vector<VertexId> unique;
  std::vector<std::size_t> slot(n);
  for (std::size_t i = 0; i < n; ++i) {
    const VertexId v = boundary_proxy(g, boundary_pts[i]);
    if (!std::isfinite(field.b[v])) throw Error(ErrorKind::disconnected, "proxy outside the Busemann field");
    t.proxies.push_back(v);
    t.proxy_depth.push_back(g.depth(v));
    auto it = std::find(unique.begin(), unique.end(), v);
    slot[i] = static_cast<std::size_t>(it - unique.begin());
    if (it == unique.end()) unique.push_back(v);
  }
  const DistanceMatrix k = n ? qh_distance_matrix(g, unique) : DistanceMatrix{};
  t.product.assign(n * n, 0.0);
  t.rho.assign(n * n, 0.0);
  t.d.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double kij = k(slot[i], slot[j]);
      t.product[i * n + j] = gromov_product_busemann(field, kij, t.proxies[i], t.proxies[j]);
      if (i != j) t.rho[i * n + j] = std::exp(-epsilon * t.product[i * n + j]);
    }
  t.d = t.rho;
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) t.d[i * n + j] = std::min(t.d[i * n + j], t.d[i * n + m] + t.d[m * n + j]);
  return t;
}

/// "i,j,x_i,y_i,x_j,y_j,product,rho,d" rows for i < j.
inline void write_table_csv(const BoundaryMetricTable& t, std::ostream& os) {
  os << "i,j,xi,yi,xj,yj,product,rho,d\n";
  os.precision(17);
  for (std::size_t i = 0; i < t.n; ++i)
    for (std::size_t j = i + 1; j < t.n; ++j)
      os << i << ',' << j << ',' << t.points[i][0] << ',' << t.points[i][1] << ',' << t.points[j][0] << ','
         << t.points[j][1] << ',' << t.product_at(i, j) << ',' << t.rho_at(i, j) << ',' << t.d_at(i, j) << '\n';
}

}  // namespace qhl
