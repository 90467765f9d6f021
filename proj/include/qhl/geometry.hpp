#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <nlohmann/json.hpp>

#include "error.hpp"
#include "point.hpp"
#include "random.hpp"

namespace qhl {

enum class DomainKind { half_space, ball, punctured_space, slit_plane, polygon, l_shape, cusp };

inline const char* to_string(DomainKind k) {
  switch (k) {
    case DomainKind::half_space: return "half_space";
    case DomainKind::ball: return "ball";
    case DomainKind::punctured_space: return "punctured_space";
    case DomainKind::slit_plane: return "slit_plane";
    case DomainKind::polygon: return "polygon";
    case DomainKind::l_shape: return "l_shape";
    case DomainKind::cusp: return "cusp";
  }
  return "?";
}

/// Axis-aligned box; only the first `dim` coordinates are meaningful.
struct Box {
  Point lo;
  Point hi;

  bool contains(const Point& p, int dim) const {
    for (int a = 0; a < dim; ++a)
      if (p[a] < lo[a] || p[a] > hi[a]) return false;
    return true;
  }
  double extent(int axis) const { return hi[axis] - lo[axis]; }
};

/// Half-line used to probe a domain at shrinking scales near a distinguished
/// boundary point (cusp tip, slit tip, reentrant corner, ...).
struct ScaleProbe {
  Point focus;
  Point direction;
};

/// Designates a point of the Gromov boundary either as a Euclidean boundary
/// point or as the point at infinity in a given direction, together with the
/// radius schedule used to approach it.
struct BoundaryAnchor {
  enum class Kind { at_infinity, boundary_point };

  Kind kind = Kind::at_infinity;
  Point target;  // unit direction (at_infinity) or the boundary point itself
  std::vector<double> schedule;

  static BoundaryAnchor infinity(const Point& direction, std::vector<double> schedule = {}) {
    return {Kind::at_infinity, direction / direction.norm(), std::move(schedule)};
  }
  static BoundaryAnchor at(const Point& boundary_point, std::vector<double> schedule = {}) {
    return {Kind::boundary_point, boundary_point, std::move(schedule)};
  }
};

struct InteriorSampling {
  double min_depth = 0.0;
  double max_depth = std::numeric_limits<double>::infinity();
  /// Minimum distance to artificial window faces, as a fraction of the
  /// window extent along the face normal.
  double face_margin = 0.0;
  /// Fraction of proposals drawn near the boundary at log-uniform offsets.
  double boundary_bias = 0.5;
  std::optional<Box> region;
  std::size_t max_attempts = 2'000'000;
};

struct BoundarySampling {
  double face_margin = 0.0;
  std::optional<Box> region;
};

/// A Euclidean domain G given by an exact boundary-distance oracle and a
/// bounding window used for discretization. Immutable after construction.
class Domain {
public:
  DomainKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const Box& window() const { return window_; }
  bool bounded() const {
    return kind_ == DomainKind::ball || kind_ == DomainKind::polygon || kind_ == DomainKind::l_shape ||
           kind_ == DomainKind::cusp;
  }

  double radius() const { return radius_; }
  const Point& center() const { return center_; }
  double tip() const { return tip_; }
  double power() const { return power_; }
  const std::vector<Point>& polygon() const { return vertices_; }
  const nlohmann::json& description() const { return description_; }

  /// Signed boundary distance: d(p) > 0 inside G, <= 0 outside or on the boundary.
  double depth(const Point& p) const {
    switch (kind_) {
      case DomainKind::half_space: return p[dim_ - 1];
      case DomainKind::ball: return radius_ - distance(p, center_);
      case DomainKind::punctured_space: return distance(p, center_);
      case DomainKind::slit_plane:
        return p[0] <= tip_ ? std::abs(p[1]) : std::hypot(p[0] - tip_, p[1]);
      case DomainKind::polygon:
      case DomainKind::l_shape: return polygon_depth(p);
      case DomainKind::cusp: return cusp_depth(p);
    }
    return 0.0;
  }

  bool contains(const Point& p) const { return depth(p) > 0.0; }

  /// Cheap prefilter: false only when p is certainly outside. Used to skip
  /// the costlier depth evaluation of the cusp.
  bool may_contain(const Point& p) const {
    if (kind_ == DomainKind::cusp) return p[0] > 0.0 && p[0] < 1.0 && std::abs(p[1]) < std::pow(p[0], power_);
    return true;
  }

  /// d(p) = dist(p, boundary); throws for points not strictly inside.
  double dist_boundary(const Point& p) const {
    const double d = depth(p);
    if (!(d > 0.0)) throw Error(ErrorKind::not_interior, "not interior");
    return d;
  }

  /// True when face (axis, upper side) of the window cuts through G.
  bool artificial_face(int axis, bool upper) const { return artificial_[axis][upper ? 1 : 0]; }

  /// Distance to the nearest artificial window face relative to the window
  /// extent along that face's normal; +inf when all faces are real boundary.
  double face_clearance(const Point& p) const {
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < dim_; ++a) {
      const double ext = window_.extent(a);
      if (artificial_[a][0]) best = std::min(best, (p[a] - window_.lo[a]) / ext);
      if (artificial_[a][1]) best = std::min(best, (window_.hi[a] - p[a]) / ext);
    }
    return best;
  }

  /// Unit inward normal at a boundary point (used to approach it from inside).
  Point inward_normal(const Point& xi) const {
    switch (kind_) {
      case DomainKind::half_space: {
        Point n;
        n[dim_ - 1] = 1.0;
        return n;
      }
      case DomainKind::ball: return (center_ - xi) / distance(center_, xi);
      case DomainKind::punctured_space: return Point(1.0, 0.0, 0.0);
      case DomainKind::slit_plane: return Point(0.0, 1.0, 0.0);
      default: break;
    }
    // Numerical gradient of the signed distance, probed just inside.
    const double e = 1e-7 * (1.0 + xi.norm());
    Point g;
    for (int a = 0; a < dim_; ++a) {
      Point hi = xi, lo = xi;
      hi[a] += e;
      lo[a] -= e;
      g[a] = (depth(hi) - depth(lo)) / (2 * e);
    }
    const double n = g.norm();
    if (!(n > 0.0)) throw Error(ErrorKind::unsupported, "no inward normal at boundary point");
    return g / n;
  }

  ScaleProbe scale_probe() const {
    switch (kind_) {
      case DomainKind::half_space: {
        Point n;
        n[dim_ - 1] = 1.0;
        return {Point{}, n};
      }
      case DomainKind::ball: return {center_ + Point(radius_, 0, 0), Point(-1, 0, 0)};
      case DomainKind::punctured_space: return {center_, Point(1, 0, 0)};
      case DomainKind::slit_plane: return {Point(tip_, 0), Point(1, 0)};
      case DomainKind::l_shape: {
        const double a = vertices_[3][0];
        return {Point(a, a), Point(-1, -1) / std::sqrt(2.0)};
      }
      case DomainKind::cusp: return {Point(0, 0), Point(1, 0)};
      case DomainKind::polygon: {
        const Point v = vertices_[0];
        const Point a = vertices_[1] - v, b = vertices_.back() - v;
        Point dir = a / a.norm() + b / b.norm();
        if (dir.norm() < 1e-12) dir = Point(-a[1], a[0]);
        dir = dir / dir.norm();
        if (!contains(v + dir * 1e-6 * (a.norm() + b.norm()))) dir = dir * -1.0;
        return {v, dir};
      }
    }
    return {};
  }

  friend Domain make_domain(const nlohmann::json& spec);

private:
  double polygon_depth(const Point& p) const {
    double dmin = std::numeric_limits<double>::infinity();
    bool inside = false;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Point& a = vertices_[i];
      const Point& b = vertices_[j];
      dmin = std::min(dmin, segment_distance(p, a, b));
      if ((a[1] > p[1]) != (b[1] > p[1])) {
        const double xcross = (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0];
        if (p[0] < xcross) inside = !inside;
      }
    }
    return inside ? dmin : -dmin;
  }

  /// Distance from p to the curve {(u, sign*u^power) : u in [0, 1]}.
  double cusp_curve_distance(const Point& p, double sign) const {
    const auto f = [&](double u) {
      const double dx = u - p[0];
      const double dy = sign * std::pow(u, power_) - p[1];
      return dx * dx + dy * dy;
    };
    constexpr int samples = 64;
    int best = 0;
    double fbest = f(0.0);
    for (int i = 1; i <= samples; ++i) {
      const double v = f(static_cast<double>(i) / samples);
      if (v < fbest) {
        fbest = v;
        best = i;
      }
    }
    const double lo = std::max(0.0, (best - 1.0) / samples);
    const double hi = std::min(1.0, (best + 1.0) / samples);
    auto r = boost::math::tools::brent_find_minima(f, lo, hi, 40);
    // The tip often carries the minimum for deep points; keep the endpoints in play.
    return std::sqrt(std::min({r.second, fbest, f(0.0), f(1.0)}));
  }

  double cusp_depth(const Point& p) const {
    const double dseg = segment_distance(p, Point(1, -1), Point(1, 1));
    const double d = std::min({dseg, cusp_curve_distance(p, 1.0), cusp_curve_distance(p, -1.0)});
    const bool inside = p[0] > 0.0 && p[0] < 1.0 && std::abs(p[1]) < std::pow(p[0], power_);
    return inside ? d : -d;
  }

  void classify_faces() {
    constexpr int probes = 9;
    for (int a = 0; a < dim_; ++a) {
      for (int side = 0; side < 2; ++side) {
        bool cuts = false;
        const int free_axes = dim_ - 1;
        const int total = free_axes == 1 ? probes : probes * probes;
        for (int k = 0; k < total && !cuts; ++k) {
          Point q;
          int idx = k;
          for (int b = 0; b < dim_; ++b) {
            if (b == a) {
              q[b] = side ? window_.hi[b] : window_.lo[b];
              continue;
            }
            const int t = idx % probes;
            idx /= probes;
            q[b] = window_.lo[b] + window_.extent(b) * (t + 0.5) / probes;
          }
          cuts = depth(q) > 1e-12 * (1.0 + q.norm());
        }
        artificial_[a][side] = cuts;
      }
    }
  }

  DomainKind kind_ = DomainKind::half_space;
  int dim_ = 2;
  Box window_;
  Point center_;
  double radius_ = 1.0;
  double tip_ = 0.0;
  double power_ = 2.0;
  std::vector<Point> vertices_;
  bool artificial_[3][2] = {{false, false}, {false, false}, {false, false}};
  nlohmann::json description_;
};

namespace detail {

inline Point point_from_json(const nlohmann::json& j, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    throw Error(ErrorKind::invalid_argument, "expected a coordinate array of length " + std::to_string(dim));
  Point p;
  for (int a = 0; a < dim; ++a) p[a] = j.at(a).get<double>();
  if (!p.finite()) throw Error(ErrorKind::invalid_argument, "non-finite coordinate");
  return p;
}

inline DomainKind kind_from_string(const std::string& s) {
  if (s == "half_space" || s == "half_plane") return DomainKind::half_space;
  if (s == "ball" || s == "disk") return DomainKind::ball;
  if (s == "punctured_space" || s == "punctured_plane") return DomainKind::punctured_space;
  if (s == "slit_plane") return DomainKind::slit_plane;
  if (s == "polygon") return DomainKind::polygon;
  if (s == "l_shape") return DomainKind::l_shape;
  if (s == "cusp") return DomainKind::cusp;
  throw Error(ErrorKind::invalid_argument, "unknown domain kind '" + s + "'");
}

}  // namespace detail

/// Builds a Domain from {"kind", "params", "window", "dim"}.
inline Domain make_domain(const nlohmann::json& spec) {
  using detail::point_from_json;
  if (!spec.is_object() || !spec.contains("kind"))
    throw Error(ErrorKind::invalid_argument, "domain spec needs a 'kind'");
  Domain d;
  d.kind_ = detail::kind_from_string(spec.at("kind").get<std::string>());
  d.dim_ = spec.value("dim", 2);
  if (d.dim_ != 2 && d.dim_ != 3) throw Error(ErrorKind::invalid_argument, "dim must be 2 or 3");
  const nlohmann::json params = spec.value("params", nlohmann::json::object());
  const bool planar_only = d.kind_ == DomainKind::slit_plane || d.kind_ == DomainKind::polygon ||
                           d.kind_ == DomainKind::l_shape || d.kind_ == DomainKind::cusp;
  if (planar_only && d.dim_ != 2)
    throw Error(ErrorKind::invalid_argument, std::string(to_string(d.kind_)) + " is planar only");

  Box win;
  const auto cube = [&](const Point& c, double r) {
    Box b;
    for (int a = 0; a < d.dim_; ++a) {
      b.lo[a] = c[a] - r;
      b.hi[a] = c[a] + r;
    }
    return b;
  };
  switch (d.kind_) {
    case DomainKind::half_space:
      win = cube(Point{}, 4.0);
      win.lo[d.dim_ - 1] = 0.0;
      break;
    case DomainKind::ball:
      d.radius_ = params.value("radius", params.value("r", 1.0));
      if (!(d.radius_ > 0.0) || !std::isfinite(d.radius_))
        throw Error(ErrorKind::invalid_argument, "ball radius must be positive");
      if (params.contains("center")) d.center_ = point_from_json(params["center"], d.dim_);
      win = cube(d.center_, d.radius_);
      break;
    case DomainKind::punctured_space:
      if (params.contains("center")) d.center_ = point_from_json(params["center"], d.dim_);
      win = cube(d.center_, 4.0);
      break;
    case DomainKind::slit_plane:
      d.tip_ = params.value("tip", 0.0);
      if (!std::isfinite(d.tip_)) throw Error(ErrorKind::invalid_argument, "slit tip must be finite");
      win = cube(Point(d.tip_, 0), 4.0);
      break;
    case DomainKind::l_shape: {
      const double a = params.value("size", 1.0);
      if (!(a > 0.0)) throw Error(ErrorKind::invalid_argument, "l_shape size must be positive");
      d.vertices_ = {Point(0, 0), Point(2 * a, 0), Point(2 * a, a), Point(a, a), Point(a, 2 * a), Point(0, 2 * a)};
      win.lo = Point(0, 0);
      win.hi = Point(2 * a, 2 * a);
      break;
    }
    case DomainKind::polygon: {
      if (!params.contains("vertices") || params["vertices"].size() < 3)
        throw Error(ErrorKind::invalid_argument, "polygon needs at least 3 vertices");
      for (const auto& v : params["vertices"]) d.vertices_.push_back(point_from_json(v, 2));
      double area = 0.0;
      win.lo = win.hi = d.vertices_[0];
      for (std::size_t i = 0; i < d.vertices_.size(); ++i) {
        const Point& p = d.vertices_[i];
        const Point& q = d.vertices_[(i + 1) % d.vertices_.size()];
        area += p[0] * q[1] - q[0] * p[1];
        for (int a = 0; a < 2; ++a) {
          win.lo[a] = std::min(win.lo[a], p[a]);
          win.hi[a] = std::max(win.hi[a], p[a]);
        }
      }
      if (std::abs(area) < 1e-14) throw Error(ErrorKind::invalid_argument, "degenerate polygon");
      break;
    }
    case DomainKind::cusp:
      d.power_ = params.value("power", 2.0);
      if (!(d.power_ >= 1.0) || !std::isfinite(d.power_))
        throw Error(ErrorKind::invalid_argument, "cusp power must be >= 1");
      win.lo = Point(0, -1);
      win.hi = Point(1, 1);
      break;
  }
  if (spec.contains("window")) {
    const auto& w = spec["window"];
    if (!w.is_array() || w.size() != 2) throw Error(ErrorKind::invalid_argument, "window must be [[lo...],[hi...]]");
    win.lo = point_from_json(w[0], d.dim_);
    win.hi = point_from_json(w[1], d.dim_);
  }
  for (int a = 0; a < d.dim_; ++a)
    if (!(win.hi[a] > win.lo[a])) throw Error(ErrorKind::invalid_argument, "empty window");
  d.window_ = win;

  // window must meet G: probe a lattice of the window
  bool meets = false;
  constexpr int probes = 33;
  const int total = d.dim_ == 2 ? probes * probes : probes * probes * probes;
  for (int k = 0; k < total && !meets; ++k) {
    Point q;
    int idx = k;
    for (int a = 0; a < d.dim_; ++a) {
      q[a] = win.lo[a] + win.extent(a) * ((idx % probes) + 0.5) / probes;
      idx /= probes;
    }
    meets = d.contains(q);
  }
  if (!meets) throw Error(ErrorKind::invalid_argument, "window does not meet the domain");
  d.classify_faces();

  d.description_ = spec;
  nlohmann::json wj = nlohmann::json::array();
  for (const Point* p : {&win.lo, &win.hi}) {
    nlohmann::json c = nlohmann::json::array();
    for (int a = 0; a < d.dim_; ++a) c.push_back((*p)[a]);
    wj.push_back(c);
  }
  d.description_["window"] = wj;
  d.description_["dim"] = d.dim_;
  d.description_["kind"] = to_string(d.kind_);
  return d;
}

namespace detail {

struct BoundaryPiece {
  Point a;
  Point b;
  int curve = 0;  // 0 segment, +1 / -1 cusp curve u -> (u, +-u^p) with u in [a.x, b.x]
  double length = 0.0;
};

inline std::vector<BoundaryPiece> boundary_pieces(const Domain& dom) {
  std::vector<BoundaryPiece> out;
  if (dom.kind() == DomainKind::polygon || dom.kind() == DomainKind::l_shape) {
    const auto& v = dom.polygon();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Point& a = v[i];
      const Point& b = v[(i + 1) % v.size()];
      out.push_back({a, b, 0, distance(a, b)});
    }
  } else if (dom.kind() == DomainKind::cusp) {
    for (int sign : {1, -1}) {
      // arc length by composite Simpson on sqrt(1 + (p u^{p-1})^2)
      const double p = dom.power();
      constexpr int n = 2000;
      const auto g = [&](double u) { return std::sqrt(1.0 + std::pow(p * std::pow(u, p - 1), 2)); };
      double s = g(0) + g(1);
      for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * g(static_cast<double>(i) / n);
      out.push_back({Point(0, 0), Point(1, sign), sign, s / (3.0 * n)});
    }
    out.push_back({Point(1, -1), Point(1, 1), 0, 2.0});
  }
  return out;
}

inline Point piece_point(const BoundaryPiece& piece, double t, double power) {
  if (piece.curve == 0) return piece.a + (piece.b - piece.a) * t;
  return Point(t, piece.curve * std::pow(t, power));
}

/// One boundary draw for the kinds without a piece decomposition.
inline Point analytic_boundary_point(const Domain& dom, Rng& rng) {
  const Box& w = dom.window();
  switch (dom.kind()) {
    case DomainKind::half_space: {
      Point p;
      for (int a = 0; a + 1 < dom.dim(); ++a) p[a] = rng.uniform(w.lo[a], w.hi[a]);
      return p;
    }
    case DomainKind::ball: {
      Point n;
      if (dom.dim() == 2) {
        const double t = rng.uniform(0.0, 2 * std::numbers::pi);
        n = Point(std::cos(t), std::sin(t));
      } else {
        do {
          n = Point(rng.normal(), rng.normal(), rng.normal());
        } while (n.norm() < 1e-12);
        n = n / n.norm();
      }
      return dom.center() + n * dom.radius();
    }
    case DomainKind::punctured_space: return dom.center();
    case DomainKind::slit_plane: {
      const double hi = std::min(dom.tip(), w.hi[0]);
      const double lo = std::min(w.lo[0], hi);
      return Point(rng.uniform(lo, hi), 0.0);
    }
    default: break;
  }
  throw Error(ErrorKind::unsupported, "no analytic boundary parametrization");
}

inline Point random_boundary_point(const Domain& dom, Rng& rng, const std::vector<BoundaryPiece>& pieces) {
  if (pieces.empty()) return analytic_boundary_point(dom, rng);
  double total = 0.0;
  for (const auto& p : pieces) total += p.length;
  double s = rng.uniform(0.0, total);
  for (const auto& p : pieces) {
    if (s <= p.length) return piece_point(p, rng.uniform(), dom.power());
    s -= p.length;
  }
  return piece_point(pieces.back(), rng.uniform(), dom.power());
}

}  // namespace detail

/// Deterministic rejection sampling of interior points of G inside the window.
/// Half of the proposals (by default) are drawn at log-uniform offsets from
/// random boundary points so that thin regions such as cusp tips are reached.
inline std::vector<Point> sample_interior(const Domain& dom, std::size_t count, std::uint64_t seed,
                                          const InteriorSampling& opts = {}) {
  if (count == 0) throw Error(ErrorKind::invalid_argument, "count must be >= 1");
  Rng rng(seed);
  const auto pieces = detail::boundary_pieces(dom);
  const Box& w = dom.window();
  double scale = 0.0;
  for (int a = 0; a < dom.dim(); ++a) scale = std::max(scale, w.extent(a));

  std::vector<Point> out;
  out.reserve(count);
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (++attempts > opts.max_attempts)
      throw Error(ErrorKind::not_found, "sample_interior: no admissible points after bounded attempts");
    Point p;
    if (rng.uniform() < opts.boundary_bias) {
      const Point b = detail::random_boundary_point(dom, rng, pieces);
      Point u;
      do {
        for (int a = 0; a < dom.dim(); ++a) u[a] = rng.normal();
      } while (u.norm() < 1e-12);
      const double r = scale * std::pow(10.0, rng.uniform(-5.0, 0.0));
      p = b + u * (r / u.norm());
    } else {
      for (int a = 0; a < dom.dim(); ++a) p[a] = rng.uniform(w.lo[a], w.hi[a]);
    }
    if (!w.contains(p, dom.dim())) continue;
    if (opts.region && !opts.region->contains(p, dom.dim())) continue;
    const double d = dom.depth(p);
    if (!(d > 0.0) || d < opts.min_depth || d > opts.max_depth) continue;
    if (opts.face_margin > 0.0 && dom.face_clearance(p) < opts.face_margin) continue;
    out.push_back(p);
  }
  return out;
}

/// Seeded boundary points. Piecewise boundaries (polygons, cusp) receive
/// per-piece counts proportional to piece length (largest remainder rule).
inline std::vector<Point> sample_boundary(const Domain& dom, std::size_t count, std::uint64_t seed,
                                          const BoundarySampling& opts = {}) {
  if (count == 0) throw Error(ErrorKind::invalid_argument, "count must be >= 1");
  Rng rng(seed);
  const auto pieces = detail::boundary_pieces(dom);
  const auto admissible = [&](const Point& p) {
    if (opts.region && !opts.region->contains(p, dom.dim())) return false;
    if (opts.face_margin > 0.0 && dom.face_clearance(p) < opts.face_margin) return false;
    return true;
  };
  constexpr std::size_t max_attempts = 1'000'000;
  std::vector<Point> out;
  out.reserve(count);
  if (pieces.empty()) {
    std::size_t attempts = 0;
    while (out.size() < count) {
      if (++attempts > max_attempts) throw Error(ErrorKind::not_found, "sample_boundary: region misses boundary");
      const Point p = detail::analytic_boundary_point(dom, rng);
      if (admissible(p)) out.push_back(p);
    }
    return out;
  }
  double total = 0.0;
  for (const auto& p : pieces) total += p.length;
  std::vector<std::size_t> alloc(pieces.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const double exact = static_cast<double>(count) * pieces[i].length / total;
    alloc[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += alloc[i];
    remainders.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < count; ++k, ++assigned) ++alloc[remainders[k % remainders.size()].second];
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    std::size_t attempts = 0;
    for (std::size_t k = 0; k < alloc[i];) {
      if (++attempts > max_attempts) throw Error(ErrorKind::not_found, "sample_boundary: region misses boundary");
      const Point p = detail::piece_point(pieces[i], rng.uniform(), dom.power());
      if (!admissible(p)) continue;
      out.push_back(p);
      ++k;
    }
  }
  return out;
}

/// Approximating point z(R) for a boundary anchor. For the point at infinity
/// z(R) = P(o) + R * dir, with P(o) the projection of the base point o onto
/// the hyperplane orthogonal to dir; for a boundary point xi,
/// z(R) = xi + n(xi) / R along the inward normal.
inline Point anchor_points(const Domain& dom, const BoundaryAnchor& anchor, double R, const Point& base) {
  if (!(R > 0.0) || !std::isfinite(R)) throw Error(ErrorKind::invalid_argument, "anchor radius must be positive");
  Point z;
  if (anchor.kind == BoundaryAnchor::Kind::at_infinity) {
    if (dom.bounded()) throw Error(ErrorKind::invalid_argument, "infinity anchor on a bounded domain");
    const Point& dir = anchor.target;
    z = base - dir * base.dot(dir) + dir * R;
  } else {
    z = anchor.target + dom.inward_normal(anchor.target) * (1.0 / R);
  }
  if (!dom.contains(z)) throw Error(ErrorKind::not_interior, "anchor point falls outside the domain");
  return z;
}

}  // namespace qhl
