#pragma once

#include <cmath>
#include <numbers>

#include "error.hpp"
#include "graph.hpp"

namespace qhl {

/// Discrete quasihyperbolic geodesic [x, y]_k between the vertices nearest x and y.
struct QhGeodesic {
  Path path;
  Point from;
  Point to;
  double k = 0.0;
  double h = 0.0;
  /// Distances from the requested endpoints to the vertices they snapped to.
  double snap_from = 0.0;
  double snap_to = 0.0;
};

namespace detail {

/// Queries closer than 3h to the boundary are refused: the trapezoid weights
/// there are too coarse to be trusted.
inline void require_resolved(const MetricGraph& g, const Point& p) {
  const double d = g.domain().depth(p);
  if (!(d > 0.0)) throw Error(ErrorKind::not_interior, "not interior");
  if (d < 3.0 * g.spacing())
    throw Error(ErrorKind::near_boundary, "query point within 3h of the boundary; resample");
}

}  // namespace detail

inline QhGeodesic qh_geodesic(const MetricGraph& g, const Point& x, const Point& y) {
  detail::require_resolved(g, x);
  detail::require_resolved(g, y);
  const VertexId vx = g.snap(x), vy = g.snap(y);
  QhGeodesic out;
  out.path = shortest_path(g, vx, vy, g.qh_weights());
  out.from = x;
  out.to = y;
  out.k = out.path.qh_length;
  out.h = g.spacing();
  out.snap_from = distance(x, g.position(vx));
  out.snap_to = distance(y, g.position(vy));
  return out;
}

/// k̂(x, y): shortest quasihyperbolic path length on the graph.
inline double qh_distance(const MetricGraph& g, const Point& x, const Point& y) {
  return qh_geodesic(g, x, y).k;
}

enum class ClosedForm { half_space, punctured_plane };

/// Exact quasihyperbolic distance where one is known: the half-space metric is
/// the hyperbolic one, arccosh(1 + |x-y|^2 / (2 x_n y_n)); in the punctured
/// plane k = sqrt(theta^2 + log^2(|x|/|y|)) with theta in [0, pi] the angle
/// between x and y.
inline double closed_form_qh(ClosedForm kind, const Point& x, const Point& y, int dim = 2) {
  switch (kind) {
    case ClosedForm::half_space: {
      const double xn = x[dim - 1], yn = y[dim - 1];
      if (!(xn > 0.0) || !(yn > 0.0)) throw Error(ErrorKind::not_interior, "not interior");
      const double d2 = (x - y).dot(x - y);
      // arccosh(1 + t) written to stay accurate for small t
      const double t = d2 / (2.0 * xn * yn);
      return std::log1p(t + std::sqrt(t * (t + 2.0)));
    }
    case ClosedForm::punctured_plane: {
      const double rx = x.norm(), ry = y.norm();
      if (!(rx > 0.0) || !(ry > 0.0)) throw Error(ErrorKind::not_interior, "not interior");
      const double cross = x[0] * y[1] - x[1] * y[0];
      const double theta = std::atan2(std::abs(cross), x.dot(y));
      const double l = std::log(rx / ry);
      return std::sqrt(theta * theta + l * l);
    }
  }
  throw Error(ErrorKind::unsupported, "no closed form for this kind");
}

/// Closed form for a domain when its kind has one.
inline double closed_form_qh(const Domain& dom, const Point& x, const Point& y) {
  if (dom.kind() == DomainKind::half_space) return closed_form_qh(ClosedForm::half_space, x, y, dom.dim());
  if (dom.kind() == DomainKind::punctured_space && dom.dim() == 2)
    return closed_form_qh(ClosedForm::punctured_plane, x - dom.center(), y - dom.center());
  throw Error(ErrorKind::unsupported, std::string("no closed form for ") + to_string(dom.kind()));
}

}  // namespace qhl
