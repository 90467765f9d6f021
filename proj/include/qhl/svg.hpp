#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"

namespace qhl {

struct SvgPolyline {
  std::vector<Point> points;
  std::string color = "#1f77b4";
  double width = 1.5;
  bool endpoint_markers = true;
  std::string label;
};

struct SvgMarker {
  Point at;
  std::string color = "#d62728";
  std::string label;
};

struct SvgOverlays {
  std::vector<SvgPolyline> polylines;
  std::vector<SvgMarker> markers;
  std::string title;
};

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

inline std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  return out;
}

}  // namespace detail

/// Boundary outline of the domain clipped to its window, overlay polylines
/// and markers. Output depends only on the inputs.
inline std::string emit_svg(const Domain& dom, const SvgOverlays& overlays = {}, int pixels = 600) {
  if (dom.dim() != 2) throw Error(ErrorKind::unsupported, "svg is 2-D only");
  const Box& w = dom.window();
  const double span = std::max(w.extent(0), w.extent(1));
  const double scale = pixels / span;
  const double width = w.extent(0) * scale, height = w.extent(1) * scale;
  const auto X = [&](const Point& p) { return detail::fmt((p[0] - w.lo[0]) * scale); };
  const auto Y = [&](const Point& p) { return detail::fmt((w.hi[1] - p[1]) * scale); };
  const auto polyline = [&](std::span<const Point> pts, const std::string& color, double sw, bool closed) {
    std::string s = closed ? "<polygon" : "<polyline";
    s += " fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" + detail::fmt(sw) + "\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) s += (i ? " " : "") + X(pts[i]) + "," + Y(pts[i]);
    return s + "\"/>\n";
  };

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::fmt(width) + "\" height=\"" +
                    detail::fmt(height) + "\" viewBox=\"0 0 " + detail::fmt(width) + " " + detail::fmt(height) +
                    "\">\n";
  if (!overlays.title.empty()) out += "<title>" + detail::escape_xml(overlays.title) + "</title>\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + detail::fmt(width) + "\" height=\"" + detail::fmt(height) +
         "\" fill=\"white\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n";
  out += "<g id=\"boundary\">\n";
  const std::string ink = "#000000";
  switch (dom.kind()) {
    case DomainKind::half_space:
      out += polyline(std::vector{Point(w.lo[0], 0.0), Point(w.hi[0], 0.0)}, ink, 2.0, false);
      break;
    case DomainKind::ball:
      out += "<circle cx=\"" + X(dom.center()) + "\" cy=\"" + Y(dom.center()) + "\" r=\"" +
             detail::fmt(dom.radius() * scale) + "\" fill=\"none\" stroke=\"" + ink + "\" stroke-width=\"2\"/>\n";
      break;
    case DomainKind::punctured_space:
      out += "<circle cx=\"" + X(dom.center()) + "\" cy=\"" + Y(dom.center()) + "\" r=\"3\" fill=\"" + ink + "\"/>\n";
      break;
    case DomainKind::slit_plane:
      out += polyline(std::vector{Point(w.lo[0], 0.0), Point(dom.tip(), 0.0)}, ink, 2.0, false);
      break;
    case DomainKind::polygon:
    case DomainKind::l_shape: out += polyline(dom.polygon(), ink, 2.0, true); break;
    case DomainKind::cusp: {
      std::vector<Point> upper, lower;
      for (int i = 0; i <= 200; ++i) {
        const double x = i / 200.0;
        upper.emplace_back(x, std::pow(x, dom.power()));
        lower.emplace_back(x, -std::pow(x, dom.power()));
      }
      std::reverse(lower.begin(), lower.end());
      upper.insert(upper.end(), lower.begin() + 1, lower.end());
      out += polyline(upper, ink, 2.0, true);
      break;
    }
  }
  out += "</g>\n<g id=\"overlays\">\n";
  for (const auto& pl : overlays.polylines) {
    if (pl.points.empty()) continue;
    if (!pl.label.empty()) out += "<!-- " + detail::escape_xml(pl.label) + " -->\n";
    out += polyline(pl.points, pl.color, pl.width, false);
    if (pl.endpoint_markers)
      for (const Point* p : {&pl.points.front(), &pl.points.back()})
        out += "<circle cx=\"" + X(*p) + "\" cy=\"" + Y(*p) + "\" r=\"3\" fill=\"" + pl.color + "\"/>\n";
  }
  for (const auto& m : overlays.markers) {
    out += "<circle cx=\"" + X(m.at) + "\" cy=\"" + Y(m.at) + "\" r=\"4\" fill=\"" + m.color + "\"/>\n";
    if (!m.label.empty())
      out += "<text x=\"" + X(m.at) + "\" y=\"" + Y(m.at) + "\" dx=\"6\" dy=\"-6\" font-size=\"12\">" +
             detail::escape_xml(m.label) + "</text>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace qhl
