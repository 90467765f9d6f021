#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>

namespace qhl {

/// A point of R^2 or R^3. Planar points keep the third coordinate at zero so
/// that Euclidean formulas need no dimension switch.
struct Point {
  std::array<double, 3> c{0.0, 0.0, 0.0};

  constexpr Point() = default;
  constexpr Point(double x, double y, double z = 0.0) : c{x, y, z} {}

  constexpr double& operator[](std::size_t i) { return c[i]; }
  constexpr double operator[](std::size_t i) const { return c[i]; }

  constexpr Point operator+(const Point& o) const { return {c[0] + o.c[0], c[1] + o.c[1], c[2] + o.c[2]}; }
  constexpr Point operator-(const Point& o) const { return {c[0] - o.c[0], c[1] - o.c[1], c[2] - o.c[2]}; }
  constexpr Point operator*(double s) const { return {c[0] * s, c[1] * s, c[2] * s}; }
  constexpr Point operator/(double s) const { return {c[0] / s, c[1] / s, c[2] / s}; }
  constexpr bool operator==(const Point&) const = default;

  constexpr double dot(const Point& o) const { return c[0] * o.c[0] + c[1] * o.c[1] + c[2] * o.c[2]; }
  double norm() const { return std::sqrt(dot(*this)); }
  bool finite() const { return std::isfinite(c[0]) && std::isfinite(c[1]) && std::isfinite(c[2]); }
};

inline constexpr Point operator*(double s, const Point& p) { return p * s; }

inline double distance(const Point& a, const Point& b) { return (a - b).norm(); }

/// Distance from p to the closed segment [a, b].
inline double segment_distance(const Point& p, const Point& a, const Point& b) {
  const Point ab = b - a;
  const double len2 = ab.dot(ab);
  if (len2 == 0.0) return distance(p, a);
  double t = (p - a).dot(ab) / len2;
  t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  return distance(p, a + ab * t);
}

inline std::ostream& operator<<(std::ostream& os, const Point& p) {
  return os << '(' << p.c[0] << ", " << p.c[1] << ", " << p.c[2] << ')';
}

}  // namespace qhl
