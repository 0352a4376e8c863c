#pragma once

// Brute-force polygon intersection: two convex polygons intersect iff a
// vertex of one lies in the other or two of their edges cross.

#include <Eigen/Core>

#include <array>

namespace oracle {

using Point = Eigen::Vector2d;

inline double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

inline bool on_segment(const Point& p, const Point& a, const Point& b) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) && std::min(a.y(), b.y()) <= p.y() &&
         p.y() <= std::max(a.y(), b.y());
}

inline bool segments_cross(const Point& a, const Point& b, const Point& c, const Point& d) {
  const double d1 = cross(c, d, a), d2 = cross(c, d, b), d3 = cross(a, b, c), d4 = cross(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  if (d1 == 0 && on_segment(a, c, d)) return true;
  if (d2 == 0 && on_segment(b, c, d)) return true;
  if (d3 == 0 && on_segment(c, a, b)) return true;
  if (d4 == 0 && on_segment(d, a, b)) return true;
  return false;
}

/// Point in a convex polygon given in either orientation, boundary included.
inline bool inside(const Point& p, const std::array<Point, 4>& poly) {
  bool pos = false, neg = false;
  for (std::size_t i = 0; i < 4; ++i) {
    const double c = cross(poly[i], poly[(i + 1) % 4], p);
    pos |= c > 0;
    neg |= c < 0;
  }
  return !(pos && neg);
}

inline bool polygons_intersect(const std::array<Point, 4>& a, const std::array<Point, 4>& b) {
  for (const auto& p : a) {
    if (inside(p, b)) return true;
  }
  for (const auto& p : b) {
    if (inside(p, a)) return true;
  }
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (segments_cross(a[i], a[(i + 1) % 4], b[j], b[(j + 1) % 4])) return true;
    }
  }
  return false;
}

/// Car body corners from first principles: centre, heading, length, width.
inline std::array<Point, 4> car_corners(double cx, double cy, double heading, double length, double width) {
  std::array<Point, 4> out;
  const double c = std::cos(heading), s = std::sin(heading);
  const double dx[4] = {-0.5, 0.5, 0.5, -0.5}, dy[4] = {-0.5, -0.5, 0.5, 0.5};
  for (int i = 0; i < 4; ++i) {
    const double lx = dx[i] * length, ly = dy[i] * width;
    out[static_cast<std::size_t>(i)] = Point(cx + c * lx - s * ly, cy + s * lx + c * ly);
  }
  return out;
}

inline std::array<Point, 4> box_corners(double x_lo, double x_hi, double y_lo, double y_hi) {
  return {Point(x_lo, y_lo), Point(x_hi, y_lo), Point(x_hi, y_hi), Point(x_lo, y_hi)};
}

}  // namespace oracle
