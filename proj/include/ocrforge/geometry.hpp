// Copyright 2026 The ocrforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Planar geometry for text regions. Coordinates are continuous image
// coordinates: x to the right, y down, pixel (i, j) covers [i, i+1) x [j, j+1).

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace ocrforge::geometry {

template <typename Scalar>
using Point = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar>
using Quad = std::array<Point<Scalar>, 4>;

using Point2d = Point<double>;
using Quad2d = Quad<double>;

template <typename Scalar>
Scalar cross(const Point<Scalar>& a, const Point<Scalar>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

/// Shoelace area. Positive when the vertices run clockwise on screen
/// (y axis pointing down).
template <typename Scalar>
Scalar signed_area(std::span<const Point<Scalar>> polygon) {
  Scalar twice = 0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    twice += cross(polygon[i], polygon[(i + 1) % polygon.size()]);
  }
  return twice / 2;
}

template <typename Scalar>
Scalar signed_area(const Quad<Scalar>& quad) {
  return signed_area(std::span<const Point<Scalar>>(quad));
}

template <typename Scalar>
Scalar perimeter(std::span<const Point<Scalar>> polygon) {
  Scalar total = 0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    total += (polygon[(i + 1) % polygon.size()] - polygon[i]).norm();
  }
  return total;
}

/// Proper or touching intersection of closed segments pq and rs.
template <typename Scalar>
bool segments_intersect(const Point<Scalar>& p, const Point<Scalar>& q,
                        const Point<Scalar>& r, const Point<Scalar>& s) {
  auto orient = [](const Point<Scalar>& a, const Point<Scalar>& b,
                   const Point<Scalar>& c) {
    const Scalar v = cross<Scalar>(b - a, c - a);
    return (v > 0) - (v < 0);
  };
  auto on_segment = [](const Point<Scalar>& a, const Point<Scalar>& b,
                       const Point<Scalar>& c) {
    return std::min(a.x(), b.x()) <= c.x() && c.x() <= std::max(a.x(), b.x()) &&
           std::min(a.y(), b.y()) <= c.y() && c.y() <= std::max(a.y(), b.y());
  };
  const int o1 = orient(p, q, r);
  const int o2 = orient(p, q, s);
  const int o3 = orient(r, s, p);
  const int o4 = orient(r, s, q);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p, q, r)) return true;
  if (o2 == 0 && on_segment(p, q, s)) return true;
  if (o3 == 0 && on_segment(r, s, p)) return true;
  if (o4 == 0 && on_segment(r, s, q)) return true;
  return false;
}

/// A quad is simple when its two pairs of opposite edges do not meet and
/// it encloses non-zero area.
template <typename Scalar>
bool is_simple(const Quad<Scalar>& q) {
  if (segments_intersect(q[0], q[1], q[2], q[3])) return false;
  if (segments_intersect(q[1], q[2], q[3], q[0])) return false;
  return signed_area(q) != 0;
}

/// Reverses winding while keeping the first vertex in place.
template <typename Scalar>
Quad<Scalar> reversed(const Quad<Scalar>& q) {
  return {q[0], q[3], q[2], q[1]};
}

template <typename Scalar>
Eigen::AlignedBox<Scalar, 2> bounds(const Quad<Scalar>& q) {
  Eigen::AlignedBox<Scalar, 2> box;
  for (const auto& p : q) box.extend(p);
  return box;
}

/// Convex hull by monotone chain, clockwise on screen, no collinear points.
std::vector<Point2d> convex_hull(std::vector<Point2d> points);

struct RotatedRect {
  Point2d center = Point2d::Zero();
  /// Unit vector along the first side.
  Point2d axis = Point2d::UnitX();
  double width = 0.0;   // extent along `axis`
  double height = 0.0;  // extent along the perpendicular

  double area() const { return width * height; }
  double min_side() const { return std::min(width, height); }
  /// Corners, clockwise on screen, starting from the top-left one.
  Quad2d corners() const;
};

/// Minimum-area enclosing rectangle (rotating calipers over the hull).
RotatedRect min_area_rect(std::span<const Point2d> points);

/// Orders four corners clockwise starting at the top-left: among the two
/// left-most points the upper one, then the upper right, lower right and
/// lower left.
Quad2d order_corners(Quad2d quad);

/// Offsets every edge outward by `distance` and rejoins adjacent edges at
/// their intersection (a miter join). Expects a convex polygon, clockwise
/// on screen.
std::vector<Point2d> offset_polygon(std::span<const Point2d> polygon,
                                    double distance);

/// Homography mapping src[i] to dst[i] for i in 0..3, normalized so that
/// H(2,2) == 1.
Eigen::Matrix3d homography(const Quad2d& src, const Quad2d& dst);

inline Point2d apply(const Eigen::Matrix3d& h, const Point2d& p) {
  const Eigen::Vector3d v = h * p.homogeneous();
  return v.hnormalized();
}

}  // namespace ocrforge::geometry
