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

#include "ocrforge/geometry.hpp"

#include <limits>

namespace ocrforge::geometry {

std::vector<Point2d> convex_hull(std::vector<Point2d> points) {
  auto less = [](const Point2d& a, const Point2d& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  };
  std::sort(points.begin(), points.end(), less);
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() < 3) return points;

  std::vector<Point2d> hull(2 * points.size());
  std::size_t k = 0;
  for (const auto& p : points) {
    while (k >= 2 && cross<double>(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = points.size() - 1, lower = k + 1; i-- > 0;) {
    const auto& p = points[i];
    while (k >= lower && cross<double>(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

Quad2d order_corners(Quad2d quad) {
  std::sort(quad.begin(), quad.end(), [](const Point2d& a, const Point2d& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  const auto& [tl, bl] = quad[0].y() <= quad[1].y()
                             ? std::pair{quad[0], quad[1]}
                             : std::pair{quad[1], quad[0]};
  const auto& [tr, br] = quad[2].y() <= quad[3].y()
                             ? std::pair{quad[2], quad[3]}
                             : std::pair{quad[3], quad[2]};
  return {tl, tr, br, bl};
}

Quad2d RotatedRect::corners() const {
  const Point2d u = axis * (width / 2);
  const Point2d v = Point2d(-axis.y(), axis.x()) * (height / 2);
  return order_corners({center - u - v, center + u - v, center + u + v,
                        center - u + v});
}

RotatedRect min_area_rect(std::span<const Point2d> points) {
  const auto hull = convex_hull({points.begin(), points.end()});
  RotatedRect best;
  if (hull.empty()) return best;
  if (hull.size() == 1) {
    best.center = hull[0];
    return best;
  }

  double best_area = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Point2d edge = hull[(i + 1) % hull.size()] - hull[i];
    const double len = edge.norm();
    if (len == 0.0) continue;
    const Point2d u = edge / len;
    const Point2d v(-u.y(), u.x());
    double umin = std::numeric_limits<double>::infinity(), umax = -umin;
    double vmin = umin, vmax = -umin;
    for (const auto& p : hull) {
      const double a = p.dot(u), b = p.dot(v);
      umin = std::min(umin, a);
      umax = std::max(umax, a);
      vmin = std::min(vmin, b);
      vmax = std::max(vmax, b);
    }
    const double area = (umax - umin) * (vmax - vmin);
    if (area < best_area) {
      best_area = area;
      best.axis = u;
      best.width = umax - umin;
      best.height = vmax - vmin;
      best.center = u * ((umin + umax) / 2) + v * ((vmin + vmax) / 2);
    }
  }
  return best;
}

std::vector<Point2d> offset_polygon(std::span<const Point2d> polygon,
                                    double distance) {
  const std::size_t n = polygon.size();
  std::vector<Point2d> out(n);
  if (n < 3) return {polygon.begin(), polygon.end()};

  // Offset line i passes through origin[i] with direction dir[i].
  std::vector<Point2d> origin(n), dir(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2d d = (polygon[(i + 1) % n] - polygon[i]).normalized();
    const Point2d outward(d.y(), -d.x());
    origin[i] = polygon[i] + outward * distance;
    dir[i] = d;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t prev = (i + n - 1) % n;
    const double denom = cross<double>(dir[prev], dir[i]);
    if (std::abs(denom) < 1e-12) {
      // Collinear neighbours: shift the vertex along the shared normal.
      out[i] = origin[i];
      continue;
    }
    const double t = cross<double>(origin[i] - origin[prev], dir[i]) / denom;
    out[i] = origin[prev] + dir[prev] * t;
  }
  return out;
}

Eigen::Matrix3d homography(const Quad2d& src, const Quad2d& dst) {
  Eigen::Matrix<double, 8, 8> a;
  Eigen::Matrix<double, 8, 1> b;
  for (int i = 0; i < 4; ++i) {
    const double x = src[i].x(), y = src[i].y();
    const double u = dst[i].x(), v = dst[i].y();
    a.row(2 * i) << x, y, 1, 0, 0, 0, -u * x, -u * y;
    a.row(2 * i + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
    b(2 * i) = u;
    b(2 * i + 1) = v;
  }
  const Eigen::Matrix<double, 8, 1> h = a.fullPivLu().solve(b);
  Eigen::Matrix3d m;
  m << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), 1.0;
  return m;
}

}  // namespace ocrforge::geometry
