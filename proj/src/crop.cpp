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

#include <cmath>
#include <numeric>

#include "ocrforge/geometry.hpp"
#include "ocrforge/pipeline.hpp"

namespace ocrforge::pipeline {

using geometry::Point2d;
using geometry::Quad2d;

CropMode parse_crop_mode(std::string_view name) {
  if (name == "rectify") return CropMode::kRectify;
  if (name == "bbox") return CropMode::kBoundingBox;
  throw ValidationError("unknown crop mode '" + std::string(name) +
                        "' (expected rectify or bbox)");
}

namespace {

// Bilinear sample at continuous coordinate (x, y); pixel centres sit at
// half-integers, edges replicate.
double sample(const Plane& plane, double x, double y) {
  const double fx = x - 0.5, fy = y - 0.5;
  const double x0 = std::floor(fx), y0 = std::floor(fy);
  const double ax = fx - x0, ay = fy - y0;
  const int last_x = static_cast<int>(plane.cols()) - 1;
  const int last_y = static_cast<int>(plane.rows()) - 1;
  auto at = [&](double px, double py) {
    const int cx = std::clamp(static_cast<int>(px), 0, last_x);
    const int cy = std::clamp(static_cast<int>(py), 0, last_y);
    return static_cast<double>(plane(cy, cx));
  };
  const double top = (1 - ax) * at(x0, y0) + ax * at(x0 + 1, y0);
  const double bottom = (1 - ax) * at(x0, y0 + 1) + ax * at(x0 + 1, y0 + 1);
  return (1 - ay) * top + ay * bottom;
}

}  // namespace

Image crop_region(const Image& image, const TextBox& box, CropMode mode) {
  const Quad2d& q = box.quad;
  if (std::abs(geometry::signed_area(q)) < 1.0) throw DegenerateBox();
  if (image.empty()) throw ValidationError("cannot crop an empty image");

  if (mode == CropMode::kBoundingBox) {
    const auto b = geometry::bounds(q);
    const int x0 = std::clamp(static_cast<int>(std::floor(b.min().x())), 0, image.width());
    const int y0 = std::clamp(static_cast<int>(std::floor(b.min().y())), 0, image.height());
    const int x1 = std::clamp(static_cast<int>(std::ceil(b.max().x())), 0, image.width());
    const int y1 = std::clamp(static_cast<int>(std::ceil(b.max().y())), 0, image.height());
    if (x1 <= x0 || y1 <= y0) throw DegenerateBox();
    Image out;
    for (const auto& plane : image.planes) {
      out.planes.emplace_back(plane.block(y0, x0, y1 - y0, x1 - x0));
    }
    return out;
  }

  const double top = (q[1] - q[0]).norm(), bottom = (q[2] - q[3]).norm();
  const double left = (q[3] - q[0]).norm(), right = (q[2] - q[1]).norm();
  const int w = std::max(1, static_cast<int>(std::lround(std::max(top, bottom))));
  const int h = std::max(1, static_cast<int>(std::lround(std::max(left, right))));

  const Quad2d target{Point2d(0, 0), Point2d(w, 0), Point2d(w, h), Point2d(0, h)};
  const Eigen::Matrix3d to_source = geometry::homography(target, q);

  Image out(w, h, image.channels());
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const Point2d src = geometry::apply(to_source, Point2d(u + 0.5, v + 0.5));
      for (int c = 0; c < image.channels(); ++c) {
        const double value = sample(image.planes[c], src.x(), src.y());
        out.planes[c](v, u) =
            static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
      }
    }
  }
  return out;
}

std::vector<std::size_t> order_regions(std::span<const TextBox> boxes,
                                       double line_threshold) {
  const std::size_t n = boxes.size();
  struct Extent {
    double center_y, height, left;
  };
  std::vector<Extent> ext(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto b = geometry::bounds(boxes[i].quad);
    ext[i] = {(b.min().y() + b.max().y()) / 2, b.max().y() - b.min().y(), b.min().x()};
  }

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double mean_height = (ext[i].height + ext[j].height) / 2;
      if (std::abs(ext[i].center_y - ext[j].center_y) < line_threshold * mean_height) {
        const std::size_t a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }

  // Line key: mean centre y of its members.
  std::vector<double> line_sum(n, 0.0);
  std::vector<std::size_t> line_size(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    line_sum[find(i)] += ext[i].center_y;
    ++line_size[find(i)];
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const std::size_t la = find(a), lb = find(b);
    if (la != lb) {
      const double ya = line_sum[la] / static_cast<double>(line_size[la]);
      const double yb = line_sum[lb] / static_cast<double>(line_size[lb]);
      if (ya != yb) return ya < yb;
      return la < lb;
    }
    return ext[a].left < ext[b].left;
  });
  return order;
}

}  // namespace ocrforge::pipeline
