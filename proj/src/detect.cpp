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

#include "ocrforge/detect.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <vector>

#include "ocrforge/image.hpp"

namespace ocrforge::detect {

using geometry::Point2d;
using geometry::Quad2d;

MalformedQuad::MalformedQuad(std::size_t index, const std::string& why)
    : ValidationError("malformed quad at index " + std::to_string(index) +
                      (why.empty() ? "" : ": " + why)),
      index_(index) {}

void DetectParams::validate() const {
  auto open_unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!open_unit(bin_thresh)) throw ValidationError("bin_thresh must be in (0,1)");
  if (!open_unit(box_thresh)) throw ValidationError("box_thresh must be in (0,1)");
  if (!(unclip_ratio >= 1.0)) throw ValidationError("unclip_ratio must be >= 1");
  if (!(min_side >= 1.0)) throw ValidationError("min_side must be >= 1");
}

void validate(const ProbMap& map) {
  if (!((map >= 0.0) && (map <= 1.0)).all()) {
    throw ValidationError("probability map values must lie in [0,1]");
  }
}

Mask binarize(const ProbMap& map, double bin_thresh) { return map > bin_thresh; }

Components label_components(const Mask& mask) {
  const int h = static_cast<int>(mask.rows()), w = static_cast<int>(mask.cols());
  Components out{Labels::Zero(h, w), 0};
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(y, x) || out.labels(y, x) != 0) continue;
      const int label = ++out.count;
      out.labels(y, x) = label;
      stack.emplace_back(y, x);
      while (!stack.empty()) {
        const auto [cy, cx] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int ny = cy + dy, nx = cx + dx;
            if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
            if (!mask(ny, nx) || out.labels(ny, nx) != 0) continue;
            out.labels(ny, nx) = label;
            stack.emplace_back(ny, nx);
          }
        }
      }
    }
  }
  return out;
}

namespace {

struct ComponentStats {
  double sum = 0.0;
  std::size_t pixels = 0;
  int min_x = 0, max_x = 0, min_y = 0, max_y = 0;
  // Per row: leftmost and rightmost column, enough for the hull.
  std::vector<std::pair<int, int>> rows;  // indexed by y - min_y
};

Quad2d clamp_to(const Quad2d& quad, double w, double h) {
  Quad2d out = quad;
  for (auto& p : out) {
    p.x() = std::clamp(p.x(), 0.0, w);
    p.y() = std::clamp(p.y(), 0.0, h);
  }
  return out;
}

}  // namespace

std::vector<TextBox> extract_boxes(const ProbMap& map, const DetectParams& params) {
  params.validate();
  const Components comps = label_components(binarize(map, params.bin_thresh));
  const int h = static_cast<int>(map.rows()), w = static_cast<int>(map.cols());

  std::vector<ComponentStats> stats(static_cast<std::size_t>(comps.count));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int label = comps.labels(y, x);
      if (label == 0) continue;
      auto& s = stats[static_cast<std::size_t>(label - 1)];
      if (s.pixels == 0) {
        s.min_x = s.max_x = x;
        s.min_y = s.max_y = y;
      }
      s.sum += map(y, x);
      ++s.pixels;
      s.min_x = std::min(s.min_x, x);
      s.max_x = std::max(s.max_x, x);
      s.max_y = std::max(s.max_y, y);
      const auto row = static_cast<std::size_t>(y - s.min_y);
      if (row >= s.rows.size()) s.rows.resize(row + 1, {x, x});
      s.rows[row].first = std::min(s.rows[row].first, x);
      s.rows[row].second = std::max(s.rows[row].second, x);
    }
  }

  struct Candidate {
    TextBox box;
    std::size_t order;
  };
  std::vector<Candidate> found;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const auto& s = stats[i];
    const double score = s.sum / static_cast<double>(s.pixels);
    if (score < params.box_thresh) continue;

    std::vector<Point2d> corners;
    corners.reserve(4 * s.rows.size());
    for (std::size_t r = 0; r < s.rows.size(); ++r) {
      const double y = s.min_y + static_cast<double>(r);
      const double left = s.rows[r].first, right = s.rows[r].second + 1.0;
      corners.insert(corners.end(), {Point2d(left, y), Point2d(left, y + 1),
                                     Point2d(right, y), Point2d(right, y + 1)});
    }
    const auto rect = geometry::min_area_rect(corners);
    const Quad2d quad = rect.corners();
    const double perimeter = 2.0 * (rect.width + rect.height);
    const double distance = rect.area() * params.unclip_ratio / perimeter;
    const auto grown = geometry::offset_polygon(std::span<const Point2d>(quad), distance);
    const auto grown_rect = geometry::min_area_rect(grown);
    if (grown_rect.min_side() < params.min_side) continue;

    Quad2d clamped = clamp_to(geometry::order_corners({grown[0], grown[1], grown[2], grown[3]}), w, h);
    if (!geometry::is_simple(clamped) || geometry::signed_area(clamped) < 1.0) {
      clamped = {Point2d(s.min_x, s.min_y), Point2d(s.max_x + 1.0, s.min_y),
                 Point2d(s.max_x + 1.0, s.max_y + 1.0), Point2d(s.min_x, s.max_y + 1.0)};
    }
    found.push_back({TextBox{clamped, score}, i});
  }

  std::stable_sort(found.begin(), found.end(), [](const Candidate& a, const Candidate& b) {
    const auto& pa = a.box.quad[0];
    const auto& pb = b.box.quad[0];
    if (pa.y() != pb.y()) return pa.y() < pb.y();
    return pa.x() < pb.x();
  });
  std::vector<TextBox> boxes;
  boxes.reserve(found.size());
  for (auto& c : found) boxes.push_back(c.box);
  return boxes;
}

Quad2d quad_from_json(const nlohmann::json& quad) {
  if (!quad.is_array() || quad.size() != 4) {
    throw ValidationError("quad must be an array of four [x, y] points");
  }
  Quad2d out;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& p = quad[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw ValidationError("quad point must be [x, y]");
    }
    out[i] = Point2d(p[0].get<double>(), p[1].get<double>());
  }
  return out;
}

std::vector<TextBox> ingest_boxes(const nlohmann::json& records) {
  if (!records.is_array()) throw ValidationError("boxes must be an array");
  std::vector<TextBox> boxes;
  boxes.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& record = records[i];
    if (!record.is_object() || !record.contains("quad")) {
      throw MalformedQuad(i, "missing \"quad\"");
    }
    TextBox box;
    try {
      box.quad = quad_from_json(record["quad"]);
    } catch (const ValidationError& e) {
      throw MalformedQuad(i, e.what());
    }
    for (const auto& p : box.quad) {
      if (!p.allFinite()) throw MalformedQuad(i, "non-finite coordinate");
    }
    if (!geometry::is_simple(box.quad)) {
      throw MalformedQuad(i, "self-intersecting or zero-area");
    }
    if (geometry::signed_area(box.quad) < 0) box.quad = geometry::reversed(box.quad);
    if (record.contains("score") && !record["score"].is_null()) {
      if (!record["score"].is_number()) throw MalformedQuad(i, "score must be a number");
      box.score = record["score"].get<double>();
      if (!(box.score >= 0.0 && box.score <= 1.0)) {
        throw MalformedQuad(i, "score outside [0,1]");
      }
    }
    boxes.push_back(box);
  }
  return boxes;
}

std::vector<BoxRecord> read_box_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw EnvironmentError("cannot open " + path.string());
  std::vector<BoxRecord> records;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(where + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("image") || !j["image"].is_string() ||
        !j.contains("boxes")) {
      throw ValidationError(where + ": expected {\"image\", \"boxes\"}");
    }
    try {
      records.push_back({j["image"].get<std::string>(), ingest_boxes(j["boxes"])});
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  return records;
}

nlohmann::ordered_json to_json(const TextBox& box) {
  nlohmann::ordered_json quad = nlohmann::ordered_json::array();
  for (const auto& p : box.quad) quad.push_back({p.x(), p.y()});
  return {{"quad", std::move(quad)}, {"score", box.score}};
}

nlohmann::ordered_json to_json(const BoxRecord& record) {
  nlohmann::ordered_json boxes = nlohmann::ordered_json::array();
  for (const auto& b : record.boxes) boxes.push_back(to_json(b));
  return {{"image", record.image}, {"boxes", std::move(boxes)}};
}

ProbMap read_prob_map(const std::filesystem::path& path) {
  ProbMap map;
  if (path.extension() == ".json") {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(path));
      const int w = j.at("width").get<int>(), h = j.at("height").get<int>();
      const auto values = j.at("values").get<std::vector<double>>();
      if (w <= 0 || h <= 0 || values.size() != static_cast<std::size_t>(w) * h) {
        throw ValidationError("width*height values required");
      }
      map = Eigen::Map<const ProbMap>(values.data(), h, w);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path.string() + ": " + e.what());
    }
  } else {
    const Image image = read_png(path);
    map = image.planes[0].cast<double>() / 255.0;
  }
  validate(map);
  return map;
}

}  // namespace ocrforge::detect
