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

// Post-processing for segmentation-style text detectors: a per-pixel text
// probability map in, scored quadrilateral text boxes out.

#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

#include "ocrforge/error.hpp"
#include "ocrforge/geometry.hpp"

namespace ocrforge::detect {

/// Rows = height, cols = width; every value in [0, 1].
using ProbMap = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Labels = Eigen::Array<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TextBox {
  /// Clockwise on screen; quad[0] is the top-left corner of the text.
  geometry::Quad2d quad;
  double score = 1.0;
};

struct DetectParams {
  double bin_thresh = 0.3;
  double box_thresh = 0.6;
  double unclip_ratio = 1.5;
  double min_side = 3.0;

  /// Throws ValidationError when a field is out of range.
  void validate() const;
};

class MalformedQuad : public ValidationError {
 public:
  explicit MalformedQuad(std::size_t index, const std::string& why = "");
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

/// Throws ValidationError for values outside [0, 1] or NaN.
void validate(const ProbMap& map);

Mask binarize(const ProbMap& map, double bin_thresh);

/// 8-connected labelling in raster order. Background is 0, components are
/// numbered 1..count in order of their first pixel.
struct Components {
  Labels labels;
  int count = 0;
};
Components label_components(const Mask& mask);

/// Components -> min-area rectangles -> score filter -> unclip -> side
/// filter -> clamp. Sorted by the top-left corner, y first.
std::vector<TextBox> extract_boxes(const ProbMap& map,
                                   const DetectParams& params = {});

/// Validates externally produced boxes. Counter-clockwise quads are
/// rewound in place (first corner kept); missing scores mean 1.0.
std::vector<TextBox> ingest_boxes(const nlohmann::json& records);

/// One JSONL record: {"image": path, "boxes": [{"quad": [[x,y]x4], "score"?}]}.
struct BoxRecord {
  std::string image;
  std::vector<TextBox> boxes;
};

std::vector<BoxRecord> read_box_records(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const TextBox& box);
nlohmann::ordered_json to_json(const BoxRecord& record);
geometry::Quad2d quad_from_json(const nlohmann::json& quad);

/// Probability map from a JSON file ({"width", "height", "values"}) or an
/// 8-bit gray PNG scaled by 1/255.
ProbMap read_prob_map(const std::filesystem::path& path);

}  // namespace ocrforge::detect
