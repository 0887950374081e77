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

// Box-annotated page images to (crop, text) recognition pairs, and seeded
// train/test splits grouped by source page.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ocrforge/detect.hpp"
#include "ocrforge/error.hpp"

namespace ocrforge::dataprep {

struct Region {
  geometry::Quad2d quad;
  std::string text;
};

struct AnnotationRecord {
  std::string image_path;
  std::vector<Region> regions;
};

/// JSONL: {"image": path, "regions": [{"quad": [[x,y] x4], "text": s}]}.
std::vector<AnnotationRecord> read_annotations(const std::filesystem::path& path);

enum class Split { kUnsplit, kTrain, kTest };
std::string_view split_key(Split split);

struct PairEntry {
  std::string crop;
  std::string text;
  std::string source;
  int region = 0;

  friend bool operator==(const PairEntry&, const PairEntry&) = default;
};

struct PairManifest {
  std::vector<PairEntry> entries;
  Split split = Split::kUnsplit;
};

struct CropStats {
  std::size_t regions = 0;
  std::size_t written = 0;
  std::size_t skipped_empty = 0;
  std::size_t skipped_degenerate = 0;
};

struct CropResult {
  PairManifest manifest;
  CropStats stats;
};

class MissingImage : public ValidationError {
 public:
  explicit MissingImage(const std::filesystem::path& path)
      : ValidationError("annotation image not found: " + path.string()) {}
};

class TooFewGroups : public ValidationError {
 public:
  explicit TooFewGroups(std::size_t groups)
      : ValidationError("split needs at least 2 groups, got " + std::to_string(groups)) {}
};

/// Rectified PNG crops under <out_dir>/crops, named
/// <record index>-<image stem>-r<region>.png, plus <out_dir>/manifest.jsonl.
/// Image paths resolve against `images_root`. Empty labels and degenerate
/// quads are skipped and counted.
CropResult crop_dataset(const std::vector<AnnotationRecord>& annotations,
                        const std::filesystem::path& out_dir,
                        const std::filesystem::path& images_root = {},
                        std::size_t threads = 4);

/// JSONL: {"crop", "text", "source", "region"}.
void write_manifest(const std::filesystem::path& path, const PairManifest& manifest);
PairManifest read_manifest(const std::filesystem::path& path);

/// Seeded shuffle of groups (source images, or single entries when
/// `per_crop`). The test side takes round(fraction * groups) of them,
/// clamped to [1, groups - 1]. Entries keep their manifest order.
std::pair<PairManifest, PairManifest> split(const PairManifest& manifest, double test_fraction,
                                            std::uint64_t seed, bool per_crop = false);

}  // namespace ocrforge::dataprep
