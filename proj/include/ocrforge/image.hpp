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

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ocrforge/error.hpp"

namespace ocrforge {

/// One 8-bit channel, rows = image height, cols = image width.
using Plane = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Planar 8-bit raster with 1 (gray) or 3 (RGB) channels.
struct Image {
  std::vector<Plane> planes;

  Image() = default;
  Image(int width, int height, int channels)
      : planes(static_cast<std::size_t>(channels), Plane::Zero(height, width)) {}
  explicit Image(Plane gray) { planes.push_back(std::move(gray)); }

  int width() const { return planes.empty() ? 0 : static_cast<int>(planes[0].cols()); }
  int height() const { return planes.empty() ? 0 : static_cast<int>(planes[0].rows()); }
  int channels() const { return static_cast<int>(planes.size()); }
  bool empty() const { return planes.empty() || planes[0].size() == 0; }

  friend bool operator==(const Image& a, const Image& b) {
    if (a.channels() != b.channels() || a.width() != b.width() ||
        a.height() != b.height()) {
      return false;
    }
    for (std::size_t c = 0; c < a.planes.size(); ++c) {
      if ((a.planes[c] != b.planes[c]).any()) return false;
    }
    return true;
  }
};

class ImageDecodeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Lossless PNG. Encoding is deterministic for a given image.
std::string encode_png(const Image& image);
/// Gray and gray+alpha decode to 1 channel, everything else to RGB.
Image decode_png(std::string_view bytes);

Image read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& image);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// MIME type guessed from the file extension (png, jpg/jpeg, webp, gif).
std::string mime_type_for(const std::filesystem::path& path);

}  // namespace ocrforge
