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

#include "ocrforge/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <memory>

namespace ocrforge {
namespace {

struct PngImage {
  png_image image{};
  PngImage() {
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&image); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

}  // namespace

std::string encode_png(const Image& image) {
  const int channels = image.channels();
  if (channels != 1 && channels != 3) {
    throw ValidationError("PNG encoding needs 1 or 3 channels");
  }
  if (image.empty()) throw ValidationError("cannot encode an empty image");

  const int w = image.width(), h = image.height();
  std::vector<png_byte> packed(static_cast<std::size_t>(w) * h * channels);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < channels; ++c) {
        packed[(static_cast<std::size_t>(y) * w + x) * channels + c] =
            image.planes[c](y, x);
      }
    }
  }

  PngImage png;
  png.image.width = static_cast<png_uint_32>(w);
  png.image.height = static_cast<png_uint_32>(h);
  png.image.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png.image, nullptr, &size, 0, packed.data(),
                                 0, nullptr)) {
    throw EnvironmentError(std::string("PNG encode failed: ") + png.image.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&png.image, out.data(), &size, 0,
                                 packed.data(), 0, nullptr)) {
    throw EnvironmentError(std::string("PNG encode failed: ") + png.image.message);
  }
  out.resize(size);
  return out;
}

Image decode_png(std::string_view bytes) {
  PngImage png;
  if (!png_image_begin_read_from_memory(&png.image, bytes.data(), bytes.size())) {
    throw ImageDecodeError(std::string("not a readable PNG: ") + png.image.message);
  }
  const bool gray = (png.image.format & PNG_FORMAT_FLAG_COLOR) == 0;
  png.image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  const int channels = gray ? 1 : 3;
  const int w = static_cast<int>(png.image.width);
  const int h = static_cast<int>(png.image.height);

  std::vector<png_byte> packed(PNG_IMAGE_SIZE(png.image));
  if (!png_image_finish_read(&png.image, nullptr, packed.data(), 0, nullptr)) {
    throw ImageDecodeError(std::string("PNG decode failed: ") + png.image.message);
  }

  Image image(w, h, channels);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < channels; ++c) {
        image.planes[c](y, x) =
            packed[(static_cast<std::size_t>(y) * w + x) * channels + c];
      }
    }
  }
  return image;
}

Image read_png(const std::filesystem::path& path) {
  return decode_png(read_file(path));
}

void write_png(const std::filesystem::path& path, const Image& image) {
  write_file(path, encode_png(image));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EnvironmentError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw EnvironmentError("cannot write " + path.string());
}

std::string mime_type_for(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".webp") return "image/webp";
  if (ext == ".gif") return "image/gif";
  return "image/png";
}

}  // namespace ocrforge
