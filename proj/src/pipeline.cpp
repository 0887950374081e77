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

#include "ocrforge/pipeline.hpp"

#include <numeric>

namespace ocrforge::pipeline {

std::vector<std::string> OcrDocument::texts() const {
  std::vector<std::string> out;
  out.reserve(lines.size());
  for (const auto& line : lines) out.push_back(line.text);
  return out;
}

OcrDocument run_ocr(std::string image_id, const Image& image,
                    std::span<const TextBox> boxes, RecognizerBackend& backend,
                    const OcrOptions& options) {
  OcrDocument doc;
  doc.image_id = std::move(image_id);
  doc.order_policy = options.order == OrderPolicy::kReading ? "reading" : "input";
  if (boxes.empty()) return doc;

  std::vector<TextBox> clamped(boxes.begin(), boxes.end());
  for (auto& box : clamped) {
    for (auto& p : box.quad) {
      p.x() = std::clamp(p.x(), 0.0, static_cast<double>(image.width()));
      p.y() = std::clamp(p.y(), 0.0, static_cast<double>(image.height()));
    }
  }

  std::vector<std::size_t> order;
  if (options.order == OrderPolicy::kReading) {
    order = order_regions(clamped, options.line_threshold);
  } else {
    order.resize(clamped.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
  }

  std::vector<Image> crops;
  crops.reserve(order.size());
  for (std::size_t i : order) crops.push_back(crop_region(image, clamped[i], options.crop_mode));

  const std::size_t batch = std::max<std::size_t>(1, backend.capability().max_batch);
  std::vector<Recognition> results;
  results.reserve(crops.size());
  for (std::size_t start = 0; start < crops.size(); start += batch) {
    const std::size_t count = std::min(batch, crops.size() - start);
    auto part = backend.recognize(std::span<const Image>(crops).subspan(start, count));
    if (part.size() != count) {
      throw BackendProtocolError("backend returned " + std::to_string(part.size()) +
                                 " results for " + std::to_string(count) + " crops");
    }
    results.insert(results.end(), std::make_move_iterator(part.begin()),
                   std::make_move_iterator(part.end()));
  }

  doc.lines.reserve(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    doc.lines.push_back({std::move(results[k].text), clamped[order[k]],
                         std::clamp(results[k].confidence, 0.0, 1.0)});
  }
  return doc;
}

nlohmann::ordered_json to_json(const OcrDocument& doc) {
  nlohmann::ordered_json lines = nlohmann::ordered_json::array();
  for (const auto& line : doc.lines) {
    auto box = detect::to_json(line.box);
    lines.push_back({{"text", line.text},
                     {"confidence", line.confidence},
                     {"quad", box["quad"]},
                     {"score", line.box.score}});
  }
  return {{"image_id", doc.image_id},
          {"order_policy", doc.order_policy},
          {"lines", std::move(lines)}};
}

OcrDocument document_from_json(const nlohmann::json& j) {
  OcrDocument doc;
  try {
    doc.image_id = j.at("image_id").get<std::string>();
    doc.order_policy = j.value("order_policy", std::string("reading"));
    for (const auto& line : j.at("lines")) {
      OcrLine l;
      l.text = line.at("text").get<std::string>();
      l.confidence = line.value("confidence", 0.0);
      l.box.quad = detect::quad_from_json(line.at("quad"));
      l.box.score = line.value("score", 1.0);
      doc.lines.push_back(std::move(l));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed OCR document: ") + e.what());
  }
  return doc;
}

}  // namespace ocrforge::pipeline
