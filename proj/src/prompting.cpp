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

#include "ocrforge/prompting.hpp"

#include "ocrforge/codec.hpp"
#include "ocrforge/image.hpp"

namespace ocrforge::prompting {

PromptMode parse_mode(std::string_view name) {
  if (name == "base" || name == "Base") return PromptMode::kBase;
  if (name == "ocr" || name == "OCR") return PromptMode::kOcr;
  throw ValidationError("unknown prompt mode '" + std::string(name) +
                        "' (expected base or ocr)");
}

std::string_view mode_name(PromptMode mode) {
  return mode == PromptMode::kBase ? "Base" : "OCR";
}

PromptSpec build_prompt(std::string question, PromptMode mode,
                        const pipeline::OcrDocument* doc, const PromptTemplate& templ) {
  PromptSpec spec;
  spec.mode = mode;
  spec.question = std::move(question);
  spec.answer_instruction = templ.instruction;
  spec.ocr_label = templ.ocr_label;
  if (mode == PromptMode::kBase) return spec;

  if (doc == nullptr) throw MissingOcr();
  for (const auto& line : doc->lines) {
    if (line.text.empty()) continue;
    std::string text = line.text;
    for (char& c : text) {
      if (c == '\n' || c == '\r') c = ' ';
    }
    spec.ocr_lines.push_back(std::move(text));
  }
  return spec;
}

std::string render_text(const PromptSpec& spec) {
  std::string base = spec.question;
  if (!spec.answer_instruction.empty()) base += "\n" + spec.answer_instruction;
  if (spec.mode == PromptMode::kBase) return base;

  std::string block = spec.ocr_label + "\n";
  for (const auto& line : spec.ocr_lines) block += line + "\n";
  return block + "\n" + base;
}

ImageAttachment ImageAttachment::from_file(const std::filesystem::path& path) {
  return {mime_type_for(path), codec::base64_encode(read_file(path))};
}

MessageSequence render_messages(const PromptSpec& spec,
                                const std::optional<ImageAttachment>& image) {
  return {Message{"user", render_text(spec), image}};
}

nlohmann::ordered_json to_json(const MessageSequence& messages) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& m : messages) {
    nlohmann::ordered_json content = nlohmann::ordered_json::array();
    if (m.image) {
      content.push_back({{"type", "image_url"}, {"image_url", {{"url", m.image->data_url()}}}});
    }
    content.push_back({{"type", "text"}, {"text", m.text}});
    out.push_back({{"role", m.role}, {"content", std::move(content)}});
  }
  return out;
}

}  // namespace ocrforge::prompting
