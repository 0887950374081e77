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

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ocrforge/error.hpp"
#include "ocrforge/pipeline.hpp"

namespace ocrforge::prompting {

enum class PromptMode { kBase, kOcr };

PromptMode parse_mode(std::string_view name);
std::string_view mode_name(PromptMode mode);

struct PromptTemplate {
  std::string ocr_label = "Reference OCR tokens:";
  std::string instruction = "Answer the question using a single word or phrase.";
};

/// What goes into the prompt. Box geometry never does.
struct PromptSpec {
  PromptMode mode = PromptMode::kBase;
  std::string question;
  std::vector<std::string> ocr_lines;
  std::string answer_instruction;
  std::string ocr_label;
};

class MissingOcr : public ValidationError {
 public:
  MissingOcr()
      : ValidationError("OCR prompting needs an OCR document; configure a "
                        "recognizer backend and a box source") {}
};

/// OCR mode keeps the non-empty line texts, in document order. Line breaks
/// inside a line become spaces so every line stays one prompt line.
PromptSpec build_prompt(std::string question, PromptMode mode,
                        const pipeline::OcrDocument* doc,
                        const PromptTemplate& templ = {});

/// Base:  "<question>\n<instruction>"
/// OCR:   "<label>\n<line 1>\n...\n<line n>\n\n" followed by the Base text.
std::string render_text(const PromptSpec& spec);

struct ImageAttachment {
  std::string mime_type;
  std::string base64;

  static ImageAttachment from_file(const std::filesystem::path& path);
  std::string data_url() const { return "data:" + mime_type + ";base64," + base64; }
};

struct Message {
  std::string role;
  std::string text;
  std::optional<ImageAttachment> image;
};

using MessageSequence = std::vector<Message>;

/// One user message: the image part first, then the text part.
MessageSequence render_messages(const PromptSpec& spec,
                                const std::optional<ImageAttachment>& image);

/// Chat-completions "messages" array, fields in a fixed order.
nlohmann::ordered_json to_json(const MessageSequence& messages);

}  // namespace ocrforge::prompting
