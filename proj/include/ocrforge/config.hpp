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

// Run configuration: a flat `key = value` file, overridable from the command
// line.
//
//   # comment
//   endpoint.model = "qwen2.5-vl-7b"
//   mode = ocr
//   detect.box_thresh = 0.6
//   profile.loose = "composed fold none strip-all"
//
// Values may be bare or JSON-quoted strings. Unknown keys are rejected.

#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ocrforge/benchmark.hpp"
#include "ocrforge/detect.hpp"
#include "ocrforge/error.hpp"
#include "ocrforge/metrics.hpp"
#include "ocrforge/pipeline.hpp"
#include "ocrforge/prompting.hpp"
#include "ocrforge/vlm.hpp"

namespace ocrforge::config {

class UnknownKey : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

enum class ReplayMode { kOff, kReplay, kRecord };

struct RunConfig {
  std::string benchmark;
  std::string images_root;
  std::string run_dir = "runs";
  std::string run_name;
  std::string replay;
  ReplayMode replay_mode = ReplayMode::kReplay;

  prompting::PromptMode mode = prompting::PromptMode::kBase;
  prompting::PromptTemplate templ;
  vlm::ModelEndpoint endpoint;
  bool attach_image = true;

  std::string ocr_boxes;
  std::string ocr_maps;
  std::string ocr_recognizer;
  pipeline::OcrOptions ocr;
  detect::DetectParams detect;

  std::string scoring_profile = "collapsed-nfc";
  bench::MatchRule scoring_rule = bench::MatchRule::kExact;
  std::string refusal_lexicon;
  /// User profiles declared with `profile.<name> = "<steps>"`.
  std::map<std::string, std::string> profiles;

  std::size_t concurrency = 4;

  /// Applies one `key = value` setting. Throws ValidationError for unknown
  /// keys and malformed values.
  void set(const std::string& key, const std::string& value);

  /// Resolves scoring_profile against the built-in and user profiles.
  metrics::NormProfile profile() const;
  bench::ScoringPolicy policy() const;

  /// Effective settings, in a fixed key order. Output locations (run_dir,
  /// run_name) are left out so that they never change a run's results.
  nlohmann::ordered_json to_json() const;
};

/// Known keys with one-line descriptions, for help output.
const std::vector<std::pair<std::string, std::string>>& known_keys();

void apply_text(RunConfig& config, const std::string& text, const std::string& origin = "config");
void apply_file(RunConfig& config, const std::filesystem::path& path);

/// Splits "key=value".
std::pair<std::string, std::string> split_assignment(const std::string& text);

}  // namespace ocrforge::config
