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

#include "ocrforge/config.hpp"

#include <charconv>
#include <functional>
#include <sstream>

#include "ocrforge/image.hpp"

namespace ocrforge::config {

using nlohmann::ordered_json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ValidationError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

long long to_int(const std::string& key, const std::string& v, long long lo) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ValidationError(key + ": expected an integer, got '" + v + "'");
  }
  if (out < lo) throw ValidationError(key + ": must be >= " + std::to_string(lo));
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw ValidationError(key + ": expected true or false, got '" + v + "'");
}

std::string_view replay_key(ReplayMode mode) {
  switch (mode) {
    case ReplayMode::kOff:
      return "off";
    case ReplayMode::kRecord:
      return "record";
    case ReplayMode::kReplay:
      break;
  }
  return "replay";
}

ReplayMode parse_replay(const std::string& v) {
  if (v == "off") return ReplayMode::kOff;
  if (v == "replay") return ReplayMode::kReplay;
  if (v == "record") return ReplayMode::kRecord;
  throw ValidationError("replay_mode: expected replay, record or off, got '" + v + "'");
}

struct Key {
  const char* name;
  const char* help;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<ordered_json(const RunConfig&)> get;
};

#define STRING_KEY(name, field, help)                                        \
  Key {                                                                      \
    name, help, [](RunConfig& c, const std::string& v) { c.field = v; },     \
        [](const RunConfig& c) { return ordered_json(c.field); }             \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      STRING_KEY("benchmark", benchmark, "benchmark JSONL"),
      STRING_KEY("images_root", images_root, "directory benchmark image paths resolve against"),
      STRING_KEY("run_dir", run_dir, "parent directory of run directories"),
      STRING_KEY("run_name", run_name, "run directory name (default <timestamp>-<model>-<mode>)"),
      STRING_KEY("replay", replay, "replay store JSONL"),
      {"replay_mode", "replay | record | off",
       [](RunConfig& c, const std::string& v) { c.replay_mode = parse_replay(v); },
       [](const RunConfig& c) { return ordered_json(replay_key(c.replay_mode)); }},
      {"mode", "base | ocr",
       [](RunConfig& c, const std::string& v) { c.mode = prompting::parse_mode(v); },
       [](const RunConfig& c) { return ordered_json(prompting::mode_name(c.mode)); }},
      {"attach_image", "send the image with every question",
       [](RunConfig& c, const std::string& v) { c.attach_image = to_bool("attach_image", v); },
       [](const RunConfig& c) { return ordered_json(c.attach_image); }},
      STRING_KEY("endpoint.base_url", endpoint.base_url, "chat-completions base URL"),
      STRING_KEY("endpoint.model", endpoint.model_id, "model id"),
      STRING_KEY("endpoint.api_key_env", endpoint.api_key_env,
                 "environment variable holding the API key"),
      {"endpoint.timeout_s", "per-request timeout in seconds",
       [](RunConfig& c, const std::string& v) {
         c.endpoint.timeout_s = to_double("endpoint.timeout_s", v);
       },
       [](const RunConfig& c) { return ordered_json(c.endpoint.timeout_s); }},
      {"endpoint.max_retries", "retries after the first attempt",
       [](RunConfig& c, const std::string& v) {
         c.endpoint.max_retries = static_cast<int>(to_int("endpoint.max_retries", v, 0));
       },
       [](const RunConfig& c) { return ordered_json(c.endpoint.max_retries); }},
      {"endpoint.thinking", "enable the model's thinking mode",
       [](RunConfig& c, const std::string& v) {
         c.endpoint.thinking = to_bool("endpoint.thinking", v);
       },
       [](const RunConfig& c) { return ordered_json(c.endpoint.thinking); }},
      {"endpoint.dialect", "generic | vllm | openai",
       [](RunConfig& c, const std::string& v) { c.endpoint.dialect = vlm::parse_dialect(v); },
       [](const RunConfig& c) { return ordered_json(vlm::dialect_name(c.endpoint.dialect)); }},
      {"endpoint.temperature", "sampling temperature",
       [](RunConfig& c, const std::string& v) {
         c.endpoint.temperature = to_double("endpoint.temperature", v);
       },
       [](const RunConfig& c) { return ordered_json(c.endpoint.temperature); }},
      {"endpoint.max_tokens", "completion token cap",
       [](RunConfig& c, const std::string& v) {
         c.endpoint.max_tokens = static_cast<int>(to_int("endpoint.max_tokens", v, 1));
       },
       [](const RunConfig& c) { return ordered_json(c.endpoint.max_tokens); }},
      STRING_KEY("prompt.instruction", templ.instruction, "answer instruction"),
      STRING_KEY("prompt.ocr_label", templ.ocr_label, "heading above the OCR lines"),
      STRING_KEY("ocr.boxes", ocr_boxes, "box records JSONL keyed by benchmark image path"),
      STRING_KEY("ocr.maps", ocr_maps, "JSONL of {image, map} probability maps to detect on"),
      STRING_KEY("ocr.recognizer", ocr_recognizer, "recognizer backend command"),
      {"ocr.crop_mode", "rectify | bbox",
       [](RunConfig& c, const std::string& v) { c.ocr.crop_mode = pipeline::parse_crop_mode(v); },
       [](const RunConfig& c) {
         return ordered_json(c.ocr.crop_mode == pipeline::CropMode::kRectify ? "rectify" : "bbox");
       }},
      {"ocr.order", "reading | input",
       [](RunConfig& c, const std::string& v) {
         if (v == "reading") {
           c.ocr.order = pipeline::OrderPolicy::kReading;
         } else if (v == "input") {
           c.ocr.order = pipeline::OrderPolicy::kInput;
         } else {
           throw ValidationError("ocr.order: expected reading or input, got '" + v + "'");
         }
       },
       [](const RunConfig& c) {
         return ordered_json(c.ocr.order == pipeline::OrderPolicy::kReading ? "reading"
                                                                            : "input");
       }},
      {"ocr.line_threshold", "same-line threshold, fraction of box height",
       [](RunConfig& c, const std::string& v) {
         c.ocr.line_threshold = to_double("ocr.line_threshold", v);
       },
       [](const RunConfig& c) { return ordered_json(c.ocr.line_threshold); }},
      {"detect.bin_thresh", "probability binarization threshold",
       [](RunConfig& c, const std::string& v) {
         c.detect.bin_thresh = to_double("detect.bin_thresh", v);
       },
       [](const RunConfig& c) { return ordered_json(c.detect.bin_thresh); }},
      {"detect.box_thresh", "minimum mean probability of a box",
       [](RunConfig& c, const std::string& v) {
         c.detect.box_thresh = to_double("detect.box_thresh", v);
       },
       [](const RunConfig& c) { return ordered_json(c.detect.box_thresh); }},
      {"detect.unclip_ratio", "box growth ratio",
       [](RunConfig& c, const std::string& v) {
         c.detect.unclip_ratio = to_double("detect.unclip_ratio", v);
       },
       [](const RunConfig& c) { return ordered_json(c.detect.unclip_ratio); }},
      {"detect.min_side", "minimum box side after growth, in pixels",
       [](RunConfig& c, const std::string& v) {
         c.detect.min_side = to_double("detect.min_side", v);
       },
       [](const RunConfig& c) { return ordered_json(c.detect.min_side); }},
      STRING_KEY("scoring.profile", scoring_profile, "normalization profile name"),
      {"scoring.rule", "exact | relaxed | contains",
       [](RunConfig& c, const std::string& v) { c.scoring_rule = bench::parse_rule(v); },
       [](const RunConfig& c) { return ordered_json(bench::rule_key(c.scoring_rule)); }},
      STRING_KEY("scoring.refusal_lexicon", refusal_lexicon,
                 "refusal phrase file (default: built-in list)"),
      {"concurrency", "samples in flight",
       [](RunConfig& c, const std::string& v) {
         c.concurrency = static_cast<std::size_t>(to_int("concurrency", v, 1));
       },
       [](const RunConfig& c) { return ordered_json(c.concurrency); }},
  };
  return table;
}

#undef STRING_KEY

}  // namespace

const std::vector<std::pair<std::string, std::string>>& known_keys() {
  static const auto list = [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : keys()) out.emplace_back(k.name, k.help);
    out.emplace_back("profile.<name>", "custom profile: \"<form> <casing> <filter> <whitespace>\"");
    return out;
  }();
  return list;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key.rfind("profile.", 0) == 0) {
    const std::string name = key.substr(8);
    if (name.empty()) throw ValidationError("profile key needs a name: profile.<name>");
    metrics::parse_profile(name, value);  // validate now
    profiles[name] = value;
    return;
  }
  for (const auto& k : keys()) {
    if (key == k.name) {
      k.set(*this, value);
      return;
    }
  }
  throw UnknownKey("unknown config key '" + key + "'");
}

metrics::NormProfile RunConfig::profile() const {
  if (const auto it = profiles.find(scoring_profile); it != profiles.end()) {
    return metrics::parse_profile(it->first, it->second);
  }
  return metrics::profile_by_name(scoring_profile);
}

bench::ScoringPolicy RunConfig::policy() const {
  bench::ScoringPolicy p;
  p.profile = profile();
  p.rule = scoring_rule;
  if (!refusal_lexicon.empty()) p.refusal_lexicon = bench::read_refusal_lexicon(refusal_lexicon);
  return p;
}

ordered_json RunConfig::to_json() const {
  ordered_json j = ordered_json::object();
  for (const auto& k : keys()) {
    const std::string_view name = k.name;
    if (name == "run_dir" || name == "run_name") continue;
    j[k.name] = k.get(*this);
  }
  for (const auto& [name, steps] : profiles) j["profile." + name] = steps;
  return j;
}

void apply_text(RunConfig& config, const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const std::string where = origin + ":" + std::to_string(line_no) + ": ";
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ValidationError(where + "expected key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    std::string value = trim(std::string_view(t).substr(eq + 1));
    if (!value.empty() && value.front() == '"') {
      try {
        value = nlohmann::json::parse(value).get<std::string>();
      } catch (const nlohmann::json::exception&) {
        throw ValidationError(where + "malformed quoted value");
      }
    }
    try {
      config.set(key, value);
    } catch (const UnknownKey& e) {
      throw UnknownKey(where + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
  }
}

void apply_file(RunConfig& config, const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw ValidationError("config file not found: " + path.string());
  }
  apply_text(config, read_file(path), path.string());
}

std::pair<std::string, std::string> split_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError("expected key=value, got '" + text + "'");
  }
  return {trim(std::string_view(text).substr(0, eq)), trim(std::string_view(text).substr(eq + 1))};
}

}  // namespace ocrforge::config
