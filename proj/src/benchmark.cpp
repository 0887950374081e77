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

#include "ocrforge/benchmark.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace ocrforge::bench {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, 4> kTaskKeys = {"recognition", "scene", "document", "kie"};
constexpr std::array<std::string_view, 4> kTaskTitles = {"Recognition", "Scene", "Document",
                                                         "KIE"};
constexpr std::array<std::string_view, 5> kCategoryKeys = {
    "none", "spacing-only", "near-miss-spelling", "refusal", "other"};

}  // namespace

std::string_view task_key(Task task) { return kTaskKeys[static_cast<std::size_t>(task)]; }
std::string_view task_title(Task task) { return kTaskTitles[static_cast<std::size_t>(task)]; }

Task parse_task(std::string_view key) {
  for (Task t : kTasks) {
    if (task_key(t) == key) return t;
  }
  throw ValidationError("unknown task '" + std::string(key) +
                        "' (expected recognition, scene, document or kie)");
}

Language parse_language(std::string_view key) {
  if (key == "ko") return Language::kKo;
  if (key == "en") return Language::kEn;
  if (key == "mixed") return Language::kMixed;
  throw ValidationError("unknown language '" + std::string(key) + "' (expected ko, en or mixed)");
}

std::string_view language_key(Language language) {
  switch (language) {
    case Language::kEn:
      return "en";
    case Language::kMixed:
      return "mixed";
    case Language::kKo:
      break;
  }
  return "ko";
}

std::filesystem::path Benchmark::image_file(const BenchSample& sample) const {
  const std::filesystem::path p(sample.image_path);
  return p.is_absolute() || images_root.empty() ? p : images_root / p;
}

SchemaError::SchemaError(std::size_t line, const std::string& what)
    : ValidationError("benchmark line " + std::to_string(line) + ": " + what), line_(line) {}

Benchmark parse_benchmark(std::istream& in, const std::filesystem::path& images_root,
                          bool check_images) {
  Benchmark bench;
  bench.images_root = images_root;
  std::set<std::string> seen;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw SchemaError(line_no, e.what());
    }
    auto string_field = [&](const char* key) {
      if (!j.contains(key) || !j[key].is_string()) {
        throw SchemaError(line_no, std::string("\"") + key + "\" must be a string");
      }
      return j[key].get<std::string>();
    };
    if (!j.is_object()) throw SchemaError(line_no, "record must be an object");

    BenchSample s;
    s.id = string_field("id");
    if (s.id.empty()) throw SchemaError(line_no, "\"id\" is empty");
    s.image_path = string_field("image");
    try {
      s.task = parse_task(string_field("task"));
      s.language = parse_language(string_field("lang"));
    } catch (const SchemaError&) {
      throw;
    } catch (const ValidationError& e) {
      throw SchemaError(line_no, e.what());
    }
    s.question = string_field("question");
    if (!j.contains("answers") || !j["answers"].is_array() || j["answers"].empty()) {
      throw SchemaError(line_no, "\"answers\" must be a non-empty array");
    }
    for (const auto& a : j["answers"]) {
      if (!a.is_string()) throw SchemaError(line_no, "answers must be strings");
      s.answers.push_back(a.get<std::string>());
    }
    if (!seen.insert(s.id).second) throw DuplicateId(s.id);
    ++bench.counts[static_cast<std::size_t>(s.task)];
    bench.samples.push_back(std::move(s));
  }
  if (check_images) {
    for (const auto& s : bench.samples) {
      const auto path = bench.image_file(s);
      if (!std::filesystem::is_regular_file(path)) throw MissingImage(s.id, path);
    }
  }
  return bench;
}

Benchmark load_benchmark(const std::filesystem::path& path,
                         const std::filesystem::path& images_root, bool check_images) {
  std::ifstream in(path);
  if (!in) throw EnvironmentError("cannot open benchmark " + path.string());
  return parse_benchmark(in, images_root, check_images);
}

ordered_json to_json(const BenchSample& s) {
  return {{"id", s.id},          {"image", s.image_path},       {"task", task_key(s.task)},
          {"question", s.question}, {"answers", s.answers}, {"lang", language_key(s.language)}};
}

// ---------------------------------------------------------------------------
// Scoring

std::string_view category_key(ErrorCategory category) {
  return kCategoryKeys[static_cast<std::size_t>(category)];
}

ErrorCategory parse_category(std::string_view key) {
  for (std::size_t i = 0; i < kCategoryKeys.size(); ++i) {
    if (kCategoryKeys[i] == key) return static_cast<ErrorCategory>(i);
  }
  throw ValidationError("unknown error category '" + std::string(key) + "'");
}

MatchRule parse_rule(std::string_view key) {
  if (key == "exact") return MatchRule::kExact;
  if (key == "relaxed") return MatchRule::kRelaxed;
  if (key == "contains") return MatchRule::kContains;
  throw ValidationError("unknown match rule '" + std::string(key) +
                        "' (expected exact, relaxed or contains)");
}

std::string_view rule_key(MatchRule rule) {
  switch (rule) {
    case MatchRule::kRelaxed:
      return "relaxed";
    case MatchRule::kContains:
      return "contains";
    case MatchRule::kExact:
      break;
  }
  return "exact";
}

std::vector<std::string> default_refusal_lexicon() {
  return {
      // Korean
      "죄송", "답할 수 없", "답변할 수 없", "답변드릴 수 없", "알 수 없", "확인할 수 없",
      "판단할 수 없", "제공할 수 없", "읽을 수 없", "식별할 수 없",
      // English
      "i cannot", "i can't", "i can not", "i am unable", "i'm unable", "unable to determine",
      "cannot determine", "cannot be determined", "can't determine", "not possible to determine",
      "i'm sorry", "i am sorry", "cannot answer", "can't answer", "unanswerable",
      "not enough information", "no information"};
}

std::vector<std::string> read_refusal_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw EnvironmentError("cannot open refusal lexicon " + path.string());
  std::vector<std::string> phrases;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    phrases.push_back(line);
  }
  return phrases;
}

namespace {

metrics::NormProfile without_spaces(metrics::NormProfile profile) {
  profile.whitespace = metrics::Whitespace::kStripAll;
  return profile;
}

bool is_refusal(const std::string& prediction, const std::vector<std::string>& lexicon) {
  const metrics::NormProfile fold{"refusal", metrics::UnicodeForm::kComposed,
                                  metrics::Casing::kFold, metrics::CharsetFilter::kNone,
                                  metrics::Whitespace::kCollapse};
  const std::string text = metrics::normalize(prediction, fold);
  for (const auto& phrase : lexicon) {
    const std::string needle = metrics::normalize(phrase, fold);
    if (!needle.empty() && text.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

ErrorCategory classify_error(const std::string& prediction, const BenchSample& sample,
                             const ScoringPolicy& policy) {
  if (is_refusal(prediction, policy.refusal_lexicon)) return ErrorCategory::kRefusal;

  const auto compact = without_spaces(policy.profile);
  const std::string pred_compact = metrics::normalize(prediction, compact);
  for (const auto& answer : sample.answers) {
    if (pred_compact == metrics::normalize(answer, compact)) return ErrorCategory::kSpacingOnly;
  }

  const std::u32string pred = metrics::to_scalars(metrics::normalize(prediction, policy.profile));
  for (const auto& answer : sample.answers) {
    const std::u32string gold = metrics::to_scalars(metrics::normalize(answer, policy.profile));
    const auto limit = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(0.2 * static_cast<double>(gold.size()))));
    if (metrics::edit_distance(pred, gold) <= limit) return ErrorCategory::kNearMissSpelling;
  }
  return ErrorCategory::kOther;
}

Verdict score_sample(const std::string& prediction, const BenchSample& sample,
                     const ScoringPolicy& policy) {
  Verdict v;
  v.id = sample.id;
  v.task = sample.task;
  v.prediction = prediction;

  const std::string pred = metrics::normalize(prediction, policy.profile);
  const auto compact = without_spaces(policy.profile);
  const std::string pred_compact =
      policy.rule == MatchRule::kRelaxed ? metrics::normalize(prediction, compact) : "";
  for (const auto& answer : sample.answers) {
    const std::string gold = metrics::normalize(answer, policy.profile);
    bool hit = pred == gold;
    if (!hit && policy.rule == MatchRule::kRelaxed) {
      hit = pred_compact == metrics::normalize(answer, compact);
    }
    if (!hit && policy.rule == MatchRule::kContains) {
      hit = !gold.empty() && pred.find(gold) != std::string::npos;
    }
    if (hit) {
      v.correct = true;
      v.matched_answer = answer;
      return v;
    }
  }
  v.error_category = classify_error(prediction, sample, policy);
  return v;
}

ordered_json to_json(const Verdict& v) {
  return {{"id", v.id},
          {"task", task_key(v.task)},
          {"correct", v.correct},
          {"matched_answer", v.matched_answer ? ordered_json(*v.matched_answer) : ordered_json()},
          {"error_category", category_key(v.error_category)},
          {"prediction", v.prediction}};
}

Verdict verdict_from_json(const json& j) {
  Verdict v;
  try {
    v.id = j.at("id").get<std::string>();
    v.task = parse_task(j.at("task").get<std::string>());
    v.correct = j.at("correct").get<bool>();
    if (j.contains("matched_answer") && !j["matched_answer"].is_null()) {
      v.matched_answer = j["matched_answer"].get<std::string>();
    }
    v.error_category = parse_category(j.at("error_category").get<std::string>());
    v.prediction = j.value("prediction", std::string());
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed verdict: ") + e.what());
  }
  if (v.correct && v.error_category != ErrorCategory::kNone) {
    throw ValidationError("verdict '" + v.id + "' is correct but carries an error category");
  }
  if (!v.correct && v.error_category == ErrorCategory::kNone) {
    throw ValidationError("verdict '" + v.id + "' is incorrect without an error category");
  }
  return v;
}

std::vector<Verdict> read_verdicts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw EnvironmentError("cannot open verdicts " + path.string());
  std::vector<Verdict> out;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(verdict_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace ocrforge::bench
