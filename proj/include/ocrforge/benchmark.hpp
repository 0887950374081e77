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

// Text-centric VQA benchmark: loading, per-sample scoring, error
// classification, Base/OCR runs and report rendering.

#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <exception>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ocrforge/error.hpp"
#include "ocrforge/metrics.hpp"
#include "ocrforge/pipeline.hpp"
#include "ocrforge/prompting.hpp"
#include "ocrforge/vlm.hpp"

namespace ocrforge::bench {

inline constexpr std::string_view kToolkitVersion = "0.1.0";

enum class Task { kRecognition = 0, kScene = 1, kDocument = 2, kKie = 3 };
inline constexpr std::array<Task, 4> kTasks = {Task::kRecognition, Task::kScene,
                                               Task::kDocument, Task::kKie};

/// "recognition", "scene", "document", "kie".
std::string_view task_key(Task task);
/// "Recognition", "Scene", "Document", "KIE".
std::string_view task_title(Task task);
Task parse_task(std::string_view key);

enum class Language { kKo, kEn, kMixed };
Language parse_language(std::string_view key);
std::string_view language_key(Language language);

struct BenchSample {
  std::string id;
  std::string image_path;
  Task task = Task::kRecognition;
  std::string question;
  std::vector<std::string> answers;
  Language language = Language::kKo;
};

using TaskCounts = std::array<std::size_t, 4>;

struct Benchmark {
  std::vector<BenchSample> samples;
  TaskCounts counts{};
  std::filesystem::path images_root;

  std::size_t total() const { return samples.size(); }
  std::filesystem::path image_file(const BenchSample& sample) const;
};

class SchemaError : public ValidationError {
 public:
  SchemaError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DuplicateId : public ValidationError {
 public:
  explicit DuplicateId(const std::string& id)
      : ValidationError("duplicate sample id '" + id + "'"), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class MissingImage : public ValidationError {
 public:
  MissingImage(const std::string& id, const std::filesystem::path& path)
      : ValidationError("sample '" + id + "': image not found: " + path.string()), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

/// JSONL, one {"id", "image", "task", "question", "answers", "lang"} per line.
/// Images resolve against `images_root`; pass check_images=false to skip
/// the existence check.
Benchmark load_benchmark(const std::filesystem::path& path,
                         const std::filesystem::path& images_root = {},
                         bool check_images = true);
Benchmark parse_benchmark(std::istream& in, const std::filesystem::path& images_root = {},
                          bool check_images = false);

nlohmann::ordered_json to_json(const BenchSample& sample);

// ---------------------------------------------------------------------------
// Scoring

enum class ErrorCategory { kNone, kSpacingOnly, kNearMissSpelling, kRefusal, kOther };
std::string_view category_key(ErrorCategory category);
ErrorCategory parse_category(std::string_view key);

/// exact: normalized equality. relaxed: equality after also removing all
/// whitespace. contains: a normalized answer occurs inside the prediction.
enum class MatchRule { kExact, kRelaxed, kContains };
MatchRule parse_rule(std::string_view key);
std::string_view rule_key(MatchRule rule);

/// Built-in refusal phrases (Korean and English), matched case-insensitively
/// as substrings of the prediction.
std::vector<std::string> default_refusal_lexicon();
/// One phrase per line; blank lines and lines starting with '#' are skipped.
std::vector<std::string> read_refusal_lexicon(const std::filesystem::path& path);

struct ScoringPolicy {
  metrics::NormProfile profile = metrics::collapsed_nfc();
  MatchRule rule = MatchRule::kExact;
  std::vector<std::string> refusal_lexicon = default_refusal_lexicon();
};

struct Verdict {
  std::string id;
  Task task = Task::kRecognition;
  bool correct = false;
  std::optional<std::string> matched_answer;
  ErrorCategory error_category = ErrorCategory::kNone;
  std::string prediction;
};

Verdict score_sample(const std::string& prediction, const BenchSample& sample,
                     const ScoringPolicy& policy);

/// For predictions already scored incorrect: refusal, then spacing-only,
/// then near-miss spelling (edit distance to some answer at most
/// max(1, ceil(0.2 * answer length))), else other.
ErrorCategory classify_error(const std::string& prediction, const BenchSample& sample,
                             const ScoringPolicy& policy);

nlohmann::ordered_json to_json(const Verdict& verdict);
Verdict verdict_from_json(const nlohmann::json& j);
std::vector<Verdict> read_verdicts(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Reports

struct TaskTally {
  std::size_t samples = 0;
  std::size_t correct = 0;
  /// Correct once spacing-only errors are forgiven.
  std::size_t forgiven = 0;

  friend bool operator==(const TaskTally&, const TaskTally&) = default;
};

struct RunReport {
  std::array<TaskTally, 4> tasks{};
  TaskTally total;
  nlohmann::ordered_json manifest = nlohmann::ordered_json::object();

  const TaskTally& operator[](Task task) const { return tasks[static_cast<std::size_t>(task)]; }
  /// Throws ValidationError when the totals or bounds are inconsistent.
  void validate() const;
};

/// Per-task tallies; forgiven = strict correct + spacing-only count.
RunReport rescore_spacing(std::span<const Verdict> verdicts,
                          nlohmann::ordered_json manifest = nlohmann::ordered_json::object());

enum class ReportFormat { kText, kJson, kCsv };
ReportFormat parse_format(std::string_view key);

std::string emit_report(const RunReport& report, ReportFormat format);
RunReport report_from_json(const nlohmann::ordered_json& j);
RunReport read_report(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Runs

struct OcrSetup {
  pipeline::RecognizerBackend* backend = nullptr;
  /// Keyed by the sample's "image" field. Images without an entry have no boxes.
  std::map<std::string, std::vector<pipeline::TextBox>> boxes;
  pipeline::OcrOptions options;
};

struct RunOptions {
  prompting::PromptMode mode = prompting::PromptMode::kBase;
  prompting::PromptTemplate templ;
  ScoringPolicy policy;
  vlm::ModelEndpoint endpoint;
  std::size_t concurrency = 4;
  bool attach_image = true;
  /// When set, every per-sample artifact and the report are written here.
  std::optional<std::filesystem::path> run_dir;
  /// Merged into the manifest under "config".
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
};

struct RunResult {
  RunReport report;
  std::vector<Verdict> verdicts;  // sorted by sample id
};

/// A sample failed for an environmental reason (endpoint, backend).
/// Completed samples are already persisted when this is thrown.
class SampleFailure : public EnvironmentError {
 public:
  SampleFailure(std::string sample_id, std::exception_ptr cause, const std::string& what);
  const std::string& sample_id() const { return sample_id_; }
  std::exception_ptr cause() const { return cause_; }

 private:
  std::string sample_id_;
  std::exception_ptr cause_;
};

nlohmann::ordered_json make_manifest(const RunOptions& options, const OcrSetup* ocr);

RunResult run_benchmark(const Benchmark& benchmark, const RunOptions& options,
                        vlm::CompletionSource& model, const OcrSetup* ocr = nullptr);

/// Sample ids made safe for file names.
std::string artifact_name(const std::string& sample_id);

}  // namespace ocrforge::bench
