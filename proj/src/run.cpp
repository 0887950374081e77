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

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

#include "ocrforge/benchmark.hpp"
#include "ocrforge/codec.hpp"
#include "ocrforge/image.hpp"

namespace ocrforge::bench {

using nlohmann::ordered_json;

SampleFailure::SampleFailure(std::string sample_id, std::exception_ptr cause,
                             const std::string& what)
    : EnvironmentError("sample '" + sample_id + "': " + what),
      sample_id_(std::move(sample_id)),
      cause_(std::move(cause)) {}

std::string artifact_name(const std::string& sample_id) {
  std::string out;
  out.reserve(sample_id.size());
  for (unsigned char c : sample_id) {
    const bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                      (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
    out += safe ? static_cast<char>(c) : '_';
  }
  if (out.empty() || out.front() == '.') out.insert(out.begin(), '_');
  // Distinct ids must not collide once sanitized.
  if (out != sample_id) out += "-" + codec::sha256_hex(sample_id).substr(0, 8);
  return out;
}

ordered_json make_manifest(const RunOptions& options, const OcrSetup* ocr) {
  ordered_json m;
  m["toolkit_version"] = kToolkitVersion;
  m["model"] = options.endpoint.model_id;
  m["mode"] = prompting::mode_name(options.mode);
  m["templates"] = {{"ocr_label", options.templ.ocr_label},
                    {"instruction", options.templ.instruction}};
  m["endpoint"] = options.endpoint.to_json();
  m["scoring"] = {{"profile", options.policy.profile.name},
                  {"profile_steps", metrics::describe_profile(options.policy.profile)},
                  {"rule", rule_key(options.policy.rule)},
                  {"refusal_lexicon", options.policy.refusal_lexicon}};
  if (options.mode == prompting::PromptMode::kOcr && ocr != nullptr) {
    std::size_t images_with_boxes = 0;
    for (const auto& [image, boxes] : ocr->boxes) images_with_boxes += boxes.empty() ? 0 : 1;
    m["ocr"] = {{"backend", ocr->backend ? ocr->backend->capability().name : ""},
                {"crop_mode", ocr->options.crop_mode == pipeline::CropMode::kRectify
                                  ? "rectify"
                                  : "bbox"},
                {"order", ocr->options.order == pipeline::OrderPolicy::kReading ? "reading"
                                                                                : "input"},
                {"line_threshold", ocr->options.line_threshold},
                {"images_with_boxes", images_with_boxes}};
  } else {
    m["ocr"] = nullptr;
  }
  m["attach_image"] = options.attach_image;
  m["config"] = options.config;
  return m;
}

namespace {

std::string join_lines(const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) {
    if (!s.empty()) s += '\n';
    s += l;
  }
  return s;
}

struct SampleOutcome {
  bool done = false;
  Verdict verdict;
  ordered_json artifact;
  ordered_json prediction;
};

class Runner {
 public:
  Runner(const Benchmark& benchmark, const RunOptions& options, vlm::CompletionSource& model,
         const OcrSetup* ocr)
      : bench_(benchmark), options_(options), model_(model), ocr_(ocr) {}

  SampleOutcome run_one(const BenchSample& sample) {
    SampleOutcome out;
    std::optional<pipeline::OcrDocument> doc;
    bool had_boxes = false;
    if (options_.mode == prompting::PromptMode::kOcr) {
      doc = pipeline::OcrDocument{
          sample.id, {}, ocr_->options.order == pipeline::OrderPolicy::kReading ? "reading" : "input"};
      const auto it = ocr_->boxes.find(sample.image_path);
      if (it != ocr_->boxes.end() && !it->second.empty()) {
        had_boxes = true;
        const Image image = read_png(bench_.image_file(sample));
        doc = pipeline::run_ocr(sample.id, image, it->second, *ocr_->backend, ocr_->options);
      }
    }
    const auto spec =
        prompting::build_prompt(sample.question, options_.mode, doc ? &*doc : nullptr,
                                options_.templ);
    std::optional<prompting::ImageAttachment> attachment;
    if (options_.attach_image) {
      attachment = prompting::ImageAttachment::from_file(bench_.image_file(sample));
    }
    const auto messages = prompting::render_messages(spec, attachment);

    std::string digest;
    std::string response;
    double latency_ms = 0.0;
    bool refused = false;
    try {
      const auto record = model_.complete(messages, options_.endpoint);
      digest = record.digest;
      response = record.response;
      latency_ms = record.latency_ms;
    } catch (const vlm::ContentRefused& e) {
      digest = e.digest();
      refused = true;
    }

    if (refused) {
      out.verdict = {sample.id, sample.task, false, std::nullopt, ErrorCategory::kRefusal, ""};
    } else {
      out.verdict = score_sample(response, sample, options_.policy);
    }

    const std::string ocr_text = doc ? join_lines(doc->texts()) : std::string();
    out.prediction = {{"id", sample.id},
                      {"prediction", response},
                      {"mode", prompting::mode_name(options_.mode)},
                      {"model", options_.endpoint.model_id},
                      {"ocr_text", ocr_text},
                      {"latency_ms", latency_ms}};
    out.artifact = {{"sample", to_json(sample)},
                    {"ocr", doc ? pipeline::to_json(*doc) : ordered_json()},
                    {"ocr_had_boxes", had_boxes},
                    {"prompt", prompting::render_text(spec)},
                    {"image", attachment ? ordered_json(attachment->mime_type) : ordered_json()},
                    {"digest", digest},
                    {"response", response},
                    {"refused", refused},
                    {"latency_ms", latency_ms},
                    {"verdict", to_json(out.verdict)}};
    out.done = true;
    return out;
  }

 private:
  const Benchmark& bench_;
  const RunOptions& options_;
  vlm::CompletionSource& model_;
  const OcrSetup* ocr_;
};

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::string body;
  for (const auto& l : lines) body += l + "\n";
  write_file(path, body);
}

void persist(const std::filesystem::path& dir, const ordered_json& manifest,
             const std::vector<const BenchSample*>& order, const std::vector<SampleOutcome>& outs,
             const RunReport* report) {
  std::filesystem::create_directories(dir / "samples");
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  std::vector<std::string> predictions;
  std::vector<std::string> verdicts;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& o = outs[i];
    if (!o.done) continue;
    write_file(dir / "samples" / (artifact_name(order[i]->id) + ".json"),
               o.artifact.dump(2) + "\n");
    predictions.push_back(o.prediction.dump());
    verdicts.push_back(to_json(o.verdict).dump());
  }
  write_lines(dir / "predictions.jsonl", predictions);
  write_lines(dir / "verdicts.jsonl", verdicts);
  if (report != nullptr) {
    write_file(dir / "report.json", emit_report(*report, ReportFormat::kJson));
    write_file(dir / "report.txt", emit_report(*report, ReportFormat::kText));
  }
}

}  // namespace

RunResult run_benchmark(const Benchmark& benchmark, const RunOptions& options,
                        vlm::CompletionSource& model, const OcrSetup* ocr) {
  options.endpoint.validate();
  if (options.mode == prompting::PromptMode::kOcr && (ocr == nullptr || ocr->backend == nullptr)) {
    throw prompting::MissingOcr();
  }

  // Aggregation always follows id order, whatever order workers finish in.
  std::vector<const BenchSample*> order;
  order.reserve(benchmark.samples.size());
  for (const auto& s : benchmark.samples) order.push_back(&s);
  std::sort(order.begin(), order.end(),
            [](const BenchSample* a, const BenchSample* b) { return a->id < b->id; });

  const ordered_json manifest = make_manifest(options, ocr);
  std::vector<SampleOutcome> outcomes(order.size());
  Runner runner(benchmark, options, model, ocr);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex failure_mutex;
  std::size_t failed_index = order.size();
  std::exception_ptr failure;

  auto worker = [&] {
    while (!stop.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= order.size()) return;
      try {
        outcomes[i] = runner.run_one(*order[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        // Keep the lowest failing index so the reported sample is stable.
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
        stop = true;
      }
    }
  };

  const std::size_t threads =
      std::clamp<std::size_t>(options.concurrency, 1, std::max<std::size_t>(order.size(), 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  if (failure) {
    if (options.run_dir) persist(*options.run_dir, manifest, order, outcomes, nullptr);
    const std::string& id = order[failed_index]->id;
    try {
      std::rethrow_exception(failure);
    } catch (const ValidationError& e) {
      throw ValidationError("sample '" + id + "': " + e.what());
    } catch (const std::exception& e) {
      throw SampleFailure(id, failure, e.what());
    }
  }

  RunResult result;
  result.verdicts.reserve(order.size());
  for (auto& o : outcomes) result.verdicts.push_back(o.verdict);
  result.report = rescore_spacing(result.verdicts, manifest);
  result.report.validate();
  if (options.run_dir) persist(*options.run_dir, manifest, order, outcomes, &result.report);
  return result;
}

}  // namespace ocrforge::bench
