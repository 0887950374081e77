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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any fails. Every threshold is a constant below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ocrforge/benchmark.hpp"
#include "ocrforge/dataprep.hpp"
#include "ocrforge/detect.hpp"
#include "ocrforge/metrics.hpp"
#include "ocrforge/pipeline.hpp"
#include "test_support.hpp"

namespace ocrforge::acceptance {
namespace {

using Clock = std::chrono::steady_clock;
using geometry::Point2d;
using nlohmann::json;

// Pinned thresholds.
constexpr int kExhaustiveMaxLen = 5;
constexpr std::size_t kRandomUnicodePairs = 1000;
constexpr double kEditDistanceBudgetS = 10.0;
constexpr std::size_t kCerIdentityStrings = 1000;
constexpr double kOcrDirectionBudgetS = 5.0;
constexpr std::size_t kOcrDirectionSamples = 20;
constexpr std::size_t kDetectionMaps = 200;
constexpr int kDetectionMaxSide = 32;
constexpr double kScoreTolerance = 1e-9;
constexpr int kRotationTolerance = 1;
constexpr std::size_t kSplitImages = 100;
constexpr double kSplitFraction = 0.2;
constexpr std::size_t kSplitExpectedTest = 20;

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome pass(std::string detail) { return {true, std::move(detail)}; }
Outcome fail(std::string detail) { return {false, std::move(detail)}; }

// ---------------------------------------------------------------------------
// Metric kernel

std::size_t dp_oracle(const std::u32string& a, const std::u32string& b) {
  std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) t[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) t[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      t[i][j] = std::min({t[i - 1][j] + 1, t[i][j - 1] + 1,
                          t[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
  }
  return t[a.size()][b.size()];
}

std::vector<std::u32string> all_strings(int max_len) {
  std::vector<std::u32string> out = {U""};
  std::size_t begin = 0;
  for (int len = 1; len <= max_len; ++len) {
    const std::size_t end = out.size();
    for (std::size_t i = begin; i < end; ++i) {
      for (char32_t c : {U'a', U'b', U'c'}) out.push_back(out[i] + c);
    }
    begin = end;
  }
  return out;
}

// Scalar values from several scripts, including astral ones; no surrogates.
char32_t random_scalar(std::mt19937_64& rng) {
  static const std::vector<std::pair<char32_t, char32_t>> ranges = {
      {0x20, 0x7E}, {0xAC00, 0xD7A3}, {0x1100, 0x11FF}, {0x4E00, 0x4FFF}, {0x0300, 0x036F},
      {0x0391, 0x03C9}, {0x1F600, 0x1F64F}, {0x3000, 0x303F}};
  const auto& [lo, hi] = ranges[std::uniform_int_distribution<std::size_t>(0, ranges.size() - 1)(rng)];
  return static_cast<char32_t>(std::uniform_int_distribution<std::uint32_t>(lo, hi)(rng));
}

std::u32string random_unicode(std::mt19937_64& rng, std::size_t max_len) {
  std::u32string s(std::uniform_int_distribution<std::size_t>(0, max_len)(rng), U' ');
  for (auto& c : s) c = random_scalar(rng);
  return s;
}

Outcome edit_distance_oracle() {
  const auto start = Clock::now();
  const auto strings = all_strings(kExhaustiveMaxLen);
  std::size_t pairs = 0;
  std::size_t mismatches = 0;
  for (const auto& a : strings) {
    for (const auto& b : strings) {
      ++pairs;
      if (metrics::edit_distance(a, b) != dp_oracle(a, b)) ++mismatches;
    }
  }
  std::mt19937_64 rng(20261016);
  for (std::size_t i = 0; i < kRandomUnicodePairs; ++i) {
    const auto a = random_unicode(rng, 40);
    const auto b = random_unicode(rng, 40);
    const auto want = dp_oracle(a, b);
    ++pairs;
    if (metrics::edit_distance(a, b) != want) ++mismatches;
    if (metrics::edit_distance_utf8(metrics::to_utf8(a), metrics::to_utf8(b)) != want) ++mismatches;
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  std::ostringstream d;
  d << pairs << " pairs, " << mismatches << " mismatches, " << secs << " s (limit "
    << kEditDistanceBudgetS << " s)";
  return mismatches == 0 && secs < kEditDistanceBudgetS ? pass(d.str()) : fail(d.str());
}

Outcome cer_semantics() {
  const auto r = metrics::cer("abcd", "a", metrics::exact_nfc());
  if (r.cer != 3.0) return fail("cer(\"abcd\", \"a\") = " + std::to_string(r.cer));
  std::mt19937_64 rng(7);
  for (std::size_t i = 0; i < kCerIdentityStrings; ++i) {
    std::u32string s;
    do {
      s = random_unicode(rng, 30);
    } while (s.empty());
    const std::string x = metrics::to_utf8(s);
    const auto self = metrics::cer(x, x, metrics::exact_nfc());
    if (self.cer != 0.0) return fail("cer(x, x) = " + std::to_string(self.cer) + " for string " + std::to_string(i));
  }
  return pass("cer(\"abcd\", \"a\") = 3 exactly; cer(x, x) = 0 on " +
              std::to_string(kCerIdentityStrings) + " random strings");
}

// ---------------------------------------------------------------------------
// Benchmark arithmetic

constexpr bench::TaskCounts kTaskSizes = {22, 70, 29, 129};

std::string benchmark_line(const std::string& id, bench::Task task, const std::string& answer) {
  return json{{"id", id},
              {"image", id + ".png"},
              {"task", bench::task_key(task)},
              {"question", "question " + id},
              {"answers", json::array({answer})},
              {"lang", "ko"}}
             .dump();
}

// Verdicts with the given strict-correct and spacing-only counts per task,
// produced by scoring synthetic predictions.
std::vector<bench::Verdict> scored_run(const bench::TaskCounts& correct,
                                       const bench::TaskCounts& spacing) {
  const bench::ScoringPolicy policy;
  std::vector<bench::Verdict> out;
  for (bench::Task task : bench::kTasks) {
    const auto t = static_cast<std::size_t>(task);
    for (std::size_t i = 0; i < kTaskSizes[t]; ++i) {
      bench::BenchSample s;
      s.id = std::string(bench::task_key(task)) + "-" + std::to_string(i);
      s.task = task;
      s.answers = {"합계금액"};
      std::string prediction = "영수증번호";
      if (i < correct[t]) {
        prediction = "합계금액";
      } else if (i < correct[t] + spacing[t]) {
        prediction = "합계 금액";
      }
      out.push_back(bench::score_sample(prediction, s, policy));
    }
  }
  return out;
}

Outcome table_arithmetic() {
  std::string text;
  for (bench::Task task : bench::kTasks) {
    for (std::size_t i = 0; i < kTaskSizes[static_cast<std::size_t>(task)]; ++i) {
      text += benchmark_line(std::string(bench::task_key(task)) + "-" + std::to_string(i), task, "x") + "\n";
    }
  }
  std::istringstream in(text);
  const auto b = bench::parse_benchmark(in);
  if (b.total() != 250 || b.counts != kTaskSizes) {
    return fail("benchmark loads to " + std::to_string(b.total()) + " samples");
  }

  const auto report = bench::rescore_spacing(scored_run({21, 65, 22, 104}, {0, 0, 0, 0}),
                                             {{"model", "fixture"}, {"mode", "OCR"}});
  report.validate();
  const auto table = bench::emit_report(report, bench::ReportFormat::kText);
  // Second line is the model row; its last cell is the total.
  std::istringstream lines(table);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  const std::string total_cell = row.substr(row.find_last_of(' ') + 1);
  if (report.total.correct != 212 || total_cell != "212") {
    return fail("report row total is '" + total_cell + "'");
  }
  return pass("250 samples (22/70/29/129); report row total 212");
}

Outcome spacing_rescore() {
  // KIE: 70 strict + 25 spacing-only; other tasks contribute 114 strict.
  const auto verdicts = scored_run({21, 65, 28, 70}, {0, 0, 0, 25});
  testing::TempDir dir;
  std::string lines;
  for (const auto& v : verdicts) lines += bench::to_json(v).dump() + "\n";
  write_file(dir / "verdicts.jsonl", lines);
  write_file(dir / "manifest.json", R"({"model": "fixture", "mode": "OCR"})");
  const auto r = testing::run_cli({"rescore", "--verdicts", (dir / "verdicts.jsonl").string(),
                                   "--manifest", (dir / "manifest.json").string(), "--format",
                                   "json"});
  if (r.code != 0) return fail("rescore exited " + std::to_string(r.code) + ": " + r.err);
  const auto report = bench::report_from_json(nlohmann::ordered_json::parse(r.out));
  const auto& kie = report[bench::Task::kKie];
  std::ostringstream d;
  d << "KIE " << kie.correct << "(" << kie.forgiven << "), total " << report.total.correct << "("
    << report.total.forgiven << ")";
  const auto text = bench::emit_report(report, bench::ReportFormat::kText);
  const bool ok = kie.correct == 70 && kie.forgiven == 95 && report.total.correct == 184 &&
                  report.total.forgiven == 209 && text.find("70(95)") != std::string::npos &&
                  text.find("184(209)") != std::string::npos;
  return ok ? pass(d.str()) : fail(d.str());
}

// ---------------------------------------------------------------------------
// OCR augmentation direction

Outcome ocr_direction() {
  const auto start = Clock::now();
  testing::TempDir dir;
  std::vector<std::string> gold;
  std::string text;
  for (std::size_t i = 0; i < kOcrDirectionSamples; ++i) {
    const std::string id = "s" + std::to_string(100 + i);
    gold.push_back("금액" + std::to_string(1000 * (i + 1)) + "원");
    // Pixel value encodes the sample index for the stub recognizer.
    const auto value = static_cast<int>(10 * i + 5);
    write_png(dir / (id + ".png"), testing::gray_image(24, 12, [&](int, int) { return value; }));
    text += benchmark_line(id, bench::kTasks[i % 4], gold.back()) + "\n";
  }
  write_file(dir / "bench.jsonl", text);
  const auto benchmark = bench::load_benchmark(dir / "bench.jsonl", dir.path());

  // Answers correctly exactly when the gold string is in the prompt.
  testing::FnSource model([&](const std::string& prompt) -> std::string {
    for (const auto& g : gold) {
      if (prompt.find(g) != std::string::npos) return g;
    }
    return "모르겠습니다";
  });
  pipeline::StubBackend backend({"gold-stub", {"ko"}, 8}, [&](const Image& crop) {
    const auto index = static_cast<std::size_t>(crop.planes[0](0, 0) / 10);
    return pipeline::Recognition{gold.at(index), 1.0};
  });
  bench::OcrSetup ocr;
  ocr.backend = &backend;
  for (const auto& s : benchmark.samples) {
    ocr.boxes[s.image_path] = {
        {{Point2d(2, 2), Point2d(20, 2), Point2d(20, 10), Point2d(2, 10)}, 1.0}};
  }

  bench::RunOptions options;
  options.endpoint.model_id = "direction-check";
  const auto base = bench::run_benchmark(benchmark, options, model);
  options.mode = prompting::PromptMode::kOcr;
  const auto with_ocr = bench::run_benchmark(benchmark, options, model, &ocr);
  const auto again = bench::run_benchmark(benchmark, options, model, &ocr);

  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  const bool deterministic = bench::emit_report(with_ocr.report, bench::ReportFormat::kJson) ==
                             bench::emit_report(again.report, bench::ReportFormat::kJson);
  std::ostringstream d;
  d << "Base " << base.report.total.correct << "/" << kOcrDirectionSamples << ", OCR "
    << with_ocr.report.total.correct << "/" << kOcrDirectionSamples << ", " << secs << " s (limit "
    << kOcrDirectionBudgetS << " s)";
  const bool ok = with_ocr.report.total.correct > base.report.total.correct && deterministic &&
                  secs < kOcrDirectionBudgetS;
  if (!deterministic) d << ", repeated OCR run differs";
  return ok ? pass(d.str()) : fail(d.str());
}

// ---------------------------------------------------------------------------
// Detection post-processing

// Plain BFS flood fill over 8-neighbours; returns each component's mean score.
std::vector<double> flood_fill_means(const detect::ProbMap& map, double bin_thresh) {
  const int h = static_cast<int>(map.rows()), w = static_cast<int>(map.cols());
  std::vector<char> seen(static_cast<std::size_t>(w * h), 0);
  std::vector<double> means;
  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      if (seen[y0 * w + x0] || !(map(y0, x0) > bin_thresh)) continue;
      double sum = 0.0;
      std::size_t n = 0;
      std::vector<std::pair<int, int>> queue = {{x0, y0}};
      seen[y0 * w + x0] = 1;
      for (std::size_t q = 0; q < queue.size(); ++q) {
        const auto [x, y] = queue[q];
        sum += map(y, x);
        ++n;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h || seen[ny * w + nx]) continue;
            if (!(map(ny, nx) > bin_thresh)) continue;
            seen[ny * w + nx] = 1;
            queue.emplace_back(nx, ny);
          }
        }
      }
      means.push_back(sum / static_cast<double>(n));
    }
  }
  return means;
}

Outcome detection_oracle() {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> side(1, kDetectionMaxSide);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t components = 0;
  for (std::size_t m = 0; m < kDetectionMaps; ++m) {
    const int h = side(rng), w = side(rng);
    const double density = 0.15 + 0.5 * unit(rng);
    detect::ProbMap map(h, w);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) map(y, x) = unit(rng) < density ? 0.3 + 0.7 * unit(rng) : 0.3 * unit(rng);
    }
    detect::DetectParams params;
    params.min_side = 1.0;
    params.box_thresh = 0.3 + 0.6 * unit(rng);

    const auto all = flood_fill_means(map, params.bin_thresh);
    std::vector<double> want;
    for (double s : all) {
      if (s >= params.box_thresh) want.push_back(s);
    }
    components += all.size();
    const auto boxes = detect::extract_boxes(map, params);
    std::vector<double> got;
    for (const auto& b : boxes) got.push_back(b.score);
    std::sort(want.begin(), want.end());
    std::sort(got.begin(), got.end());
    if (got.size() != want.size()) {
      return fail("map " + std::to_string(m) + ": " + std::to_string(got.size()) +
                  " boxes, oracle " + std::to_string(want.size()));
    }
    for (std::size_t i = 0; i < got.size(); ++i) {
      if (std::abs(got[i] - want[i]) > kScoreTolerance) {
        return fail("map " + std::to_string(m) + ": score " + std::to_string(got[i]) +
                    " vs oracle " + std::to_string(want[i]));
      }
    }
    if (static_cast<std::size_t>(detect::label_components(detect::binarize(map, params.bin_thresh)).count) !=
        all.size()) {
      return fail("map " + std::to_string(m) + ": label count differs from flood fill");
    }

    // A higher threshold never turns a pixel on.
    for (int k = 0; k < 5; ++k) {
      double t1 = unit(rng), t2 = unit(rng);
      if (t1 > t2) std::swap(t1, t2);
      const auto lo = detect::binarize(map, t1);
      const auto hi = detect::binarize(map, t2);
      if ((hi.cast<int>() > lo.cast<int>()).any()) return fail("map " + std::to_string(m) + ": binarize not monotone");
    }
  }
  return pass(std::to_string(kDetectionMaps) + " maps, " + std::to_string(components) +
              " components, counts and scores match");
}

// ---------------------------------------------------------------------------
// Crops

Outcome crop_identity() {
  std::mt19937_64 rng(5);
  const Image image = testing::gray_image(48, 40, [](int x, int y) { return (x * 37 + y * 11) % 256; });
  for (int trial = 0; trial < 200; ++trial) {
    const int x0 = std::uniform_int_distribution<int>(0, 46)(rng);
    const int y0 = std::uniform_int_distribution<int>(0, 38)(rng);
    const int x1 = std::uniform_int_distribution<int>(x0 + 1, 48)(rng);
    const int y1 = std::uniform_int_distribution<int>(y0 + 1, 40)(rng);
    const detect::TextBox box{{Point2d(x0, y0), Point2d(x1, y0), Point2d(x1, y1), Point2d(x0, y1)}, 1.0};
    const Image crop = pipeline::crop_region(image, box, pipeline::CropMode::kRectify);
    const Image want(Plane(image.planes[0].block(y0, x0, y1 - y0, x1 - x0)));
    if (!(crop == want)) {
      return fail("axis-aligned crop differs at trial " + std::to_string(trial));
    }
  }

  // Region x in [6, 30), y in [4, 14) of a gradient, read with its first
  // corner at the top-right: the crop is the region turned a quarter.
  const Image gradient = testing::gray_image(40, 20, [](int x, int y) { return 4 * x + 3 * y; });
  const int x0 = 6, x1 = 30, y0 = 4, y1 = 14;
  const detect::TextBox turned{{Point2d(x1, y0), Point2d(x1, y1), Point2d(x0, y1), Point2d(x0, y0)}, 1.0};
  const Image crop = pipeline::crop_region(gradient, turned);
  if (crop.width() != y1 - y0 || crop.height() != x1 - x0) {
    return fail("rotated crop is " + std::to_string(crop.width()) + "x" + std::to_string(crop.height()));
  }
  int worst = 0;
  for (int v = 0; v < crop.height(); ++v) {
    for (int u = 0; u < crop.width(); ++u) {
      const int want = gradient.planes[0](y0 + u, x1 - 1 - v);
      worst = std::max(worst, std::abs(int{crop.planes[0](v, u)} - want));
    }
  }
  // Turn it back with the opposite corner order and compare to the region.
  const int w = crop.width(), h = crop.height();
  const detect::TextBox back{{Point2d(0, h), Point2d(0, 0), Point2d(w, 0), Point2d(w, h)}, 1.0};
  const Image restored = pipeline::crop_region(crop, back);
  if (restored.width() != x1 - x0 || restored.height() != y1 - y0) return fail("round trip changed size");
  for (int y = 0; y < restored.height(); ++y) {
    for (int x = 0; x < restored.width(); ++x) {
      worst = std::max(worst, std::abs(int{restored.planes[0](y, x)} - int{gradient.planes[0](y0 + y, x0 + x)}));
    }
  }
  const std::string d = "200 axis-aligned crops exact; quarter turn round trip max error " +
                        std::to_string(worst) + " (limit " + std::to_string(kRotationTolerance) + ")";
  return worst <= kRotationTolerance ? pass(d) : fail(d);
}

// ---------------------------------------------------------------------------
// End-to-end determinism

Outcome run_determinism() {
  testing::TempDir dir;
  std::string text;
  vlm::ReplayStore store;
  const prompting::PromptTemplate templ;
  for (int i = 0; i < 8; ++i) {
    const std::string id = "d" + std::to_string(i);
    write_png(dir / (id + ".png"), testing::gray_image(6, 6, [i](int x, int y) { return i * 20 + x + y; }));
    const auto task = bench::kTasks[static_cast<std::size_t>(i) % 4];
    text += benchmark_line(id, task, "답" + std::to_string(i)) + "\n";
    const auto spec = prompting::build_prompt("question " + id, prompting::PromptMode::kBase, nullptr, templ);
    const auto messages = prompting::render_messages(spec, prompting::ImageAttachment::from_file(dir / (id + ".png")));
    // Alternate right, spacing-only and wrong answers.
    const std::string answer = i % 3 == 0 ? "답" + std::to_string(i) : i % 3 == 1 ? "답 " + std::to_string(i) : "오답";
    store.put({vlm::request_digest("replayed", messages, false), answer, 10.0 + i, false});
  }
  write_file(dir / "bench.jsonl", text);
  store.save(dir / "replay.jsonl");

  auto args = [&](const std::string& name) {
    return std::vector<std::string>{"eval-vqa", "--benchmark", (dir / "bench.jsonl").string(),
                                    "--images-root", dir.path().string(), "--model", "replayed",
                                    "--replay", (dir / "replay.jsonl").string(), "--run-dir",
                                    (dir / "runs").string(), "--run-name", name};
  };
  for (const char* name : {"first", "second"}) {
    const auto r = testing::run_cli(args(name));
    if (r.code != 0) return fail(std::string(name) + " run exited " + std::to_string(r.code) + ": " + r.err);
  }
  for (const char* file : {"report.json", "report.txt", "verdicts.jsonl", "manifest.json"}) {
    if (read_file(dir / "runs/first" / file) != read_file(dir / "runs/second" / file)) {
      return fail(std::string(file) + " differs between runs");
    }
  }
  return pass("two replayed eval-vqa runs: report, verdicts and manifest byte-identical");
}

// ---------------------------------------------------------------------------
// Splits

Outcome split_integrity() {
  testing::TempDir dir;
  std::string ann;
  for (std::size_t i = 0; i < kSplitImages; ++i) {
    const std::string name = "img" + std::to_string(i) + ".png";
    write_png(dir / name, testing::gray_image(10, 6, [i](int x, int) { return static_cast<int>(i) + x; }));
    ann += json{{"image", name},
                {"regions", json::array({{{"quad", {{1, 1}, {9, 1}, {9, 5}, {1, 5}}},
                                          {"text", "t" + std::to_string(i)}}})}}
               .dump() +
           "\n";
  }
  write_file(dir / "ann.jsonl", ann);
  for (const char* out : {"a", "b"}) {
    const auto r = testing::run_cli({"prep", "--annotations", (dir / "ann.jsonl").string(),
                                     "--images-root", dir.path().string(), "--out",
                                     (dir / out).string(), "--test-fraction",
                                     std::to_string(kSplitFraction), "--seed", "1234"});
    if (r.code != 0) return fail("prep exited " + std::to_string(r.code) + ": " + r.err);
  }
  const auto train = dataprep::read_manifest(dir / "a/train.jsonl");
  const auto test = dataprep::read_manifest(dir / "a/test.jsonl");
  std::set<std::string> train_sources, test_sources;
  for (const auto& e : train.entries) train_sources.insert(e.source);
  for (const auto& e : test.entries) test_sources.insert(e.source);
  std::size_t overlap = 0;
  for (const auto& s : test_sources) overlap += train_sources.count(s);
  const bool stable = read_file(dir / "a/test.jsonl") == read_file(dir / "b/test.jsonl") &&
                      read_file(dir / "a/train.jsonl") == read_file(dir / "b/train.jsonl");
  std::ostringstream d;
  d << test.entries.size() << " test / " << train.entries.size() << " train, overlap " << overlap
    << (stable ? ", identical on re-run" : ", differs on re-run");
  const bool ok = test.entries.size() == kSplitExpectedTest &&
                  train.entries.size() == kSplitImages - kSplitExpectedTest && overlap == 0 && stable;
  return ok ? pass(d.str()) : fail(d.str());
}

}  // namespace
}  // namespace ocrforge::acceptance

int main() {
  using namespace ocrforge::acceptance;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"metric kernel correctness", edit_distance_oracle},
      {"cer semantics", cer_semantics},
      {"task table arithmetic", table_arithmetic},
      {"spacing rescoring", spacing_rescore},
      {"ocr augmentation direction", ocr_direction},
      {"detection post-processing oracle", detection_oracle},
      {"crop identity", crop_identity},
      {"run determinism", run_determinism},
      {"split integrity", split_integrity},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
