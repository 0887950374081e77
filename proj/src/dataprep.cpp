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

#include "ocrforge/dataprep.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <thread>

#include "ocrforge/image.hpp"
#include "ocrforge/pipeline.hpp"

namespace ocrforge::dataprep {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<AnnotationRecord> read_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw EnvironmentError("cannot open annotations " + path.string());
  std::vector<AnnotationRecord> records;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
    try {
      const json j = json::parse(line);
      AnnotationRecord rec;
      rec.image_path = j.at("image").get<std::string>();
      for (const auto& r : j.at("regions")) {
        rec.regions.push_back({detect::quad_from_json(r.at("quad")), r.value("text", "")});
      }
      records.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw ValidationError(where + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
  }
  return records;
}

std::string_view split_key(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kTest:
      return "test";
    case Split::kUnsplit:
      break;
  }
  return "unsplit";
}

namespace {

struct RecordOutput {
  std::vector<PairEntry> entries;
  CropStats stats;
};

RecordOutput crop_record(std::size_t index, const AnnotationRecord& rec,
                         const std::filesystem::path& out_dir,
                         const std::filesystem::path& images_root) {
  std::filesystem::path source(rec.image_path);
  if (!source.is_absolute() && !images_root.empty()) source = images_root / source;
  if (!std::filesystem::is_regular_file(source)) throw MissingImage(source);
  const Image image = read_png(source);

  RecordOutput out;
  const std::string stem = std::filesystem::path(rec.image_path).stem().string();
  for (std::size_t r = 0; r < rec.regions.size(); ++r) {
    const auto& region = rec.regions[r];
    ++out.stats.regions;
    if (region.text.empty()) {
      ++out.stats.skipped_empty;
      continue;
    }
    detect::TextBox box{region.quad, 1.0};
    if (!geometry::is_simple(box.quad)) {
      ++out.stats.skipped_degenerate;
      continue;
    }
    if (geometry::signed_area(box.quad) < 0) box.quad = geometry::reversed(box.quad);
    Image crop;
    try {
      crop = pipeline::crop_region(image, box, pipeline::CropMode::kRectify);
    } catch (const pipeline::DegenerateBox&) {
      ++out.stats.skipped_degenerate;
      continue;
    }
    const std::string name =
        std::to_string(index) + "-" + stem + "-r" + std::to_string(r) + ".png";
    write_png(out_dir / "crops" / name, crop);
    out.entries.push_back({"crops/" + name, region.text, rec.image_path, static_cast<int>(r)});
    ++out.stats.written;
  }
  return out;
}

}  // namespace

CropResult crop_dataset(const std::vector<AnnotationRecord>& annotations,
                        const std::filesystem::path& out_dir,
                        const std::filesystem::path& images_root, std::size_t threads) {
  std::filesystem::create_directories(out_dir / "crops");
  std::vector<RecordOutput> outputs(annotations.size());
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::size_t failed_index = annotations.size();
  std::exception_ptr failure;

  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < annotations.size();) {
      try {
        outputs[i] = crop_record(i, annotations[i], out_dir, images_root);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  const std::size_t n = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(annotations.size(), 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  CropResult result;
  for (auto& o : outputs) {
    for (auto& e : o.entries) result.manifest.entries.push_back(std::move(e));
    result.stats.regions += o.stats.regions;
    result.stats.written += o.stats.written;
    result.stats.skipped_empty += o.stats.skipped_empty;
    result.stats.skipped_degenerate += o.stats.skipped_degenerate;
  }
  write_manifest(out_dir / "manifest.jsonl", result.manifest);
  return result;
}

void write_manifest(const std::filesystem::path& path, const PairManifest& manifest) {
  std::string body;
  for (const auto& e : manifest.entries) {
    const ordered_json j = {
        {"crop", e.crop}, {"text", e.text}, {"source", e.source}, {"region", e.region}};
    body += j.dump() + "\n";
  }
  write_file(path, body);
}

PairManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw EnvironmentError("cannot open manifest " + path.string());
  PairManifest manifest;
  std::set<std::string> crops;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    PairEntry e;
    try {
      const json j = json::parse(line);
      e = {j.at("crop").get<std::string>(), j.at("text").get<std::string>(),
           j.at("source").get<std::string>(), j.at("region").get<int>()};
    } catch (const json::exception& ex) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
    }
    if (!crops.insert(e.crop).second) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": duplicate crop path " + e.crop);
    }
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

namespace {

// Unbiased draw in [0, n); independent of the standard library's
// distribution implementations so splits agree across toolchains.
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

}  // namespace

std::pair<PairManifest, PairManifest> split(const PairManifest& manifest, double test_fraction,
                                            std::uint64_t seed, bool per_crop) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ValidationError("test fraction must lie strictly between 0 and 1");
  }
  // Groups in order of first appearance.
  std::vector<std::string> groups;
  std::map<std::string, std::size_t> group_of;
  std::vector<std::size_t> entry_group(manifest.entries.size());
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const std::string key = per_crop ? manifest.entries[i].crop : manifest.entries[i].source;
    const auto [it, inserted] = group_of.emplace(key, groups.size());
    if (inserted) groups.push_back(key);
    entry_group[i] = it->second;
  }
  const std::size_t g = groups.size();
  if (g < 2) throw TooFewGroups(g);

  std::vector<std::size_t> perm(g);
  for (std::size_t i = 0; i < g; ++i) perm[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = g - 1; i > 0; --i) {
    std::swap(perm[i], perm[draw_below(rng, i + 1)]);
  }
  const auto wanted = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(g)));
  const std::size_t n_test = std::clamp<std::size_t>(wanted, 1, g - 1);
  std::vector<bool> is_test(g, false);
  for (std::size_t k = 0; k < n_test; ++k) is_test[perm[k]] = true;

  PairManifest train{{}, Split::kTrain};
  PairManifest test{{}, Split::kTest};
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    (is_test[entry_group[i]] ? test : train).entries.push_back(manifest.entries[i]);
  }
  return {std::move(train), std::move(test)};
}

}  // namespace ocrforge::dataprep
