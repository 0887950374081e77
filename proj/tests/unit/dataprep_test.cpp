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

#include <gtest/gtest.h>

#include <map>
#include <set>

#include "ocrforge/image.hpp"
#include "test_support.hpp"

namespace ocrforge::dataprep {
namespace {

using geometry::Point2d;

geometry::Quad2d rect(double x0, double y0, double x1, double y1) {
  return {Point2d(x0, y0), Point2d(x1, y0), Point2d(x1, y1), Point2d(x0, y1)};
}

PairManifest pages(int sources, int per_source) {
  PairManifest m;
  for (int s = 0; s < sources; ++s) {
    for (int r = 0; r < per_source; ++r) {
      m.entries.push_back({"crops/" + std::to_string(s) + "-" + std::to_string(r) + ".png",
                           "t", "page" + std::to_string(s) + ".png", r});
    }
  }
  return m;
}

std::set<std::string> sources(const PairManifest& m) {
  std::set<std::string> out;
  for (const auto& e : m.entries) out.insert(e.source);
  return out;
}

TEST(CropDatasetTest, WritesCropsAndManifest) {
  testing::TempDir dir;
  write_png(dir / "page.png", testing::gray_image(40, 20, [](int x, int y) { return x + y; }));
  const std::vector<AnnotationRecord> annotations = {
      {"page.png",
       {{rect(0, 0, 10, 5), "합계"},
        {rect(10, 10, 30, 18), "45,000원"},
        {rect(0, 0, 5, 5), ""},
        {{Point2d(0, 0), Point2d(5, 5), Point2d(5, 0), Point2d(0, 5)}, "bow"}}}};
  const auto result = crop_dataset(annotations, dir / "out", dir.path());
  EXPECT_EQ(result.stats.regions, 4u);
  EXPECT_EQ(result.stats.written, 2u);
  EXPECT_EQ(result.stats.skipped_empty, 1u);
  EXPECT_EQ(result.stats.skipped_degenerate, 1u);
  ASSERT_EQ(result.manifest.entries.size(), 2u);
  EXPECT_EQ(result.manifest.entries[0], (PairEntry{"crops/0-page-r0.png", "합계", "page.png", 0}));
  EXPECT_EQ(result.manifest.entries[1].crop, "crops/0-page-r1.png");

  const Image crop = read_png(dir / "out/crops/0-page-r1.png");
  EXPECT_EQ(crop.width(), 20);
  EXPECT_EQ(crop.height(), 8);
  EXPECT_EQ(crop.planes[0](0, 0), 20);

  const auto back = read_manifest(dir / "out/manifest.jsonl");
  EXPECT_EQ(back.entries, result.manifest.entries);
}

TEST(CropDatasetTest, RerunIsByteIdentical) {
  testing::TempDir dir;
  write_png(dir / "a.png", testing::gray_image(16, 16, [](int x, int y) { return x * y; }));
  write_png(dir / "b.png", testing::gray_image(16, 16, [](int x, int) { return 255 - x; }));
  std::vector<AnnotationRecord> annotations;
  for (const char* name : {"a.png", "b.png"}) {
    annotations.push_back({name, {{rect(1, 1, 9, 5), "x"}, {rect(2, 8, 14, 12), "y"}}});
  }
  crop_dataset(annotations, dir / "one", dir.path(), 1);
  crop_dataset(annotations, dir / "two", dir.path(), 4);
  EXPECT_EQ(read_file(dir / "one/manifest.jsonl"), read_file(dir / "two/manifest.jsonl"));
  EXPECT_EQ(read_file(dir / "one/crops/1-b-r1.png"), read_file(dir / "two/crops/1-b-r1.png"));
}

TEST(CropDatasetTest, MissingImageThrows) {
  testing::TempDir dir;
  EXPECT_THROW(crop_dataset({{"nope.png", {{rect(0, 0, 4, 4), "x"}}}}, dir / "out", dir.path()),
               MissingImage);
}

TEST(AnnotationsTest, ParsesRegions) {
  testing::TempDir dir;
  write_file(dir / "ann.jsonl",
             R"({"image": "p.png", "regions": [{"quad": [[0,0],[4,0],[4,2],[0,2]], "text": "hi"}]})"
             "\n");
  const auto records = read_annotations(dir / "ann.jsonl");
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].regions[0].text, "hi");
  EXPECT_EQ(records[0].regions[0].quad[2], Point2d(4, 2));
  write_file(dir / "bad.jsonl", R"({"image": "p.png", "regions": [{"quad": [[0,0]]}]})");
  EXPECT_THROW(read_annotations(dir / "bad.jsonl"), ValidationError);
}

TEST(ManifestTest, DuplicateCropIsRejected) {
  testing::TempDir dir;
  PairManifest m = pages(1, 1);
  m.entries.push_back(m.entries[0]);
  write_manifest(dir / "m.jsonl", m);
  EXPECT_THROW(read_manifest(dir / "m.jsonl"), ValidationError);
}

TEST(SplitTest, GroupsBySourcePage) {
  const auto manifest = pages(10, 3);
  const auto [train, test] = split(manifest, 0.2, 7);
  EXPECT_EQ(sources(train).size(), 8u);
  EXPECT_EQ(sources(test).size(), 2u);
  EXPECT_EQ(train.entries.size() + test.entries.size(), 30u);
  for (const auto& s : sources(test)) EXPECT_EQ(sources(train).count(s), 0u) << s;
  EXPECT_EQ(train.split, Split::kTrain);
  EXPECT_EQ(test.split, Split::kTest);
}

TEST(SplitTest, DeterministicPerSeedAndOrderPreserving) {
  const auto manifest = pages(20, 2);
  const auto a = split(manifest, 0.25, 11);
  const auto b = split(manifest, 0.25, 11);
  EXPECT_EQ(a.second.entries, b.second.entries);
  const auto c = split(manifest, 0.25, 12);
  EXPECT_NE(a.second.entries, c.second.entries);
  // Entries appear in manifest order on both sides.
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) position[manifest.entries[i].crop] = i;
  for (const auto* side : {&a.first, &a.second}) {
    for (std::size_t i = 1; i < side->entries.size(); ++i) {
      EXPECT_LT(position.at(side->entries[i - 1].crop), position.at(side->entries[i].crop));
    }
  }
}

TEST(SplitTest, PerCropIgnoresPages) {
  const auto [train, test] = split(pages(1, 10), 0.3, 1, true);
  EXPECT_EQ(test.entries.size(), 3u);
  EXPECT_EQ(train.entries.size(), 7u);
}

TEST(SplitTest, ClampsToAtLeastOneOnEachSide) {
  EXPECT_EQ(split(pages(3, 1), 0.01, 1).second.entries.size(), 1u);
  EXPECT_EQ(split(pages(3, 1), 0.99, 1).first.entries.size(), 1u);
}

TEST(SplitTest, RejectsBadInput) {
  EXPECT_THROW(split(pages(1, 5), 0.2, 1), TooFewGroups);
  EXPECT_THROW(split(pages(4, 1), 0.0, 1), ValidationError);
  EXPECT_THROW(split(pages(4, 1), 1.0, 1), ValidationError);
}

}  // namespace
}  // namespace ocrforge::dataprep
