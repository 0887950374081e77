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

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace ocrforge::config {
namespace {

TEST(ConfigTest, Defaults) {
  const RunConfig c;
  EXPECT_EQ(c.profile().name, "collapsed-nfc");
  EXPECT_EQ(c.endpoint.temperature, 0.0);
  EXPECT_EQ(c.mode, prompting::PromptMode::kBase);
  EXPECT_EQ(c.replay_mode, ReplayMode::kReplay);
}

TEST(ConfigTest, ApplyTextSetsTypedValues) {
  RunConfig c;
  apply_text(c,
             "# run settings\n"
             "endpoint.model = \"qwen2.5-vl-7b\"\n"
             "mode = ocr\n"
             "\n"
             "detect.box_thresh = 0.6\n"
             "endpoint.thinking = true\n"
             "endpoint.dialect = vllm\n"
             "ocr.crop_mode = bbox\n"
             "prompt.ocr_label = \"OCR = tokens:\"\n"
             "concurrency = 2\n");
  EXPECT_EQ(c.endpoint.model_id, "qwen2.5-vl-7b");
  EXPECT_EQ(c.mode, prompting::PromptMode::kOcr);
  EXPECT_DOUBLE_EQ(c.detect.box_thresh, 0.6);
  EXPECT_TRUE(c.endpoint.thinking);
  EXPECT_EQ(c.endpoint.dialect, vlm::Dialect::kVllm);
  EXPECT_EQ(c.ocr.crop_mode, pipeline::CropMode::kBoundingBox);
  EXPECT_EQ(c.templ.ocr_label, "OCR = tokens:");
  EXPECT_EQ(c.concurrency, 2u);
}

TEST(ConfigTest, ErrorsNameTheLine) {
  RunConfig c;
  try {
    apply_text(c, "mode = ocr\nendpoint.modle = x\n", "run.cfg");
    FAIL() << "expected UnknownKey";
  } catch (const UnknownKey& e) {
    EXPECT_NE(std::string(e.what()).find("run.cfg:2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(apply_text(c, "mode\n"), ValidationError);
  EXPECT_THROW(c.set("concurrency", "many"), ValidationError);
  EXPECT_THROW(c.set("endpoint.thinking", "maybe"), ValidationError);
  EXPECT_THROW(c.set("mode", "vision"), ValidationError);
}

TEST(ConfigTest, UserProfiles) {
  RunConfig c;
  c.set("profile.loose", "composed fold none strip-all");
  c.set("scoring.profile", "loose");
  EXPECT_EQ(c.profile().casing, metrics::Casing::kFold);
  EXPECT_EQ(c.policy().profile.name, "loose");
  c.set("scoring.profile", "undefined");
  EXPECT_THROW(c.profile(), ValidationError);
  EXPECT_THROW(c.set("profile.bad", "composed"), ValidationError);
}

TEST(ConfigTest, RefusalLexiconFile) {
  testing::TempDir dir;
  write_file(dir / "lex.txt", "# custom\nnope\n\nno idea\n");
  RunConfig c;
  c.set("scoring.refusal_lexicon", (dir / "lex.txt").string());
  EXPECT_EQ(c.policy().refusal_lexicon, (std::vector<std::string>{"nope", "no idea"}));
}

TEST(ConfigTest, JsonOmitsOutputLocations) {
  RunConfig a;
  RunConfig b;
  b.set("run_dir", "/elsewhere");
  b.set("run_name", "named");
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
  EXPECT_FALSE(a.to_json().contains("run_dir"));
  b.set("endpoint.max_tokens", "64");
  EXPECT_NE(a.to_json().dump(), b.to_json().dump());
}

TEST(ConfigTest, EveryKnownKeyIsSettable) {
  // Each listed key accepts at least one of these values.
  const std::vector<std::string> candidates = {"1", "0.5", "true", "x", "ocr", "replay", "bbox",
                                               "reading", "exact", "generic"};
  for (const auto& [key, help] : known_keys()) {
    if (key.starts_with("profile.")) continue;
    RunConfig c;
    bool ok = false;
    for (const auto& v : candidates) {
      try {
        c.set(key, v);
        ok = true;
        break;
      } catch (const ValidationError&) {
      }
    }
    EXPECT_TRUE(ok) << key;
  }
}

TEST(ConfigTest, SplitAssignment) {
  EXPECT_EQ(split_assignment("a.b=c=d"), (std::pair<std::string, std::string>{"a.b", "c=d"}));
  EXPECT_EQ(split_assignment(" k = v "), (std::pair<std::string, std::string>{"k", "v"}));
  EXPECT_THROW(split_assignment("novalue"), ValidationError);
}

TEST(ConfigTest, MissingFileIsValidationError) {
  RunConfig c;
  EXPECT_THROW(apply_file(c, "/nonexistent/run.cfg"), ValidationError);
}

}  // namespace
}  // namespace ocrforge::config
