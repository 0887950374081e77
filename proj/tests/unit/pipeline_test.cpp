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

#include "ocrforge/pipeline.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <thread>

#include "test_support.hpp"

namespace ocrforge::pipeline {
namespace {

using geometry::Point2d;
using geometry::Quad2d;

TextBox rect(double x0, double y0, double x1, double y1) {
  return {Quad2d{Point2d(x0, y0), Point2d(x1, y0), Point2d(x1, y1), Point2d(x0, y1)}, 1.0};
}

Image pattern(int w, int h) {
  return testing::gray_image(w, h, [](int x, int y) { return (x * 7 + y * 13) % 251; });
}

TEST(CropTest, RectifyAxisAlignedEqualsSubImage) {
  const Image image = pattern(20, 12);
  const Image rectified = crop_region(image, rect(0, 0, 10, 5), CropMode::kRectify);
  const Image bbox = crop_region(image, rect(0, 0, 10, 5), CropMode::kBoundingBox);
  ASSERT_EQ(rectified.width(), 10);
  ASSERT_EQ(rectified.height(), 5);
  EXPECT_EQ(rectified, bbox);
  EXPECT_TRUE((rectified.planes[0] == image.planes[0].block(0, 0, 5, 10)).all());
}

TEST(CropTest, KeepsColourChannels) {
  Image image(6, 4, 3);
  image.planes[1].setConstant(200);
  const Image crop = crop_region(image, rect(1, 1, 4, 3));
  ASSERT_EQ(crop.channels(), 3);
  EXPECT_TRUE((crop.planes[1] == 200).all());
  EXPECT_TRUE((crop.planes[0] == 0).all());
}

TEST(CropTest, DegenerateQuadThrows) {
  const Image image = pattern(8, 8);
  const TextBox flat{Quad2d{Point2d(1, 1), Point2d(5, 1), Point2d(5, 1.1), Point2d(1, 1.1)}, 1.0};
  EXPECT_THROW(crop_region(image, flat), DegenerateBox);
}

TEST(CropTest, ParseCropMode) {
  EXPECT_EQ(parse_crop_mode("bbox"), CropMode::kBoundingBox);
  EXPECT_EQ(parse_crop_mode("rectify"), CropMode::kRectify);
  EXPECT_THROW(parse_crop_mode("warp"), ValidationError);
}

TEST(OrderRegionsTest, ColumnAndLine) {
  const std::vector<TextBox> column = {rect(0, 20, 10, 30), rect(0, 0, 10, 10)};
  EXPECT_EQ(order_regions(column), (std::vector<std::size_t>{1, 0}));
  const std::vector<TextBox> line = {rect(20, 0, 30, 10), rect(0, 1, 10, 11)};
  EXPECT_EQ(order_regions(line), (std::vector<std::size_t>{1, 0}));
}

TEST(OrderRegionsTest, GridIsRowMajor) {
  const std::vector<TextBox> grid = {rect(50, 40, 90, 60), rect(0, 0, 40, 20), rect(0, 42, 40, 62),
                                     rect(50, 2, 90, 22)};
  EXPECT_EQ(order_regions(grid), (std::vector<std::size_t>{1, 3, 2, 0}));
}

TEST(OrderRegionsTest, InvariantUnderTranslationAndScale) {
  std::vector<TextBox> boxes = {rect(5, 5, 30, 15), rect(40, 7, 60, 17), rect(2, 30, 20, 40),
                                rect(25, 29, 45, 39), rect(3, 60, 10, 70)};
  const auto base = order_regions(boxes);
  auto sorted = base;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> identity(boxes.size());
  std::iota(identity.begin(), identity.end(), std::size_t{0});
  EXPECT_EQ(sorted, identity);
  for (auto& b : boxes) {
    for (auto& p : b.quad) p = p * 3.0 + Point2d(17, -4);
  }
  EXPECT_EQ(order_regions(boxes), base);
}

TEST(WireTest, RequestAndReplyRoundTrip) {
  const std::vector<Image> crops = {pattern(3, 2), pattern(5, 4)};
  const auto request = wire::parse_request(wire::encode_request("r7", crops));
  EXPECT_EQ(request.id, "r7");
  ASSERT_EQ(request.png_base64.size(), 2u);

  const std::vector<Recognition> results = {{"합계", 0.9}, {"", 0.0}};
  const auto reply = wire::parse_reply(wire::encode_reply("r7", results));
  EXPECT_EQ(reply.id, "r7");
  ASSERT_EQ(reply.results.size(), 2u);
  EXPECT_EQ(reply.results[0].text, "합계");
  EXPECT_FALSE(reply.error.has_value());

  const auto error = wire::parse_reply(wire::encode_error(std::nullopt, "bad line"));
  EXPECT_EQ(error.error, "bad line");
  EXPECT_THROW(wire::parse_reply("{not json"), BackendProtocolError);
}

TEST(WireTest, CapabilityRoundTrip) {
  const auto c = wire::parse_capability(wire::encode_capability({"x", {"ko"}, 4}));
  EXPECT_EQ(c.name, "x");
  EXPECT_EQ(c.max_batch, 4u);
  EXPECT_THROW(wire::parse_capability(R"({"id": "1"})"), BackendProtocolError);
}

// Recognizes a crop as its top-left pixel value.
StubBackend pixel_backend(std::size_t max_batch) {
  return StubBackend({"pixel", {"en"}, max_batch}, [](const Image& crop) {
    return Recognition{"v" + std::to_string(crop.planes[0](0, 0)), 1.0};
  });
}

Image labelled_page() {
  // Region k is filled with value 10 * (k + 1).
  Image page(100, 60, 1);
  page.planes[0].block(0, 0, 10, 30).setConstant(10);
  page.planes[0].block(0, 50, 10, 30).setConstant(20);
  page.planes[0].block(30, 0, 10, 30).setConstant(30);
  page.planes[0].block(30, 50, 10, 30).setConstant(40);
  page.planes[0].block(50, 0, 10, 30).setConstant(50);
  return page;
}

std::vector<TextBox> labelled_boxes() {
  // Deliberately not in reading order.
  return {rect(50, 30, 80, 40), rect(0, 50, 30, 60), rect(0, 0, 30, 10), rect(0, 30, 30, 40),
          rect(50, 0, 80, 10)};
}

TEST(RunOcrTest, EmptyBoxesGiveEmptyDocument) {
  auto backend = pixel_backend(4);
  const auto doc = run_ocr("p", labelled_page(), {}, backend);
  EXPECT_TRUE(doc.lines.empty());
  EXPECT_EQ(backend.calls(), 0u);
}

TEST(RunOcrTest, LinesFollowReadingOrder) {
  auto backend = pixel_backend(8);
  const auto doc = run_ocr("p", labelled_page(), labelled_boxes(), backend);
  EXPECT_EQ(doc.texts(), (std::vector<std::string>{"v10", "v20", "v30", "v40", "v50"}));
  EXPECT_EQ(doc.order_policy, "reading");
}

TEST(RunOcrTest, BatchingIsTransparent) {
  auto small = pixel_backend(2);
  auto large = pixel_backend(5);
  const auto a = run_ocr("p", labelled_page(), labelled_boxes(), small);
  const auto b = run_ocr("p", labelled_page(), labelled_boxes(), large);
  EXPECT_EQ(small.calls(), 3u);
  EXPECT_EQ(large.calls(), 1u);
  EXPECT_EQ(a.texts(), b.texts());
}

TEST(RunOcrTest, InputOrderPolicy) {
  auto backend = pixel_backend(8);
  OcrOptions options;
  options.order = OrderPolicy::kInput;
  const auto doc = run_ocr("p", labelled_page(), labelled_boxes(), backend, options);
  EXPECT_EQ(doc.texts(), (std::vector<std::string>{"v40", "v50", "v10", "v30", "v20"}));
}

TEST(RunOcrTest, WrongResultCountIsProtocolError) {
  StubBackend inner({"x", {}, 8}, [](const Image&) { return Recognition{"a", 1.0}; });
  class Dropping : public RecognizerBackend {
   public:
    explicit Dropping(StubBackend& inner) : inner_(inner) {}
    const Capability& capability() const override { return inner_.capability(); }
    std::vector<Recognition> recognize(std::span<const Image> crops) override {
      auto r = inner_.recognize(crops);
      r.pop_back();
      return r;
    }

   private:
    StubBackend& inner_;
  } dropping(inner);
  EXPECT_THROW(run_ocr("p", labelled_page(), labelled_boxes(), dropping), BackendProtocolError);
}

TEST(DocumentJsonTest, RoundTrip) {
  auto backend = pixel_backend(8);
  const auto doc = run_ocr("page-1", labelled_page(), labelled_boxes(), backend);
  const auto back = document_from_json(nlohmann::json::parse(to_json(doc).dump()));
  EXPECT_EQ(back.image_id, "page-1");
  EXPECT_EQ(back.texts(), doc.texts());
  EXPECT_EQ(to_json(back).dump(), to_json(doc).dump());
}

// ---------------------------------------------------------------------------
// Subprocess backend against the stub recognizer executable.

std::string stub(const std::string& args) { return std::string(OCRFORGE_STUB_RECOGNIZER) + " " + args; }

TEST(SubprocessBackendTest, ReadsCapabilityAndRecognizes) {
  SubprocessBackend backend(SubprocessBackend::shell(stub("--echo-size --max-batch 3 --name echo")));
  EXPECT_EQ(backend.capability().name, "echo");
  EXPECT_EQ(backend.capability().max_batch, 3u);
  const std::vector<Image> crops = {pattern(4, 2), pattern(7, 3)};
  const auto results = backend.recognize(crops);
  ASSERT_EQ(results.size(), 2u);
  EXPECT_EQ(results[0].text, "4x2");
  EXPECT_EQ(results[1].text, "7x3");
}

TEST(SubprocessBackendTest, CorrelatesOutOfOrderReplies) {
  // The stub holds two requests and answers them in reverse order.
  SubprocessBackend backend(SubprocessBackend::shell(stub("--echo-size --hold 2")));
  std::vector<std::string> first, second;
  std::thread t([&] {
    const std::vector<Image> crops = {pattern(2, 2)};
    first.push_back(backend.recognize(crops)[0].text);
  });
  const std::vector<Image> crops = {pattern(9, 1)};
  second.push_back(backend.recognize(crops)[0].text);
  t.join();
  EXPECT_EQ(first, std::vector<std::string>{"2x2"});
  EXPECT_EQ(second, std::vector<std::string>{"9x1"});
}

TEST(SubprocessBackendTest, RespawnsAfterChildExit) {
  // Every child dies on its second request; the retry lands on a fresh one.
  auto options = SubprocessBackend::shell(stub("--echo-size --exit-after 2"));
  SubprocessBackend backend(options);
  const std::vector<Image> crops = {pattern(3, 3)};
  EXPECT_EQ(backend.recognize(crops)[0].text, "3x3");
  EXPECT_EQ(backend.recognize(crops)[0].text, "3x3");
}

TEST(SubprocessBackendTest, MissingCommandIsUnavailable) {
  auto options = SubprocessBackend::shell("exec /nonexistent/recognizer");
  options.max_retries = 0;
  EXPECT_THROW(SubprocessBackend backend(options), BackendUnavailable);
}

TEST(SubprocessBackendTest, ErrorReplyIsProtocolError) {
  SubprocessBackend backend(SubprocessBackend::shell(stub("--max-batch 1")));
  const std::vector<Image> crops = {pattern(2, 2), pattern(2, 2)};
  EXPECT_THROW(backend.recognize(crops), BackendProtocolError);
}

}  // namespace
}  // namespace ocrforge::pipeline
