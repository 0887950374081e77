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

#pragma once

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ocrforge/detect.hpp"
#include "ocrforge/error.hpp"
#include "ocrforge/image.hpp"

namespace ocrforge::pipeline {

using detect::TextBox;

// ---------------------------------------------------------------------------
// Cropping and reading order

enum class CropMode { kBoundingBox, kRectify };

CropMode parse_crop_mode(std::string_view name);

class DegenerateBox : public ValidationError {
 public:
  DegenerateBox() : ValidationError("text box encloses less than 1 px^2") {}
};

/// kBoundingBox: the axis-aligned bounding rectangle, clipped to the image.
/// kRectify: the quad warped to an upright rectangle by the homography taking
/// its corners to the output corners, bilinear sampling at pixel centres.
/// Output width is the longer of the top/bottom sides, height the longer of
/// the left/right sides, rounded, at least 1 px.
Image crop_region(const Image& image, const TextBox& box,
                  CropMode mode = CropMode::kRectify);

/// Reading order. Two boxes share a line when their vertical centres are
/// closer than `line_threshold` times the mean height of the pair; lines are
/// the transitive closure of that relation, sorted by mean centre y, and
/// boxes within a line run left to right.
std::vector<std::size_t> order_regions(std::span<const TextBox> boxes,
                                       double line_threshold = 0.5);

// ---------------------------------------------------------------------------
// Recognizer backends

struct Capability {
  std::string name;
  std::vector<std::string> languages;
  std::size_t max_batch = 1;
};

struct Recognition {
  std::string text;
  double confidence = 0.0;
};

class BackendUnavailable : public EnvironmentError {
 public:
  using EnvironmentError::EnvironmentError;
};

class BackendProtocolError : public EnvironmentError {
 public:
  using EnvironmentError::EnvironmentError;
};

/// Crop in, text out. Implementations return exactly one result per crop in
/// input order, deterministically for a fixed configuration, and may be
/// called from several threads at once.
class RecognizerBackend {
 public:
  virtual ~RecognizerBackend() = default;
  virtual const Capability& capability() const = 0;
  virtual std::vector<Recognition> recognize(std::span<const Image> crops) = 0;
};

/// In-process backend driven by a function of the crop.
class StubBackend : public RecognizerBackend {
 public:
  using Fn = std::function<Recognition(const Image&)>;

  StubBackend(Capability capability, Fn fn);

  const Capability& capability() const override { return capability_; }
  std::vector<Recognition> recognize(std::span<const Image> crops) override;

  std::size_t calls() const { return calls_.load(); }

 private:
  Capability capability_;
  Fn fn_;
  std::atomic<std::size_t> calls_{0};
};

/// Newline-delimited JSON wire protocol spoken by out-of-process backends.
///
///   startup  {"capability": {"name": s, "languages": [s], "max_batch": n}}
///   request  {"id": s, "crops": [{"png_base64": s}]}
///   reply    {"id": s, "results": [{"text": s, "confidence": x}]}
///   error    {"id": s, "error": s}   or {"error": s} when the id is unknown
///
/// Replies may arrive in any order; they are matched to requests by id.
namespace wire {

struct Request {
  std::string id;
  std::vector<std::string> png_base64;
};

struct Reply {
  std::string id;
  std::vector<Recognition> results;
  std::optional<std::string> error;
};

std::string encode_capability(const Capability& capability);
Capability parse_capability(std::string_view line);

std::string encode_request(const std::string& id, std::span<const Image> crops);
Request parse_request(std::string_view line);

std::string encode_reply(const std::string& id, std::span<const Recognition> results);
std::string encode_error(const std::optional<std::string>& id, std::string_view message);
/// Throws BackendProtocolError when the line is not a well-formed reply.
Reply parse_reply(std::string_view line);

}  // namespace wire

/// Runs a backend as a child process, talking the wire protocol over its
/// stdin/stdout. Transport failures respawn the child and retry.
class SubprocessBackend : public RecognizerBackend {
 public:
  struct Options {
    std::vector<std::string> argv;
    int max_retries = 2;
    std::chrono::milliseconds timeout{60000};
  };

  explicit SubprocessBackend(Options options);
  ~SubprocessBackend() override;
  SubprocessBackend(const SubprocessBackend&) = delete;
  SubprocessBackend& operator=(const SubprocessBackend&) = delete;

  const Capability& capability() const override { return capability_; }
  std::vector<Recognition> recognize(std::span<const Image> crops) override;

  /// Convenience: argv = {"/bin/sh", "-c", command}.
  static Options shell(const std::string& command);

 private:
  struct Process;

  std::shared_ptr<Process> live_process();

  Options options_;
  Capability capability_;
  std::mutex mutex_;
  std::shared_ptr<Process> process_;
  std::atomic<std::uint64_t> next_id_{1};
};

// ---------------------------------------------------------------------------
// Documents

struct OcrLine {
  std::string text;
  TextBox box;
  double confidence = 0.0;
};

struct OcrDocument {
  std::string image_id;
  std::vector<OcrLine> lines;
  std::string order_policy;

  std::vector<std::string> texts() const;
};

enum class OrderPolicy { kReading, kInput };

struct OcrOptions {
  CropMode crop_mode = CropMode::kRectify;
  OrderPolicy order = OrderPolicy::kReading;
  double line_threshold = 0.5;
};

/// Crops every box, recognizes in batches of at most the backend's
/// max_batch, and assembles lines in reading order. Boxes are clamped to the
/// image first.
OcrDocument run_ocr(std::string image_id, const Image& image,
                    std::span<const TextBox> boxes, RecognizerBackend& backend,
                    const OcrOptions& options = {});

nlohmann::ordered_json to_json(const OcrDocument& doc);
OcrDocument document_from_json(const nlohmann::json& j);

}  // namespace ocrforge::pipeline
