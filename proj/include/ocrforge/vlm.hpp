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

// Chat-completions client for hosted vision-language models, plus a replay
// store that makes whole benchmark runs reproducible offline.

#pragma once

#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>

#include "ocrforge/error.hpp"
#include "ocrforge/prompting.hpp"

namespace ocrforge::vlm {

using prompting::MessageSequence;

/// How the thinking toggle is spelled on the wire.
///   generic  "thinking": {"type": "enabled" | "disabled"}
///   vllm     "chat_template_kwargs": {"enable_thinking": bool}
///   openai   "reasoning_effort": "medium" | "none"  (gemini's compat layer too)
enum class Dialect { kGeneric, kVllm, kOpenAI };

Dialect parse_dialect(std::string_view name);
std::string_view dialect_name(Dialect dialect);

struct ModelEndpoint {
  std::string base_url = "http://127.0.0.1:8000/v1";
  std::string model_id;
  std::string api_key_env = "OCRFORGE_API_KEY";
  double timeout_s = 120.0;
  int max_retries = 3;
  bool thinking = false;
  Dialect dialect = Dialect::kGeneric;
  double temperature = 0.0;
  int max_tokens = 512;

  void validate() const;
  nlohmann::ordered_json to_json() const;
};

struct CompletionRecord {
  std::string digest;
  std::string response;
  double latency_ms = 0.0;
  int attempts = 0;
};

class Exhausted : public EnvironmentError {
 public:
  Exhausted(int attempts, const std::string& last_error);
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

class AuthFailure : public EnvironmentError {
 public:
  using EnvironmentError::EnvironmentError;
};

/// Non-retryable endpoint error other than auth or refusal.
class EndpointError : public EnvironmentError {
 public:
  using EnvironmentError::EnvironmentError;
};

/// The model explicitly declined. A measured outcome, never retried.
class ContentRefused : public Error {
 public:
  explicit ContentRefused(std::string digest, const std::string& detail = "");
  const std::string& digest() const { return digest_; }
  const std::string& detail() const { return detail_; }

 private:
  std::string digest_;
  std::string detail_;
};

class ReplayMiss : public EnvironmentError {
 public:
  explicit ReplayMiss(std::string digest);
  const std::string& digest() const { return digest_; }

 private:
  std::string digest_;
};

/// Pure function of (model_id, messages, thinking flag): hex SHA-256 over a
/// canonical JSON rendering.
std::string request_digest(const std::string& model_id, const MessageSequence& messages,
                           bool thinking);

/// The chat-completions request body for this endpoint.
nlohmann::ordered_json request_body(const MessageSequence& messages,
                                    const ModelEndpoint& endpoint);

// ---------------------------------------------------------------------------
// Transport

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Connection-level failure; always retryable.
class TransportFailure : public EnvironmentError {
 public:
  using EnvironmentError::EnvironmentError;
};

class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  /// POSTs `body` to <base_url>/chat/completions. Throws TransportFailure
  /// when no HTTP response was obtained.
  virtual HttpResponse post(const ModelEndpoint& endpoint, const std::string& body,
                            const std::string& api_key) = 0;
};

std::shared_ptr<ChatTransport> make_http_transport();

// ---------------------------------------------------------------------------
// Completion sources

class CompletionSource {
 public:
  virtual ~CompletionSource() = default;
  virtual CompletionRecord complete(const MessageSequence& messages,
                                    const ModelEndpoint& endpoint) = 0;
};

struct RetryPolicy {
  std::chrono::milliseconds base{1000};
  double factor = 2.0;
  /// Each delay is scaled by a uniform draw from [1 - jitter, 1 + jitter].
  double jitter = 0.2;
  std::chrono::milliseconds max_delay{60000};
  std::uint64_t seed = 0x5eed;

  std::chrono::milliseconds delay_before(int retry, double unit_draw) const;
};

/// Live client: retries 408, 429, 5xx and transport failures with
/// exponential backoff; 401/403 raise AuthFailure; explicit refusals raise
/// ContentRefused.
class VlmClient : public CompletionSource {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit VlmClient(std::shared_ptr<ChatTransport> transport = make_http_transport(),
                     RetryPolicy policy = {}, Sleeper sleeper = {});

  CompletionRecord complete(const MessageSequence& messages,
                            const ModelEndpoint& endpoint) override;

 private:
  std::shared_ptr<ChatTransport> transport_;
  RetryPolicy policy_;
  Sleeper sleeper_;
  std::mutex rng_mutex_;
  std::mt19937_64 rng_;
};

struct ReplayEntry {
  std::string digest;
  std::string response;
  double latency_ms = 0.0;
  bool refused = false;
};

/// digest -> response. JSONL on disk, one {digest, response, latency_ms}
/// object per line ("refused": true marks a stored refusal), sorted by digest.
class ReplayStore {
 public:
  ReplayStore() = default;
  ReplayStore(ReplayStore&& other) noexcept : entries_(std::move(other.entries_)) {}
  ReplayStore& operator=(ReplayStore&& other) noexcept {
    entries_ = std::move(other.entries_);
    return *this;
  }

  static ReplayStore load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::optional<ReplayEntry> find(const std::string& digest) const;
  void put(ReplayEntry entry);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, ReplayEntry> entries_;
};

class ReplayClient : public CompletionSource {
 public:
  explicit ReplayClient(std::shared_ptr<const ReplayStore> store);
  CompletionRecord complete(const MessageSequence& messages,
                            const ModelEndpoint& endpoint) override;

 private:
  std::shared_ptr<const ReplayStore> store_;
};

/// Forwards to `inner` and records every answer (refusals included).
class RecordingClient : public CompletionSource {
 public:
  RecordingClient(CompletionSource& inner, std::shared_ptr<ReplayStore> store);
  CompletionRecord complete(const MessageSequence& messages,
                            const ModelEndpoint& endpoint) override;

 private:
  CompletionSource& inner_;
  std::shared_ptr<ReplayStore> store_;
};

/// Extracts the answer text from a chat-completions response body. Sets
/// `refused` when the body carries an explicit refusal.
std::string parse_completion(const std::string& body, bool& refused);

}  // namespace ocrforge::vlm
