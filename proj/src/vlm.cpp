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

#include "ocrforge/vlm.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "ocrforge/codec.hpp"

namespace ocrforge::vlm {

using nlohmann::json;
using nlohmann::ordered_json;

Dialect parse_dialect(std::string_view name) {
  if (name == "generic") return Dialect::kGeneric;
  if (name == "vllm") return Dialect::kVllm;
  if (name == "openai" || name == "gemini") return Dialect::kOpenAI;
  throw ValidationError("unknown endpoint dialect '" + std::string(name) +
                        "' (expected generic, vllm or openai)");
}

std::string_view dialect_name(Dialect dialect) {
  switch (dialect) {
    case Dialect::kVllm:
      return "vllm";
    case Dialect::kOpenAI:
      return "openai";
    case Dialect::kGeneric:
      break;
  }
  return "generic";
}

void ModelEndpoint::validate() const {
  if (model_id.empty()) throw ValidationError("endpoint model id is empty");
  if (max_retries < 0) throw ValidationError("endpoint max_retries must be >= 0");
  if (!(timeout_s > 0)) throw ValidationError("endpoint timeout must be > 0");
}

ordered_json ModelEndpoint::to_json() const {
  return {{"base_url", base_url},     {"model", model_id},
          {"api_key_env", api_key_env}, {"timeout_s", timeout_s},
          {"max_retries", max_retries}, {"thinking", thinking},
          {"dialect", dialect_name(dialect)}, {"temperature", temperature},
          {"max_tokens", max_tokens}};
}

Exhausted::Exhausted(int attempts, const std::string& last_error)
    : EnvironmentError("endpoint failed after " + std::to_string(attempts) +
                       " attempts: " + last_error),
      attempts_(attempts) {}

ContentRefused::ContentRefused(std::string digest, const std::string& detail)
    : Error("model refused the request" + (detail.empty() ? "" : ": " + detail)),
      digest_(std::move(digest)),
      detail_(detail) {}

ReplayMiss::ReplayMiss(std::string digest)
    : EnvironmentError("request " + digest + " is not in the replay store"),
      digest_(std::move(digest)) {}

std::string request_digest(const std::string& model_id, const MessageSequence& messages,
                           bool thinking) {
  const ordered_json canonical = {{"model", model_id},
                                  {"thinking", thinking},
                                  {"messages", prompting::to_json(messages)}};
  return codec::sha256_hex(canonical.dump());
}

ordered_json request_body(const MessageSequence& messages, const ModelEndpoint& endpoint) {
  ordered_json body = {{"model", endpoint.model_id},
                       {"messages", prompting::to_json(messages)},
                       {"temperature", endpoint.temperature},
                       {"max_tokens", endpoint.max_tokens}};
  switch (endpoint.dialect) {
    case Dialect::kGeneric:
      body["thinking"] = {{"type", endpoint.thinking ? "enabled" : "disabled"}};
      break;
    case Dialect::kVllm:
      body["chat_template_kwargs"] = {{"enable_thinking", endpoint.thinking}};
      break;
    case Dialect::kOpenAI:
      body["reasoning_effort"] = endpoint.thinking ? "medium" : "none";
      break;
  }
  return body;
}

std::string parse_completion(const std::string& body, bool& refused) {
  refused = false;
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw EndpointError(std::string("unparseable completion: ") + e.what());
  }
  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
    throw EndpointError("completion has no choices");
  }
  const auto& choice = j["choices"][0];
  if (choice.value("finish_reason", json()).is_string() &&
      choice["finish_reason"] == "content_filter") {
    refused = true;
  }
  if (!choice.contains("message") || !choice["message"].is_object()) {
    if (refused) return {};
    throw EndpointError("completion choice has no message");
  }
  const auto& message = choice["message"];
  if (message.contains("refusal") && message["refusal"].is_string() &&
      !message["refusal"].get<std::string>().empty()) {
    refused = true;
    return message["refusal"].get<std::string>();
  }
  const auto content = message.value("content", json());
  if (content.is_string()) return content.get<std::string>();
  if (content.is_array()) {
    std::string text;
    for (const auto& part : content) {
      if (part.is_object() && part.value("type", "") == "text") {
        text += part.value("text", "");
      }
    }
    return text;
  }
  if (content.is_null() && refused) return {};
  throw EndpointError("completion message has no text content");
}

std::chrono::milliseconds RetryPolicy::delay_before(int retry, double unit_draw) const {
  const double nominal = static_cast<double>(base.count()) * std::pow(factor, retry - 1);
  const double scaled = nominal * (1.0 + jitter * (2.0 * unit_draw - 1.0));
  const double capped = std::min(scaled, static_cast<double>(max_delay.count()));
  return std::chrono::milliseconds(static_cast<long long>(std::max(0.0, capped)));
}

VlmClient::VlmClient(std::shared_ptr<ChatTransport> transport, RetryPolicy policy,
                     Sleeper sleeper)
    : transport_(std::move(transport)),
      policy_(policy),
      sleeper_(sleeper ? std::move(sleeper)
                       : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })),
      rng_(policy.seed) {}

namespace {

bool retryable_status(int status) {
  return status == 408 || status == 429 || (status >= 500 && status <= 599);
}

bool refusal_status(int status, const std::string& body) {
  if (status == 451) return true;
  if (status != 400) return false;
  try {
    const json j = json::parse(body);
    const auto& err = j.contains("error") ? j["error"] : j;
    const std::string code = err.is_object() ? err.value("code", "") : "";
    return code == "content_filter" || code == "content_policy_violation";
  } catch (const json::exception&) {
    return false;
  }
}

}  // namespace

CompletionRecord VlmClient::complete(const MessageSequence& messages,
                                     const ModelEndpoint& endpoint) {
  endpoint.validate();
  CompletionRecord record;
  record.digest = request_digest(endpoint.model_id, messages, endpoint.thinking);
  const std::string body = request_body(messages, endpoint).dump();
  const char* key = std::getenv(endpoint.api_key_env.c_str());
  const std::string api_key = key ? key : "";

  std::string last_error;
  for (int attempt = 1; attempt <= endpoint.max_retries + 1; ++attempt) {
    if (attempt > 1) {
      double draw;
      {
        std::lock_guard lock(rng_mutex_);
        draw = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
      }
      sleeper_(policy_.delay_before(attempt - 1, draw));
    }
    record.attempts = attempt;
    const auto start = std::chrono::steady_clock::now();
    HttpResponse response;
    try {
      response = transport_->post(endpoint, body, api_key);
    } catch (const TransportFailure& e) {
      last_error = e.what();
      continue;
    }
    record.latency_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();

    if (response.status == 200) {
      bool refused = false;
      record.response = parse_completion(response.body, refused);
      if (refused) throw ContentRefused(record.digest, record.response);
      return record;
    }
    if (response.status == 401 || response.status == 403) {
      throw AuthFailure("endpoint rejected credentials (HTTP " +
                        std::to_string(response.status) + ", key from $" +
                        endpoint.api_key_env + ")");
    }
    if (refusal_status(response.status, response.body)) {
      throw ContentRefused(record.digest, "HTTP " + std::to_string(response.status));
    }
    if (!retryable_status(response.status)) {
      throw EndpointError("endpoint returned HTTP " + std::to_string(response.status) +
                          ": " + response.body.substr(0, 200));
    }
    last_error = "HTTP " + std::to_string(response.status);
  }
  throw Exhausted(endpoint.max_retries + 1, last_error);
}

// ---------------------------------------------------------------------------
// Replay

ReplayStore ReplayStore::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw EnvironmentError("cannot open replay store " + path.string());
  ReplayStore store;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      ReplayEntry e;
      e.digest = j.at("digest").get<std::string>();
      e.response = j.at("response").get<std::string>();
      e.latency_ms = j.value("latency_ms", 0.0);
      e.refused = j.value("refused", false);
      store.entries_[e.digest] = std::move(e);
    } catch (const json::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return store;
}

void ReplayStore::save(const std::filesystem::path& path) const {
  std::lock_guard lock(mutex_);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  for (const auto& [digest, e] : entries_) {
    ordered_json j = {{"digest", e.digest}, {"response", e.response}, {"latency_ms", e.latency_ms}};
    if (e.refused) j["refused"] = true;
    out << j.dump() << '\n';
  }
  if (!out) throw EnvironmentError("cannot write replay store " + path.string());
}

std::optional<ReplayEntry> ReplayStore::find(const std::string& digest) const {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(digest);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ReplayStore::put(ReplayEntry entry) {
  std::lock_guard lock(mutex_);
  entries_[entry.digest] = std::move(entry);
}

std::size_t ReplayStore::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

ReplayClient::ReplayClient(std::shared_ptr<const ReplayStore> store) : store_(std::move(store)) {}

CompletionRecord ReplayClient::complete(const MessageSequence& messages,
                                        const ModelEndpoint& endpoint) {
  const std::string digest = request_digest(endpoint.model_id, messages, endpoint.thinking);
  const auto entry = store_->find(digest);
  if (!entry) throw ReplayMiss(digest);
  if (entry->refused) throw ContentRefused(digest, entry->response);
  return {digest, entry->response, entry->latency_ms, 1};
}

RecordingClient::RecordingClient(CompletionSource& inner, std::shared_ptr<ReplayStore> store)
    : inner_(inner), store_(std::move(store)) {}

CompletionRecord RecordingClient::complete(const MessageSequence& messages,
                                           const ModelEndpoint& endpoint) {
  try {
    auto record = inner_.complete(messages, endpoint);
    store_->put({record.digest, record.response, record.latency_ms, false});
    return record;
  } catch (const ContentRefused& refused) {
    store_->put({refused.digest(), refused.detail(), 0.0, true});
    throw;
  }
}

}  // namespace ocrforge::vlm
