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

#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <future>
#include <map>
#include <thread>

#include "ocrforge/codec.hpp"
#include "ocrforge/pipeline.hpp"

extern char** environ;

namespace ocrforge::pipeline {

using nlohmann::json;
using nlohmann::ordered_json;

StubBackend::StubBackend(Capability capability, Fn fn)
    : capability_(std::move(capability)), fn_(std::move(fn)) {
  if (capability_.max_batch == 0) throw ValidationError("max_batch must be >= 1");
}

std::vector<Recognition> StubBackend::recognize(std::span<const Image> crops) {
  ++calls_;
  std::vector<Recognition> out;
  out.reserve(crops.size());
  for (const auto& crop : crops) out.push_back(fn_(crop));
  return out;
}

// ---------------------------------------------------------------------------
// Wire format

namespace wire {
namespace {

json parse_line(std::string_view line) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw BackendProtocolError(std::string("unparseable line: ") + e.what());
  }
}

}  // namespace

std::string encode_capability(const Capability& c) {
  ordered_json j = {{"capability",
                     {{"name", c.name}, {"languages", c.languages}, {"max_batch", c.max_batch}}}};
  return j.dump();
}

Capability parse_capability(std::string_view line) {
  const json j = parse_line(line);
  if (!j.is_object() || !j.contains("capability") || !j["capability"].is_object()) {
    throw BackendProtocolError("expected a {\"capability\": ...} announcement");
  }
  const auto& c = j["capability"];
  Capability out;
  try {
    out.name = c.at("name").get<std::string>();
    out.languages = c.value("languages", std::vector<std::string>{});
    out.max_batch = c.at("max_batch").get<std::size_t>();
  } catch (const json::exception& e) {
    throw BackendProtocolError(std::string("bad capability: ") + e.what());
  }
  if (out.max_batch == 0) throw BackendProtocolError("capability max_batch must be >= 1");
  return out;
}

std::string encode_request(const std::string& id, std::span<const Image> crops) {
  ordered_json list = ordered_json::array();
  for (const auto& crop : crops) {
    list.push_back({{"png_base64", codec::base64_encode(encode_png(crop))}});
  }
  return ordered_json{{"id", id}, {"crops", std::move(list)}}.dump();
}

Request parse_request(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("unparseable request: ") + e.what());
  }
  if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) {
    throw ValidationError("request needs a string \"id\"");
  }
  Request r{j["id"].get<std::string>(), {}};
  if (!j.contains("crops") || !j["crops"].is_array()) {
    throw ValidationError("request needs a \"crops\" array");
  }
  for (const auto& crop : j["crops"]) {
    if (!crop.is_object() || !crop.contains("png_base64") || !crop["png_base64"].is_string()) {
      throw ValidationError("crop needs a string \"png_base64\"");
    }
    r.png_base64.push_back(crop["png_base64"].get<std::string>());
  }
  return r;
}

std::string encode_reply(const std::string& id, std::span<const Recognition> results) {
  ordered_json list = ordered_json::array();
  for (const auto& r : results) {
    list.push_back({{"text", r.text}, {"confidence", r.confidence}});
  }
  return ordered_json{{"id", id}, {"results", std::move(list)}}.dump();
}

std::string encode_error(const std::optional<std::string>& id, std::string_view message) {
  ordered_json j;
  if (id) j["id"] = *id;
  j["error"] = message;
  return j.dump();
}

Reply parse_reply(std::string_view line) {
  const json j = parse_line(line);
  if (!j.is_object()) throw BackendProtocolError("reply must be an object");
  Reply reply;
  if (j.contains("id")) {
    if (!j["id"].is_string()) throw BackendProtocolError("reply id must be a string");
    reply.id = j["id"].get<std::string>();
  }
  if (j.contains("error")) {
    reply.error = j["error"].is_string() ? j["error"].get<std::string>() : j["error"].dump();
    return reply;
  }
  if (reply.id.empty()) throw BackendProtocolError("reply without id");
  if (!j.contains("results") || !j["results"].is_array()) {
    throw BackendProtocolError("reply needs a \"results\" array");
  }
  for (const auto& r : j["results"]) {
    if (!r.is_object() || !r.contains("text") || !r["text"].is_string() ||
        !r.contains("confidence") || !r["confidence"].is_number()) {
      throw BackendProtocolError("result needs string \"text\" and numeric \"confidence\"");
    }
    const double confidence = r["confidence"].get<double>();
    if (!(confidence >= 0.0 && confidence <= 1.0)) {
      throw BackendProtocolError("confidence outside [0,1]");
    }
    reply.results.push_back({r["text"].get<std::string>(), confidence});
  }
  return reply;
}

}  // namespace wire

// ---------------------------------------------------------------------------
// Child process transport

struct SubprocessBackend::Process {
  pid_t pid = -1;
  int fd = -1;
  std::thread reader;

  std::mutex mu;
  bool dead = false;
  std::optional<std::promise<Capability>> announced{std::in_place};
  std::map<std::string, std::promise<std::vector<Recognition>>> pending;

  explicit Process(const std::vector<std::string>& argv) {
    int fds[2];
    if (socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
      throw BackendUnavailable(std::string("socketpair: ") + std::strerror(errno));
    }
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, fds[1], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, fds[1], STDOUT_FILENO);

    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    const int rc = posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    close(fds[1]);
    if (rc != 0) {
      close(fds[0]);
      throw BackendUnavailable("cannot start recognizer '" + argv[0] +
                               "': " + std::strerror(rc));
    }
    fd = fds[0];
    reader = std::thread([this] { read_loop(); });
  }

  ~Process() {
    shutdown(fd, SHUT_WR);
    shutdown(fd, SHUT_RD);
    if (reader.joinable()) reader.join();
    kill(pid, SIGTERM);
    int status = 0;
    waitpid(pid, &status, 0);
    close(fd);
  }

  void fail_all(const std::exception_ptr& error) {
    std::lock_guard lock(mu);
    dead = true;
    if (announced) {
      announced->set_exception(error);
      announced.reset();
    }
    for (auto& [id, promise] : pending) promise.set_exception(error);
    pending.clear();
  }

  void handle_line(std::string_view line) {
    std::lock_guard lock(mu);
    if (announced) {
      try {
        announced->set_value(wire::parse_capability(line));
      } catch (...) {
        announced->set_exception(std::current_exception());
      }
      announced.reset();
      return;
    }
    wire::Reply reply;
    try {
      reply = wire::parse_reply(line);
    } catch (...) {
      // Cannot correlate a malformed reply, so every waiter fails.
      for (auto& [id, promise] : pending) promise.set_exception(std::current_exception());
      pending.clear();
      return;
    }
    if (reply.id.empty()) {
      const auto error = std::make_exception_ptr(
          BackendProtocolError("backend protocol error: " + reply.error.value_or("")));
      for (auto& [id, promise] : pending) promise.set_exception(error);
      pending.clear();
      return;
    }
    const auto it = pending.find(reply.id);
    if (it == pending.end()) return;
    if (reply.error) {
      it->second.set_exception(std::make_exception_ptr(
          BackendProtocolError("backend error for request " + reply.id + ": " + *reply.error)));
    } else {
      it->second.set_value(std::move(reply.results));
    }
    pending.erase(it);
  }

  void read_loop() {
    std::string buffer;
    char chunk[65536];
    for (;;) {
      const ssize_t n = recv(fd, chunk, sizeof chunk, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) break;
      buffer.append(chunk, static_cast<std::size_t>(n));
      std::size_t start = 0;
      for (std::size_t nl; (nl = buffer.find('\n', start)) != std::string::npos; start = nl + 1) {
        std::string_view line(buffer.data() + start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) handle_line(line);
      }
      buffer.erase(0, start);
    }
    fail_all(std::make_exception_ptr(BackendUnavailable("recognizer process exited")));
  }

  std::future<std::vector<Recognition>> send(const std::string& id, const std::string& line) {
    std::lock_guard lock(mu);
    if (dead) throw BackendUnavailable("recognizer process is not running");
    auto future = pending[id].get_future();
    std::string_view rest = line;
    while (!rest.empty()) {
      const ssize_t n = ::send(fd, rest.data(), rest.size(), MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        pending.erase(id);
        dead = true;
        throw BackendUnavailable(std::string("write to recognizer failed: ") +
                                 std::strerror(errno));
      }
      rest.remove_prefix(static_cast<std::size_t>(n));
    }
    return future;
  }

  void mark_dead() {
    std::lock_guard lock(mu);
    dead = true;
  }
};

SubprocessBackend::Options SubprocessBackend::shell(const std::string& command) {
  Options options;
  options.argv = {"/bin/sh", "-c", command};
  return options;
}

SubprocessBackend::SubprocessBackend(Options options) : options_(std::move(options)) {
  if (options_.argv.empty()) throw ValidationError("recognizer command is empty");
  live_process();
}

SubprocessBackend::~SubprocessBackend() = default;

std::shared_ptr<SubprocessBackend::Process> SubprocessBackend::live_process() {
  std::lock_guard lock(mutex_);
  if (process_) {
    std::lock_guard process_lock(process_->mu);
    if (!process_->dead) return process_;
  }
  auto process = std::make_shared<Process>(options_.argv);
  auto announced = process->announced->get_future();
  if (announced.wait_for(options_.timeout) != std::future_status::ready) {
    throw BackendUnavailable("recognizer did not announce its capability in time");
  }
  try {
    capability_ = announced.get();
  } catch (const BackendProtocolError&) {
    throw;
  } catch (const Error& e) {
    throw BackendUnavailable(std::string("recognizer failed to start: ") + e.what());
  }
  process_ = process;
  return process_;
}

std::vector<Recognition> SubprocessBackend::recognize(std::span<const Image> crops) {
  if (crops.empty()) return {};
  std::string last_error;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    const std::string id = std::to_string(next_id_++);
    try {
      auto process = live_process();
      auto future = process->send(id, wire::encode_request(id, crops) + "\n");
      if (future.wait_for(options_.timeout) != std::future_status::ready) {
        process->mark_dead();
        throw BackendUnavailable("recognizer timed out");
      }
      auto results = future.get();
      if (results.size() != crops.size()) {
        throw BackendProtocolError("recognizer returned " + std::to_string(results.size()) +
                                   " results for " + std::to_string(crops.size()) + " crops");
      }
      return results;
    } catch (const BackendUnavailable& e) {
      last_error = e.what();
    }
  }
  throw BackendUnavailable("recognizer unavailable after " +
                           std::to_string(options_.max_retries + 1) +
                           " attempts: " + last_error);
}

}  // namespace ocrforge::pipeline
