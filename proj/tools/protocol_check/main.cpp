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

// Replays canned wire-protocol transcripts against a recognizer backend
// command and reports every deviation.
//
// Transcript lines (JSONL):
//   {"capability": true}                       read and check the announcement
//   {"send": "<raw line>"}                     send a line verbatim
//   {"request": {"id": s, "crops": [[w, h]]}}  send a request with gray crops
//   {"expect": <json>}                         read one line and match it
//
// Matching is structural: objects match when every expected key matches,
// arrays need equal length, and the string "*" matches any value.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ocrforge/image.hpp"
#include "ocrforge/pipeline.hpp"

extern char** environ;

namespace {

using nlohmann::json;

class Child {
 public:
  explicit Child(const std::string& command) {
    int in[2];
    int out[2];
    if (pipe(in) != 0 || pipe(out) != 0) throw std::runtime_error("pipe failed");
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in[0], 0);
    posix_spawn_file_actions_adddup2(&actions, out[1], 1);
    posix_spawn_file_actions_addclose(&actions, in[1]);
    posix_spawn_file_actions_addclose(&actions, out[0]);
    const char* argv[] = {"/bin/sh", "-c", command.c_str(), nullptr};
    const int rc = posix_spawn(&pid_, "/bin/sh", &actions, nullptr, const_cast<char**>(argv),
                               environ);
    posix_spawn_file_actions_destroy(&actions);
    close(in[0]);
    close(out[1]);
    if (rc != 0) throw std::runtime_error("cannot spawn backend");
    to_child_ = in[1];
    from_child_ = out[0];
  }

  ~Child() {
    close(to_child_);
    close(from_child_);
    kill(pid_, SIGTERM);
    waitpid(pid_, nullptr, 0);
  }

  bool send(const std::string& line) {
    const std::string data = line + "\n";
    std::size_t done = 0;
    while (done < data.size()) {
      const ssize_t n = write(to_child_, data.data() + done, data.size() - done);
      if (n <= 0) return false;
      done += static_cast<std::size_t>(n);
    }
    return true;
  }

  std::optional<std::string> read_line(int timeout_ms) {
    for (;;) {
      if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      pollfd p{from_child_, POLLIN, 0};
      if (poll(&p, 1, timeout_ms) <= 0) return std::nullopt;
      char chunk[4096];
      const ssize_t n = read(from_child_, chunk, sizeof chunk);
      if (n <= 0) return std::nullopt;
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

bool matches(const json& expected, const json& actual) {
  if (expected.is_string() && expected.get<std::string>() == "*") return true;
  if (expected.is_object()) {
    if (!actual.is_object()) return false;
    for (const auto& [key, value] : expected.items()) {
      if (!actual.contains(key) || !matches(value, actual[key])) return false;
    }
    return true;
  }
  if (expected.is_array()) {
    if (!actual.is_array() || actual.size() != expected.size()) return false;
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (!matches(expected[i], actual[i])) return false;
    }
    return true;
  }
  return expected == actual;
}

std::string build_request(const json& spec) {
  std::vector<ocrforge::Image> crops;
  for (const auto& wh : spec.at("crops")) {
    ocrforge::Image crop(wh.at(0).get<int>(), wh.at(1).get<int>(), 1);
    crop.planes[0].setConstant(128);
    crops.push_back(std::move(crop));
  }
  return ocrforge::pipeline::wire::encode_request(spec.at("id").get<std::string>(), crops);
}

// Returns the deviations found; empty means the transcript passed.
std::vector<std::string> run_transcript(const std::string& command,
                                        const std::filesystem::path& path, int timeout_ms) {
  std::vector<std::string> deviations;
  std::ifstream in(path);
  if (!in) return {"cannot open transcript"};
  Child child(command);
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "step " + std::to_string(line_no) + ": ";
    const json step = json::parse(line);
    if (step.contains("send")) {
      if (!child.send(step["send"].get<std::string>())) deviations.push_back(where + "write failed");
    } else if (step.contains("request")) {
      if (!child.send(build_request(step["request"]))) deviations.push_back(where + "write failed");
    } else if (step.contains("capability") || step.contains("expect")) {
      const auto reply = child.read_line(timeout_ms);
      if (!reply) {
        deviations.push_back(where + "no reply");
        break;
      }
      if (step.contains("capability")) {
        try {
          ocrforge::pipeline::wire::parse_capability(*reply);
        } catch (const std::exception& e) {
          deviations.push_back(where + e.what());
        }
        continue;
      }
      json actual;
      try {
        actual = json::parse(*reply);
      } catch (const json::parse_error&) {
        deviations.push_back(where + "reply is not JSON: " + *reply);
        continue;
      }
      if (!matches(step["expect"], actual)) {
        deviations.push_back(where + "expected " + step["expect"].dump() + ", got " + actual.dump());
      }
    } else {
      deviations.push_back(where + "unknown transcript step");
    }
  }
  return deviations;
}

}  // namespace

int main(int argc, char** argv) {
  std::string backend;
  std::vector<std::string> transcripts;
  int timeout_ms = 10000;
  CLI::App app{"wire-protocol conformance check", "protocol_check"};
  app.add_option("--backend", backend, "backend command")->required();
  app.add_option("--timeout-ms", timeout_ms, "per-reply timeout");
  app.add_option("transcripts", transcripts, "transcript files")->required()->check(CLI::ExistingFile);
  CLI11_PARSE(app, argc, argv);

  signal(SIGPIPE, SIG_IGN);
  std::size_t failed = 0;
  for (const auto& t : transcripts) {
    const auto deviations = run_transcript(backend, t, timeout_ms);
    const std::string name = std::filesystem::path(t).stem().string();
    if (deviations.empty()) {
      std::cout << "PASS " << name << "\n";
    } else {
      ++failed;
      std::cout << "FAIL " << name << "\n";
      for (const auto& d : deviations) std::cout << "  " << d << "\n";
    }
  }
  return failed == 0 ? 0 : 1;
}
