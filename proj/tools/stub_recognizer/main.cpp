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

// Deterministic recognizer backend speaking the wire protocol on
// stdin/stdout. Used by tests and for wiring checks without a model.
//
//   --table FILE       JSON object: sha256 of the crop's PNG bytes -> text
//   --default-text S   text for crops not in the table
//   --echo-size        answer "<width>x<height>" instead
//   --hold N           collect N requests, then answer them in reverse order
//   --exit-after N     exit without answering the N-th request

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "ocrforge/codec.hpp"
#include "ocrforge/image.hpp"
#include "ocrforge/pipeline.hpp"

namespace {

using namespace ocrforge;

struct Settings {
  std::string name = "stub";
  std::size_t max_batch = 8;
  std::map<std::string, std::string> table;
  std::string default_text;
  bool echo_size = false;
  std::size_t hold = 0;
  std::size_t exit_after = 0;
};

pipeline::Recognition recognize(const Settings& s, const std::string& png_base64) {
  const std::string png = codec::base64_decode(png_base64);
  if (s.echo_size) {
    const Image image = decode_png(png);
    return {std::to_string(image.width()) + "x" + std::to_string(image.height()), 1.0};
  }
  const auto it = s.table.find(codec::sha256_hex(png));
  if (it != s.table.end()) return {it->second, 1.0};
  return {s.default_text, 0.5};
}

std::string answer(const Settings& s, const std::string& line) {
  std::optional<std::string> id;
  try {
    const auto j = nlohmann::json::parse(line);
    if (j.is_object() && j.contains("id") && j["id"].is_string()) id = j["id"].get<std::string>();
  } catch (const nlohmann::json::exception&) {
  }
  try {
    const auto request = pipeline::wire::parse_request(line);
    if (request.png_base64.size() > s.max_batch) {
      return pipeline::wire::encode_error(request.id, "batch exceeds max_batch");
    }
    std::vector<pipeline::Recognition> results;
    for (const auto& crop : request.png_base64) results.push_back(recognize(s, crop));
    return pipeline::wire::encode_reply(request.id, results);
  } catch (const std::exception& e) {
    return pipeline::wire::encode_error(id, e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  Settings s;
  std::string table_path;
  CLI::App app{"wire-protocol stub recognizer", "stub_recognizer"};
  app.add_option("--name", s.name, "backend name");
  app.add_option("--max-batch", s.max_batch, "announced max batch")->check(CLI::PositiveNumber);
  app.add_option("--table", table_path, "JSON object sha256(png) -> text");
  app.add_option("--default-text", s.default_text, "text for unknown crops");
  app.add_flag("--echo-size", s.echo_size, "answer with the crop size");
  app.add_option("--hold", s.hold, "answer every N requests in reverse order");
  app.add_option("--exit-after", s.exit_after, "exit on the N-th request");
  CLI11_PARSE(app, argc, argv);

  if (!table_path.empty()) {
    try {
      s.table = nlohmann::json::parse(read_file(table_path)).get<std::map<std::string, std::string>>();
    } catch (const std::exception& e) {
      std::cerr << "stub_recognizer: " << e.what() << "\n";
      return 1;
    }
  }

  std::cout << pipeline::wire::encode_capability({s.name, {"ko", "en"}, s.max_batch}) << std::endl;
  std::vector<std::string> held;
  std::size_t seen = 0;
  for (std::string line; std::getline(std::cin, line);) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (++seen == s.exit_after) return 3;
    held.push_back(answer(s, line));
    if (held.size() >= std::max<std::size_t>(s.hold, 1)) {
      for (auto it = held.rbegin(); it != held.rend(); ++it) std::cout << *it << "\n";
      std::cout.flush();
      held.clear();
    }
  }
  for (auto it = held.rbegin(); it != held.rend(); ++it) std::cout << *it << "\n";
  return 0;
}
