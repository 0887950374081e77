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

// Eigen (via vlm.hpp) must precede httplib, whose <resolv.h> defines _res.
#include "ocrforge/vlm.hpp"

#include <httplib.h>

namespace ocrforge::vlm {
namespace {

class HttpTransport : public ChatTransport {
 public:
  HttpResponse post(const ModelEndpoint& endpoint, const std::string& body,
                    const std::string& api_key) override {
    // base_url = scheme://host[:port][/prefix]
    const auto scheme_end = endpoint.base_url.find("://");
    if (scheme_end == std::string::npos) {
      throw ValidationError("endpoint base_url needs a scheme: " + endpoint.base_url);
    }
    const auto path_start = endpoint.base_url.find('/', scheme_end + 3);
    const std::string origin = endpoint.base_url.substr(0, path_start);
    std::string prefix =
        path_start == std::string::npos ? "" : endpoint.base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

    httplib::Client client(origin);
    const auto seconds = static_cast<time_t>(endpoint.timeout_s);
    const auto micros = static_cast<time_t>((endpoint.timeout_s - seconds) * 1e6);
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    client.set_write_timeout(seconds, micros);

    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

    auto result = client.Post(prefix + "/chat/completions", headers, body, "application/json");
    if (!result) {
      throw TransportFailure("request to " + endpoint.base_url +
                             " failed: " + httplib::to_string(result.error()));
    }
    return {result->status, result->body};
  }
};

}  // namespace

std::shared_ptr<ChatTransport> make_http_transport() {
  return std::make_shared<HttpTransport>();
}

}  // namespace ocrforge::vlm
