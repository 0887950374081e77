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

#include <stdexcept>
#include <string>

namespace ocrforge {

/// Base of every toolkit error. The CLI maps the two families below onto
/// its exit-code contract: ValidationError -> 1, EnvironmentError -> 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed files, invalid arguments, inconsistent config.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Something outside the process failed: endpoints, child processes, disk.
class EnvironmentError : public Error {
 public:
  using Error::Error;
};

}  // namespace ocrforge
