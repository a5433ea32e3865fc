// Copyright 2026 The humir Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace humir {

/// Malformed or inconsistent input data (files, stores, runs).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure of a child process (bridge or scorer): crash, timeout, bad reply.
class ExternalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments that slipped past the command-line parser.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace humir
