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

/// \file bridge.hpp
/// Client side of the embedding bridge protocol.
///
/// The bridge is a child process reading `{"id": ..., "text": ...}` lines on
/// stdin. Its first output line is a handshake `{"dim": N}` (optionally with
/// `model`, `max_length`, `pooling`); after that it writes one
/// `{"id": ..., "vector": [...]}` or `{"id": ..., "error": ...}` line per
/// request, in any order.

#include <chrono>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "humir/child_process.hpp"

namespace humir {

struct BridgeHandshake {
  std::size_t dim = 0;
  /// Any other string/number fields of the handshake, stringified.
  std::map<std::string, std::string> info;
};

struct EncodedTexts {
  BridgeHandshake handshake;
  /// Same order as the input items.
  std::vector<std::pair<std::string, std::vector<float>>> vectors;
};

BridgeHandshake decode_handshake(std::string_view line);

/// Streams `items` (id, text) through the bridge command and collects one
/// vector per id. Any protocol violation, error record, crash or non-zero exit
/// raises ExternalError.
EncodedTexts encode_with_bridge(const std::string& command,
                                const std::vector<std::pair<std::string, std::string>>& items,
                                const ChildProcess::Env& env = {},
                                std::chrono::milliseconds timeout = std::chrono::seconds(300));

}  // namespace humir
