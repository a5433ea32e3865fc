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

#include "humir/bridge.hpp"

#include <fmt/core.h>

#include <cmath>
#include <json.hpp>
#include <unordered_map>

#include "humir/errors.hpp"

namespace humir {

namespace {

nlohmann::json parse_line(std::string_view line) {
  try {
    auto j = nlohmann::json::parse(line);
    if (!j.is_object()) throw ExternalError(fmt::format("bridge line is not an object: {}", line));
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ExternalError(fmt::format("malformed bridge output '{}': {}", line, e.what()));
  }
}

}  // namespace

BridgeHandshake decode_handshake(std::string_view line) {
  const auto j = parse_line(line);
  if (!j.contains("dim") || !j["dim"].is_number_unsigned() || j["dim"].get<std::size_t>() == 0) {
    throw ExternalError(fmt::format("bridge handshake must announce a positive 'dim': {}", line));
  }
  BridgeHandshake h;
  h.dim = j["dim"].get<std::size_t>();
  for (const auto& [key, value] : j.items()) {
    if (key == "dim") continue;
    h.info[key] = value.is_string() ? value.get<std::string>() : value.dump();
  }
  return h;
}

EncodedTexts encode_with_bridge(const std::string& command,
                                const std::vector<std::pair<std::string, std::string>>& items,
                                const ChildProcess::Env& env,
                                std::chrono::milliseconds timeout) {
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::string> requests;
  requests.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!slot.emplace(items[i].first, i).second) {
      throw DataError(fmt::format("duplicate id '{}' sent to bridge", items[i].first));
    }
    nlohmann::json j;
    j["id"] = items[i].first;
    j["text"] = items[i].second;
    requests.push_back(j.dump());
  }

  ChildProcess child(command, env);
  const auto lines = child.transact(requests, items.size() + 1, timeout, /*close_input=*/true);

  EncodedTexts out;
  out.handshake = decode_handshake(lines.front());
  const std::size_t dim = out.handshake.dim;
  out.vectors.resize(items.size());
  std::vector<bool> filled(items.size(), false);
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto j = parse_line(lines[l]);
    if (!j.contains("id") || !j["id"].is_string()) {
      throw ExternalError(fmt::format("bridge response without string 'id': {}", lines[l]));
    }
    const auto id = j["id"].get<std::string>();
    auto it = slot.find(id);
    if (it == slot.end() || filled[it->second]) {
      throw ExternalError(fmt::format("bridge answered unknown or repeated id '{}'", id));
    }
    if (j.contains("error")) {
      throw ExternalError(fmt::format("bridge failed to encode '{}': {}", id, j["error"].dump()));
    }
    if (!j.contains("vector") || !j["vector"].is_array()) {
      throw ExternalError(fmt::format("bridge response for '{}' has no vector", id));
    }
    const auto& arr = j["vector"];
    if (arr.size() != dim) {
      throw ExternalError(fmt::format("bridge vector for '{}' has dimension {}, handshake said {}",
                                      id, arr.size(), dim));
    }
    std::vector<float> vec;
    vec.reserve(dim);
    for (const auto& x : arr) {
      if (!x.is_number()) {
        throw ExternalError(fmt::format("non-numeric component in vector for '{}'", id));
      }
      const auto v = x.get<double>();
      if (!std::isfinite(v)) {
        throw ExternalError(fmt::format("non-finite component in vector for '{}'", id));
      }
      vec.push_back(static_cast<float>(v));
    }
    out.vectors[it->second] = {id, std::move(vec)};
    filled[it->second] = true;
  }

  const int status = child.wait();
  if (status != 0) {
    throw ExternalError(fmt::format("bridge '{}' exited with status {}", command, status));
  }
  return out;
}

}  // namespace humir
