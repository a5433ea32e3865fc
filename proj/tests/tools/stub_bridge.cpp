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

// Test double for the encoder bridge. Emits deterministic pseudo-random unit
// vectors keyed by (seed, text) so the core can be exercised without a model.
//
//   stub_bridge [--dim N] [--seed S] [--reverse] [--bad-dim-after N]
//               [--crash-after N] [--error-id ID] [--no-handshake]
//
// The seed defaults to $HUMIR_SEED (or 0).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <json.hpp>
#include <string>
#include <vector>

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t splitmix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<float> stub_vector(const std::string& text, std::uint64_t seed, std::size_t dim) {
  std::uint64_t state = fnv1a(text) ^ (seed * 0x2545F4914F6CDD1DULL);
  std::vector<float> v(dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (auto& x : v) {
      x = static_cast<float>(static_cast<double>(splitmix(state) >> 11) * 0x1.0p-53 * 2.0 - 1.0);
      norm += static_cast<double>(x) * x;
    }
  } while (norm == 0.0);
  for (auto& x : v) x = static_cast<float>(x / std::sqrt(norm));
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t dim = 8;
  std::uint64_t seed = 0;
  if (const char* s = std::getenv("HUMIR_SEED")) seed = std::strtoull(s, nullptr, 10);
  bool reverse = false;
  bool handshake = true;
  long bad_dim_after = -1;
  long crash_after = -1;
  std::string error_id;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    auto next = [&] { return std::string(i + 1 < argc ? argv[++i] : ""); };
    if (a == "--dim") dim = std::stoul(next());
    else if (a == "--seed") seed = std::stoull(next());
    else if (a == "--reverse") reverse = true;
    else if (a == "--bad-dim-after") bad_dim_after = std::stol(next());
    else if (a == "--crash-after") crash_after = std::stol(next());
    else if (a == "--error-id") error_id = next();
    else if (a == "--no-handshake") handshake = false;
  }

  if (handshake) {
    std::cout << nlohmann::json{{"dim", dim}, {"model", "stub"}, {"pooling", "first-token"}}.dump()
              << std::endl;
  }
  std::vector<nlohmann::json> pending;
  std::string line;
  long served = 0;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    const auto req = nlohmann::json::parse(line);
    const auto id = req.at("id").get<std::string>();
    if (crash_after >= 0 && served >= crash_after) std::abort();
    nlohmann::json resp{{"id", id}};
    if (id == error_id) {
      resp["error"] = "tokenisation failed";
    } else {
      const std::size_t d = (bad_dim_after >= 0 && served >= bad_dim_after) ? dim + 1 : dim;
      resp["vector"] = stub_vector(req.at("text").get<std::string>(), seed, d);
    }
    ++served;
    if (reverse) {
      pending.push_back(std::move(resp));
    } else {
      std::cout << resp.dump() << std::endl;
    }
  }
  std::reverse(pending.begin(), pending.end());
  for (const auto& r : pending) std::cout << r.dump() << '\n';
  std::cout.flush();
  return 0;
}
