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

#include "humir/ranking.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "humir/errors.hpp"

namespace humir {

std::vector<std::string> RankedList::doc_ids() const {
  std::vector<std::string> ids;
  ids.reserve(entries.size());
  for (const auto& e : entries) ids.push_back(e.doc_id);
  return ids;
}

void sort_and_truncate(std::vector<ScoredDoc>& docs, std::size_t k) {
  if (k < docs.size()) {
    std::partial_sort(docs.begin(), docs.begin() + static_cast<std::ptrdiff_t>(k),
                      docs.end(), RankOrder{});
    docs.resize(k);
  } else {
    std::sort(docs.begin(), docs.end(), RankOrder{});
  }
}

void validate(const RankedList& list) {
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < list.entries.size(); ++i) {
    const auto& e = list.entries[i];
    if (!std::isfinite(e.score)) {
      throw DataError(fmt::format("topic '{}': non-finite score for doc '{}'",
                                  list.topic_id, e.doc_id));
    }
    if (!seen.insert(e.doc_id).second) {
      throw DataError(fmt::format("topic '{}': duplicate doc_id '{}'",
                                  list.topic_id, e.doc_id));
    }
    if (i > 0 && e.score > list.entries[i - 1].score) {
      throw DataError(fmt::format("topic '{}': score increases at rank {}",
                                  list.topic_id, i + 1));
    }
  }
}

}  // namespace humir
