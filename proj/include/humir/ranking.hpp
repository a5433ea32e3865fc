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

#include <cstddef>
#include <string>
#include <vector>

namespace humir {

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;

  friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

/// Per-topic ranking: score descending, ties by doc_id ascending, no
/// duplicate doc ids, all scores finite.
struct RankedList {
  std::string topic_id;
  std::vector<ScoredDoc> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  std::vector<std::string> doc_ids() const;
};

/// Strict weak order used by every ranker: higher score first, then
/// lexicographically smaller doc_id.
struct RankOrder {
  bool operator()(const ScoredDoc& a, const ScoredDoc& b) const {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
  }
};

/// Sorts in place under RankOrder and truncates to `k` entries.
void sort_and_truncate(std::vector<ScoredDoc>& docs, std::size_t k);

/// Throws DataError describing the first violated RankedList invariant.
void validate(const RankedList& list);

}  // namespace humir
