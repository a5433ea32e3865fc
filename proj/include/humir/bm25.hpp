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

/// \file bm25.hpp
/// Okapi BM25 lexical retrieval over an in-memory inverted index.
///
///   score(q, d) = sum_{t in q} idf(t) * f * (k1 + 1) / (f + k1 * (1 - b + b * |d| / avgdl))
///   idf(t)      = ln(1 + (N - df + 0.5) / (df + 0.5))
///
/// Repeated query terms contribute once per occurrence.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "humir/corpus.hpp"
#include "humir/ranking.hpp"

namespace humir {

struct Bm25Params {
  double k1 = 1.5;
  double b = 0.75;

  /// Throws UsageError when k1 <= 0 or b is outside [0, 1].
  void validate() const;
};

/// Lowercases (Unicode simple case mapping) and splits on every code point
/// that is not alphanumeric. No stemming, no stopwords.
std::vector<std::string> tokenize(std::string_view text);

struct Posting {
  std::uint32_t doc_row = 0;
  std::uint32_t tf = 0;

  friend bool operator==(const Posting&, const Posting&) = default;
};

class InvertedIndex {
 public:
  InvertedIndex() = default;

  std::size_t num_docs() const { return doc_ids_.size(); }
  double avgdl() const { return avgdl_; }
  std::size_t doc_length(std::size_t row) const { return doc_lengths_[row]; }
  const std::string& doc_id(std::size_t row) const { return doc_ids_[row]; }
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }
  const std::vector<std::uint32_t>& doc_lengths() const { return doc_lengths_; }

  std::size_t doc_freq(std::string_view term) const;
  /// Postings sorted by doc_row; empty span for unknown terms.
  std::span<const Posting> postings(std::string_view term) const;
  std::size_t vocabulary_size() const { return postings_.size(); }

  /// Single-file binary serialisation with a versioned header.
  void save(const std::filesystem::path& path) const;
  static InvertedIndex load(const std::filesystem::path& path);

  friend InvertedIndex build_index(const std::vector<Document>& docs);

 private:
  void finalize();

  std::unordered_map<std::string, std::vector<Posting>> postings_;
  std::vector<std::uint32_t> doc_lengths_;
  std::vector<std::string> doc_ids_;
  double avgdl_ = 0.0;
};

InvertedIndex build_index(const std::vector<Document>& docs);

double bm25_idf(std::size_t num_docs, std::size_t doc_freq);

double bm25_score(const InvertedIndex& idx, const Bm25Params& params,
                  std::span<const std::string> topic_tokens, std::size_t doc_row);

/// Documents with a zero score are left out; ordering as for dense retrieval.
RankedList retrieve_bm25(const InvertedIndex& idx, const Bm25Params& params,
                         const Topic& topic, std::size_t k);

}  // namespace humir
