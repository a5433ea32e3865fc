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

/// \file corpus.hpp
/// Collection data model: documents, topics and binary relevance judgements,
/// plus loaders for the on-disk exchange formats.
///
///   corpus TSV   `doc_id<TAB>text` (first tab splits, later tabs are text)
///   corpus JSONL `{"id": ..., "text": ..., "meta": {...}}` per line
///   topics       same TSV layout as the corpus
///   qrels        `topic_id iter doc_id rel`, whitespace separated

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace humir {

struct Document {
  std::string doc_id;
  std::string text;
  std::map<std::string, std::string> meta;
};

struct Topic {
  std::string topic_id;
  std::string text;
};

enum class CorpusFormat { tsv, jsonl };

CorpusFormat parse_corpus_format(std::string_view name);

/// Binary relevance judgements keyed by (topic_id, doc_id).
class QrelSet {
 public:
  /// Inserts a judgement; graded labels are binarised (rel > 0 -> 1).
  /// Returns false if the pair was already present with a different label.
  bool add(const std::string& topic_id, const std::string& doc_id, long rel);

  /// 0 for unjudged pairs.
  int relevance(std::string_view topic_id, std::string_view doc_id) const;
  bool is_relevant(std::string_view topic_id, std::string_view doc_id) const {
    return relevance(topic_id, doc_id) == 1;
  }

  /// Number of relevant documents for a topic (0 if unknown).
  std::size_t num_relevant(std::string_view topic_id) const;

  bool has_topic(std::string_view topic_id) const;
  /// Judged topics in ascending id order.
  std::vector<std::string> topic_ids() const;
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  const std::map<std::string, int, std::less<>>& judgements(
      std::string_view topic_id) const;

 private:
  std::map<std::string, std::map<std::string, int, std::less<>>, std::less<>>
      by_topic_;
  std::size_t size_ = 0;
};

std::vector<Document> load_corpus(const std::filesystem::path& path,
                                  CorpusFormat format);
std::vector<Topic> load_topics(const std::filesystem::path& path);
QrelSet load_qrels(const std::filesystem::path& path);

/// Canonical TSV serialisation. Text containing newlines cannot be written
/// as TSV and is rejected.
void write_corpus_tsv(const std::vector<Document>& docs,
                      const std::filesystem::path& path);
void write_topics_tsv(const std::vector<Topic>& topics,
                      const std::filesystem::path& path);
void write_qrels(const QrelSet& qrels, const std::filesystem::path& path);

/// doc_id -> text lookup over a loaded corpus.
std::unordered_map<std::string, std::string> text_lookup(
    const std::vector<Document>& docs);

}  // namespace humir
