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

/// \file rerank.hpp
/// Second-stage re-scoring of first-stage candidates by an external scorer,
/// and reciprocal rank fusion of several rankings.
///
/// Scorer wire protocol, one JSON object per line over the child's pipes:
///   request  {"id": <pair id>, "query": <topic text>, "doc": <document text>}
///   response {"id": <pair id>, "score": <finite number>}
/// One response per request; response order is free.

#include <chrono>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "humir/child_process.hpp"
#include "humir/ranking.hpp"

namespace humir {

struct CandidateSet {
  std::string topic_id;
  std::vector<ScoredDoc> candidates;  // first-stage order and scores
  std::size_t depth = 0;
};

/// First min(depth, |run|) entries of `run`, order preserved.
CandidateSet select_candidates(const RankedList& run, std::size_t depth);

struct ScorerRequest {
  std::string pair_id;
  std::string query;
  std::string doc;
};

struct ScorerResponse {
  std::string pair_id;
  double score = 0.0;
};

std::string encode_request(const ScorerRequest& r);
/// Throws ExternalError on malformed lines, missing fields or a non-finite
/// score.
ScorerResponse decode_response(std::string_view line);

class Scorer {
 public:
  virtual ~Scorer() = default;
  /// One response per request, in any order.
  virtual std::vector<ScorerResponse> score(std::span<const ScorerRequest> batch) = 0;
};

/// Scorer backed by a long-lived child process; batches are sent one at a
/// time.
class ProcessScorer : public Scorer {
 public:
  explicit ProcessScorer(const std::string& command, const ChildProcess::Env& env = {},
                         std::chrono::milliseconds timeout = std::chrono::seconds(120));
  std::vector<ScorerResponse> score(std::span<const ScorerRequest> batch) override;

 private:
  std::unique_ptr<ChildProcess> child_;
  std::chrono::milliseconds timeout_;
};

struct RerankOptions {
  std::size_t batch_size = 64;
};

/// Re-orders exactly the candidate documents by scorer score (descending,
/// ties by doc_id). First-stage scores are discarded.
RankedList rerank_with_scorer(const CandidateSet& cands, Scorer& scorer,
                              std::string_view topic_text,
                              const std::unordered_map<std::string, std::string>& texts,
                              RerankOptions opts = {});

inline constexpr double kDefaultRrfK = 60.0;

/// score(d) = sum over runs containing d of 1 / (k_rrf + rank), ranks from 1.
/// All runs must share one topic_id.
RankedList rrf_fuse(std::span<const RankedList> runs, double k_rrf = kDefaultRrfK);

/// Topic-aligned fusion of whole runs. Topics appear in first-seen order; a
/// topic missing from some runs is fused from the runs that have it. Each
/// fused list is cut to `depth` entries (0 keeps everything).
std::vector<RankedList> rrf_fuse_runs(std::span<const std::vector<RankedList>> runs,
                                      double k_rrf = kDefaultRrfK, std::size_t depth = 0);

}  // namespace humir
