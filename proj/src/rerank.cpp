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

#include "humir/rerank.hpp"

#include <fmt/core.h>

#include <cmath>
#include <json.hpp>
#include <map>
#include <unordered_set>

#include "humir/errors.hpp"

namespace humir {

CandidateSet select_candidates(const RankedList& run, std::size_t depth) {
  if (depth == 0) throw UsageError("candidate depth must be >= 1");
  CandidateSet out{run.topic_id, {}, depth};
  const auto n = std::min(depth, run.entries.size());
  out.candidates.assign(run.entries.begin(),
                        run.entries.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

std::string encode_request(const ScorerRequest& r) {
  nlohmann::json j;
  j["id"] = r.pair_id;
  j["query"] = r.query;
  j["doc"] = r.doc;
  return j.dump();
}

ScorerResponse decode_response(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ExternalError(fmt::format("malformed scorer response '{}': {}", line, e.what()));
  }
  if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) {
    throw ExternalError(fmt::format("scorer response without string 'id': {}", line));
  }
  ScorerResponse r;
  r.pair_id = j["id"].get<std::string>();
  if (j.contains("error")) {
    throw ExternalError(fmt::format("scorer reported an error for pair '{}': {}", r.pair_id,
                                    j["error"].dump()));
  }
  if (!j.contains("score") || !j["score"].is_number()) {
    throw ExternalError(fmt::format("scorer response for pair '{}' has no numeric score",
                                    r.pair_id));
  }
  r.score = j["score"].get<double>();
  if (!std::isfinite(r.score)) {
    throw ExternalError(fmt::format("non-finite score for pair '{}'", r.pair_id));
  }
  return r;
}

ProcessScorer::ProcessScorer(const std::string& command, const ChildProcess::Env& env,
                             std::chrono::milliseconds timeout)
    : child_(std::make_unique<ChildProcess>(command, env)), timeout_(timeout) {}

std::vector<ScorerResponse> ProcessScorer::score(std::span<const ScorerRequest> batch) {
  std::vector<std::string> lines;
  lines.reserve(batch.size());
  for (const auto& r : batch) lines.push_back(encode_request(r));
  const auto replies = child_->transact(lines, batch.size(), timeout_);
  std::vector<ScorerResponse> out;
  out.reserve(replies.size());
  for (const auto& line : replies) out.push_back(decode_response(line));
  return out;
}

RankedList rerank_with_scorer(const CandidateSet& cands, Scorer& scorer,
                              std::string_view topic_text,
                              const std::unordered_map<std::string, std::string>& texts,
                              RerankOptions opts) {
  const std::size_t batch_size = std::max<std::size_t>(opts.batch_size, 1);
  std::vector<ScorerRequest> requests;
  std::unordered_set<std::string> seen_docs;
  requests.reserve(cands.candidates.size());
  for (std::size_t i = 0; i < cands.candidates.size(); ++i) {
    const auto& doc_id = cands.candidates[i].doc_id;
    if (!seen_docs.insert(doc_id).second) {
      throw DataError(fmt::format("topic '{}': duplicate candidate '{}'", cands.topic_id,
                                  doc_id));
    }
    auto it = texts.find(doc_id);
    if (it == texts.end()) {
      throw DataError(fmt::format("topic '{}': no text for candidate document '{}'",
                                  cands.topic_id, doc_id));
    }
    requests.push_back({fmt::format("{}:{}", cands.topic_id, i + 1), std::string(topic_text),
                        it->second});
  }

  std::vector<ScoredDoc> rescored;
  rescored.reserve(requests.size());
  for (std::size_t begin = 0; begin < requests.size(); begin += batch_size) {
    const std::size_t end = std::min(requests.size(), begin + batch_size);
    std::span<const ScorerRequest> batch(requests.data() + begin, end - begin);
    std::map<std::string, std::size_t, std::less<>> pending;
    for (std::size_t i = begin; i < end; ++i) pending.emplace(requests[i].pair_id, i);

    for (const auto& resp : scorer.score(batch)) {
      auto it = pending.find(resp.pair_id);
      if (it == pending.end()) {
        throw ExternalError(fmt::format("scorer answered unknown or repeated pair '{}'",
                                        resp.pair_id));
      }
      if (!std::isfinite(resp.score)) {
        throw ExternalError(fmt::format("non-finite score for pair '{}'", resp.pair_id));
      }
      rescored.push_back({cands.candidates[it->second].doc_id, resp.score});
      pending.erase(it);
    }
    if (!pending.empty()) {
      throw ExternalError(fmt::format("scorer gave no response for pair '{}'",
                                      pending.begin()->first));
    }
  }
  sort_and_truncate(rescored, rescored.size());
  return RankedList{cands.topic_id, std::move(rescored)};
}

RankedList rrf_fuse(std::span<const RankedList> runs, double k_rrf) {
  if (!(k_rrf > 0.0)) throw UsageError(fmt::format("RRF constant must be > 0, got {}", k_rrf));
  if (runs.empty()) throw DataError("rrf_fuse: no runs to fuse");
  const auto& topic = runs.front().topic_id;
  std::unordered_map<std::string, double> fused;
  // Accumulate in run order so sums are reproducible.
  std::vector<std::string> order;
  for (const auto& run : runs) {
    if (run.topic_id != topic) {
      throw DataError(fmt::format("rrf_fuse: topic '{}' does not match '{}'", run.topic_id,
                                  topic));
    }
    for (std::size_t i = 0; i < run.entries.size(); ++i) {
      auto [it, inserted] = fused.try_emplace(run.entries[i].doc_id, 0.0);
      if (inserted) order.push_back(run.entries[i].doc_id);
      it->second += 1.0 / (k_rrf + static_cast<double>(i + 1));
    }
  }
  RankedList out{topic, {}};
  out.entries.reserve(order.size());
  for (auto& id : order) {
    const double s = fused.at(id);
    out.entries.push_back({std::move(id), s});
  }
  sort_and_truncate(out.entries, out.entries.size());
  return out;
}

std::vector<RankedList> rrf_fuse_runs(std::span<const std::vector<RankedList>> runs,
                                      double k_rrf, std::size_t depth) {
  std::vector<std::string> topics;
  std::map<std::string, std::vector<RankedList>> by_topic;
  for (const auto& run : runs) {
    for (const auto& list : run) {
      auto [it, inserted] = by_topic.try_emplace(list.topic_id);
      if (inserted) topics.push_back(list.topic_id);
      it->second.push_back(list);
    }
  }
  std::vector<RankedList> out;
  out.reserve(topics.size());
  for (const auto& t : topics) {
    auto fused = rrf_fuse(by_topic.at(t), k_rrf);
    if (depth > 0 && fused.entries.size() > depth) fused.entries.resize(depth);
    out.push_back(std::move(fused));
  }
  return out;
}

}  // namespace humir
