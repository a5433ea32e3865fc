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

#include "humir/pipeline.hpp"

#include <fmt/core.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <unordered_map>

#include "humir/bridge.hpp"
#include "humir/dense.hpp"
#include "humir/errors.hpp"
#include "humir/rerank.hpp"
#include "humir/run_io.hpp"

namespace humir {

namespace fs = std::filesystem;

namespace {

const fs::path& require(const fs::path& p, std::string_view flag) {
  if (p.empty()) throw UsageError(fmt::format("missing required option --{}", flag));
  return p;
}

bool same_file(const fs::path& a, const fs::path& b) {
  if (a.empty() || b.empty()) return false;
  std::error_code ec;
  if (fs::exists(a, ec) && fs::exists(b, ec)) return fs::equivalent(a, b, ec);
  return fs::weakly_canonical(a, ec) == fs::weakly_canonical(b, ec);
}

void check_output_distinct(const PipelineConfig& cfg) {
  if (cfg.out.empty()) return;
  std::vector<fs::path> inputs{cfg.corpus, cfg.topics, cfg.qrels, cfg.doc_store,
                               cfg.topic_store, cfg.index};
  inputs.insert(inputs.end(), cfg.runs.begin(), cfg.runs.end());
  for (const auto& in : inputs) {
    if (same_file(cfg.out, in)) {
      throw UsageError(fmt::format("output {} would overwrite input {}", cfg.out.string(),
                                   in.string()));
    }
  }
}

ChildProcess::Env child_env(const PipelineConfig& cfg) {
  return {{kSeedEnv, std::to_string(cfg.seed)}};
}

std::string bridge_command(const PipelineConfig& cfg) {
  if (const char* env = std::getenv(kBridgeEnv); env != nullptr && *env != '\0') return env;
  if (cfg.bridge_command.empty()) {
    throw UsageError(fmt::format("no bridge command: pass --bridge or set {}", kBridgeEnv));
  }
  return cfg.bridge_command;
}

// Removes a directory tree on scope exit unless released.
class ScratchDir {
 public:
  explicit ScratchDir(fs::path p) : path_(std::move(p)) {}
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  ~ScratchDir() {
    if (!path_.empty()) {
      std::error_code ec;
      fs::remove_all(path_, ec);
    }
  }
  const fs::path& path() const { return path_; }
  void release() { path_.clear(); }

 private:
  fs::path path_;
};

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  out << text;
}

MetricReport evaluate_file(const fs::path& run, const QrelSet& qrels,
                           const PipelineConfig& cfg) {
  return evaluate_run(parse_run(run, {cfg.lenient}), qrels, {cfg.exclude_zero_relevant});
}

}  // namespace

SearchMode parse_search_mode(std::string_view name) {
  if (name == "dense") return SearchMode::dense;
  if (name == "bm25") return SearchMode::bm25;
  throw UsageError(fmt::format("unknown search mode '{}'", name));
}

EmbedSource parse_embed_source(std::string_view name) {
  if (name == "documents" || name == "docs") return EmbedSource::documents;
  if (name == "topics") return EmbedSource::topics;
  throw UsageError(fmt::format("unknown embedding source '{}'", name));
}

std::string_view to_string(SearchMode mode) {
  return mode == SearchMode::dense ? "dense" : "bm25";
}

std::string search_run_tag(const PipelineConfig& cfg, SearchMode mode) {
  return fmt::format("{}-{}-d{}", cfg.run_tag, to_string(mode), cfg.depth);
}

IngestSummary cmd_ingest(const PipelineConfig& cfg) {
  const auto& out = require(cfg.out, "out");
  check_output_distinct(cfg);
  if (cfg.corpus.empty() && cfg.topics.empty() && cfg.qrels.empty()) {
    throw UsageError("ingest needs at least one of --corpus, --topics, --qrels");
  }
  IngestSummary summary;
  std::vector<Document> docs;
  std::vector<Topic> topics;
  QrelSet qrels;
  if (!cfg.corpus.empty()) docs = load_corpus(cfg.corpus, cfg.corpus_format);
  if (!cfg.topics.empty()) topics = load_topics(cfg.topics);
  if (!cfg.qrels.empty()) qrels = load_qrels(cfg.qrels);

  fs::create_directories(out);
  if (!cfg.corpus.empty()) write_corpus_tsv(docs, out / "corpus.tsv");
  if (!cfg.topics.empty()) write_topics_tsv(topics, out / "topics.tsv");
  if (!cfg.qrels.empty()) write_qrels(qrels, out / "qrels.txt");
  summary.documents = docs.size();
  summary.topics = topics.size();
  summary.judgements = qrels.size();
  return summary;
}

EmbeddingManifest cmd_embed(const PipelineConfig& cfg, EmbedSource source) {
  const auto& out = require(cfg.out, "out");
  check_output_distinct(cfg);
  std::vector<std::pair<std::string, std::string>> items;
  if (source == EmbedSource::documents) {
    for (auto& d : load_corpus(require(cfg.corpus, "corpus"), cfg.corpus_format)) {
      items.emplace_back(std::move(d.doc_id), std::move(d.text));
    }
  } else {
    for (auto& t : load_topics(require(cfg.topics, "topics"))) {
      items.emplace_back(std::move(t.topic_id), std::move(t.text));
    }
  }

  const auto encoded = encode_with_bridge(bridge_command(cfg), items, child_env(cfg));

  EmbeddingManifest manifest;
  manifest.meta = {{"model", cfg.model},
                   {"max_length", std::to_string(cfg.max_length)},
                   {"pooling", "first-token"},
                   {"source", source == EmbedSource::documents ? "documents" : "topics"}};
  for (const auto& [k, v] : encoded.handshake.info) manifest.meta[k] = v;
  manifest.ids.reserve(encoded.vectors.size());
  RowMatrixF rows(static_cast<Eigen::Index>(encoded.vectors.size()),
                  static_cast<Eigen::Index>(encoded.handshake.dim));
  for (std::size_t r = 0; r < encoded.vectors.size(); ++r) {
    manifest.ids.push_back(encoded.vectors[r].first);
    rows.row(static_cast<Eigen::Index>(r)) =
        Eigen::Map<const Eigen::RowVectorXf>(encoded.vectors[r].second.data(), rows.cols());
  }
  auto matrix = EmbeddingMatrix::from_matrix(std::move(manifest), std::move(rows));
  if (cfg.normalize) matrix = normalize_rows(matrix);

  // Build next to the destination, then swap into place.
  ScratchDir scratch(out.parent_path() /
                     fmt::format(".{}.tmp-{}", out.filename().string(), ::getpid()));
  fs::remove_all(scratch.path());
  write_store(matrix, scratch.path());
  fs::remove_all(out);
  fs::rename(scratch.path(), out);
  scratch.release();
  return matrix.manifest();
}

std::size_t cmd_index(const PipelineConfig& cfg) {
  const auto& out = require(cfg.out, "out");
  check_output_distinct(cfg);
  const auto docs = load_corpus(require(cfg.corpus, "corpus"), cfg.corpus_format);
  const auto idx = build_index(docs);
  idx.save(out);
  return idx.num_docs();
}

std::size_t cmd_search(const PipelineConfig& cfg, SearchMode mode) {
  const auto& out = require(cfg.out, "out");
  check_output_distinct(cfg);
  if (cfg.depth == 0) throw UsageError("--depth must be >= 1");
  std::vector<RankedList> lists;
  if (mode == SearchMode::dense) {
    const auto docs = open_store(require(cfg.doc_store, "doc-store"));
    const auto topics = open_store(require(cfg.topic_store, "topic-store"));
    lists = retrieve_dense_batch(topics, docs, cfg.depth, {cfg.threads});
  } else {
    cfg.bm25.validate();
    const auto idx = InvertedIndex::load(require(cfg.index, "index"));
    for (const auto& topic : load_topics(require(cfg.topics, "topics"))) {
      lists.push_back(retrieve_bm25(idx, cfg.bm25, topic, cfg.depth));
    }
  }
  return emit_run(lists, search_run_tag(cfg, mode), out);
}

std::size_t cmd_rerank(const PipelineConfig& cfg) {
  const auto& out = require(cfg.out, "out");
  check_output_distinct(cfg);
  if (cfg.runs.size() != 1) throw UsageError("rerank takes exactly one --run");
  if (cfg.scorer_command.empty()) throw UsageError("missing required option --scorer");
  const auto run = parse_run(cfg.runs.front(), {cfg.lenient});
  std::unordered_map<std::string, std::string> topic_text;
  for (auto& t : load_topics(require(cfg.topics, "topics"))) {
    topic_text.emplace(std::move(t.topic_id), std::move(t.text));
  }
  const auto texts = text_lookup(load_corpus(require(cfg.corpus, "corpus"), cfg.corpus_format));

  ProcessScorer scorer(cfg.scorer_command, child_env(cfg));
  std::vector<RankedList> reranked;
  reranked.reserve(run.size());
  for (const auto& list : run) {
    auto it = topic_text.find(list.topic_id);
    if (it == topic_text.end()) {
      throw DataError(fmt::format("run topic '{}' is not in {}", list.topic_id,
                                  cfg.topics.string()));
    }
    reranked.push_back(rerank_with_scorer(select_candidates(list, cfg.rerank_depth), scorer,
                                          it->second, texts, {cfg.rerank_batch}));
  }
  return emit_run(reranked, fmt::format("{}-rerank-d{}", cfg.run_tag, cfg.rerank_depth), out);
}

std::size_t cmd_fuse(const PipelineConfig& cfg) {
  const auto& out = require(cfg.out, "out");
  check_output_distinct(cfg);
  if (cfg.runs.size() < 2) throw UsageError("fuse needs at least two --run inputs");
  std::vector<std::vector<RankedList>> runs;
  for (const auto& p : cfg.runs) runs.push_back(parse_run(p, {cfg.lenient}));
  const auto fused = rrf_fuse_runs(runs, cfg.rrf_k, cfg.depth);
  return emit_run(fused, fmt::format("{}-rrf-d{}", cfg.run_tag, cfg.depth), out);
}

std::size_t cmd_emit(const PipelineConfig& cfg) {
  const auto& out = require(cfg.out, "out");
  check_output_distinct(cfg);
  if (cfg.runs.size() != 1) throw UsageError("emit takes exactly one --run");
  const auto run = parse_run(cfg.runs.front(), {cfg.lenient});
  return emit_run(run, cfg.run_tag, out);
}

EvalResult cmd_evaluate(const PipelineConfig& cfg) {
  check_output_distinct(cfg);
  if (cfg.runs.size() != 1) throw UsageError("eval takes exactly one --run");
  const auto qrels = load_qrels(require(cfg.qrels, "qrels"));
  EvalResult result;
  result.report = evaluate_file(cfg.runs.front(), qrels, cfg);
  const std::vector<std::string> names{cfg.runs.front().filename().string()};
  const auto table = compare_runs({&result.report, 1}, names);
  result.table = table.render();
  if (!cfg.per_query_out.empty()) write_per_query_tsv(result.report, cfg.per_query_out);
  if (!cfg.out.empty()) write_text(cfg.out, result.table);
  return result;
}

EvalResult cmd_compare(const PipelineConfig& cfg) {
  check_output_distinct(cfg);
  if (cfg.runs.empty()) throw UsageError("compare needs at least one --run");
  const auto qrels = load_qrels(require(cfg.qrels, "qrels"));
  std::vector<MetricReport> reports;
  std::vector<std::string> names;
  for (const auto& p : cfg.runs) {
    reports.push_back(evaluate_file(p, qrels, cfg));
    names.push_back(p.filename().string());
  }
  const auto table = compare_runs(reports, names);
  EvalResult result;
  result.table = table.render();
  result.warnings = table.warnings;
  if (!table.rows.empty()) result.report = *table.rows.front().report;
  if (!cfg.out.empty()) write_text(cfg.out, result.table);
  return result;
}

}  // namespace humir
