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

/// \file pipeline.hpp
/// The command-line stages. Each stage reads its inputs from disk and writes
/// its outputs to disk so stages can be re-run independently.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "humir/bm25.hpp"
#include "humir/corpus.hpp"
#include "humir/embed_store.hpp"
#include "humir/metrics.hpp"

namespace humir {

/// Environment variable that overrides the configured bridge command.
inline constexpr const char* kBridgeEnv = "HUMIR_BRIDGE";
/// Exported to bridge and scorer processes.
inline constexpr const char* kSeedEnv = "HUMIR_SEED";

struct PipelineConfig {
  std::filesystem::path corpus;
  CorpusFormat corpus_format = CorpusFormat::tsv;
  std::filesystem::path topics;
  std::filesystem::path qrels;
  std::filesystem::path doc_store;
  std::filesystem::path topic_store;
  std::filesystem::path index;
  std::vector<std::filesystem::path> runs;  // run inputs
  std::filesystem::path out;                // primary output of the stage
  std::filesystem::path per_query_out;      // eval: per-query TSV

  std::size_t depth = 100;
  Bm25Params bm25;
  double rrf_k = 60.0;
  std::size_t rerank_depth = 100;
  std::size_t rerank_batch = 64;
  std::string scorer_command;
  std::string bridge_command;
  std::string model = "xlm-roberta-large";
  std::size_t max_length = 256;
  bool normalize = true;
  std::string run_tag = "humir";
  std::uint64_t seed = 42;
  bool lenient = false;
  bool exclude_zero_relevant = true;
  std::size_t threads = 0;
};

enum class SearchMode { dense, bm25 };
enum class EmbedSource { documents, topics };

SearchMode parse_search_mode(std::string_view name);
EmbedSource parse_embed_source(std::string_view name);
std::string_view to_string(SearchMode mode);

struct IngestSummary {
  std::size_t documents = 0;
  std::size_t topics = 0;
  std::size_t judgements = 0;
};

/// Validates corpus/topics/qrels (whichever are set) and writes canonical
/// copies (corpus.tsv, topics.tsv, qrels.txt) into `out`.
IngestSummary cmd_ingest(const PipelineConfig& cfg);

/// Encodes documents or topics through the bridge into the store at `out`.
/// On failure no store directory is left behind.
EmbeddingManifest cmd_embed(const PipelineConfig& cfg, EmbedSource source);

/// Builds the BM25 index of the corpus and saves it to `out`.
std::size_t cmd_index(const PipelineConfig& cfg);

/// Writes a run to `out`; returns the number of lines.
std::size_t cmd_search(const PipelineConfig& cfg, SearchMode mode);
std::size_t cmd_rerank(const PipelineConfig& cfg);
std::size_t cmd_fuse(const PipelineConfig& cfg);
/// Re-validates (or, when lenient, repairs) `runs[0]` and rewrites it to `out`.
std::size_t cmd_emit(const PipelineConfig& cfg);

struct EvalResult {
  MetricReport report;
  std::string table;
  std::vector<std::string> warnings;
};

/// Evaluates `runs[0]`; writes the per-query TSV when `per_query_out` is set
/// and the rendered table to `out` when set.
EvalResult cmd_evaluate(const PipelineConfig& cfg);

/// Evaluates every run against the qrels and renders one comparison table.
EvalResult cmd_compare(const PipelineConfig& cfg);

std::string search_run_tag(const PipelineConfig& cfg, SearchMode mode);

}  // namespace humir
