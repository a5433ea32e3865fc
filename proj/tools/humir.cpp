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

// humir: command-line driver for the retrieval and evaluation pipeline.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 external-process error.

#include <fmt/core.h>

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "humir/errors.hpp"
#include "humir/pipeline.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kExternal = 3 };

struct Flags {
  humir::PipelineConfig cfg;
  std::string corpus_format = "tsv";
  std::string mode = "dense";
  std::string source = "documents";
  bool no_normalize = false;
  bool keep_zero_rel = false;
};

void add_corpus(CLI::App* app, Flags& f, bool required = false) {
  auto* opt = app->add_option("--corpus", f.cfg.corpus, "Document collection file");
  if (required) opt->required();
  app->add_option("--format", f.corpus_format, "Corpus format")
      ->check(CLI::IsMember({"tsv", "jsonl"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"humir: dense, lexical and re-ranked retrieval with TREC-style evaluation"};
  app.require_subcommand(1);
  Flags f;
  auto& cfg = f.cfg;
  std::vector<std::string> run_paths;

  auto* ingest = app.add_subcommand("ingest", "Validate inputs and write canonical copies");
  add_corpus(ingest, f);
  ingest->add_option("--topics", cfg.topics, "Topic file");
  ingest->add_option("--qrels", cfg.qrels, "Relevance judgements");
  ingest->add_option("--out", cfg.out, "Output directory")->required();

  auto* embed = app.add_subcommand("embed", "Encode documents or topics into a vector store");
  add_corpus(embed, f);
  embed->add_option("--topics", cfg.topics, "Topic file");
  embed->add_option("--source", f.source, "What to encode")
      ->check(CLI::IsMember({"documents", "docs", "topics"}));
  embed->add_option("--bridge", cfg.bridge_command,
                    fmt::format("Encoder bridge command (overridden by ${})", humir::kBridgeEnv));
  embed->add_option("--model", cfg.model, "Model name recorded in the manifest");
  embed->add_option("--max-length", cfg.max_length, "Truncation length recorded in the manifest")
      ->check(CLI::PositiveNumber);
  embed->add_flag("--no-normalize", f.no_normalize, "Store raw vectors without L2 normalisation");
  embed->add_option("--seed", cfg.seed, "Seed exported to the bridge");
  embed->add_option("--out", cfg.out, "Store directory")->required();

  auto* index = app.add_subcommand("index", "Build the BM25 inverted index");
  add_corpus(index, f, true);
  index->add_option("--out", cfg.out, "Index file")->required();

  auto* search = app.add_subcommand("search", "Retrieve a run for every topic");
  search->add_option("--mode", f.mode, "Retrieval model")->check(CLI::IsMember({"dense", "bm25"}));
  search->add_option("--doc-store", cfg.doc_store, "Document vector store (dense)");
  search->add_option("--topic-store", cfg.topic_store, "Topic vector store (dense)");
  search->add_option("--index", cfg.index, "BM25 index file (bm25)");
  search->add_option("--topics", cfg.topics, "Topic file (bm25)");
  search->add_option("--depth", cfg.depth, "Documents per topic")->check(CLI::PositiveNumber);
  search->add_option("--k1", cfg.bm25.k1, "BM25 k1");
  search->add_option("--b", cfg.bm25.b, "BM25 b");
  search->add_option("--threads", cfg.threads, "Scoring threads (0 = all cores)");
  search->add_option("--tag", cfg.run_tag, "Run tag prefix");
  search->add_option("--out", cfg.out, "Run file")->required();

  auto* rerank = app.add_subcommand("rerank", "Re-score the head of a run with an external scorer");
  rerank->add_option("--run", run_paths, "First-stage run")->required();
  add_corpus(rerank, f, true);
  rerank->add_option("--topics", cfg.topics, "Topic file")->required();
  rerank->add_option("--scorer", cfg.scorer_command, "Scorer command")->required();
  rerank->add_option("--rerank-depth", cfg.rerank_depth, "Candidates per topic")
      ->check(CLI::PositiveNumber);
  rerank->add_option("--batch", cfg.rerank_batch, "Pairs per scorer batch")
      ->check(CLI::PositiveNumber);
  rerank->add_option("--seed", cfg.seed, "Seed exported to the scorer");
  rerank->add_option("--tag", cfg.run_tag, "Run tag prefix");
  rerank->add_flag("--lenient", cfg.lenient, "Repair sloppy input runs");
  rerank->add_option("--out", cfg.out, "Run file")->required();

  auto* fuse = app.add_subcommand("fuse", "Reciprocal rank fusion of several runs");
  fuse->add_option("--run", run_paths, "Input runs")->required();
  fuse->add_option("--rrf-k", cfg.rrf_k, "Fusion constant")->check(CLI::PositiveNumber);
  fuse->add_option("--depth", cfg.depth, "Documents per topic")->check(CLI::PositiveNumber);
  fuse->add_option("--tag", cfg.run_tag, "Run tag prefix");
  fuse->add_flag("--lenient", cfg.lenient, "Repair sloppy input runs");
  fuse->add_option("--out", cfg.out, "Run file")->required();

  auto* emit = app.add_subcommand("emit", "Validate a run and rewrite it with a new tag");
  emit->add_option("--run", run_paths, "Input run")->required();
  emit->add_option("--tag", cfg.run_tag, "Run tag")->required();
  emit->add_flag("--lenient", cfg.lenient, "Re-sort and re-rank instead of rejecting");
  emit->add_option("--out", cfg.out, "Run file")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate a run against qrels");
  eval->add_option("--run", run_paths, "Run file")->required();
  eval->add_option("--qrels", cfg.qrels, "Relevance judgements")->required();
  eval->add_option("--per-query", cfg.per_query_out, "Per-query TSV output");
  eval->add_option("--out", cfg.out, "Write the table here as well");
  eval->add_flag("--keep-zero-rel", f.keep_zero_rel,
                 "Score topics without relevant documents as 0 instead of skipping them");
  eval->add_flag("--lenient", cfg.lenient, "Repair sloppy input runs");

  auto* compare = app.add_subcommand("compare", "Evaluate several runs into one table");
  compare->add_option("--run", run_paths, "Run files")->required();
  compare->add_option("--qrels", cfg.qrels, "Relevance judgements")->required();
  compare->add_option("--out", cfg.out, "Write the table here as well");
  compare->add_flag("--keep-zero-rel", f.keep_zero_rel,
                    "Score topics without relevant documents as 0 instead of skipping them");
  compare->add_flag("--lenient", cfg.lenient, "Repair sloppy input runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    cfg.corpus_format = humir::parse_corpus_format(f.corpus_format);
    cfg.normalize = !f.no_normalize;
    cfg.exclude_zero_relevant = !f.keep_zero_rel;
    cfg.runs.assign(run_paths.begin(), run_paths.end());

    if (ingest->parsed()) {
      const auto s = humir::cmd_ingest(cfg);
      fmt::print("documents {}\ntopics {}\njudgements {}\n", s.documents, s.topics, s.judgements);
    } else if (embed->parsed()) {
      const auto m = humir::cmd_embed(cfg, humir::parse_embed_source(f.source));
      fmt::print("wrote {} vectors of dim {} to {}\n", m.count, m.dim, cfg.out.string());
    } else if (index->parsed()) {
      fmt::print("indexed {} documents into {}\n", humir::cmd_index(cfg), cfg.out.string());
    } else if (search->parsed()) {
      const auto lines = humir::cmd_search(cfg, humir::parse_search_mode(f.mode));
      fmt::print("wrote {} lines to {}\n", lines, cfg.out.string());
    } else if (rerank->parsed()) {
      fmt::print("wrote {} lines to {}\n", humir::cmd_rerank(cfg), cfg.out.string());
    } else if (fuse->parsed()) {
      fmt::print("wrote {} lines to {}\n", humir::cmd_fuse(cfg), cfg.out.string());
    } else if (emit->parsed()) {
      fmt::print("wrote {} lines to {}\n", humir::cmd_emit(cfg), cfg.out.string());
    } else if (eval->parsed() || compare->parsed()) {
      const auto result = eval->parsed() ? humir::cmd_evaluate(cfg) : humir::cmd_compare(cfg);
      for (const auto& w : result.warnings) fmt::print(stderr, "warning: {}\n", w);
      fmt::print("{}", result.table);
    }
  } catch (const humir::UsageError& e) {
    fmt::print(stderr, "humir: {}\n", e.what());
    return kUsage;
  } catch (const humir::ExternalError& e) {
    fmt::print(stderr, "humir: {}\n", e.what());
    return kExternal;
  } catch (const humir::DataError& e) {
    fmt::print(stderr, "humir: {}\n", e.what());
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(stderr, "humir: {}\n", e.what());
    return kData;
  }
  return kOk;
}
