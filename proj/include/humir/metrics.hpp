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

/// \file metrics.hpp
/// trec_eval-style effectiveness measures over binary relevance.
///
/// Conventions: ranks start at 1; P@K always divides by K; R-Prec counts
/// missing positions as non-relevant; nDCG uses binary gains with discount
/// log2(rank + 1); GMAP floors each AP at epsilon before the geometric mean.
/// AP, R-Prec and nDCG are 0 for a topic without relevant documents.

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "humir/corpus.hpp"
#include "humir/ranking.hpp"

namespace humir {

inline constexpr std::array<std::size_t, 3> kPrecisionCutoffs{5, 10, 100};
inline constexpr std::array<std::size_t, 2> kNdcgCutoffs{5, 10};
inline constexpr double kGmapEpsilon = 1e-5;

double average_precision(const RankedList& ranking, const QrelSet& qrels);
double gmap(std::span<const double> aps, double epsilon = kGmapEpsilon);
double r_precision(const RankedList& ranking, const QrelSet& qrels);
double reciprocal_rank(const RankedList& ranking, const QrelSet& qrels);
/// Throws UsageError for k == 0.
double precision_at_k(const RankedList& ranking, const QrelSet& qrels, std::size_t k);
double ndcg_at_k(const RankedList& ranking, const QrelSet& qrels, std::size_t k);

struct PerQueryResult {
  std::string topic_id;
  std::size_t num_ret = 0;
  std::size_t num_rel = 0;
  std::size_t num_rel_ret = 0;
  double ap = 0.0;
  double r_prec = 0.0;
  double rr = 0.0;
  std::map<std::size_t, double> p_at;
  std::map<std::size_t, double> ndcg_at;
};

PerQueryResult evaluate_topic(const RankedList& ranking, const QrelSet& qrels);

struct MetricReport {
  std::vector<PerQueryResult> per_query;  // ascending topic_id
  double map = 0.0;
  double gmap = 0.0;
  double r_prec = 0.0;
  double mrr = 0.0;
  std::map<std::size_t, double> p_at;
  std::map<std::size_t, double> ndcg_at;
  std::size_t evaluated_topics = 0;
  std::size_t num_ret = 0;
  std::size_t num_rel = 0;
  std::size_t num_rel_ret = 0;
};

inline double as_percent(double fraction) { return fraction * 100.0; }

struct EvalOptions {
  /// Leave judged topics without any relevant document out of every
  /// aggregate. When false they are scored as zeros.
  bool exclude_zero_relevant = true;
};

/// Evaluates every judged topic; judged topics missing from the run score 0,
/// run topics without judgements are ignored. Throws DataError on empty qrels.
MetricReport evaluate_run(const std::vector<RankedList>& run, const QrelSet& qrels,
                          EvalOptions opts = {});

/// Recomputes the aggregate fields of `report` from its per-query rows.
void aggregate(MetricReport& report);

/// `topic_id` plus one column per measure, fractions with six decimals.
std::string per_query_tsv(const MetricReport& report);
void write_per_query_tsv(const MetricReport& report, const std::filesystem::path& path);

struct ComparisonRow {
  std::string name;
  const MetricReport* report = nullptr;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;  // MAP descending, then name ascending
  std::vector<std::string> warnings;

  /// Aligned plain-text table; measures as percentages with two decimals.
  std::string render() const;
};

/// `reports` must outlive the returned table. Differing evaluated topic sets
/// produce warnings, not errors.
ComparisonTable compare_runs(std::span<const MetricReport> reports,
                             std::span<const std::string> names);

}  // namespace humir
