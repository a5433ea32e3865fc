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

#include "humir/metrics.hpp"

#include <gtest/gtest.h>

#include <random>

#include "humir/errors.hpp"
#include "oracles.hpp"
#include "random_collections.hpp"
#include "test_util.hpp"

namespace humir {
namespace {

RankedList ranking(std::vector<std::string> ids, std::string topic = "q") {
  RankedList r{std::move(topic), {}};
  for (std::size_t i = 0; i < ids.size(); ++i) {
    r.entries.push_back({ids[i], static_cast<double>(ids.size() - i)});
  }
  return r;
}

QrelSet qrels_of(std::vector<std::string> rel, std::vector<std::string> nonrel = {},
                 std::string topic = "q") {
  QrelSet q;
  for (const auto& d : rel) q.add(topic, d, 1);
  for (const auto& d : nonrel) q.add(topic, d, 0);
  return q;
}

TEST(AveragePrecision, HandValues) {
  auto q = qrels_of({"d1", "d3"}, {"d2"});
  EXPECT_NEAR(average_precision(ranking({"d1", "d2", "d3"}), q), 0.833333, 1e-6);
  EXPECT_DOUBLE_EQ(average_precision(ranking({"d3", "d1", "d2"}), q), 1.0);
  EXPECT_DOUBLE_EQ(average_precision(ranking({"d2", "x"}), q), 0.0);
  // Unretrieved relevant documents still count in the denominator.
  EXPECT_DOUBLE_EQ(average_precision(ranking({"d1"}), q), 0.5);
}

TEST(Gmap, HandValues) {
  const std::vector<double> half{0.5, 0.5}, extremes{1.0, 0.0}, single{0.25};
  EXPECT_NEAR(gmap(half), 0.5, 1e-15);
  EXPECT_NEAR(gmap(extremes), 0.0031623, 1e-7);
  EXPECT_NEAR(gmap(single), 0.25, 1e-15);
}

TEST(RPrecision, HandValues) {
  EXPECT_DOUBLE_EQ(r_precision(ranking({"r", "n"}), qrels_of({"r", "s"})), 0.5);
  EXPECT_NEAR(r_precision(ranking({"a"}), qrels_of({"a", "b", "c"})), 1.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(r_precision(ranking({"b", "a", "x"}), qrels_of({"a", "b"})), 1.0);
}

TEST(ReciprocalRank, HandValues) {
  auto q = qrels_of({"r"});
  EXPECT_DOUBLE_EQ(reciprocal_rank(ranking({"r", "a"}), q), 1.0);
  EXPECT_DOUBLE_EQ(reciprocal_rank(ranking({"a", "b", "c", "r"}), q), 0.25);
  EXPECT_DOUBLE_EQ(reciprocal_rank(ranking({"a", "b"}), q), 0.0);
}

TEST(PrecisionAtK, FixedDenominator) {
  EXPECT_DOUBLE_EQ(precision_at_k(ranking({"a", "r", "b", "c", "d", "r2"}), qrels_of({"r"}), 5), 0.2);
  EXPECT_DOUBLE_EQ(precision_at_k(ranking({"a", "r", "b"}), qrels_of({"r"}), 10), 0.1);
  EXPECT_DOUBLE_EQ(precision_at_k(ranking({"r1", "r2", "x"}), qrels_of({"r1", "r2"}), 2), 1.0);
  EXPECT_THROW(precision_at_k(ranking({"a"}), qrels_of({"a"}), 0), UsageError);
}

TEST(NdcgAtK, HandValues) {
  EXPECT_DOUBLE_EQ(ndcg_at_k(ranking({"r", "a"}), qrels_of({"r"}), 5), 1.0);
  EXPECT_NEAR(ndcg_at_k(ranking({"a", "r"}), qrels_of({"r"}), 5), 0.63093, 1e-5);
  EXPECT_NEAR(ndcg_at_k(ranking({"a", "r"}), qrels_of({"r"}), 5), 0.6309297535714575, 1e-15);
  EXPECT_DOUBLE_EQ(ndcg_at_k(ranking({"a", "b", "r"}), qrels_of({"r"}), 2), 0.0);
}

TEST(EvaluateRun, PerfectRuns) {
  auto q = qrels_of({"a", "b"}, {"c"}, "t1");
  q.add("t2", "x", 1);
  auto report = evaluate_run({ranking({"b", "a", "c"}, "t1"), ranking({"x"}, "t2")}, q);
  EXPECT_EQ(report.evaluated_topics, 2u);
  EXPECT_DOUBLE_EQ(report.map, 1.0);
  EXPECT_DOUBLE_EQ(report.mrr, 1.0);
  EXPECT_DOUBLE_EQ(report.r_prec, 1.0);
  EXPECT_DOUBLE_EQ(report.gmap, 1.0);
  EXPECT_DOUBLE_EQ(report.ndcg_at.at(5), 1.0);
  EXPECT_EQ(report.num_ret, 4u);
  EXPECT_EQ(report.num_rel, 3u);
  EXPECT_EQ(report.num_rel_ret, 3u);
}

TEST(EvaluateRun, TopicSelectionConventions) {
  QrelSet q;
  q.add("has", "a", 1);
  q.add("none", "a", 0);
  q.add("absent", "z", 1);
  std::vector<RankedList> run{ranking({"a"}, "has"), ranking({"a"}, "none"),
                              ranking({"a"}, "unjudged")};
  auto excluded = evaluate_run(run, q);
  EXPECT_EQ(excluded.evaluated_topics, 2u);  // has, absent
  EXPECT_DOUBLE_EQ(excluded.map, 0.5);
  EXPECT_DOUBLE_EQ(excluded.gmap, std::sqrt(1e-5));
  auto kept = evaluate_run(run, q, {.exclude_zero_relevant = false});
  EXPECT_EQ(kept.evaluated_topics, 3u);
  EXPECT_NEAR(kept.map, 1.0 / 3.0, 1e-15);
  EXPECT_THROW(evaluate_run(run, QrelSet{}), DataError);
}

TEST(EvaluateRun, MatchesDirectDefinitionOracle) {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    auto c = testutil::random_collection(rng);
    auto report = evaluate_run(c.run, c.qrels);
    auto want = oracle::evaluate(c.judgements, c.run_ids);
    ASSERT_EQ(report.evaluated_topics, want.topics);
    EXPECT_NEAR(report.map, want.map, 1e-9);
    EXPECT_NEAR(report.gmap, want.gmap, 1e-9);
    EXPECT_NEAR(report.r_prec, want.r_prec, 1e-9);
    EXPECT_NEAR(report.mrr, want.mrr, 1e-9);
    for (auto k : kPrecisionCutoffs) EXPECT_NEAR(report.p_at.at(k), want.p_at.at(k), 1e-9);
    for (auto k : kNdcgCutoffs) EXPECT_NEAR(report.ndcg_at.at(k), want.ndcg_at.at(k), 1e-9);
  }
}

TEST(MetricProperties, RangeAndMapRecomputation) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    auto c = testutil::random_collection(rng);
    auto report = evaluate_run(c.run, c.qrels);
    double sum = 0.0;
    for (const auto& r : report.per_query) {
      for (double v : {r.ap, r.r_prec, r.rr}) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
      for (const auto& [k, v] : r.p_at) EXPECT_LE(v, 1.0);
      for (const auto& [k, v] : r.ndcg_at) EXPECT_LE(v, 1.0 + 1e-12);
      EXPECT_LE(r.num_rel_ret, std::min(r.num_ret, r.num_rel));
      sum += r.ap;
    }
    if (!report.per_query.empty()) {
      EXPECT_NEAR(report.map, sum / static_cast<double>(report.per_query.size()), 1e-15);
    }
    auto copy = report;
    aggregate(copy);
    EXPECT_EQ(copy.map, report.map);
  }
}

TEST(MetricProperties, PermutingTailNonRelevantIsNeutral) {
  std::mt19937 rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    auto c = testutil::random_collection(rng);
    for (const auto& list : c.run) {
      std::size_t last_rel = 0;
      for (std::size_t i = 0; i < list.size(); ++i) {
        if (c.qrels.is_relevant(list.topic_id, list.entries[i].doc_id)) last_rel = i + 1;
      }
      auto shuffled = list;
      std::shuffle(shuffled.entries.begin() + static_cast<std::ptrdiff_t>(last_rel),
                   shuffled.entries.end(), rng);
      auto a = evaluate_topic(list, c.qrels);
      auto b = evaluate_topic(shuffled, c.qrels);
      EXPECT_EQ(a.ap, b.ap);
      EXPECT_EQ(a.rr, b.rr);
      EXPECT_EQ(a.r_prec, b.r_prec);
      for (auto k : kNdcgCutoffs) {
        if (k <= last_rel || last_rel == 0) EXPECT_EQ(a.ndcg_at.at(k), b.ndcg_at.at(k));
      }
    }
  }
}

TEST(MetricProperties, PromotingRelevantNeverHurts) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    auto c = testutil::random_collection(rng);
    for (const auto& list : c.run) {
      if (list.size() < 2) continue;
      std::uniform_int_distribution<std::size_t> pos(0, list.size() - 1);
      std::size_t i = pos(rng), j = pos(rng);
      if (i > j) std::swap(i, j);
      const bool rel_i = c.qrels.is_relevant(list.topic_id, list.entries[i].doc_id);
      const bool rel_j = c.qrels.is_relevant(list.topic_id, list.entries[j].doc_id);
      if (i == j || rel_i || !rel_j) continue;  // need relevant below non-relevant
      auto better = list;
      std::swap(better.entries[i].doc_id, better.entries[j].doc_id);
      auto a = evaluate_topic(list, c.qrels);
      auto b = evaluate_topic(better, c.qrels);
      EXPECT_GE(b.ap, a.ap);
      EXPECT_GE(b.rr, a.rr);
      EXPECT_GE(b.r_prec, a.r_prec);
      for (auto k : kPrecisionCutoffs) EXPECT_GE(b.p_at.at(k), a.p_at.at(k));
      for (auto k : kNdcgCutoffs) EXPECT_GE(b.ndcg_at.at(k), a.ndcg_at.at(k));
    }
  }
}

MetricReport report_with_map(double map) {
  MetricReport r;
  PerQueryResult q;
  q.topic_id = "t";
  q.ap = map;
  for (auto k : kPrecisionCutoffs) q.p_at[k] = 0;
  for (auto k : kNdcgCutoffs) q.ndcg_at[k] = 0;
  r.per_query.push_back(q);
  aggregate(r);
  return r;
}

TEST(CompareRuns, PercentagesAndOrdering) {
  std::vector<MetricReport> reports{report_with_map(0.0042), report_with_map(0.0138)};
  std::vector<std::string> names{"Large", "Reranked"};
  auto table = compare_runs(reports, names);
  ASSERT_EQ(table.rows.size(), 2u);
  EXPECT_EQ(table.rows[0].name, "Reranked");
  const auto text = table.render();
  const auto hi = text.find("1.38");
  const auto lo = text.find("0.42");
  ASSERT_NE(hi, std::string::npos) << text;
  ASSERT_NE(lo, std::string::npos) << text;
  EXPECT_LT(hi, lo);
  EXPECT_NE(text.find("nDCG@10"), std::string::npos);
  EXPECT_TRUE(table.warnings.empty());
}

TEST(CompareRuns, TiesByNameAndSingleRow) {
  std::vector<MetricReport> reports{report_with_map(0.3), report_with_map(0.3)};
  std::vector<std::string> names{"zeta", "alpha"};
  auto table = compare_runs(reports, names);
  EXPECT_EQ(table.rows[0].name, "alpha");
  EXPECT_EQ(table.rows[1].name, "zeta");
  std::vector<MetricReport> one{report_with_map(0.5)};
  std::vector<std::string> one_name{"only"};
  const auto text = compare_runs(one, one_name).render();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
}

TEST(CompareRuns, MismatchedTopicsWarn) {
  std::vector<MetricReport> reports{report_with_map(0.3), report_with_map(0.2)};
  reports[1].per_query[0].topic_id = "other";
  std::vector<std::string> names{"a", "b"};
  auto table = compare_runs(reports, names);
  EXPECT_EQ(table.warnings.size(), 1u);
  EXPECT_EQ(table.rows.size(), 2u);
}

TEST(PerQueryTsv, Layout) {
  auto q = qrels_of({"a"}, {}, "t1");
  auto report = evaluate_run({ranking({"a"}, "t1")}, q);
  const auto tsv = per_query_tsv(report);
  EXPECT_EQ(tsv.substr(0, tsv.find('\n')),
            "topic_id\tnum_ret\tnum_rel\tnum_rel_ret\tmap\tr_prec\trecip_rank\tP_5\tP_10\tP_100"
            "\tndcg_cut_5\tndcg_cut_10");
  EXPECT_NE(tsv.find("t1\t1\t1\t1\t1.000000\t1.000000\t1.000000\t0.200000"), std::string::npos);
}

}  // namespace
}  // namespace humir
