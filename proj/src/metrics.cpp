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

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_map>

#include "humir/errors.hpp"

namespace humir {

namespace {

// Relevance flags of the ranking, in rank order.
std::vector<bool> relevance_vector(const RankedList& ranking, const QrelSet& qrels) {
  std::vector<bool> rel;
  rel.reserve(ranking.entries.size());
  for (const auto& e : ranking.entries) rel.push_back(qrels.is_relevant(ranking.topic_id, e.doc_id));
  return rel;
}

double ap_from(const std::vector<bool>& rel, std::size_t num_rel) {
  if (num_rel == 0) return 0.0;
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < rel.size(); ++i) {
    if (!rel[i]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  return sum / static_cast<double>(num_rel);
}

std::size_t hits_in_top(const std::vector<bool>& rel, std::size_t k) {
  const auto n = std::min(k, rel.size());
  return static_cast<std::size_t>(std::count(rel.begin(), rel.begin() + static_cast<std::ptrdiff_t>(n), true));
}

double rprec_from(const std::vector<bool>& rel, std::size_t num_rel) {
  if (num_rel == 0) return 0.0;
  return static_cast<double>(hits_in_top(rel, num_rel)) / static_cast<double>(num_rel);
}

double rr_from(const std::vector<bool>& rel) {
  for (std::size_t i = 0; i < rel.size(); ++i) {
    if (rel[i]) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

double precision_from(const std::vector<bool>& rel, std::size_t k) {
  if (k == 0) throw UsageError("precision cutoff must be >= 1");
  return static_cast<double>(hits_in_top(rel, k)) / static_cast<double>(k);
}

double ndcg_from(const std::vector<bool>& rel, std::size_t num_rel, std::size_t k) {
  if (k == 0) throw UsageError("nDCG cutoff must be >= 1");
  if (num_rel == 0) return 0.0;
  double dcg = 0.0;
  for (std::size_t i = 0; i < std::min(k, rel.size()); ++i) {
    if (rel[i]) dcg += 1.0 / std::log2(static_cast<double>(i + 2));
  }
  double ideal = 0.0;
  for (std::size_t i = 0; i < std::min(k, num_rel); ++i) {
    ideal += 1.0 / std::log2(static_cast<double>(i + 2));
  }
  return dcg / ideal;
}

double mean(const std::vector<PerQueryResult>& rows, auto field) {
  if (rows.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : rows) sum += field(r);
  return sum / static_cast<double>(rows.size());
}

}  // namespace

double average_precision(const RankedList& ranking, const QrelSet& qrels) {
  return ap_from(relevance_vector(ranking, qrels), qrels.num_relevant(ranking.topic_id));
}

double gmap(std::span<const double> aps, double epsilon) {
  if (aps.empty()) return 0.0;
  double log_sum = 0.0;
  for (double ap : aps) log_sum += std::log(std::max(ap, epsilon));
  return std::exp(log_sum / static_cast<double>(aps.size()));
}

double r_precision(const RankedList& ranking, const QrelSet& qrels) {
  return rprec_from(relevance_vector(ranking, qrels), qrels.num_relevant(ranking.topic_id));
}

double reciprocal_rank(const RankedList& ranking, const QrelSet& qrels) {
  return rr_from(relevance_vector(ranking, qrels));
}

double precision_at_k(const RankedList& ranking, const QrelSet& qrels, std::size_t k) {
  return precision_from(relevance_vector(ranking, qrels), k);
}

double ndcg_at_k(const RankedList& ranking, const QrelSet& qrels, std::size_t k) {
  return ndcg_from(relevance_vector(ranking, qrels), qrels.num_relevant(ranking.topic_id), k);
}

PerQueryResult evaluate_topic(const RankedList& ranking, const QrelSet& qrels) {
  const auto rel = relevance_vector(ranking, qrels);
  PerQueryResult r;
  r.topic_id = ranking.topic_id;
  r.num_ret = rel.size();
  r.num_rel = qrels.num_relevant(ranking.topic_id);
  r.num_rel_ret = hits_in_top(rel, rel.size());
  r.ap = ap_from(rel, r.num_rel);
  r.r_prec = rprec_from(rel, r.num_rel);
  r.rr = rr_from(rel);
  for (auto k : kPrecisionCutoffs) r.p_at[k] = precision_from(rel, k);
  for (auto k : kNdcgCutoffs) r.ndcg_at[k] = ndcg_from(rel, r.num_rel, k);
  return r;
}

void aggregate(MetricReport& report) {
  const auto& rows = report.per_query;
  report.evaluated_topics = rows.size();
  report.map = mean(rows, [](const auto& r) { return r.ap; });
  report.r_prec = mean(rows, [](const auto& r) { return r.r_prec; });
  report.mrr = mean(rows, [](const auto& r) { return r.rr; });
  std::vector<double> aps;
  aps.reserve(rows.size());
  for (const auto& r : rows) aps.push_back(r.ap);
  report.gmap = gmap(aps);
  for (auto k : kPrecisionCutoffs) {
    report.p_at[k] = mean(rows, [k](const auto& r) { return r.p_at.at(k); });
  }
  for (auto k : kNdcgCutoffs) {
    report.ndcg_at[k] = mean(rows, [k](const auto& r) { return r.ndcg_at.at(k); });
  }
  report.num_ret = report.num_rel = report.num_rel_ret = 0;
  for (const auto& r : rows) {
    report.num_ret += r.num_ret;
    report.num_rel += r.num_rel;
    report.num_rel_ret += r.num_rel_ret;
  }
}

MetricReport evaluate_run(const std::vector<RankedList>& run, const QrelSet& qrels,
                          EvalOptions opts) {
  if (qrels.empty()) throw DataError("cannot evaluate against empty qrels");
  std::unordered_map<std::string_view, const RankedList*> by_topic;
  for (const auto& list : run) by_topic.emplace(list.topic_id, &list);

  MetricReport report;
  for (const auto& topic : qrels.topic_ids()) {
    if (opts.exclude_zero_relevant && qrels.num_relevant(topic) == 0) continue;
    auto it = by_topic.find(topic);
    if (it != by_topic.end()) {
      report.per_query.push_back(evaluate_topic(*it->second, qrels));
    } else {
      report.per_query.push_back(evaluate_topic(RankedList{topic, {}}, qrels));
    }
  }
  aggregate(report);
  return report;
}

std::string per_query_tsv(const MetricReport& report) {
  std::string out = "topic_id\tnum_ret\tnum_rel\tnum_rel_ret\tmap\tr_prec\trecip_rank";
  for (auto k : kPrecisionCutoffs) out += fmt::format("\tP_{}", k);
  for (auto k : kNdcgCutoffs) out += fmt::format("\tndcg_cut_{}", k);
  out += '\n';
  for (const auto& r : report.per_query) {
    out += fmt::format("{}\t{}\t{}\t{}\t{:.6f}\t{:.6f}\t{:.6f}", r.topic_id, r.num_ret,
                       r.num_rel, r.num_rel_ret, r.ap, r.r_prec, r.rr);
    for (auto k : kPrecisionCutoffs) out += fmt::format("\t{:.6f}", r.p_at.at(k));
    for (auto k : kNdcgCutoffs) out += fmt::format("\t{:.6f}", r.ndcg_at.at(k));
    out += '\n';
  }
  return out;
}

void write_per_query_tsv(const MetricReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  out << per_query_tsv(report);
}

ComparisonTable compare_runs(std::span<const MetricReport> reports,
                             std::span<const std::string> names) {
  if (reports.size() != names.size()) {
    throw UsageError("compare_runs: one name per report is required");
  }
  ComparisonTable table;
  for (std::size_t i = 0; i < reports.size(); ++i) table.rows.push_back({names[i], &reports[i]});
  std::stable_sort(table.rows.begin(), table.rows.end(), [](const auto& a, const auto& b) {
    if (a.report->map != b.report->map) return a.report->map > b.report->map;
    return a.name < b.name;
  });

  auto topic_set = [](const MetricReport& r) {
    std::set<std::string> s;
    for (const auto& q : r.per_query) s.insert(q.topic_id);
    return s;
  };
  if (!reports.empty()) {
    const auto reference = topic_set(reports.front());
    for (std::size_t i = 1; i < reports.size(); ++i) {
      if (topic_set(reports[i]) != reference) {
        table.warnings.push_back(fmt::format(
            "run '{}' was evaluated on a different topic set than '{}'", names[i], names[0]));
      }
    }
  }
  return table;
}

std::string ComparisonTable::render() const {
  std::vector<std::string> header{"Run", "#ret", "#rel", "MAP", "GMAP", "R-Prec", "MRR"};
  for (auto k : kPrecisionCutoffs) header.push_back(fmt::format("P@{}", k));
  for (auto k : kNdcgCutoffs) header.push_back(fmt::format("nDCG@{}", k));

  std::vector<std::vector<std::string>> cells{header};
  auto pct = [](double v) { return fmt::format("{:.2f}", as_percent(v)); };
  for (const auto& row : rows) {
    const auto& r = *row.report;
    std::vector<std::string> line{row.name, std::to_string(r.num_ret),
                                  std::to_string(r.num_rel_ret), pct(r.map), pct(r.gmap),
                                  pct(r.r_prec), pct(r.mrr)};
    for (auto k : kPrecisionCutoffs) line.push_back(pct(r.p_at.at(k)));
    for (auto k : kNdcgCutoffs) line.push_back(pct(r.ndcg_at.at(k)));
    cells.push_back(std::move(line));
  }

  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  }
  std::string out;
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c == 0) {
        out += fmt::format("{:<{}}", line[c], width[c]);
      } else {
        out += fmt::format("  {:>{}}", line[c], width[c]);
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace humir
