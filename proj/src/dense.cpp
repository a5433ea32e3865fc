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

#include "humir/dense.hpp"

#include <fmt/core.h>

#include <numeric>
#include <thread>

namespace humir {

namespace {

constexpr Eigen::Index kTopicChunk = 64;

struct PreparedQuery {
  Eigen::VectorXd vec;
  double norm = 0.0;
};

PreparedQuery prepare(Eigen::Ref<const Eigen::VectorXf> v, std::string_view id) {
  PreparedQuery q{v.cast<double>(), 0.0};
  q.norm = q.vec.norm();
  if (q.norm == 0.0 || !std::isfinite(q.norm)) {
    throw DataError(fmt::format("topic '{}' has a zero-norm or non-finite vector", id));
  }
  return q;
}

// Per-row norms in double; empty when the store is flagged normalized, in which
// case every norm is taken as 1.
std::vector<double> doc_norms(const EmbeddingMatrix& docs) {
  if (docs.normalized()) return {};
  std::vector<double> norms(docs.count());
  Eigen::VectorXd scratch(static_cast<Eigen::Index>(docs.dim()));
  for (std::size_t r = 0; r < docs.count(); ++r) {
    scratch = docs.row(r).cast<double>();
    norms[r] = scratch.norm();
    if (norms[r] == 0.0 || !std::isfinite(norms[r])) {
      throw DataError(fmt::format("document '{}' has a zero-norm or non-finite vector",
                                  docs.id(r)));
    }
  }
  return norms;
}

std::size_t worker_count(const DenseOptions& opts, std::size_t work) {
  std::size_t n = opts.threads ? opts.threads : std::thread::hardware_concurrency();
  return std::clamp<std::size_t>(n, 1, std::max<std::size_t>(work, 1));
}

template <typename Fn>
void parallel_ranges(std::size_t total, std::size_t workers, Fn&& fn) {
  if (workers <= 1) {
    fn(std::size_t{0}, total);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t step = (total + workers - 1) / workers;
  for (std::size_t begin = 0; begin < total; begin += step) {
    pool.emplace_back([&fn, begin, end = std::min(total, begin + step)] { fn(begin, end); });
  }
}

// scores(t, d) = cos(query t, doc d). Every entry is produced by the same
// aligned scratch-vector dot product, so a score does not depend on how
// topics or documents are grouped.
RowMatrix<double> score_chunk(std::span<const PreparedQuery> queries,
                              const EmbeddingMatrix& docs,
                              const std::vector<double>& norms, std::size_t workers) {
  const auto n_docs = static_cast<Eigen::Index>(docs.count());
  RowMatrix<double> scores(static_cast<Eigen::Index>(queries.size()), n_docs);
  parallel_ranges(docs.count(), workers, [&](std::size_t begin, std::size_t end) {
    Eigen::VectorXd row(static_cast<Eigen::Index>(docs.dim()));
    for (std::size_t d = begin; d < end; ++d) {
      row = docs.row(d).cast<double>();
      const double dn = norms.empty() ? 1.0 : norms[d];
      for (std::size_t t = 0; t < queries.size(); ++t) {
        const double cos = row.dot(queries[t].vec) / (queries[t].norm * dn);
        scores(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(d)) =
            std::clamp(cos, -1.0, 1.0);
      }
    }
  });
  return scores;
}

RankedList top_k(const Eigen::Ref<const Eigen::RowVectorXd>& scores,
                 const EmbeddingMatrix& docs, std::size_t k, std::string topic_id) {
  std::vector<std::size_t> rows(docs.count());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  auto better = [&](std::size_t a, std::size_t b) {
    const double sa = scores(static_cast<Eigen::Index>(a));
    const double sb = scores(static_cast<Eigen::Index>(b));
    if (sa != sb) return sa > sb;
    return docs.id(a) < docs.id(b);
  };
  const std::size_t n = std::min(k, rows.size());
  std::partial_sort(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n),
                    rows.end(), better);
  RankedList out{std::move(topic_id), {}};
  out.entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.entries.push_back({docs.id(rows[i]), scores(static_cast<Eigen::Index>(rows[i]))});
  }
  return out;
}

void check_args(std::size_t dim, const EmbeddingMatrix& docs, std::size_t k) {
  if (k == 0) throw DataError("retrieval depth k must be >= 1");
  if (!docs.empty() && dim != docs.dim()) {
    throw DataError(fmt::format("query dimension {} does not match store dimension {}",
                                dim, docs.dim()));
  }
}

std::vector<RankedList> rank_queries(std::vector<PreparedQuery> queries,
                                     std::vector<std::string> topic_ids,
                                     const EmbeddingMatrix& docs, std::size_t k,
                                     const DenseOptions& opts) {
  std::vector<RankedList> out(queries.size());
  if (docs.empty()) {
    for (std::size_t t = 0; t < queries.size(); ++t) out[t].topic_id = topic_ids[t];
    return out;
  }
  const auto norms = doc_norms(docs);
  const std::size_t workers = worker_count(opts, docs.count());
  for (std::size_t begin = 0; begin < queries.size(); begin += kTopicChunk) {
    const std::size_t end = std::min(queries.size(), begin + kTopicChunk);
    std::span<const PreparedQuery> chunk(queries.data() + begin, end - begin);
    const auto scores = score_chunk(chunk, docs, norms, workers);
    parallel_ranges(chunk.size(), worker_count(opts, chunk.size()),
                    [&](std::size_t lo, std::size_t hi) {
                      for (std::size_t t = lo; t < hi; ++t) {
                        out[begin + t] = top_k(scores.row(static_cast<Eigen::Index>(t)),
                                               docs, k, topic_ids[begin + t]);
                      }
                    });
  }
  return out;
}

}  // namespace

RankedList retrieve_dense(Eigen::Ref<const Eigen::VectorXf> topic_vec,
                          const EmbeddingMatrix& docs, std::size_t k,
                          std::string topic_id, DenseOptions opts) {
  check_args(static_cast<std::size_t>(topic_vec.size()), docs, k);
  std::vector<PreparedQuery> queries;
  queries.push_back(prepare(topic_vec, topic_id));
  return std::move(rank_queries(std::move(queries), {std::move(topic_id)}, docs, k, opts)
                       .front());
}

std::vector<RankedList> retrieve_dense_batch(const EmbeddingMatrix& topics,
                                             const EmbeddingMatrix& docs,
                                             std::size_t k, DenseOptions opts) {
  if (topics.empty()) {
    if (k == 0) throw DataError("retrieval depth k must be >= 1");
    return {};
  }
  check_args(topics.dim(), docs, k);
  std::vector<PreparedQuery> queries;
  queries.reserve(topics.count());
  for (std::size_t t = 0; t < topics.count(); ++t) {
    queries.push_back(prepare(topics.row(t), topics.id(t)));
  }
  return rank_queries(std::move(queries), topics.manifest().ids, docs, k, opts);
}

}  // namespace humir
