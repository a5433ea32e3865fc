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

/// \file dense.hpp
/// Exact cosine-similarity retrieval over an embedding store.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "humir/embed_store.hpp"
#include "humir/errors.hpp"
#include "humir/ranking.hpp"

namespace humir {

/// a.b / (|a| |b|), accumulated in double and clamped to [-1, 1].
template <typename DerivedA, typename DerivedB>
double cosine_sim(const Eigen::MatrixBase<DerivedA>& a,
                  const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) {
    throw DataError("cosine_sim: dimension mismatch (" + std::to_string(a.size()) +
                    " vs " + std::to_string(b.size()) + ")");
  }
  const Eigen::VectorXd x = a.template cast<double>().reshaped();
  const Eigen::VectorXd y = b.template cast<double>().reshaped();
  const double nx = x.norm();
  const double ny = y.norm();
  if (nx == 0.0 || ny == 0.0) throw DataError("cosine_sim: zero-norm vector");
  return std::clamp(x.dot(y) / (nx * ny), -1.0, 1.0);
}

struct DenseOptions {
  /// Worker threads for scoring; 0 picks hardware concurrency.
  std::size_t threads = 0;
};

/// Top-k documents for one query vector. An empty store yields an empty list.
RankedList retrieve_dense(Eigen::Ref<const Eigen::VectorXf> topic_vec,
                          const EmbeddingMatrix& docs, std::size_t k,
                          std::string topic_id = {}, DenseOptions opts = {});

/// One RankedList per topic row (topic ids from the topic store), identical
/// to calling retrieve_dense on each row.
std::vector<RankedList> retrieve_dense_batch(const EmbeddingMatrix& topics,
                                             const EmbeddingMatrix& docs,
                                             std::size_t k, DenseOptions opts = {});

}  // namespace humir
