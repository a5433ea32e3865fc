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

/// \file embed_store.hpp
/// Flat on-disk store of precomputed sentence embeddings.
///
/// A store is a directory holding `manifest.json` and `vectors.bin`. The bin
/// file is raw little-endian f32, row-major, no header, `count * dim * 4`
/// bytes. Opening a store memory-maps the bin file read-only and exposes it as
/// an Eigen row-major map; nothing is copied.

#include <Eigen/Core>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace humir {

template <typename Scalar>
using RowMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixF = RowMatrix<float>;

inline constexpr std::string_view kStoreDtype = "f32le";
inline constexpr std::string_view kManifestFile = "manifest.json";
inline constexpr std::string_view kVectorsFile = "vectors.bin";

struct EmbeddingManifest {
  std::size_t dim = 0;
  std::size_t count = 0;
  std::string dtype{kStoreDtype};
  std::vector<std::string> ids;
  bool normalized = false;
  /// Provenance recorded by the embedding stage (model, max_length, pooling).
  std::map<std::string, std::string> meta;
};

/// Immutable count x dim float matrix plus its manifest. Copies share the
/// underlying buffer (mapped file or owned heap block).
class EmbeddingMatrix {
 public:
  using ConstMap = Eigen::Map<const RowMatrixF>;
  using ConstRow = Eigen::Map<const Eigen::VectorXf>;

  EmbeddingMatrix() = default;

  /// Takes ownership of `rows`; `manifest.count`/`dim` are overwritten from
  /// the matrix shape.
  static EmbeddingMatrix from_matrix(EmbeddingManifest manifest, RowMatrixF rows);

  /// Wraps external storage kept alive by `backing`.
  EmbeddingMatrix(EmbeddingManifest manifest, std::shared_ptr<const void> backing,
                  const float* data);

  const EmbeddingManifest& manifest() const { return manifest_; }
  std::size_t count() const { return manifest_.count; }
  std::size_t dim() const { return manifest_.dim; }
  bool normalized() const { return manifest_.normalized; }
  bool empty() const { return manifest_.count == 0; }

  ConstMap matrix() const {
    return ConstMap(data_, static_cast<Eigen::Index>(count()),
                    static_cast<Eigen::Index>(dim()));
  }
  ConstRow row(std::size_t r) const {
    return ConstRow(data_ + r * dim(), static_cast<Eigen::Index>(dim()));
  }
  std::span<const float> raw() const { return {data_, count() * dim()}; }

  const std::string& id(std::size_t r) const { return manifest_.ids[r]; }
  std::optional<std::size_t> find_row(std::string_view id) const;
  /// Throws DataError when the id is not in the store.
  std::size_t row_of(std::string_view id) const;

 private:
  void build_lookup();

  EmbeddingManifest manifest_;
  std::shared_ptr<const void> backing_;
  const float* data_ = nullptr;
  std::unordered_map<std::string, std::size_t> row_by_id_;
};

/// Writes `manifest.json` + `vectors.bin` into `dir` (created if needed).
EmbeddingManifest write_store(
    const std::vector<std::pair<std::string, std::vector<float>>>& vectors,
    const std::filesystem::path& dir,
    const std::map<std::string, std::string>& meta = {});

/// Persists an in-memory matrix, keeping its `normalized` flag and metadata.
EmbeddingManifest write_store(const EmbeddingMatrix& m,
                              const std::filesystem::path& dir);

EmbeddingMatrix open_store(const std::filesystem::path& dir);

/// Row-wise L2 normalisation (computed in double). Throws DataError naming the
/// first zero-norm row.
EmbeddingMatrix normalize_rows(const EmbeddingMatrix& m);

}  // namespace humir
