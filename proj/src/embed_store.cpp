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

#include "humir/embed_store.hpp"

#include <fcntl.h>
#include <fmt/core.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <bit>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <unordered_set>

#include "humir/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "vectors.bin is read and written in host byte order");

namespace humir {

namespace {

constexpr double kNormTolerance = 1e-4;

// Read-only private mapping of a whole file.
class MappedFile {
 public:
  explicit MappedFile(const std::filesystem::path& path) {
    fd_ = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
    if (fd_ < 0) throw DataError(fmt::format("cannot open {}", path.string()));
    struct stat st {};
    if (::fstat(fd_, &st) != 0) {
      ::close(fd_);
      throw DataError(fmt::format("cannot stat {}", path.string()));
    }
    size_ = static_cast<std::size_t>(st.st_size);
    if (size_ > 0) {
      addr_ = ::mmap(nullptr, size_, PROT_READ, MAP_PRIVATE, fd_, 0);
      if (addr_ == MAP_FAILED) {
        ::close(fd_);
        throw DataError(fmt::format("cannot map {}", path.string()));
      }
    }
  }
  MappedFile(const MappedFile&) = delete;
  MappedFile& operator=(const MappedFile&) = delete;
  ~MappedFile() {
    if (addr_ != nullptr) ::munmap(addr_, size_);
    if (fd_ >= 0) ::close(fd_);
  }

  std::size_t size() const { return size_; }
  const float* floats() const { return static_cast<const float*>(addr_); }

 private:
  int fd_ = -1;
  void* addr_ = nullptr;
  std::size_t size_ = 0;
};

nlohmann::json manifest_to_json(const EmbeddingManifest& m) {
  nlohmann::json j;
  j["dim"] = m.dim;
  j["count"] = m.count;
  j["dtype"] = m.dtype;
  j["ids"] = m.ids;
  j["normalized"] = m.normalized;
  if (!m.meta.empty()) j["meta"] = m.meta;
  return j;
}

EmbeddingManifest manifest_from_json(const nlohmann::json& j,
                                     const std::filesystem::path& path) {
  EmbeddingManifest m;
  try {
    m.dim = j.at("dim").get<std::size_t>();
    m.count = j.at("count").get<std::size_t>();
    m.dtype = j.at("dtype").get<std::string>();
    m.ids = j.at("ids").get<std::vector<std::string>>();
    m.normalized = j.at("normalized").get<bool>();
    if (j.contains("meta")) {
      m.meta = j.at("meta").get<std::map<std::string, std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("{}: bad manifest: {}", path.string(), e.what()));
  }
  if (m.dtype != kStoreDtype) {
    throw DataError(fmt::format("{}: unsupported dtype '{}'", path.string(), m.dtype));
  }
  if (m.dim < 1) throw DataError(fmt::format("{}: dim must be >= 1", path.string()));
  if (m.ids.size() != m.count) {
    throw DataError(fmt::format("{}: {} ids for count {}", path.string(),
                                m.ids.size(), m.count));
  }
  return m;
}

void check_normalized(const EmbeddingMatrix& m) {
  for (std::size_t r = 0; r < m.count(); ++r) {
    const double norm = m.row(r).cast<double>().norm();
    if (std::abs(norm - 1.0) > kNormTolerance) {
      throw DataError(fmt::format(
          "store flagged normalized but row '{}' has norm {}", m.id(r), norm));
    }
  }
}

void write_files(const EmbeddingManifest& manifest, std::span<const float> data,
                 const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  {
    std::ofstream bin(dir / kVectorsFile, std::ios::binary | std::ios::trunc);
    if (!bin) throw DataError(fmt::format("cannot write {}", (dir / kVectorsFile).string()));
    bin.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size_bytes()));
    if (!bin) throw DataError("short write to vectors.bin");
  }
  std::ofstream js(dir / kManifestFile, std::ios::trunc);
  if (!js) throw DataError(fmt::format("cannot write {}", (dir / kManifestFile).string()));
  js << manifest_to_json(manifest).dump(2) << '\n';
}

}  // namespace

EmbeddingMatrix EmbeddingMatrix::from_matrix(EmbeddingManifest manifest,
                                             RowMatrixF rows) {
  manifest.count = static_cast<std::size_t>(rows.rows());
  manifest.dim = static_cast<std::size_t>(rows.cols());
  auto owned = std::make_shared<const RowMatrixF>(std::move(rows));
  const float* data = owned->data();
  return EmbeddingMatrix(std::move(manifest), std::move(owned), data);
}

EmbeddingMatrix::EmbeddingMatrix(EmbeddingManifest manifest,
                                 std::shared_ptr<const void> backing,
                                 const float* data)
    : manifest_(std::move(manifest)), backing_(std::move(backing)), data_(data) {
  if (manifest_.ids.size() != manifest_.count) {
    throw DataError(fmt::format("{} ids for {} rows", manifest_.ids.size(),
                                manifest_.count));
  }
  build_lookup();
}

void EmbeddingMatrix::build_lookup() {
  row_by_id_.reserve(manifest_.ids.size());
  for (std::size_t r = 0; r < manifest_.ids.size(); ++r) {
    if (!row_by_id_.emplace(manifest_.ids[r], r).second) {
      throw DataError(fmt::format("duplicate id '{}' in store", manifest_.ids[r]));
    }
  }
}

std::optional<std::size_t> EmbeddingMatrix::find_row(std::string_view id) const {
  auto it = row_by_id_.find(std::string(id));
  if (it == row_by_id_.end()) return std::nullopt;
  return it->second;
}

std::size_t EmbeddingMatrix::row_of(std::string_view id) const {
  if (auto r = find_row(id)) return *r;
  throw DataError(fmt::format("id '{}' not found in store", id));
}

EmbeddingManifest write_store(
    const std::vector<std::pair<std::string, std::vector<float>>>& vectors,
    const std::filesystem::path& dir,
    const std::map<std::string, std::string>& meta) {
  EmbeddingManifest manifest;
  manifest.meta = meta;
  manifest.count = vectors.size();
  manifest.dim = vectors.empty() ? 1 : vectors.front().second.size();
  if (manifest.dim == 0) {
    throw DataError(fmt::format("vector '{}' has dimension 0", vectors.front().first));
  }
  std::unordered_set<std::string> seen;
  std::vector<float> flat;
  flat.reserve(manifest.count * manifest.dim);
  for (const auto& [id, vec] : vectors) {
    if (vec.size() != manifest.dim) {
      throw DataError(fmt::format("vector '{}' has dimension {}, expected {}", id,
                                  vec.size(), manifest.dim));
    }
    if (!seen.insert(id).second) {
      throw DataError(fmt::format("duplicate vector id '{}'", id));
    }
    for (float x : vec) {
      if (!std::isfinite(x)) {
        throw DataError(fmt::format("vector '{}' has a non-finite component", id));
      }
    }
    manifest.ids.push_back(id);
    flat.insert(flat.end(), vec.begin(), vec.end());
  }
  write_files(manifest, flat, dir);
  return manifest;
}

EmbeddingManifest write_store(const EmbeddingMatrix& m,
                              const std::filesystem::path& dir) {
  write_files(m.manifest(), m.raw(), dir);
  return m.manifest();
}

EmbeddingMatrix open_store(const std::filesystem::path& dir) {
  const auto manifest_path = dir / kManifestFile;
  std::ifstream js(manifest_path);
  if (!js) throw DataError(fmt::format("missing {}", manifest_path.string()));
  nlohmann::json j;
  try {
    js >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("{}: {}", manifest_path.string(), e.what()));
  }
  auto manifest = manifest_from_json(j, manifest_path);

  auto file = std::make_shared<const MappedFile>(dir / kVectorsFile);
  const std::size_t expected = manifest.count * manifest.dim * sizeof(float);
  if (file->size() != expected) {
    throw DataError(fmt::format(
        "{}: size mismatch, expected {} bytes for {} x {} f32, found {}",
        (dir / kVectorsFile).string(), expected, manifest.count, manifest.dim,
        file->size()));
  }
  const float* data = file->floats();
  EmbeddingMatrix m(std::move(manifest), std::move(file), data);
  if (m.normalized()) check_normalized(m);
  return m;
}

EmbeddingMatrix normalize_rows(const EmbeddingMatrix& m) {
  RowMatrix<double> rows = m.matrix().cast<double>();
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    const double norm = rows.row(r).norm();
    if (norm == 0.0 || !std::isfinite(norm)) {
      throw DataError(fmt::format("cannot normalize row '{}': norm is {}",
                                  m.id(static_cast<std::size_t>(r)), norm));
    }
    rows.row(r) /= norm;
  }
  auto manifest = m.manifest();
  manifest.normalized = true;
  return EmbeddingMatrix::from_matrix(std::move(manifest), rows.cast<float>());
}

}  // namespace humir
