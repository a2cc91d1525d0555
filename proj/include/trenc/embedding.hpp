// Copyright 2026 The trenc Authors.
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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "trenc/errors.hpp"
#include "trenc/linalg.hpp"
#include "trenc/text.hpp"

namespace trenc {

/// Mean of the token vectors (boundary tokens included by the caller).
inline Vector pool_tokens(const std::vector<Vector>& tokens) {
  if (tokens.empty()) throw DimensionMismatch("pool_tokens needs at least one vector");
  const auto dim = tokens.front().size();
  Vector sum = Vector::Zero(dim);
  for (const auto& t : tokens) {
    if (t.size() != dim) throw DimensionMismatch("token vectors differ in length");
    sum += t;
  }
  return sum / static_cast<double>(tokens.size());
}

namespace embedding_detail {

inline constexpr std::uint64_t kBoundaryBasis = 0x84222325cbf29ce4ULL;

inline Vector unit_gaussian(std::uint64_t key, int dim) {
  std::mt19937_64 gen(key);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = normal(gen);
  const double norm = v.norm();
  // A zero draw is measure-zero; fall back to a basis vector just in case.
  if (norm == 0.0) {
    v.setZero();
    v(static_cast<Eigen::Index>(key % static_cast<std::uint64_t>(dim))) = 1.0;
    return v;
  }
  return v / norm;
}

inline std::uint64_t token_key(std::string_view token, std::uint64_t seed) {
  return splitmix64(fnv1a64(token) ^ splitmix64(seed));
}

inline std::uint64_t boundary_key(std::string_view which, std::uint64_t seed) {
  return splitmix64(fnv1a64(which, kBoundaryBasis) ^ splitmix64(seed + 1));
}

}  // namespace embedding_detail

/// Deterministic stand-in for a language model: the text is lowercased and
/// split on whitespace, every token maps to a seeded unit-norm pseudo-random
/// vector, and fixed start/end vectors bracket the sequence.
inline std::vector<Vector> hash_embed(std::string_view text, int dim, std::uint64_t seed) {
  if (dim < 1) throw DimensionMismatch("hash_embed requires dim >= 1");
  using namespace embedding_detail;
  const auto tokens = whitespace_tokens(normalize_key(text));
  std::vector<Vector> out;
  out.reserve(tokens.size() + 2);
  out.push_back(unit_gaussian(boundary_key("start", seed), dim));
  for (const auto& t : tokens) out.push_back(unit_gaussian(token_key(t, seed), dim));
  out.push_back(unit_gaussian(boundary_key("end", seed), dim));
  return out;
}

/// Source of pooled (pre-activation) text vectors for node texts and interests.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual int dim() const = 0;
  virtual std::string model_id() const = 0;
  virtual Vector pooled(std::string_view text) const = 0;
};

class HashEmbeddingProvider final : public EmbeddingProvider {
 public:
  HashEmbeddingProvider(int dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
    if (dim < 1) throw DimensionMismatch("embedding dim must be >= 1");
  }

  int dim() const override { return dim_; }
  std::string model_id() const override { return "hash:" + std::to_string(seed_); }
  Vector pooled(std::string_view text) const override { return pool_tokens(hash_embed(text, dim_, seed_)); }

 private:
  int dim_;
  std::uint64_t seed_;
};

enum class LookupMode { kStrict, kLenient };

/// Provider backed by an embedding file of pooled vectors keyed by
/// normalize_key(text). Lenient mode falls back to hash vectors for unknown
/// keys and counts the misses.
class FileEmbeddingProvider final : public EmbeddingProvider {
 public:
  FileEmbeddingProvider(int dim, std::string model, std::unordered_map<std::string, Vector> table,
                        LookupMode mode = LookupMode::kStrict, std::uint64_t fallback_seed = 0)
      : dim_(dim),
        model_(std::move(model)),
        table_(std::move(table)),
        mode_(mode),
        fallback_(dim, fallback_seed) {}

  int dim() const override { return dim_; }
  std::string model_id() const override { return model_; }
  std::size_t size() const { return table_.size(); }
  std::size_t misses() const { return misses_.load(); }

  bool contains(std::string_view text) const { return table_.count(normalize_key(text)) > 0; }

  Vector pooled(std::string_view text) const override {
    const std::string key = normalize_key(text);
    auto it = table_.find(key);
    if (it != table_.end()) return it->second;
    if (mode_ == LookupMode::kStrict) throw KeyMissing("no embedding for key \"" + key + "\"");
    if (misses_.fetch_add(1) == 0) {
      std::cerr << "warning: embedding key \"" << key << "\" missing, using hash fallback\n";
    }
    return fallback_.pooled(key);
  }

 private:
  int dim_;
  std::string model_;
  std::unordered_map<std::string, Vector> table_;
  LookupMode mode_;
  HashEmbeddingProvider fallback_;
  mutable std::atomic<std::size_t> misses_{0};
};

inline constexpr int kEmbeddingFileVersion = 1;

inline std::unique_ptr<FileEmbeddingProvider> load_embedding_file(
    const std::filesystem::path& path, LookupMode mode = LookupMode::kStrict,
    std::uint64_t fallback_seed = 0) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw FormatError(path.string() + ": line " + std::to_string(line_no) + ": " + what);
  };
  nlohmann::json header;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) break;
  }
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error&) {
    fail("header is not valid JSON");
  }
  if (!header.is_object() || !header.contains("version") || !header["version"].is_number_integer()) {
    fail("header needs an integer 'version'");
  }
  if (header["version"].get<int>() != kEmbeddingFileVersion) {
    throw VersionError(path.string() + ": unsupported embedding file version " + header["version"].dump());
  }
  if (!header.contains("dim") || !header["dim"].is_number_integer() || header["dim"].get<int>() < 1) {
    fail("header needs a positive integer 'dim'");
  }
  const int dim = header["dim"].get<int>();
  const std::string model = header.contains("model") && header["model"].is_string()
                                ? header["model"].get<std::string>()
                                : std::string("unknown");

  std::unordered_map<std::string, Vector> table;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      fail("record is not valid JSON");
    }
    if (!rec.is_object() || !rec.contains("key") || !rec["key"].is_string()) fail("record needs a string 'key'");
    if (!rec.contains("vec") || !rec["vec"].is_array()) fail("record needs an array 'vec'");
    const auto& arr = rec["vec"];
    if (static_cast<int>(arr.size()) != dim) {
      throw DimensionMismatch(path.string() + ": line " + std::to_string(line_no) + ": vector has " +
                              std::to_string(arr.size()) + " entries, header declares " +
                              std::to_string(dim));
    }
    Vector v(dim);
    for (int i = 0; i < dim; ++i) {
      if (!arr[static_cast<std::size_t>(i)].is_number()) fail("non-numeric vector entry");
      v(i) = arr[static_cast<std::size_t>(i)].get<double>();
    }
    if (!v.allFinite()) fail("non-finite vector entry");
    table.insert_or_assign(normalize_key(rec["key"].get<std::string>()), std::move(v));
  }
  return std::make_unique<FileEmbeddingProvider>(dim, model, std::move(table), mode, fallback_seed);
}

/// Writes an embedding file (header line + one record per key, in the order given).
inline void write_embedding_file(const std::filesystem::path& path, const std::string& model, int dim,
                                 const std::vector<std::pair<std::string, Vector>>& entries) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  nlohmann::ordered_json header;
  header["version"] = kEmbeddingFileVersion;
  header["dim"] = dim;
  header["model"] = model;
  os << header.dump() << '\n';
  for (const auto& [key, vec] : entries) {
    if (vec.size() != dim) throw DimensionMismatch("entry '" + key + "' has wrong dimension");
    nlohmann::ordered_json rec;
    rec["key"] = key;
    rec["vec"] = std::vector<double>(vec.data(), vec.data() + vec.size());
    os << rec.dump() << '\n';
  }
}

}  // namespace trenc
