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

#include <cstdint>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "trenc/errors.hpp"

namespace trenc {

/// Encoder dimensions and ablation switches.
struct ModelConfig {
  int d_model = 128;
  int n_layers = 12;
  int n_heads = 4;
  int d_k = 32;
  int ffn_dim = 512;
  int cls_hidden = 16;
  int d_embed = 768;
  double dropout = 0.1;
  double init_std = 0.02;
  int mlp_layers = 3;  // hidden layers of the MLP baseline

  bool use_interest = true;
  bool use_tag = true;
  bool use_text = true;
  bool use_gating = true;
  bool use_path_attn = true;
  bool use_sibling_attn = true;
  bool use_level_sibling_pos = true;
  bool plain_transformer = false;

  void validate() const {
    auto positive = [](int v, const char* name) {
      if (v < 1) throw ConfigError(std::string(name) + " must be >= 1");
    };
    positive(d_model, "d_model");
    positive(n_layers, "n_layers");
    positive(n_heads, "n_heads");
    positive(d_k, "d_k");
    positive(ffn_dim, "ffn_dim");
    positive(cls_hidden, "cls_hidden");
    positive(d_embed, "d_embed");
    if (mlp_layers < 0) throw ConfigError("mlp_layers must be >= 0");
    if (n_heads * d_k != d_model) throw ConfigError("n_heads * d_k must equal d_model");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
    if (!(init_std >= 0.0)) throw ConfigError("init_std must be >= 0");
    if (!plain_transformer && !use_path_attn && !use_sibling_attn) {
      throw ConfigError("a layer needs at least one attention branch");
    }
  }

  bool operator==(const ModelConfig&) const = default;
};

struct TrainConfig {
  double peak_lr = 1e-4;
  double warmup_ratio = 0.1;
  int batch_size = 8;
  int max_epochs = 50;
  int patience = 10;
  std::uint64_t seed = 42;
  int snapshots_kept = 5;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const {
    if (!(peak_lr >= 0.0)) throw ConfigError("peak_lr must be >= 0");
    if (!(warmup_ratio >= 0.0 && warmup_ratio <= 1.0)) throw ConfigError("warmup_ratio must lie in [0, 1]");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
    if (patience < 0) throw ConfigError("patience must be >= 0");
    if (snapshots_kept < 1) throw ConfigError("snapshots_kept must be >= 1");
    if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
      throw ConfigError("betas must lie in [0, 1)");
    }
    if (!(eps > 0.0)) throw ConfigError("eps must be > 0");
  }

  bool operator==(const TrainConfig&) const = default;
};

/// Settings for the built-in hash embedding provider.
struct EmbeddingConfig {
  std::uint64_t hash_seed = 13;

  bool operator==(const EmbeddingConfig&) const = default;
};

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  EmbeddingConfig embedding;
};

namespace config_detail {

// Rejects keys that no field consumes, so typos surface as config errors.
inline void check_keys(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw ConfigError("unknown field '" + it.key() + "' in " + where);
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("field '" + std::string(key) + "' in " + where + " has the wrong type");
  }
}

}  // namespace config_detail

inline nlohmann::ordered_json to_json(const ModelConfig& c) {
  nlohmann::ordered_json j;
  j["d_model"] = c.d_model;
  j["n_layers"] = c.n_layers;
  j["n_heads"] = c.n_heads;
  j["d_k"] = c.d_k;
  j["ffn_dim"] = c.ffn_dim;
  j["cls_hidden"] = c.cls_hidden;
  j["d_embed"] = c.d_embed;
  j["dropout"] = c.dropout;
  j["init_std"] = c.init_std;
  j["mlp_layers"] = c.mlp_layers;
  j["use_interest"] = c.use_interest;
  j["use_tag"] = c.use_tag;
  j["use_text"] = c.use_text;
  j["use_gating"] = c.use_gating;
  j["use_path_attn"] = c.use_path_attn;
  j["use_sibling_attn"] = c.use_sibling_attn;
  j["use_level_sibling_pos"] = c.use_level_sibling_pos;
  j["plain_transformer"] = c.plain_transformer;
  return j;
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
  using namespace config_detail;
  const std::string where = "model config";
  check_keys(j, {"d_model", "n_layers", "n_heads", "d_k", "ffn_dim", "cls_hidden", "d_embed", "dropout",
                 "init_std", "mlp_layers", "use_interest", "use_tag", "use_text", "use_gating",
                 "use_path_attn", "use_sibling_attn", "use_level_sibling_pos", "plain_transformer"},
             where);
  ModelConfig c;
  read(j, "d_model", c.d_model, where);
  read(j, "n_layers", c.n_layers, where);
  read(j, "n_heads", c.n_heads, where);
  read(j, "d_k", c.d_k, where);
  read(j, "ffn_dim", c.ffn_dim, where);
  read(j, "cls_hidden", c.cls_hidden, where);
  read(j, "d_embed", c.d_embed, where);
  read(j, "dropout", c.dropout, where);
  read(j, "init_std", c.init_std, where);
  read(j, "mlp_layers", c.mlp_layers, where);
  read(j, "use_interest", c.use_interest, where);
  read(j, "use_tag", c.use_tag, where);
  read(j, "use_text", c.use_text, where);
  read(j, "use_gating", c.use_gating, where);
  read(j, "use_path_attn", c.use_path_attn, where);
  read(j, "use_sibling_attn", c.use_sibling_attn, where);
  read(j, "use_level_sibling_pos", c.use_level_sibling_pos, where);
  read(j, "plain_transformer", c.plain_transformer, where);
  c.validate();
  return c;
}

inline nlohmann::ordered_json to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["peak_lr"] = c.peak_lr;
  j["warmup_ratio"] = c.warmup_ratio;
  j["batch_size"] = c.batch_size;
  j["max_epochs"] = c.max_epochs;
  j["patience"] = c.patience;
  j["seed"] = c.seed;
  j["snapshots_kept"] = c.snapshots_kept;
  j["weight_decay"] = c.weight_decay;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["eps"] = c.eps;
  return j;
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  using namespace config_detail;
  const std::string where = "train config";
  check_keys(j, {"peak_lr", "warmup_ratio", "batch_size", "max_epochs", "patience", "seed", "snapshots_kept",
                 "weight_decay", "beta1", "beta2", "eps"},
             where);
  TrainConfig c;
  read(j, "peak_lr", c.peak_lr, where);
  read(j, "warmup_ratio", c.warmup_ratio, where);
  read(j, "batch_size", c.batch_size, where);
  read(j, "max_epochs", c.max_epochs, where);
  read(j, "patience", c.patience, where);
  read(j, "seed", c.seed, where);
  read(j, "snapshots_kept", c.snapshots_kept, where);
  read(j, "weight_decay", c.weight_decay, where);
  read(j, "beta1", c.beta1, where);
  read(j, "beta2", c.beta2, where);
  read(j, "eps", c.eps, where);
  c.validate();
  return c;
}

inline nlohmann::ordered_json to_json(const EmbeddingConfig& c) {
  nlohmann::ordered_json j;
  j["hash_seed"] = c.hash_seed;
  return j;
}

inline EmbeddingConfig embedding_config_from_json(const nlohmann::json& j) {
  using namespace config_detail;
  check_keys(j, {"hash_seed"}, "embedding config");
  EmbeddingConfig c;
  read(j, "hash_seed", c.hash_seed, "embedding config");
  return c;
}

inline nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["model"] = to_json(c.model);
  j["train"] = to_json(c.train);
  j["embedding"] = to_json(c.embedding);
  return j;
}

/// Parses {"model": {...}, "train": {...}, "embedding": {...}}; every block is optional.
inline RunConfig run_config_from_json(const nlohmann::json& j) {
  config_detail::check_keys(j, {"model", "train", "embedding"}, "config");
  RunConfig c;
  if (j.contains("model")) c.model = model_config_from_json(j["model"]);
  if (j.contains("train")) c.train = train_config_from_json(j["train"]);
  if (j.contains("embedding")) c.embedding = embedding_config_from_json(j["embedding"]);
  c.model.validate();
  c.train.validate();
  return c;
}

}  // namespace trenc
