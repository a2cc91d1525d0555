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

#include <random>
#include <string>
#include <vector>

#include "trenc/config.hpp"
#include "trenc/dom.hpp"
#include "trenc/nn.hpp"
#include "trenc/prepare.hpp"

namespace trenc {

/// Parameters that turn raw node inputs into node embeddings e_m:
/// text projection, interest projection, interest gate, tag table and the
/// concatenation projection.
struct FeatureParams {
  std::size_t tag_embedding;  // |tags| x d_model
  std::size_t w_seq;          // d_embed x d_model
  std::size_t w_interest;     // d_embed x d_model
  std::size_t gate_w1, gate_w2, gate_b;
  std::size_t w_emb;  // 2 d_model x d_model
};

inline FeatureParams register_feature_params(ParameterSet& ps, const ModelConfig& cfg) {
  FeatureParams f{};
  f.tag_embedding = ps.add("features.tag_embedding", tag_vocabulary_size(), cfg.d_model);
  f.w_seq = ps.add("features.w_seq", cfg.d_embed, cfg.d_model);
  f.w_interest = ps.add("features.w_interest", cfg.d_embed, cfg.d_model);
  f.gate_w1 = ps.add("features.gate.w1", cfg.d_model, cfg.d_model);
  f.gate_w2 = ps.add("features.gate.w2", cfg.d_model, cfg.d_model);
  f.gate_b = ps.add("features.gate.b", 1, cfg.d_model);
  f.w_emb = ps.add("features.w_emb", 2 * cfg.d_model, cfg.d_model);
  return f;
}

inline void init_feature_params(ParameterSet& ps, const FeatureParams& f, double std, std::mt19937_64& rng) {
  for (std::size_t id : {f.tag_embedding, f.w_seq, f.w_interest, f.gate_w1, f.gate_w2, f.w_emb}) {
    truncated_normal_fill(ps[id], std, rng);
  }
}

struct FeatureCache {
  Matrix text_act;      // GELU(pooled text)
  Matrix interest_act;  // GELU(pooled interest), 1 x d_embed
  Matrix s;             // text feature s_m
  Matrix c;             // interest feature broadcast to |V| rows
  Matrix gate;          // g(c, s_m), empty when unused
  Matrix concat;        // [s'_m ; t_m]
};

/// s_m = W^seq GELU(pooled)
inline Matrix text_feature(const Matrix& pooled, const Matrix& w_seq) {
  if (pooled.cols() != w_seq.rows()) throw DimensionMismatch("pooled text has the wrong dimension");
  return nn::gelu(pooled) * w_seq;
}

/// Node embeddings e_m for every node of a prepared tree.
inline Matrix integrate_features(const PreparedTree& t, const ParameterSet& ps, const FeatureParams& f,
                                 const ModelConfig& cfg, FeatureCache& cache) {
  const auto n = static_cast<Eigen::Index>(t.size());
  const auto d = static_cast<Eigen::Index>(cfg.d_model);
  if (t.text.cols() != cfg.d_embed || t.interest.cols() != cfg.d_embed) {
    throw DimensionMismatch("prepared tree embedding dim " + std::to_string(t.text.cols()) +
                            " does not match d_embed " + std::to_string(cfg.d_embed));
  }
  cache.text_act = nn::gelu(t.text);
  cache.s = cfg.use_text ? Matrix(cache.text_act * ps[f.w_seq]) : Matrix(Matrix::Zero(n, d));

  Matrix s_prime = cache.s;
  cache.gate.resize(0, 0);
  if (cfg.use_interest) {
    cache.interest_act = nn::gelu(t.interest);
    const Matrix c_row = cache.interest_act * ps[f.w_interest];
    cache.c = c_row.replicate(n, 1);
    if (cfg.use_gating) {
      cache.gate = nn::gate(cache.c, cache.s, ps[f.gate_w1], ps[f.gate_w2], ps[f.gate_b]);
      s_prime += cache.gate.cwiseProduct(cache.c);
    } else {
      s_prime += cache.c;
    }
  }

  cache.concat.resize(n, 2 * d);
  cache.concat.leftCols(d) = s_prime;
  if (cfg.use_tag) {
    for (Eigen::Index i = 0; i < n; ++i) {
      cache.concat.row(i).tail(d) = ps[f.tag_embedding].row(t.tags[static_cast<std::size_t>(i)]);
    }
  } else {
    cache.concat.rightCols(d).setZero();
  }
  return cache.concat * ps[f.w_emb];
}

inline void integrate_features_backward(const Matrix& de, const PreparedTree& t, const ParameterSet& ps,
                                        const FeatureParams& f, const ModelConfig& cfg, const FeatureCache& cache,
                                        ParameterSet& grads) {
  const auto n = static_cast<Eigen::Index>(t.size());
  const auto d = static_cast<Eigen::Index>(cfg.d_model);
  const Matrix dconcat = nn::affine_backward(cache.concat, ps[f.w_emb], de, grads[f.w_emb]);
  if (cfg.use_tag) {
    for (Eigen::Index i = 0; i < n; ++i) {
      grads[f.tag_embedding].row(t.tags[static_cast<std::size_t>(i)]) += dconcat.row(i).tail(d);
    }
  }
  const Matrix ds_prime = dconcat.leftCols(d);
  Matrix ds = ds_prime;
  if (cfg.use_interest) {
    Matrix dc;
    if (cfg.use_gating) {
      dc = ds_prime.cwiseProduct(cache.gate);
      const Matrix dg = ds_prime.cwiseProduct(cache.c);
      const auto gg = nn::gate_backward(dg, cache.gate, cache.c, cache.s, ps[f.gate_w1], ps[f.gate_w2],
                                        grads[f.gate_w1], grads[f.gate_w2], grads[f.gate_b]);
      dc += gg.dx1;
      ds += gg.dx2;
    } else {
      dc = ds_prime;
    }
    const Matrix dc_row = dc.colwise().sum();
    grads[f.w_interest].noalias() += cache.interest_act.transpose() * dc_row;
  }
  if (cfg.use_text) grads[f.w_seq].noalias() += cache.text_act.transpose() * ds;
}

}  // namespace trenc
