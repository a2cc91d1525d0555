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

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "trenc/config.hpp"
#include "trenc/features.hpp"
#include "trenc/nn.hpp"
#include "trenc/prepare.hpp"
#include "trenc/tree_index.hpp"

namespace trenc {

enum class Mode { kEval, kTrain };

/// Interleaved sin/cos encoding of integer positions: column 2i holds
/// sin(pos / 10000^(2i/d)) and column 2i+1 the matching cosine.
inline Matrix sinusoid_encoding(const std::vector<int>& positions, int d_model) {
  Matrix out(static_cast<Eigen::Index>(positions.size()), d_model);
  for (std::size_t r = 0; r < positions.size(); ++r) {
    const double pos = positions[r];
    for (int j = 0; j < d_model; ++j) {
      const double freq = std::pow(10000.0, -static_cast<double>(j - j % 2) / d_model);
      out(static_cast<Eigen::Index>(r), j) = (j % 2 == 0) ? std::sin(pos * freq) : std::cos(pos * freq);
    }
  }
  return out;
}

// Parameter handles of one attention branch (attention + FFN sublayers).
struct BranchParams {
  std::size_t wq, wk, wv, wo, bo;
  std::size_t ln1_gamma, ln1_beta;
  std::size_t ffn_w1, ffn_b1, ffn_w2, ffn_b2;
  std::size_t ln2_gamma, ln2_beta;
};

struct LayerParams {
  BranchParams path, sibling;
  std::size_t merge_w1, merge_w2, merge_b;
};

struct BranchCache {
  nn::AttentionCache attn;
  Matrix drop_attn;
  nn::LayerNormCache ln1;
  Matrix x1;
  Matrix ffn_pre;
  Matrix ffn_act;
  Matrix drop_ffn;
  nn::LayerNormCache ln2;
};

inline BranchParams register_branch(ParameterSet& ps, const std::string& prefix, const ModelConfig& cfg) {
  const int inner = cfg.n_heads * cfg.d_k;
  BranchParams b{};
  b.wq = ps.add(prefix + ".wq", cfg.d_model, inner);
  b.wk = ps.add(prefix + ".wk", cfg.d_model, inner);
  b.wv = ps.add(prefix + ".wv", cfg.d_model, inner);
  b.wo = ps.add(prefix + ".wo", inner, cfg.d_model);
  b.bo = ps.add(prefix + ".bo", 1, cfg.d_model);
  b.ln1_gamma = ps.add(prefix + ".ln1.gamma", 1, cfg.d_model);
  b.ln1_beta = ps.add(prefix + ".ln1.beta", 1, cfg.d_model);
  b.ffn_w1 = ps.add(prefix + ".ffn.w1", cfg.d_model, cfg.ffn_dim);
  b.ffn_b1 = ps.add(prefix + ".ffn.b1", 1, cfg.ffn_dim);
  b.ffn_w2 = ps.add(prefix + ".ffn.w2", cfg.ffn_dim, cfg.d_model);
  b.ffn_b2 = ps.add(prefix + ".ffn.b2", 1, cfg.d_model);
  b.ln2_gamma = ps.add(prefix + ".ln2.gamma", 1, cfg.d_model);
  b.ln2_beta = ps.add(prefix + ".ln2.beta", 1, cfg.d_model);
  return b;
}

inline void init_branch(ParameterSet& ps, const BranchParams& b, double std, std::mt19937_64& rng) {
  for (std::size_t id : {b.wq, b.wk, b.wv, b.wo, b.ffn_w1, b.ffn_w2}) truncated_normal_fill(ps[id], std, rng);
  ps[b.ln1_gamma].setOnes();
  ps[b.ln2_gamma].setOnes();
}

/// Masked multi-head self-attention followed by residual + layer norm and the
/// position-wise FFN sublayer with its own residual + layer norm.
inline Matrix encoder_branch_forward(const Matrix& x, const Matrix& mask, const ParameterSet& ps,
                                     const BranchParams& b, const ModelConfig& cfg, double dropout,
                                     std::mt19937_64* rng, BranchCache& cache) {
  Matrix attn = nn::multi_head_attention(x, mask, ps[b.wq], ps[b.wk], ps[b.wv], ps[b.wo], ps[b.bo], cfg.n_heads,
                                         cfg.d_k, cache.attn);
  cache.drop_attn = nn::dropout_mask(attn.rows(), attn.cols(), dropout, rng);
  attn = attn.cwiseProduct(cache.drop_attn);
  cache.x1 = nn::layer_norm(x + attn, ps[b.ln1_gamma], ps[b.ln1_beta], cache.ln1);
  cache.ffn_pre = nn::affine(cache.x1, ps[b.ffn_w1], &ps[b.ffn_b1]);
  cache.ffn_act = nn::gelu(cache.ffn_pre);
  Matrix ffn = nn::affine(cache.ffn_act, ps[b.ffn_w2], &ps[b.ffn_b2]);
  cache.drop_ffn = nn::dropout_mask(ffn.rows(), ffn.cols(), dropout, rng);
  ffn = ffn.cwiseProduct(cache.drop_ffn);
  return nn::layer_norm(cache.x1 + ffn, ps[b.ln2_gamma], ps[b.ln2_beta], cache.ln2);
}

inline Matrix encoder_branch_backward(const Matrix& dout, const ParameterSet& ps, const BranchParams& b,
                                      const ModelConfig& cfg, const BranchCache& cache, ParameterSet& grads) {
  const Matrix dsum2 = nn::layer_norm_backward(dout, ps[b.ln2_gamma], cache.ln2, grads[b.ln2_gamma], grads[b.ln2_beta]);
  const Matrix dffn = dsum2.cwiseProduct(cache.drop_ffn);
  const Matrix dact = nn::affine_backward(cache.ffn_act, ps[b.ffn_w2], dffn, grads[b.ffn_w2], &grads[b.ffn_b2]);
  const Matrix dpre = nn::gelu_backward(cache.ffn_pre, dact);
  Matrix dx1 = dsum2 + nn::affine_backward(cache.x1, ps[b.ffn_w1], dpre, grads[b.ffn_w1], &grads[b.ffn_b1]);
  const Matrix dsum1 = nn::layer_norm_backward(dx1, ps[b.ln1_gamma], cache.ln1, grads[b.ln1_gamma], grads[b.ln1_beta]);
  const Matrix dattn = dsum1.cwiseProduct(cache.drop_attn);
  return dsum1 + nn::multi_head_attention_backward(dattn, ps[b.wq], ps[b.wk], ps[b.wv], ps[b.wo], cfg.n_heads,
                                                   cfg.d_k, cache.attn, grads[b.wq], grads[b.wk], grads[b.wv],
                                                   grads[b.wo], grads[b.bo]);
}

struct LayerCache {
  BranchCache path, sibling;
  Matrix path_out, sibling_out;
  Matrix gate;  // merge gate, empty unless both branches run
};

struct ForwardCache {
  FeatureCache features;
  Matrix sin_global, sin_level, sin_sibling;
  Matrix level_pos, sibling_pos;  // W^L / W^S applied to the sinusoids
  Matrix drop_embed;
  std::vector<LayerCache> layers;
  Matrix cls_pre, cls_act;
};

/// Everything a forward pass produces. `hidden[0]` is the first layer input
/// e_m + W^G sin(i^G); `hidden[l]` for l >= 1 is the output of layer l.
struct ForwardTrace {
  Matrix embeddings;
  std::vector<Matrix> hidden;
  Vector logits;
  Vector probabilities;
  ForwardCache cache;
};

/// Tree encoder with path and sibling attention branches per layer.
class TrencModel {
 public:
  static constexpr const char* kKind = "trenc";

  explicit TrencModel(const ModelConfig& cfg, std::uint64_t seed = 42) : cfg_(cfg) {
    cfg_.validate();
    register_all();
    std::mt19937_64 rng(seed);
    init_feature_params(params_, features_, cfg_.init_std, rng);
    for (std::size_t id : {w_global_, w_level_, w_sibling_}) truncated_normal_fill(params_[id], cfg_.init_std, rng);
    for (const auto& lp : layers_) {
      init_branch(params_, lp.path, cfg_.init_std, rng);
      init_branch(params_, lp.sibling, cfg_.init_std, rng);
      truncated_normal_fill(params_[lp.merge_w1], cfg_.init_std, rng);
      truncated_normal_fill(params_[lp.merge_w2], cfg_.init_std, rng);
    }
    truncated_normal_fill(params_[cls_w1_], cfg_.init_std, rng);
    truncated_normal_fill(params_[cls_w2_], cfg_.init_std, rng);
  }

  /// Adopts an existing parameter set (e.g. from a checkpoint); the layout must
  /// match what `cfg` implies.
  TrencModel(const ModelConfig& cfg, const ParameterSet& params) : cfg_(cfg) {
    cfg_.validate();
    register_all();
    if (!params.same_layout(params_)) throw FormatError("parameter layout does not match the model config");
    params_ = params;
  }

  const ModelConfig& config() const { return cfg_; }
  ParameterSet& parameters() { return params_; }
  const ParameterSet& parameters() const { return params_; }
  const FeatureParams& feature_params() const { return features_; }
  const std::vector<LayerParams>& layer_params() const { return layers_; }
  std::size_t w_global() const { return w_global_; }
  std::size_t w_level() const { return w_level_; }
  std::size_t w_sibling() const { return w_sibling_; }

  ForwardTrace forward(const PreparedTree& t, Mode mode = Mode::kEval, std::mt19937_64* rng = nullptr) const {
    const ParameterSet& ps = params_;
    const double rate = (mode == Mode::kTrain) ? cfg_.dropout : 0.0;
    const auto n = static_cast<Eigen::Index>(t.size());
    ForwardTrace tr;
    ForwardCache& c = tr.cache;

    tr.embeddings = integrate_features(t, ps, features_, cfg_, c.features);
    c.sin_global = sinusoid_encoding(t.index.global_idx, cfg_.d_model);
    Matrix h = tr.embeddings + c.sin_global * ps[w_global_];
    c.drop_embed = nn::dropout_mask(n, cfg_.d_model, rate, rng);
    h = h.cwiseProduct(c.drop_embed);
    tr.hidden.push_back(h);

    const bool structural_pos = !cfg_.plain_transformer && cfg_.use_level_sibling_pos;
    if (structural_pos) {
      c.sin_level = sinusoid_encoding(t.index.level_idx, cfg_.d_model);
      c.sin_sibling = sinusoid_encoding(t.index.sibling_idx, cfg_.d_model);
      c.level_pos = c.sin_level * ps[w_level_];
      c.sibling_pos = c.sin_sibling * ps[w_sibling_];
    }
    const Matrix open_mask = cfg_.plain_transformer ? Matrix(Matrix::Zero(n, n)) : Matrix();

    c.layers.resize(layers_.size());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const LayerParams& lp = layers_[l];
      LayerCache& lc = c.layers[l];
      Matrix out;
      if (cfg_.plain_transformer) {
        out = encoder_branch_forward(h, open_mask, ps, lp.path, cfg_, rate, rng, lc.path);
        lc.path_out = out;
      } else {
        if (cfg_.use_path_attn) {
          const Matrix in = structural_pos ? Matrix(h + c.level_pos) : h;
          lc.path_out = encoder_branch_forward(in, t.index.path_mask, ps, lp.path, cfg_, rate, rng, lc.path);
        }
        if (cfg_.use_sibling_attn) {
          const Matrix in = structural_pos ? Matrix(h + c.sibling_pos) : h;
          lc.sibling_out =
              encoder_branch_forward(in, t.index.sibling_mask, ps, lp.sibling, cfg_, rate, rng, lc.sibling);
        }
        if (cfg_.use_path_attn && cfg_.use_sibling_attn) {
          lc.gate = nn::gate(lc.path_out, lc.sibling_out, ps[lp.merge_w1], ps[lp.merge_w2], ps[lp.merge_b]);
          out = lc.gate.cwiseProduct(lc.path_out) +
                (1.0 - lc.gate.array()).matrix().cwiseProduct(lc.sibling_out);
        } else {
          out = cfg_.use_path_attn ? lc.path_out : lc.sibling_out;
        }
      }
      h = std::move(out);
      tr.hidden.push_back(h);
    }

    c.cls_pre = nn::affine(h, ps[cls_w1_], &ps[cls_b1_]);
    c.cls_act = nn::gelu(c.cls_pre);
    const Matrix z = nn::affine(c.cls_act, ps[cls_w2_], &ps[cls_b2_]);
    tr.logits = z.col(0);
    tr.probabilities = tr.logits.unaryExpr([](double v) { return sigmoid(v); });
    return tr;
  }

  /// Backpropagates d(loss)/d(logits) through a trace produced by forward()
  /// and accumulates into `grads` (same layout as parameters()).
  void backward(const PreparedTree& t, const ForwardTrace& tr, const Vector& dlogits, ParameterSet& grads) const {
    const ParameterSet& ps = params_;
    const ForwardCache& c = tr.cache;
    const Matrix dz = dlogits;  // |V| x 1
    const Matrix dact = nn::affine_backward(c.cls_act, ps[cls_w2_], dz, grads[cls_w2_], &grads[cls_b2_]);
    const Matrix dpre = nn::gelu_backward(c.cls_pre, dact);
    Matrix dh = nn::affine_backward(tr.hidden.back(), ps[cls_w1_], dpre, grads[cls_w1_], &grads[cls_b1_]);

    const bool structural_pos = !cfg_.plain_transformer && cfg_.use_level_sibling_pos;
    Matrix dlevel_pos, dsibling_pos;
    if (structural_pos) {
      dlevel_pos = Matrix::Zero(dh.rows(), dh.cols());
      dsibling_pos = Matrix::Zero(dh.rows(), dh.cols());
    }

    for (std::size_t l = layers_.size(); l-- > 0;) {
      const LayerParams& lp = layers_[l];
      const LayerCache& lc = c.layers[l];
      if (cfg_.plain_transformer) {
        dh = encoder_branch_backward(dh, ps, lp.path, cfg_, lc.path, grads);
        continue;
      }
      Matrix dpath, dsib;
      if (cfg_.use_path_attn && cfg_.use_sibling_attn) {
        const Matrix dg = dh.cwiseProduct(lc.path_out - lc.sibling_out);
        const auto gg = nn::gate_backward(dg, lc.gate, lc.path_out, lc.sibling_out, ps[lp.merge_w1],
                                          ps[lp.merge_w2], grads[lp.merge_w1], grads[lp.merge_w2],
                                          grads[lp.merge_b]);
        dpath = dh.cwiseProduct(lc.gate) + gg.dx1;
        dsib = dh.cwiseProduct((1.0 - lc.gate.array()).matrix()) + gg.dx2;
      } else if (cfg_.use_path_attn) {
        dpath = dh;
      } else {
        dsib = dh;
      }
      Matrix dprev = Matrix::Zero(dh.rows(), dh.cols());
      if (cfg_.use_path_attn) {
        const Matrix din = encoder_branch_backward(dpath, ps, lp.path, cfg_, lc.path, grads);
        dprev += din;
        if (structural_pos) dlevel_pos += din;
      }
      if (cfg_.use_sibling_attn) {
        const Matrix din = encoder_branch_backward(dsib, ps, lp.sibling, cfg_, lc.sibling, grads);
        dprev += din;
        if (structural_pos) dsibling_pos += din;
      }
      dh = std::move(dprev);
    }
    if (structural_pos) {
      grads[w_level_].noalias() += c.sin_level.transpose() * dlevel_pos;
      grads[w_sibling_].noalias() += c.sin_sibling.transpose() * dsibling_pos;
    }

    dh = dh.cwiseProduct(c.drop_embed);
    grads[w_global_].noalias() += c.sin_global.transpose() * dh;
    integrate_features_backward(dh, t, ps, features_, cfg_, c.features, grads);
  }

  /// Forward in training mode, summed BCE over labeled nodes, and backward of
  /// `scale` times that loss. Returns the unscaled loss.
  double accumulate_gradients(const PreparedTree& t, ParameterSet& grads, double scale,
                              std::mt19937_64* rng) const {
    const ForwardTrace tr = forward(t, Mode::kTrain, rng);
    const double loss = nn::bce_sum(tr.logits, t.labels);
    const Vector dlogits = nn::bce_gradient(tr.logits, t.labels) * scale;
    backward(t, tr, dlogits, grads);
    return loss;
  }

  Vector probabilities(const PreparedTree& t) const { return forward(t, Mode::kEval).probabilities; }

 private:
  void register_all() {
    features_ = register_feature_params(params_, cfg_);
    w_global_ = params_.add("position.w_global", cfg_.d_model, cfg_.d_model);
    w_level_ = params_.add("position.w_level", cfg_.d_model, cfg_.d_model);
    w_sibling_ = params_.add("position.w_sibling", cfg_.d_model, cfg_.d_model);
    for (int l = 0; l < cfg_.n_layers; ++l) {
      const std::string p = "layer" + std::to_string(l);
      LayerParams lp{};
      lp.path = register_branch(params_, p + ".path", cfg_);
      lp.sibling = register_branch(params_, p + ".sibling", cfg_);
      lp.merge_w1 = params_.add(p + ".merge.w1", cfg_.d_model, cfg_.d_model);
      lp.merge_w2 = params_.add(p + ".merge.w2", cfg_.d_model, cfg_.d_model);
      lp.merge_b = params_.add(p + ".merge.b", 1, cfg_.d_model);
      layers_.push_back(lp);
    }
    cls_w1_ = params_.add("classifier.w1", cfg_.d_model, cfg_.cls_hidden);
    cls_b1_ = params_.add("classifier.b1", 1, cfg_.cls_hidden);
    cls_w2_ = params_.add("classifier.w2", cfg_.cls_hidden, 1);
    cls_b2_ = params_.add("classifier.b2", 1, 1);
  }

  ModelConfig cfg_;
  ParameterSet params_;
  FeatureParams features_{};
  std::size_t w_global_ = 0, w_level_ = 0, w_sibling_ = 0;
  std::vector<LayerParams> layers_;
  std::size_t cls_w1_ = 0, cls_b1_ = 0, cls_w2_ = 0, cls_b2_ = 0;
};

/// Hard labels: 1 iff probability > threshold (strict).
inline std::vector<int> predict_labels(const Vector& probabilities, double threshold = 0.5) {
  std::vector<int> out(static_cast<std::size_t>(probabilities.size()));
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) out[static_cast<std::size_t>(i)] = probabilities(i) > threshold ? 1 : 0;
  return out;
}

}  // namespace trenc
