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
#include "trenc/features.hpp"
#include "trenc/nn.hpp"
#include "trenc/prepare.hpp"
#include "trenc/trenc_model.hpp"

namespace trenc {

/// Node-independent baseline: node embeddings e_m go through `mlp_layers`
/// affine+GELU layers of width d_model and a final affine to one logit. There
/// is no message passing between nodes.
class MlpModel {
 public:
  static constexpr const char* kKind = "mlp";

  explicit MlpModel(const ModelConfig& cfg, std::uint64_t seed = 42) : cfg_(cfg) {
    validate();
    register_all();
    std::mt19937_64 rng(seed);
    init_feature_params(params_, features_, cfg_.init_std, rng);
    for (const auto& [w, b] : hidden_) truncated_normal_fill(params_[w], cfg_.init_std, rng);
    truncated_normal_fill(params_[out_w_], cfg_.init_std, rng);
  }

  MlpModel(const ModelConfig& cfg, const ParameterSet& params) : cfg_(cfg) {
    validate();
    register_all();
    if (!params.same_layout(params_)) throw FormatError("parameter layout does not match the model config");
    params_ = params;
  }

  const ModelConfig& config() const { return cfg_; }
  ParameterSet& parameters() { return params_; }
  const ParameterSet& parameters() const { return params_; }

  struct Trace {
    FeatureCache features;
    Matrix embeddings;
    std::vector<Matrix> pre, act, drop;
    Vector logits;
    Vector probabilities;
  };

  Trace forward(const PreparedTree& t, Mode mode = Mode::kEval, std::mt19937_64* rng = nullptr) const {
    const double rate = (mode == Mode::kTrain) ? cfg_.dropout : 0.0;
    Trace tr;
    tr.embeddings = integrate_features(t, params_, features_, cfg_, tr.features);
    Matrix h = tr.embeddings;
    for (const auto& [w, b] : hidden_) {
      tr.pre.push_back(nn::affine(h, params_[w], &params_[b]));
      tr.act.push_back(nn::gelu(tr.pre.back()));
      tr.drop.push_back(nn::dropout_mask(h.rows(), params_[w].cols(), rate, rng));
      h = tr.act.back().cwiseProduct(tr.drop.back());
    }
    const Matrix z = nn::affine(h, params_[out_w_], &params_[out_b_]);
    tr.logits = z.col(0);
    tr.probabilities = tr.logits.unaryExpr([](double v) { return sigmoid(v); });
    return tr;
  }

  void backward(const PreparedTree& t, const Trace& tr, const Vector& dlogits, ParameterSet& grads) const {
    const Matrix& last = hidden_.empty() ? tr.embeddings : Matrix(tr.act.back().cwiseProduct(tr.drop.back()));
    const Matrix dz = dlogits;
    Matrix dh = nn::affine_backward(last, params_[out_w_], dz, grads[out_w_], &grads[out_b_]);
    for (std::size_t k = hidden_.size(); k-- > 0;) {
      const auto [w, b] = hidden_[k];
      const Matrix input = k == 0 ? tr.embeddings : Matrix(tr.act[k - 1].cwiseProduct(tr.drop[k - 1]));
      const Matrix dpre = nn::gelu_backward(tr.pre[k], dh.cwiseProduct(tr.drop[k]));
      dh = nn::affine_backward(input, params_[w], dpre, grads[w], &grads[b]);
    }
    integrate_features_backward(dh, t, params_, features_, cfg_, tr.features, grads);
  }

  double accumulate_gradients(const PreparedTree& t, ParameterSet& grads, double scale,
                              std::mt19937_64* rng) const {
    const Trace tr = forward(t, Mode::kTrain, rng);
    const double loss = nn::bce_sum(tr.logits, t.labels);
    backward(t, tr, nn::bce_gradient(tr.logits, t.labels) * scale, grads);
    return loss;
  }

  Vector probabilities(const PreparedTree& t) const { return forward(t, Mode::kEval).probabilities; }

 private:
  void validate() const {
    if (cfg_.d_model < 1 || cfg_.d_embed < 1 || cfg_.mlp_layers < 0) throw ConfigError("invalid MLP dimensions");
    if (!(cfg_.dropout >= 0.0 && cfg_.dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  }

  void register_all() {
    features_ = register_feature_params(params_, cfg_);
    for (int k = 0; k < cfg_.mlp_layers; ++k) {
      const std::string p = "mlp.hidden" + std::to_string(k);
      const std::size_t w = params_.add(p + ".w", cfg_.d_model, cfg_.d_model);
      const std::size_t b = params_.add(p + ".b", 1, cfg_.d_model);
      hidden_.emplace_back(w, b);
    }
    out_w_ = params_.add("mlp.out.w", cfg_.d_model, 1);
    out_b_ = params_.add("mlp.out.b", 1, 1);
  }

  ModelConfig cfg_;
  ParameterSet params_;
  FeatureParams features_{};
  std::vector<std::pair<std::size_t, std::size_t>> hidden_;
  std::size_t out_w_ = 0, out_b_ = 0;
};

}  // namespace trenc
