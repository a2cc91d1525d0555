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
#include <cstdint>

#include "trenc/config.hpp"
#include "trenc/nn.hpp"

namespace trenc {

/// Number of warmup steps: ceil(warmup_ratio * total_steps).
inline std::int64_t warmup_steps(std::int64_t total_steps, double warmup_ratio) {
  return static_cast<std::int64_t>(std::ceil(warmup_ratio * static_cast<double>(total_steps)));
}

/// Linear warmup from 0 to peak over the warmup steps, then linear decay to 0
/// at total_steps.
inline double lr_at(std::int64_t step, std::int64_t total_steps, double peak_lr, double warmup_ratio) {
  if (total_steps <= 0) return 0.0;
  if (step <= 0) return 0.0;
  if (step >= total_steps) return 0.0;
  const std::int64_t warmup = warmup_steps(total_steps, warmup_ratio);
  if (step < warmup) return peak_lr * static_cast<double>(step) / static_cast<double>(warmup);
  return peak_lr * static_cast<double>(total_steps - step) / static_cast<double>(total_steps - warmup);
}

inline double lr_at(std::int64_t step, std::int64_t total_steps, const TrainConfig& cfg) {
  return lr_at(step, total_steps, cfg.peak_lr, cfg.warmup_ratio);
}

/// Adam with decoupled weight decay.
class AdamW {
 public:
  AdamW(const ParameterSet& layout, const TrainConfig& cfg)
      : beta1_(cfg.beta1),
        beta2_(cfg.beta2),
        eps_(cfg.eps),
        weight_decay_(cfg.weight_decay),
        m_(layout.zeros_like()),
        v_(layout.zeros_like()) {}

  void step(ParameterSet& params, const ParameterSet& grads, double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      Matrix& p = params[i];
      const Matrix& g = grads[i];
      Matrix& m = m_[i];
      Matrix& v = v_[i];
      m = beta1_ * m + (1.0 - beta1_) * g;
      v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
      if (weight_decay_ != 0.0) p *= (1.0 - lr * weight_decay_);
      p.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps_);
    }
  }

  std::int64_t steps_taken() const { return t_; }
  const ParameterSet& first_moment() const { return m_; }
  const ParameterSet& second_moment() const { return v_; }

  void restore(const ParameterSet& m, const ParameterSet& v, std::int64_t t) {
    if (!m.same_layout(m_) || !v.same_layout(v_)) throw FormatError("optimizer state layout mismatch");
    m_ = m;
    v_ = v;
    t_ = t;
  }

 private:
  double beta1_, beta2_, eps_, weight_decay_;
  ParameterSet m_, v_;
  std::int64_t t_ = 0;
};

}  // namespace trenc
