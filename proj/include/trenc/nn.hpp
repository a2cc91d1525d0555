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

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "trenc/errors.hpp"
#include "trenc/linalg.hpp"

namespace trenc {

struct Tensor {
  std::string name;
  Matrix value;
};

/// Ordered, named collection of parameter tensors. Gradients and optimizer
/// moments are ParameterSets with identical layout.
class ParameterSet {
 public:
  std::size_t add(std::string name, Eigen::Index rows, Eigen::Index cols) {
    if (index_.count(name)) throw ConfigError("duplicate parameter " + name);
    index_.emplace(name, tensors_.size());
    tensors_.push_back(Tensor{std::move(name), Matrix::Zero(rows, cols)});
    return tensors_.size() - 1;
  }

  std::size_t size() const { return tensors_.size(); }
  Matrix& operator[](std::size_t i) { return tensors_[i].value; }
  const Matrix& operator[](std::size_t i) const { return tensors_[i].value; }
  const std::string& name(std::size_t i) const { return tensors_[i].name; }
  const std::vector<Tensor>& tensors() const { return tensors_; }

  std::optional<std::size_t> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  ParameterSet zeros_like() const {
    ParameterSet out = *this;
    out.set_zero();
    return out;
  }

  void set_zero() {
    for (auto& t : tensors_) t.value.setZero();
  }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors_) n += static_cast<std::size_t>(t.value.size());
    return n;
  }

  bool all_finite() const {
    for (const auto& t : tensors_) {
      if (!t.value.allFinite()) return false;
    }
    return true;
  }

  bool same_layout(const ParameterSet& other) const {
    if (other.size() != size()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
      if (other.name(i) != name(i) || other[i].rows() != (*this)[i].rows() ||
          other[i].cols() != (*this)[i].cols())
        return false;
    }
    return true;
  }

 private:
  std::vector<Tensor> tensors_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Fills with a normal(0, std) truncated at two standard deviations.
inline void truncated_normal_fill(Matrix& m, double std, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    double x = normal(rng);
    while (std::abs(x) > 2.0) x = normal(rng);
    m.data()[i] = x * std;
  }
}

// ---------------------------------------------------------------------------
// Building blocks. Activations are row-major |nodes| x features; weights are
// stored input x output so that y = x * W + b.

namespace nn {

inline Matrix affine(const Matrix& x, const Matrix& w, const Matrix* b = nullptr) {
  Matrix y = x * w;
  if (b) y.rowwise() += b->row(0);
  return y;
}

/// Accumulates dW (and db) and returns dx.
inline Matrix affine_backward(const Matrix& x, const Matrix& w, const Matrix& dy, Matrix& dw,
                              Matrix* db = nullptr) {
  dw.noalias() += x.transpose() * dy;
  if (db) db->row(0) += dy.colwise().sum();
  return dy * w.transpose();
}

inline Matrix gelu(const Matrix& x) { return x.unaryExpr([](double v) { return trenc::gelu(v); }); }

inline Matrix gelu_backward(const Matrix& pre, const Matrix& dy) {
  return dy.cwiseProduct(pre.unaryExpr([](double v) { return gelu_derivative(v); }));
}

inline Matrix sigmoid(const Matrix& x) { return x.unaryExpr([](double v) { return trenc::sigmoid(v); }); }

inline constexpr double kLayerNormEps = 1e-5;

struct LayerNormCache {
  Matrix xhat;
  Vector inv_std;
};

inline Matrix layer_norm(const Matrix& x, const Matrix& gamma, const Matrix& beta, LayerNormCache& cache) {
  const auto n = x.rows();
  const auto d = x.cols();
  cache.xhat.resize(n, d);
  cache.inv_std.resize(n);
  Matrix y(n, d);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().mean();
    const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
    cache.inv_std(r) = inv;
    cache.xhat.row(r) = (x.row(r).array() - mean) * inv;
    y.row(r) = cache.xhat.row(r).cwiseProduct(gamma.row(0)) + beta.row(0);
  }
  return y;
}

inline Matrix layer_norm_backward(const Matrix& dy, const Matrix& gamma, const LayerNormCache& cache,
                                  Matrix& dgamma, Matrix& dbeta) {
  const auto n = dy.rows();
  const auto d = static_cast<double>(dy.cols());
  dgamma.row(0) += dy.cwiseProduct(cache.xhat).colwise().sum();
  dbeta.row(0) += dy.colwise().sum();
  Matrix dx(n, dy.cols());
  for (Eigen::Index r = 0; r < n; ++r) {
    const RowVector dxhat = dy.row(r).cwiseProduct(gamma.row(0));
    const double sum = dxhat.sum();
    const double dot = dxhat.dot(cache.xhat.row(r));
    dx.row(r) = (cache.inv_std(r) / d) * (d * dxhat.array() - sum - cache.xhat.row(r).array() * dot).matrix();
  }
  return dx;
}

/// Row-wise softmax; -inf entries receive exactly zero weight.
inline Matrix masked_softmax(const Matrix& scores) {
  Matrix out(scores.rows(), scores.cols());
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    if (scores.row(r).hasNaN()) throw NonFinite("attention row " + std::to_string(r) + " has NaN scores");
    const double mx = scores.row(r).maxCoeff();
    if (!std::isfinite(mx)) throw DegenerateRow("attention row " + std::to_string(r) + " is fully masked");
    // Eigen's vectorized exp clamps -inf, so masked entries are zeroed explicitly.
    for (Eigen::Index c = 0; c < scores.cols(); ++c) {
      const double s = scores(r, c);
      out(r, c) = s == -std::numeric_limits<double>::infinity() ? 0.0 : std::exp(s - mx);
    }
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

struct AttentionCache {
  Matrix x, q, k, v, concat;
  std::vector<Matrix> weights;  // one |V| x |V| matrix per head
};

inline Matrix multi_head_attention(const Matrix& x, const Matrix& mask, const Matrix& wq, const Matrix& wk,
                                   const Matrix& wv, const Matrix& wo, const Matrix& bo, int heads, int d_k,
                                   AttentionCache& cache) {
  const auto n = x.rows();
  cache.x = x;
  cache.q = x * wq;
  cache.k = x * wk;
  cache.v = x * wv;
  cache.concat.resize(n, static_cast<Eigen::Index>(heads) * d_k);
  cache.weights.resize(static_cast<std::size_t>(heads));
  const double scale = 1.0 / std::sqrt(static_cast<double>(d_k));
  for (int h = 0; h < heads; ++h) {
    const auto c0 = static_cast<Eigen::Index>(h) * d_k;
    Matrix scores = cache.q.middleCols(c0, d_k) * cache.k.middleCols(c0, d_k).transpose() * scale;
    scores += mask;
    Matrix& a = cache.weights[static_cast<std::size_t>(h)];
    a = masked_softmax(scores);
    cache.concat.middleCols(c0, d_k) = a * cache.v.middleCols(c0, d_k);
  }
  return affine(cache.concat, wo, &bo);
}

inline Matrix multi_head_attention_backward(const Matrix& dout, const Matrix& wq, const Matrix& wk,
                                            const Matrix& wv, const Matrix& wo, int heads, int d_k,
                                            const AttentionCache& cache, Matrix& dwq, Matrix& dwk,
                                            Matrix& dwv, Matrix& dwo, Matrix& dbo) {
  const Matrix dconcat = affine_backward(cache.concat, wo, dout, dwo, &dbo);
  Matrix dq(cache.q.rows(), cache.q.cols());
  Matrix dk(cache.k.rows(), cache.k.cols());
  Matrix dv(cache.v.rows(), cache.v.cols());
  const double scale = 1.0 / std::sqrt(static_cast<double>(d_k));
  for (int h = 0; h < heads; ++h) {
    const auto c0 = static_cast<Eigen::Index>(h) * d_k;
    const Matrix& a = cache.weights[static_cast<std::size_t>(h)];
    const Matrix dhead = dconcat.middleCols(c0, d_k);
    dv.middleCols(c0, d_k) = a.transpose() * dhead;
    const Matrix da = dhead * cache.v.middleCols(c0, d_k).transpose();
    Matrix ds = a.cwiseProduct(da);
    const Vector row_dot = ds.rowwise().sum();
    ds -= a.cwiseProduct(row_dot.replicate(1, a.cols()));
    ds *= scale;
    dq.middleCols(c0, d_k) = ds * cache.k.middleCols(c0, d_k);
    dk.middleCols(c0, d_k) = ds.transpose() * cache.q.middleCols(c0, d_k);
  }
  dwq.noalias() += cache.x.transpose() * dq;
  dwk.noalias() += cache.x.transpose() * dk;
  dwv.noalias() += cache.x.transpose() * dv;
  return dq * wq.transpose() + dk * wk.transpose() + dv * wv.transpose();
}

/// g(x1, x2) = sigmoid(x1 W1 + x2 W2 + b), elementwise.
inline Matrix gate(const Matrix& x1, const Matrix& x2, const Matrix& w1, const Matrix& w2, const Matrix& b) {
  Matrix z = x1 * w1 + x2 * w2;
  z.rowwise() += b.row(0);
  return sigmoid(z);
}

struct GateGrad {
  Matrix dx1, dx2;
};

inline GateGrad gate_backward(const Matrix& dg, const Matrix& g, const Matrix& x1, const Matrix& x2,
                              const Matrix& w1, const Matrix& w2, Matrix& dw1, Matrix& dw2, Matrix& db) {
  const Matrix dz = dg.cwiseProduct(g.cwiseProduct((1.0 - g.array()).matrix()));
  dw1.noalias() += x1.transpose() * dz;
  dw2.noalias() += x2.transpose() * dz;
  db.row(0) += dz.colwise().sum();
  return GateGrad{dz * w1.transpose(), dz * w2.transpose()};
}

/// Inverted-dropout keep mask (entries 0 or 1/(1-rate)); all ones when rate == 0.
inline Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, std::mt19937_64* rng) {
  if (rate <= 0.0 || rng == nullptr) return Matrix::Ones(rows, cols);
  std::bernoulli_distribution keep(1.0 - rate);
  Matrix m(rows, cols);
  const double scale = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = keep(*rng) ? scale : 0.0;
  return m;
}

/// Sum over labeled nodes of the numerically stable binary cross-entropy
/// softplus(z) - y z. Unlabeled entries (label < 0) are skipped.
inline double bce_sum(const Vector& logits, const std::vector<int>& labels) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0) continue;
    const double z = logits(i);
    sum += std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - y * z;
  }
  return sum;
}

/// d(bce_sum)/d(logit) = sigmoid(z) - y on labeled nodes, 0 elsewhere.
inline Vector bce_gradient(const Vector& logits, const std::vector<int>& labels) {
  Vector g = Vector::Zero(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y >= 0) g(i) = trenc::sigmoid(logits(i)) - y;
  }
  return g;
}

}  // namespace nn
}  // namespace trenc
