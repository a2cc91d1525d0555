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

#include <string>
#include <unordered_map>
#include <vector>

#include "trenc/dom.hpp"
#include "trenc/embedding.hpp"
#include "trenc/linalg.hpp"
#include "trenc/tree_index.hpp"

namespace trenc {

/// A tree resolved into everything the encoders consume: pooled text vectors,
/// the interest vector, tag ids, structural index and labels (-1 = unlabeled).
struct PreparedTree {
  Matrix text;      // |V| x d_embed
  Matrix interest;  // 1 x d_embed
  std::vector<int> tags;
  TreeIndex index;
  std::vector<int> labels;

  std::size_t size() const { return tags.size(); }
};

inline int label_value(Label l) { return static_cast<int>(l); }

inline PreparedTree prepare_tree(const DomTree& tree, const EmbeddingProvider& provider) {
  PreparedTree p;
  const auto n = static_cast<Eigen::Index>(tree.size());
  const int dim = provider.dim();
  p.text.resize(n, dim);
  std::unordered_map<std::string, Vector> memo;
  auto lookup = [&](const std::string& text) -> const Vector& {
    const std::string key = normalize_key(text);
    auto it = memo.find(key);
    if (it == memo.end()) {
      Vector v = provider.pooled(key);
      if (v.size() != dim) throw DimensionMismatch("provider returned a vector of the wrong size");
      it = memo.emplace(key, std::move(v)).first;
    }
    return it->second;
  };
  for (Eigen::Index i = 0; i < n; ++i) p.text.row(i) = lookup(tree.nodes[static_cast<std::size_t>(i)].text).transpose();
  p.interest = lookup(tree.interest).transpose();
  p.tags.reserve(tree.size());
  p.labels.reserve(tree.size());
  for (const auto& node : tree.nodes) {
    p.tags.push_back(tag_id(node.tag));
    p.labels.push_back(label_value(node.label));
  }
  p.index = build_tree_index(tree);
  return p;
}

inline std::vector<PreparedTree> prepare_trees(const std::vector<DomTree>& trees, const EmbeddingProvider& provider) {
  std::vector<PreparedTree> out;
  out.reserve(trees.size());
  for (const auto& t : trees) out.push_back(prepare_tree(t, provider));
  return out;
}

}  // namespace trenc
