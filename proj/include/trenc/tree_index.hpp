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

#include <limits>
#include <string>
#include <vector>

#include "trenc/dom.hpp"
#include "trenc/linalg.hpp"

namespace trenc {

inline constexpr double kMasked = -std::numeric_limits<double>::infinity();

/// Per-node positional indices and the two structural attention masks.
/// Mask entries are 0 where attention is allowed and -inf elsewhere.
struct TreeIndex {
  std::vector<int> global_idx;   // DFS position
  std::vector<int> level_idx;    // depth, root = 0
  std::vector<int> sibling_idx;  // order among siblings, root = 0
  Matrix path_mask;
  Matrix sibling_mask;

  std::size_t size() const { return global_idx.size(); }
};

inline TreeIndex compute_positional_indices(const DomTree& tree) {
  TreeIndex idx;
  const std::size_t n = tree.size();
  idx.global_idx.resize(n);
  idx.level_idx = node_levels(tree);
  idx.sibling_idx.assign(n, 0);
  std::vector<int> next_child(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    idx.global_idx[i] = static_cast<int>(i);
    const int p = tree.nodes[i].parent;
    if (p != kNoParent) idx.sibling_idx[i] = next_child[static_cast<std::size_t>(p)]++;
  }
  return idx;
}

/// (u, v) is open iff u and v lie on a common root-to-node path, i.e. one is
/// an ancestor of the other or u == v.
inline Matrix compute_path_mask(const DomTree& tree) {
  const auto n = static_cast<Eigen::Index>(tree.size());
  Matrix mask = Matrix::Constant(n, n, kMasked);
  for (Eigen::Index v = 0; v < n; ++v) {
    for (int a = static_cast<int>(v); a != kNoParent; a = tree.nodes[static_cast<std::size_t>(a)].parent) {
      mask(v, a) = 0.0;
      mask(a, v) = 0.0;
    }
  }
  return mask;
}

/// (u, v) is open iff u and v share a parent or u == v. The root forms a
/// singleton sibling set.
inline Matrix compute_sibling_mask(const DomTree& tree) {
  const auto n = static_cast<Eigen::Index>(tree.size());
  Matrix mask = Matrix::Constant(n, n, kMasked);
  const auto kids = children_of(tree);
  for (Eigen::Index v = 0; v < n; ++v) mask(v, v) = 0.0;
  for (const auto& group : kids) {
    for (int a : group) {
      for (int b : group) mask(a, b) = 0.0;
    }
  }
  return mask;
}

inline TreeIndex build_tree_index(const DomTree& tree) {
  TreeIndex idx = compute_positional_indices(tree);
  idx.path_mask = compute_path_mask(tree);
  idx.sibling_mask = compute_sibling_mask(tree);
  return idx;
}

/// Text grid for golden-file checks: '0' for open entries, 'X' for masked.
inline std::string dump_mask(const Matrix& mask) {
  std::string out;
  for (Eigen::Index r = 0; r < mask.rows(); ++r) {
    for (Eigen::Index c = 0; c < mask.cols(); ++c) {
      if (c) out.push_back(' ');
      out.push_back(mask(r, c) == 0.0 ? '0' : 'X');
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace trenc
