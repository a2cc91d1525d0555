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
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "trenc/dom.hpp"
#include "trenc/errors.hpp"

namespace trenc {

/// Subtrees rooted at these tags are dropped during simplification.
inline const std::unordered_set<std::string_view>& removed_subtree_tags() {
  static const std::unordered_set<std::string_view> k = {
      "header", "footer", "nav", "script", "style", "noscript", "iframe", "form", "button"};
  return k;
}

/// Removes page chrome, then empty-text leaves, then collapses every node that
/// has exactly one child into that child. Ids are reassigned in DFS order.
/// Throws EmptyDocument if nothing survives.
inline DomTree simplify_tree(const DomTree& tree) {
  validate_tree(tree);
  const std::size_t n = tree.size();
  std::vector<bool> alive(n, true);

  for (std::size_t i = 0; i < n; ++i) {
    const auto& node = tree.nodes[i];
    if (node.parent != kNoParent && !alive[static_cast<std::size_t>(node.parent)]) {
      alive[i] = false;
    } else if (removed_subtree_tags().count(node.tag)) {
      alive[i] = false;
    }
  }

  // Reverse pre-order sees children before parents, so one sweep reaches the
  // fixpoint of repeated empty-leaf removal.
  std::vector<int> live_children(n, 0);
  for (std::size_t i = n; i-- > 0;) {
    if (!alive[i]) continue;
    const auto& node = tree.nodes[i];
    if (live_children[i] == 0 && node.text.empty()) {
      alive[i] = false;
      continue;
    }
    if (node.parent != kNoParent) ++live_children[static_cast<std::size_t>(node.parent)];
  }
  if (!alive[0]) throw EmptyDocument("simplification removed every node");

  std::vector<std::vector<int>> kids(n);
  for (std::size_t i = 1; i < n; ++i) {
    if (alive[i]) kids[static_cast<std::size_t>(tree.nodes[i].parent)].push_back(static_cast<int>(i));
  }
  auto collapse = [&](int u) {
    while (kids[static_cast<std::size_t>(u)].size() == 1) u = kids[static_cast<std::size_t>(u)].front();
    return u;
  };

  DomTree out;
  out.interest = tree.interest;
  out.source_url = tree.source_url;
  // (original node, new parent id)
  std::vector<std::pair<int, int>> stack{{collapse(0), kNoParent}};
  while (!stack.empty()) {
    auto [u, parent] = stack.back();
    stack.pop_back();
    const auto& src = tree.nodes[static_cast<std::size_t>(u)];
    const int id = static_cast<int>(out.nodes.size());
    out.nodes.push_back(DomNode{id, parent, src.tag, src.text, src.label});
    const auto& ch = kids[static_cast<std::size_t>(u)];
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.emplace_back(collapse(*it), id);
  }
  return out;
}

namespace split_detail {

struct Segment {
  int start = 0;   // first node in DFS order
  int length = 0;  // nodes [start, start + length)
};

}  // namespace split_detail

/// Splits a tree with more than `max_nodes` nodes into several trees. Each
/// output covers a contiguous DFS range of the input plus a replica of the
/// ancestor path leading to it; replicas carry Label::kUnlabeled so every
/// original node is scored exactly once. Child subtrees are grouped greedily
/// and whole; a subtree that cannot be placed whole is descended into. Every
/// output has between `min_nodes` and `max_nodes` nodes; a short final
/// remainder is merged into (or rebalanced with) its predecessor.
inline std::vector<DomTree> split_tree(const DomTree& tree, int max_nodes = 512,
                                       int min_nodes = 64) {
  using split_detail::Segment;
  if (min_nodes < 1 || max_nodes < min_nodes) {
    throw ConfigError("split_tree requires max_nodes >= min_nodes >= 1");
  }
  validate_tree(tree);
  const int n = static_cast<int>(tree.size());
  if (n <= max_nodes) return {tree};
  if (max_nodes < 2) throw SplitImpossible("max_nodes must be at least 2 to split");

  const auto depth = node_levels(tree);
  const auto sizes = subtree_sizes(tree);
  const auto kids = children_of(tree);
  auto d = [&](int v) { return depth[static_cast<std::size_t>(v)]; };
  auto sz = [&](int v) { return sizes[static_cast<std::size_t>(v)]; };

  std::vector<Segment> segments{{0, 1}};
  auto seg_size = [&](const Segment& s) { return d(s.start) + s.length; };
  auto open_segment = [&](int start, int length) {
    if (d(start) + 1 > max_nodes) {
      throw SplitImpossible("ancestor path of node " + std::to_string(start) +
                            " alone exceeds max_nodes");
    }
    segments.push_back(Segment{start, length});
  };

  // Explicit stack of (node, next child position) to survive deep documents.
  std::vector<std::pair<int, std::size_t>> work{{0, 0}};
  while (!work.empty()) {
    auto& [u, pos] = work.back();
    const auto& ch = kids[static_cast<std::size_t>(u)];
    if (pos >= ch.size()) {
      work.pop_back();
      continue;
    }
    const int c = ch[pos++];
    Segment& cur = segments.back();
    const int cur_size = seg_size(cur);
    if (cur_size + sz(c) <= max_nodes) {
      cur.length += sz(c);
      continue;
    }
    const bool fits_fresh = d(c) + sz(c) <= max_nodes;
    if (fits_fresh && cur_size >= min_nodes) {
      open_segment(c, sz(c));
      continue;
    }
    if (cur_size + 1 <= max_nodes) {
      cur.length += 1;
    } else {
      open_segment(c, 1);
    }
    work.emplace_back(c, 0);
  }

  if (segments.size() > 1 && seg_size(segments.back()) < min_nodes) {
    Segment last = segments.back();
    segments.pop_back();
    Segment& prev = segments.back();
    if (seg_size(prev) + last.length <= max_nodes) {
      prev.length += last.length;
    } else {
      int start = last.start;
      while (start > prev.start + 1 && d(start) + (n - start) < min_nodes) --start;
      prev.length = start - prev.start;
      last = Segment{start, n - start};
      if (seg_size(last) > max_nodes || seg_size(last) < min_nodes || seg_size(prev) < min_nodes) {
        throw SplitImpossible("cannot rebalance the final split within bounds");
      }
      segments.push_back(last);
    }
  }

  std::vector<DomTree> out;
  out.reserve(segments.size());
  for (const auto& seg : segments) {
    std::vector<int> members;
    for (int a = tree.nodes[static_cast<std::size_t>(seg.start)].parent; a != kNoParent;
         a = tree.nodes[static_cast<std::size_t>(a)].parent) {
      members.push_back(a);
    }
    const std::size_t replicated = members.size();
    std::reverse(members.begin(), members.end());
    for (int v = seg.start; v < seg.start + seg.length; ++v) members.push_back(v);

    std::vector<int> new_id(static_cast<std::size_t>(n), kNoParent);
    DomTree part;
    part.interest = tree.interest;
    part.source_url = tree.source_url;
    part.nodes.reserve(members.size());
    for (std::size_t k = 0; k < members.size(); ++k) {
      const auto& src = tree.nodes[static_cast<std::size_t>(members[k])];
      new_id[static_cast<std::size_t>(members[k])] = static_cast<int>(k);
      DomNode node{static_cast<int>(k),
                   k == 0 ? kNoParent : new_id[static_cast<std::size_t>(src.parent)], src.tag,
                   src.text, k < replicated ? Label::kUnlabeled : src.label};
      part.nodes.push_back(std::move(node));
    }
    out.push_back(std::move(part));
  }
  return out;
}

}  // namespace trenc
