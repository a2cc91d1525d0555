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
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "trenc/errors.hpp"
#include "trenc/text.hpp"

namespace trenc {

enum class Label : std::int8_t { kUnlabeled = -1, kNegative = 0, kPositive = 1 };

inline constexpr int kNoParent = -1;
inline constexpr std::string_view kUnknownTag = "unk";

struct DomNode {
  int id = 0;
  int parent = kNoParent;
  std::string tag;
  std::string text;
  Label label = Label::kUnlabeled;

  bool operator==(const DomNode&) const = default;
};

/// A DOM tree whose nodes are stored in depth-first (pre-order) order, so
/// node ids double as global positions and every parent precedes its children.
struct DomTree {
  std::string interest;
  std::optional<std::string> source_url;
  std::vector<DomNode> nodes;

  std::size_t size() const { return nodes.size(); }
  bool operator==(const DomTree&) const = default;
};

// ---------------------------------------------------------------------------
// Tag vocabulary. Index 0 is reserved for unknown tags.

inline const std::vector<std::string>& tag_vocabulary() {
  static const std::vector<std::string> kTags = {
      "a",       "abbr",     "address", "article",  "aside",    "audio",   "b",
      "bdi",     "bdo",      "blockquote", "body",  "br",       "button",  "canvas",
      "caption", "center",   "cite",    "code",     "col",      "colgroup", "data",
      "dd",      "del",      "details", "dfn",      "dialog",   "div",     "dl",
      "dt",      "em",       "embed",   "fieldset", "figcaption", "figure", "font",
      "footer",  "form",     "h1",      "h2",       "h3",       "h4",      "h5",
      "h6",      "head",     "header",  "hr",       "html",     "i",       "iframe",
      "img",     "input",    "ins",     "kbd",      "label",    "legend",  "li",
      "link",    "main",     "mark",    "menu",     "meta",     "meter",   "nav",
      "noscript", "object",  "ol",      "optgroup", "option",   "output",  "p",
      "picture", "pre",      "progress", "q",       "s",        "samp",    "script",
      "section", "select",   "small",   "source",   "span",     "strike",  "strong",
      "style",   "sub",      "summary", "sup",      "svg",      "table",   "tbody",
      "td",      "template", "textarea", "tfoot",   "th",       "thead",   "time",
      "title",   "tr",       "track",   "u",        "ul",       "var",     "video",
      "wbr"};
  return kTags;
}

inline const std::unordered_map<std::string, int>& tag_index_map() {
  static const std::unordered_map<std::string, int> kIndex = [] {
    std::unordered_map<std::string, int> m;
    const auto& tags = tag_vocabulary();
    for (std::size_t i = 0; i < tags.size(); ++i) m.emplace(tags[i], static_cast<int>(i) + 1);
    return m;
  }();
  return kIndex;
}

/// Number of rows in a tag embedding table (vocabulary plus UNK).
inline int tag_vocabulary_size() { return static_cast<int>(tag_vocabulary().size()) + 1; }

/// Tag id in [0, tag_vocabulary_size()); 0 is UNK.
inline int tag_id(std::string_view tag) {
  const auto& m = tag_index_map();
  auto it = m.find(ascii_lower(tag));
  return it == m.end() ? 0 : it->second;
}

/// Lowercases a raw tag name and maps tags outside the vocabulary to "unk".
inline std::string canonical_tag(std::string_view raw) {
  std::string lower = ascii_lower(raw);
  return tag_index_map().count(lower) ? lower : std::string(kUnknownTag);
}

// ---------------------------------------------------------------------------
// Structure helpers.

/// Throws FormatError unless ids are 0..n-1, node 0 is the only root and the
/// parent links describe a pre-order enumeration.
inline void validate_tree(const DomTree& tree) {
  const auto& nodes = tree.nodes;
  if (nodes.empty()) throw FormatError("tree has no nodes");
  std::vector<int> path;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    const int id = static_cast<int>(i);
    if (n.id != id) {
      throw FormatError("node at position " + std::to_string(i) + " has id " +
                        std::to_string(n.id));
    }
    if (i == 0) {
      if (n.parent != kNoParent) throw FormatError("node 0 must be the root");
      path.push_back(0);
      continue;
    }
    if (n.parent == kNoParent) throw FormatError("multiple roots (node " + std::to_string(id) + ")");
    if (n.parent < 0 || n.parent >= id) {
      throw FormatError("node " + std::to_string(id) + " has parent " +
                        std::to_string(n.parent) + " which does not precede it");
    }
    while (!path.empty() && path.back() != n.parent) path.pop_back();
    if (path.empty()) {
      throw FormatError("node " + std::to_string(id) + " breaks depth-first order");
    }
    path.push_back(id);
  }
}

inline std::vector<std::vector<int>> children_of(const DomTree& tree) {
  std::vector<std::vector<int>> kids(tree.size());
  for (const auto& n : tree.nodes) {
    if (n.parent != kNoParent) kids[static_cast<std::size_t>(n.parent)].push_back(n.id);
  }
  return kids;
}

/// Depth of every node (root = 0). Requires parents to precede children.
inline std::vector<int> node_levels(const DomTree& tree) {
  std::vector<int> level(tree.size(), 0);
  for (const auto& n : tree.nodes) {
    if (n.parent != kNoParent) level[static_cast<std::size_t>(n.id)] = level[static_cast<std::size_t>(n.parent)] + 1;
  }
  return level;
}

inline std::vector<int> subtree_sizes(const DomTree& tree) {
  std::vector<int> size(tree.size(), 1);
  for (std::size_t i = tree.size(); i-- > 1;) {
    size[static_cast<std::size_t>(tree.nodes[i].parent)] += size[i];
  }
  return size;
}

/// Mean node depth, used to bucket trees in depth analyses.
inline double average_depth(const DomTree& tree) {
  if (tree.nodes.empty()) return 0.0;
  const auto levels = node_levels(tree);
  double sum = 0.0;
  for (int l : levels) sum += l;
  return sum / static_cast<double>(levels.size());
}

inline std::size_t count_label(const DomTree& tree, Label label) {
  return static_cast<std::size_t>(std::count_if(tree.nodes.begin(), tree.nodes.end(),
                                                [label](const DomNode& n) { return n.label == label; }));
}

/// Builds a tree from (parent, tag, text, label) rows listed in pre-order.
/// Mostly useful in tests and generators.
struct NodeSpec {
  int parent = kNoParent;
  std::string tag;
  std::string text;
  Label label = Label::kUnlabeled;
};

inline DomTree make_tree(std::string interest, const std::vector<NodeSpec>& specs) {
  DomTree tree;
  tree.interest = std::move(interest);
  tree.nodes.reserve(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    tree.nodes.push_back(DomNode{static_cast<int>(i), specs[i].parent, specs[i].tag,
                                 specs[i].text, specs[i].label});
  }
  validate_tree(tree);
  return tree;
}

}  // namespace trenc
