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
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "trenc/dom.hpp"
#include "trenc/errors.hpp"

namespace trenc {

enum class SyntheticTask { kText, kStructure };

struct SyntheticCorpus {
  std::vector<DomTree> trees;
  // Product-type phrases per interest (text task only).
  std::map<std::string, std::vector<std::string>> lexicon;
};

namespace synthetic_detail {

inline std::string word(const char* prefix, int k) { return std::string(prefix) + std::to_string(k); }

class Builder {
 public:
  int add(int parent, std::string tag, std::string text, Label label) {
    specs_.push_back(NodeSpec{parent, std::move(tag), std::move(text), label});
    return static_cast<int>(specs_.size()) - 1;
  }
  std::size_t size() const { return specs_.size(); }
  const std::vector<NodeSpec>& specs() const { return specs_; }

 private:
  std::vector<NodeSpec> specs_;
};

}  // namespace synthetic_detail

/// Labeled trees for self-contained experiments.
///
/// Layout: a body root holding an h1 and a chain of div wrappers (each with a
/// p leaf); the innermost wrapper holds lists. A captioned list is a ul whose
/// first child is a caption leaf followed by 3-6 li leaves; a plain list has
/// exactly 2 li leaves and is always negative. Every captioned list flips a
/// coin for being a product list.
///
/// text task: li of product lists carry phrases from the interest's lexicon,
/// every other node carries noise tokens.
/// structure task: every text comes from one shared pool; the only signal is
/// the caption tag (h4 for product lists, span otherwise).
///
/// Trees have maximum node level 3-8 and 30-120 nodes, every internal node
/// has at least two children and every leaf has text, so simplify_tree
/// leaves them unchanged.
inline SyntheticCorpus generate_synthetic_corpus(int n_trees, std::uint64_t seed, SyntheticTask task) {
  using synthetic_detail::word;
  if (n_trees < 1) throw ConfigError("n_trees must be >= 1");
  std::mt19937_64 rng(seed);
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto coin = [&] { return uniform(0, 1) == 1; };

  const int n_interests = std::max(3, (n_trees + 4) / 5);
  constexpr int kNoiseWords = 60;
  constexpr int kLexiconSize = 12;

  SyntheticCorpus corpus;
  std::vector<std::string> interests;
  for (int s = 0; s < n_interests; ++s) {
    const std::string name = "interest " + word("topic", s);
    interests.push_back(name);
    if (task == SyntheticTask::kText) {
      auto& phrases = corpus.lexicon[name];
      for (int k = 0; k < kLexiconSize; ++k) {
        phrases.push_back(word("pt", s) + "x" + std::to_string(k) + " " + word("kind", s));
      }
    }
  }

  auto noise = [&](int lo, int hi) {
    std::string out;
    const int n = uniform(lo, hi);
    for (int i = 0; i < n; ++i) {
      if (i) out += ' ';
      out += word("w", uniform(0, kNoiseWords - 1));
    }
    return out;
  };

  std::vector<int> assignment(static_cast<std::size_t>(n_trees));
  for (int i = 0; i < n_trees; ++i) assignment[static_cast<std::size_t>(i)] = i % n_interests;
  std::shuffle(assignment.begin(), assignment.end(), rng);

  for (int i = 0; i < n_trees; ++i) {
    const std::string& interest = interests[static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)])];
    const auto* phrases = task == SyntheticTask::kText ? &corpus.lexicon[interest] : nullptr;
    const int target = uniform(30, 120);
    const int wrappers = uniform(1, 6);

    synthetic_detail::Builder b;
    const int root = b.add(kNoParent, "body", "", Label::kNegative);
    b.add(root, "h1", noise(2, 4), Label::kNegative);
    int container = root;
    for (int w = 0; w < wrappers; ++w) {
      const int div = b.add(container, "div", "", Label::kNegative);
      b.add(div, "p", noise(3, 8), Label::kNegative);
      container = div;
    }

    auto captioned_list = [&](int items) {
      const bool product = coin();
      const int ul = b.add(container, "ul", "", Label::kNegative);
      b.add(ul, product ? "h4" : "span", noise(1, 3), Label::kNegative);
      for (int k = 0; k < items; ++k) {
        std::string text;
        if (phrases && product) text = (*phrases)[static_cast<std::size_t>(uniform(0, kLexiconSize - 1))];
        else text = noise(1, 3);
        b.add(ul, "li", std::move(text), product ? Label::kPositive : Label::kNegative);
      }
    };
    auto plain_list = [&] {
      const int ul = b.add(container, "ul", "", Label::kNegative);
      for (int k = 0; k < 2; ++k) b.add(ul, "li", noise(1, 3), Label::kNegative);
    };

    int lists = 0;
    while (true) {
      const std::size_t remaining = static_cast<std::size_t>(target) - std::min<std::size_t>(b.size(), target);
      if (lists < 2 || remaining >= 8) {
        const int items = lists < 2 ? 3 : uniform(3, std::min(6, static_cast<int>(remaining) - 2));
        if (lists >= 2 && uniform(0, 3) == 0) plain_list();
        else captioned_list(items);
        ++lists;
        continue;
      }
      for (std::size_t k = 0; k < remaining; ++k) b.add(container, "p", noise(3, 8), Label::kNegative);
      break;
    }
    corpus.trees.push_back(make_tree(interest, b.specs()));
  }
  return corpus;
}

}  // namespace trenc
