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
#include <cctype>
#include <cmath>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "trenc/dom.hpp"
#include "trenc/embedding.hpp"
#include "trenc/errors.hpp"
#include "trenc/evaluation.hpp"
#include "trenc/text.hpp"

namespace trenc {

// ---------------------------------------------------------------------------
// Rule-based classifier.

inline bool heuristic_tag(std::string_view tag) {
  static constexpr std::array<std::string_view, 8> kTags = {"li", "h2", "h3", "h4", "b", "strong", "td", "dt"};
  return std::find(kTags.begin(), kTags.end(), tag) != kTags.end();
}

/// True when the text has at least one character that is not an ASCII digit,
/// punctuation or space. Non-ASCII bytes count as word characters.
inline bool has_word_character(std::string_view text) {
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c >= 0x80 || std::isalpha(c)) return true;
  }
  return false;
}

/// Label-free stand-in rules. A node is a candidate when
///   (a) its tag is one of li/h2/h3/h4/b/strong/td/dt, or it is a leaf under ul/ol,
///   (b) its text has 1 to 6 tokens, and
///   (c) its text is not purely digits and punctuation.
/// A candidate is positive when at least two members of its sibling set
/// (itself included) are candidates.
inline std::vector<int> heuristic_classify(const DomTree& tree) {
  const auto kids = children_of(tree);
  std::vector<char> candidate(tree.size(), 0);
  for (const auto& n : tree.nodes) {
    bool tag_ok = heuristic_tag(n.tag);
    if (!tag_ok && kids[static_cast<std::size_t>(n.id)].empty() && n.parent != kNoParent) {
      const auto& ptag = tree.nodes[static_cast<std::size_t>(n.parent)].tag;
      tag_ok = ptag == "ul" || ptag == "ol";
    }
    const std::size_t tokens = whitespace_tokens(n.text).size();
    candidate[static_cast<std::size_t>(n.id)] = tag_ok && tokens >= 1 && tokens <= 6 && has_word_character(n.text);
  }
  std::vector<int> out(tree.size(), 0);
  for (const auto& n : tree.nodes) {
    if (!candidate[static_cast<std::size_t>(n.id)] || n.parent == kNoParent) continue;
    int group = 0;
    for (int sib : kids[static_cast<std::size_t>(n.parent)]) group += candidate[static_cast<std::size_t>(sib)];
    out[static_cast<std::size_t>(n.id)] = group >= 2 ? 1 : 0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Text similarity with a searched threshold.

inline double cosine_similarity(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("cosine of vectors with different sizes");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw ZeroNorm("cosine similarity of a zero vector");
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

/// Cosine between every node text and the tree's interest, on pooled vectors.
inline std::vector<double> similarity_scores(const DomTree& tree, const EmbeddingProvider& provider) {
  const Vector c = provider.pooled(tree.interest);
  std::unordered_map<std::string, double> memo;
  std::vector<double> out;
  out.reserve(tree.size());
  for (const auto& n : tree.nodes) {
    const std::string key = normalize_key(n.text);
    auto it = memo.find(key);
    if (it == memo.end()) it = memo.emplace(key, cosine_similarity(provider.pooled(n.text), c)).first;
    out.push_back(it->second);
  }
  return out;
}

inline constexpr int kThresholdCandidates = 99;

inline double grid_threshold(int k) { return static_cast<double>(k) / 100.0; }

inline std::vector<int> threshold_labels(const std::vector<double>& sims, double threshold) {
  std::vector<int> out(sims.size());
  for (std::size_t i = 0; i < sims.size(); ++i) out[i] = sims[i] > threshold ? 1 : 0;
  return out;
}

struct SimilarityResult {
  double threshold = 0.5;
  std::array<double, kThresholdCandidates> f1_table{};  // F1 at 0.01 .. 0.99
  std::vector<std::vector<double>> reference_sims;      // per reference tree
};

/// Scans thresholds 0.01..0.99 on pre-computed similarities and keeps the one
/// with the highest pooled F1 (ties go to the smallest threshold).
inline SimilarityResult select_threshold(const std::vector<std::vector<double>>& sims,
                                         const std::vector<std::vector<int>>& gold) {
  if (sims.size() != gold.size()) throw DimensionMismatch("similarities and labels differ in tree count");
  SimilarityResult r;
  double best = -1.0;
  for (int k = 1; k <= kThresholdCandidates; ++k) {
    Confusion c;
    for (std::size_t t = 0; t < sims.size(); ++t) c.add(threshold_labels(sims[t], grid_threshold(k)), gold[t]);
    const double f1 = prf1(c).f1;
    r.f1_table[static_cast<std::size_t>(k - 1)] = f1;
    if (f1 > best) {
      best = f1;
      r.threshold = grid_threshold(k);
    }
  }
  r.reference_sims = sims;
  return r;
}

/// Fits the similarity baseline on labeled reference trees (the validation
/// split in the evaluation pipeline).
inline SimilarityResult similarity_classify(const std::vector<DomTree>& reference, const EmbeddingProvider& provider) {
  std::vector<std::vector<double>> sims;
  std::vector<std::vector<int>> gold;
  for (const auto& t : reference) {
    sims.push_back(similarity_scores(t, provider));
    gold.push_back(gold_labels(t));
  }
  return select_threshold(sims, gold);
}

inline std::vector<int> similarity_predict(const DomTree& tree, const EmbeddingProvider& provider, double threshold) {
  return threshold_labels(similarity_scores(tree, provider), threshold);
}

}  // namespace trenc
