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

#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "trenc/baselines.hpp"
#include "trenc/synthetic.hpp"

namespace trenc {
namespace {

TEST(Heuristic, ListOfShortItemsIsPositive) {
  const DomTree t = make_tree("camping", {{kNoParent, "ul", "", Label::kNegative},
                                          {0, "li", "tent", Label::kUnlabeled},
                                          {0, "li", "stove", Label::kUnlabeled},
                                          {0, "li", "lantern", Label::kUnlabeled}});
  EXPECT_EQ(heuristic_classify(t), (std::vector<int>{0, 1, 1, 1}));
}

TEST(Heuristic, LonelyItemFailsGroupRule) {
  const DomTree t = make_tree("camping", {{kNoParent, "div", "", Label::kNegative},
                                          {0, "ul", "", Label::kNegative},
                                          {1, "li", "tent", Label::kPositive},
                                          {0, "p", "camping gear", Label::kNegative}});
  EXPECT_EQ(heuristic_classify(t), (std::vector<int>{0, 0, 0, 0}));
}

TEST(Heuristic, LengthAndContentRules) {
  std::string paragraph;
  for (int i = 0; i < 40; ++i) paragraph += "word ";
  const DomTree t = make_tree("camping", {{kNoParent, "ul", "", Label::kNegative},
                                          {0, "li", paragraph, Label::kNegative},
                                          {0, "li", "12.99 $", Label::kNegative},
                                          {0, "span", "sleeping bag", Label::kPositive},
                                          {0, "li", "camp chair", Label::kPositive},
                                          {0, "li", "", Label::kNegative}});
  // A span leaf under ul counts as a list item.
  EXPECT_EQ(heuristic_classify(t), (std::vector<int>{0, 0, 0, 1, 1, 0}));
}

TEST(Heuristic, HeadingsAndCellsQualify) {
  const DomTree t = make_tree("x", {{kNoParent, "table", "", Label::kNegative},
                                    {0, "td", "tent", Label::kNegative},
                                    {0, "td", "stove", Label::kNegative},
                                    {0, "div", "", Label::kNegative},
                                    {3, "h3", "Rods", Label::kNegative},
                                    {3, "p", "reels", Label::kNegative},
                                    {3, "strong", "Nets", Label::kNegative}});
  EXPECT_EQ(heuristic_classify(t), (std::vector<int>{0, 1, 1, 0, 1, 0, 1}));
}

TEST(Heuristic, IgnoresGoldLabels) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    DomTree t = trenc::testing::random_tree(rng, 40);
    const auto before = heuristic_classify(t);
    for (auto& n : t.nodes) n.label = n.label == Label::kPositive ? Label::kNegative : Label::kPositive;
    EXPECT_EQ(heuristic_classify(t), before);
  }
}

TEST(Cosine, Examples) {
  Vector a(2), b(2);
  a << 1.0, 0.0;
  b << 0.0, 3.0;
  EXPECT_EQ(cosine_similarity(a, b), 0.0);
  EXPECT_NEAR(cosine_similarity(a, a * 7.0), 1.0, 1e-15);
  EXPECT_NEAR(cosine_similarity(a, -a), -1.0, 1e-15);
  EXPECT_THROW(cosine_similarity(a, Vector::Zero(2)), ZeroNorm);
  EXPECT_THROW(cosine_similarity(a, Vector::Ones(3)), DimensionMismatch);
}

TEST(Similarity, TextEqualToInterestScoresOne) {
  HashEmbeddingProvider prov(16, 2);
  const DomTree t = make_tree("Camping Gear", {{kNoParent, "ul", "camping gear", Label::kNegative},
                                               {0, "li", "tent", Label::kPositive},
                                               {0, "li", "stove", Label::kPositive}});
  const auto sims = similarity_scores(t, prov);
  EXPECT_NEAR(sims[0], 1.0, 1e-12);
  for (double s : sims) EXPECT_LE(std::abs(s), 1.0 + 1e-9);
}

TEST(Similarity, GridSearchPicksSmallestBestThreshold) {
  const SimilarityResult r = select_threshold({{0.2, 0.8}}, {{0, 1}});
  // Classification is sim > threshold, so 0.20 already separates the two.
  EXPECT_DOUBLE_EQ(r.threshold, 0.20);
  EXPECT_EQ(r.f1_table[19], 1.0);
  EXPECT_LT(r.f1_table[18], 1.0);
  EXPECT_EQ(r.f1_table[78], 1.0);  // 0.79
  EXPECT_LT(r.f1_table[79], 1.0);  // 0.80
  EXPECT_EQ(r.f1_table.size(), 99u);
  double best = 0.0;
  for (double f : r.f1_table) best = std::max(best, f);
  EXPECT_EQ(r.f1_table[static_cast<std::size_t>(std::lround(r.threshold * 100)) - 1], best);
}

TEST(Similarity, ScaleInvariant) {
  const auto corpus = generate_synthetic_corpus(6, 4, SyntheticTask::kText);
  HashEmbeddingProvider hash(8, 5);
  std::unordered_map<std::string, Vector> base, scaled;
  auto remember = [&](const std::string& text) {
    const std::string key = normalize_key(text);
    base[key] = hash.pooled(key);
    scaled[key] = hash.pooled(key) * 37.5;
  };
  for (const auto& t : corpus.trees) {
    remember(t.interest);
    for (const auto& n : t.nodes) remember(n.text);
  }
  const FileEmbeddingProvider p1(8, "base", base), p2(8, "scaled", scaled);
  const SimilarityResult r1 = similarity_classify(corpus.trees, p1);
  const SimilarityResult r2 = similarity_classify(corpus.trees, p2);
  EXPECT_EQ(r1.threshold, r2.threshold);
  for (const auto& t : corpus.trees) {
    const auto s1 = similarity_scores(t, p1), s2 = similarity_scores(t, p2);
    for (std::size_t i = 0; i < s1.size(); ++i) EXPECT_NEAR(s1[i], s2[i], 1e-12);
    EXPECT_EQ(similarity_predict(t, p1, r1.threshold), similarity_predict(t, p2, r2.threshold));
  }
}

}  // namespace
}  // namespace trenc
