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

#include <algorithm>
#include <random>
#include <map>
#include <numeric>
#include <set>

#include "support.hpp"
#include "trenc/evaluation.hpp"
#include "trenc/simplify.hpp"
#include "trenc/synthetic.hpp"

namespace trenc {
namespace {

TEST(Prf1, Examples) {
  const Prf1 perfect = prf1({1, 0, 1, 0}, {1, 0, 1, 0});
  EXPECT_EQ(perfect.precision, 1.0);
  EXPECT_EQ(perfect.recall, 1.0);
  EXPECT_EQ(perfect.f1, 1.0);
  EXPECT_FALSE(perfect.degenerate);

  // TP=1, FP=1, FN=1.
  const Prf1 half = prf1({1, 1, 0, 0}, {1, 0, 1, 0});
  EXPECT_DOUBLE_EQ(half.precision, 0.5);
  EXPECT_DOUBLE_EQ(half.recall, 0.5);
  EXPECT_DOUBLE_EQ(half.f1, 0.5);
}

TEST(Prf1, EmptyDenominatorsAreFlagged) {
  const Prf1 none = prf1({0, 0}, {0, 0});
  EXPECT_EQ(none.f1, 0.0);
  EXPECT_TRUE(none.degenerate);
  const Prf1 wrong = prf1({1, 0}, {0, 1});
  EXPECT_EQ(wrong.f1, 0.0);
  EXPECT_TRUE(wrong.degenerate);
}

TEST(Prf1, UnlabeledNodesAreSkipped) {
  Confusion c;
  c.add({1, 1, 0}, {-1, 1, -1});
  EXPECT_EQ(c.tp, 1u);
  EXPECT_EQ(c.fp + c.fn + c.tn, 0u);
  EXPECT_THROW(c.add({1}, {1, 0}), DimensionMismatch);
}

TEST(Prf1, MatchesCountingOracleAndIsOrderInvariant) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> gold_d(-1, 1), pred_d(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> pred(100), gold(100);
    for (int i = 0; i < 100; ++i) {
      pred[static_cast<std::size_t>(i)] = pred_d(rng);
      gold[static_cast<std::size_t>(i)] = gold_d(rng);
    }
    double tp = 0, fp = 0, fn = 0;
    for (int i = 0; i < 100; ++i) {
      const int g = gold[static_cast<std::size_t>(i)], p = pred[static_cast<std::size_t>(i)];
      if (g < 0) continue;
      tp += (p == 1 && g == 1);
      fp += (p == 1 && g == 0);
      fn += (p == 0 && g == 1);
    }
    const double precision = tp / (tp + fp), recall = tp / (tp + fn);
    const Prf1 r = prf1(pred, gold);
    EXPECT_NEAR(r.precision, precision, 1e-12);
    EXPECT_NEAR(r.recall, recall, 1e-12);
    EXPECT_NEAR(r.f1, 2 * precision * recall / (precision + recall), 1e-12);

    std::vector<std::size_t> perm(100);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> p2(100), g2(100);
    for (std::size_t i = 0; i < 100; ++i) {
      p2[i] = pred[perm[i]];
      g2[i] = gold[perm[i]];
    }
    EXPECT_EQ(prf1(p2, g2).f1, r.f1);
  }
}

TEST(MacroAverage, IsMeanOfSplits) {
  std::vector<SplitMetrics> splits;
  const double f1s[] = {0.8, 0.6, 0.9, 0.75, 0.7};
  for (int i = 0; i < 5; ++i) {
    SplitMetrics m;
    m.replicate = i + 1;
    m.scores.f1 = f1s[i];
    m.scores.precision = f1s[i] - 0.1;
    m.scores.recall = f1s[i] + 0.05;
    splits.push_back(m);
  }
  const Prf1 macro = macro_average(splits);
  EXPECT_NEAR(macro.f1, (0.8 + 0.6 + 0.9 + 0.75 + 0.7) / 5, 1e-12);
  EXPECT_NEAR(macro.precision, macro.f1 - 0.1, 1e-12);
  EXPECT_NEAR(macro.recall, macro.f1 + 0.05, 1e-12);
}

std::vector<std::string> interests(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back("si" + std::to_string(i));
  return out;
}

TEST(SplitByInterest, NinetyFiveInterests) {
  const PartitionSizes s = partition_sizes(95, {});
  EXPECT_EQ(s.train, 71u);
  EXPECT_EQ(s.val, 10u);
  EXPECT_EQ(s.test, 14u);

  const SplitSpec spec = split_interests(interests(95), 42);
  ASSERT_EQ(spec.replicates.size(), 5u);
  for (const auto& rep : spec.replicates) {
    EXPECT_EQ(rep.train.size(), 71u);
    EXPECT_EQ(rep.val.size(), 10u);
    EXPECT_EQ(rep.test.size(), 14u);
  }
}

TEST(SplitByInterest, SmallCountsKeepEveryPartitionNonEmpty) {
  EXPECT_THROW(partition_sizes(2, {}), TooFewInterests);
  for (std::size_t n = 3; n < 60; ++n) {
    const PartitionSizes s = partition_sizes(n, {});
    EXPECT_GE(s.train, 1u) << n;
    EXPECT_GE(s.val, 1u) << n;
    EXPECT_GE(s.test, 1u) << n;
    EXPECT_EQ(s.train + s.val + s.test, n);
  }
}

TEST(SplitByInterest, DeterministicDisjointCover) {
  const SplitSpec a = split_interests(interests(23), 7);
  const SplitSpec b = split_interests(interests(23), 7);
  EXPECT_EQ(a, b);
  EXPECT_FALSE(a == split_interests(interests(23), 8));
  for (const auto& rep : a.replicates) {
    std::multiset<std::string> all;
    all.insert(rep.train.begin(), rep.train.end());
    all.insert(rep.val.begin(), rep.val.end());
    all.insert(rep.test.begin(), rep.test.end());
    const auto want = interests(23);
    EXPECT_EQ(all, std::multiset<std::string>(want.begin(), want.end()));
  }
  // Replicates differ from each other.
  EXPECT_NE(a.replicates[0].test, a.replicates[1].test);
}

TEST(SplitByInterest, TreesFollowTheirInterest) {
  const auto corpus = generate_synthetic_corpus(40, 2, SyntheticTask::kText);
  const SplitSpec spec = split_by_interest(corpus.trees, 42);
  for (const auto& rep : spec.replicates) {
    const TreePartition p = partition_trees(corpus.trees, rep);
    EXPECT_EQ(p.train.size() + p.val.size() + p.test.size(), corpus.trees.size());
    std::set<std::string> tr, te;
    for (auto i : p.train) tr.insert(corpus.trees[i].interest);
    for (auto i : p.test) te.insert(corpus.trees[i].interest);
    for (const auto& s : te) EXPECT_EQ(tr.count(s), 0u);
  }
}

TEST(SplitByInterest, JsonRoundTrip) {
  trenc::testing::TempDir dir;
  const SplitSpec a = split_interests(interests(12), 3, {}, 2);
  save_split_spec(a, dir / "s.json");
  EXPECT_EQ(load_split_spec(dir / "s.json"), a);
  EXPECT_EQ(split_spec_from_json(to_json(a)), a);
}

TEST(DepthReport, SingleDepthUsesOneLevel) {
  const DepthTable t = depth_report({{0, 3.0, 0.2}, {1, 3.0, 0.6}});
  EXPECT_EQ(t.levels[0].count, 2u);
  EXPECT_NEAR(*t.levels[0].mean_f1, 0.4, 1e-12);
  for (std::size_t k = 1; k < t.levels.size(); ++k) EXPECT_FALSE(t.levels[k].mean_f1.has_value());
  EXPECT_THROW(depth_report({}), EmptySplit);
}

TEST(DepthReport, ConstantScoreEverywhere) {
  std::vector<TreeScore> s;
  for (int d = 1; d <= 10; ++d) s.push_back({static_cast<std::size_t>(d), static_cast<double>(d), 0.5});
  const DepthTable t = depth_report(s);
  for (const auto& l : t.levels) {
    EXPECT_EQ(l.count, 2u);
    ASSERT_TRUE(l.mean_f1.has_value());
    EXPECT_DOUBLE_EQ(*l.mean_f1, 0.5);
  }
  EXPECT_DOUBLE_EQ(t.levels[0].lo, 1.0);
  EXPECT_DOUBLE_EQ(t.levels[4].hi, 10.0);
}

TEST(DepthReport, MatchesBucketingOracle) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> depth(0.5, 9.0), f1(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<TreeScore> s;
    for (std::size_t i = 0; i < 37; ++i) s.push_back({i, depth(rng), f1(rng)});
    const DepthTable t = depth_report(s);
    double lo = s[0].depth, hi = s[0].depth;
    for (const auto& x : s) {
      lo = std::min(lo, x.depth);
      hi = std::max(hi, x.depth);
    }
    std::array<double, 5> sum{};
    std::array<int, 5> cnt{};
    for (const auto& x : s) {
      // Interval k holds [lo + k w, lo + (k+1) w); the maximum joins the last.
      int k = 0;
      while (k < 4 && x.depth >= lo + (k + 1) * (hi - lo) / 5) ++k;
      sum[static_cast<std::size_t>(k)] += x.f1;
      ++cnt[static_cast<std::size_t>(k)];
    }
    for (std::size_t k = 0; k < 5; ++k) {
      EXPECT_EQ(t.levels[k].count, static_cast<std::size_t>(cnt[k]));
      if (cnt[k]) {
        EXPECT_NEAR(*t.levels[k].mean_f1, sum[k] / cnt[k], 1e-12);
      }
    }
  }
}

TEST(Report, JsonAndTable) {
  EvalReport r;
  r.model = "trenc";
  for (int i = 1; i <= 2; ++i) {
    SplitMetrics m;
    m.replicate = i;
    m.counts.tp = 3;
    m.counts.fp = 1;
    m.counts.fn = 1;
    m.scores = prf1(m.counts);
    r.splits.push_back(m);
  }
  r.macro = macro_average(r.splits);
  r.per_tree = {{0, 2.0, 0.5}, {1, 4.0, 1.0}};
  r.depth = depth_report(r.per_tree);
  const auto j = to_json(r);
  EXPECT_EQ(j["model"], "trenc");
  EXPECT_EQ(j["splits"].size(), 2u);
  EXPECT_DOUBLE_EQ(j["macro"]["f1"].get<double>(), 0.75);
  EXPECT_EQ(j["depth"]["levels"].size(), 5u);
  const std::string table = format_report_table({r});
  EXPECT_NE(table.find("split-1"), std::string::npos);
  EXPECT_NE(table.find("75.00"), std::string::npos);
}

// ---------------------------------------------------------------------------

int max_level(const DomTree& t) {
  const auto levels = node_levels(t);
  return *std::max_element(levels.begin(), levels.end());
}

TEST(SyntheticCorpus, ShapeBoundsAndSimplifyInvariance) {
  for (auto task : {SyntheticTask::kText, SyntheticTask::kStructure}) {
    const auto corpus = generate_synthetic_corpus(100, 11, task);
    ASSERT_EQ(corpus.trees.size(), 100u);
    EXPECT_EQ(distinct_interests(corpus.trees).size(), 20u);
    for (const auto& t : corpus.trees) {
      EXPECT_GE(t.size(), 30u);
      EXPECT_LE(t.size(), 120u);
      EXPECT_GE(max_level(t), 3);
      EXPECT_LE(max_level(t), 8);
      EXPECT_EQ(simplify_tree(t), t);
      EXPECT_GT(count_label(t, Label::kPositive) + count_label(t, Label::kNegative), 0u);
    }
  }
}

TEST(SyntheticCorpus, Deterministic) {
  const auto a = generate_synthetic_corpus(20, 5, SyntheticTask::kStructure);
  const auto b = generate_synthetic_corpus(20, 5, SyntheticTask::kStructure);
  EXPECT_EQ(a.trees, b.trees);
  const auto c = generate_synthetic_corpus(20, 6, SyntheticTask::kStructure);
  EXPECT_NE(a.trees, c.trees);
  EXPECT_THROW(generate_synthetic_corpus(0, 1, SyntheticTask::kText), ConfigError);
}

TEST(SyntheticCorpus, TextTaskPositivesUseLexicon) {
  const auto corpus = generate_synthetic_corpus(30, 2, SyntheticTask::kText);
  std::size_t positives = 0;
  for (const auto& t : corpus.trees) {
    const auto& lex = corpus.lexicon.at(t.interest);
    for (const auto& n : t.nodes) {
      const bool in_lex = std::find(lex.begin(), lex.end(), n.text) != lex.end();
      EXPECT_EQ(in_lex, n.label == Label::kPositive);
      positives += n.label == Label::kPositive;
    }
  }
  EXPECT_GT(positives, 0u);
}

TEST(SyntheticCorpus, StructureTaskTextCarriesNoLabelSignal) {
  // Text-only classifier: learn the majority label of every text on half of
  // the corpus, predict it on the other half (unseen texts get the overall
  // majority). Node texts are drawn independently of labels, so it must
  // stay near chance.
  const auto corpus = generate_synthetic_corpus(100, 3, SyntheticTask::kStructure);
  std::map<std::string, std::pair<int, int>> counts;  // text -> (pos, neg)
  int pos = 0, neg = 0;
  for (std::size_t i = 0; i < 50; ++i) {
    for (const auto& n : corpus.trees[i].nodes) {
      if (n.label == Label::kPositive) ++counts[n.text].first, ++pos;
      else if (n.label == Label::kNegative) ++counts[n.text].second, ++neg;
    }
  }
  Confusion c;
  for (std::size_t i = 50; i < 100; ++i) {
    std::vector<int> pred, gold;
    for (const auto& n : corpus.trees[i].nodes) {
      auto it = counts.find(n.text);
      const bool p = it == counts.end() ? pos > neg : it->second.first > it->second.second;
      pred.push_back(p ? 1 : 0);
      gold.push_back(static_cast<int>(n.label));
    }
    c.add(pred, gold);
  }
  EXPECT_LE(prf1(c).f1, 0.67);
  EXPECT_GT(pos, 0);
}

}  // namespace
}  // namespace trenc
