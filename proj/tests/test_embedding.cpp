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

#include <fstream>
#include <random>

#include "support.hpp"
#include "trenc/embedding.hpp"
#include "trenc/prepare.hpp"

namespace trenc {
namespace {

using trenc::testing::TempDir;

TEST(PoolTokens, MeanOfVectors) {
  Vector v(3);
  v << 1.0, -2.0, 0.5;
  EXPECT_TRUE(pool_tokens({v, v}).isApprox(v));

  Vector a(2), b(2);
  a << 1.0, 0.0;
  b << 0.0, 1.0;
  const Vector m = pool_tokens({a, b});
  EXPECT_DOUBLE_EQ(m(0), 0.5);
  EXPECT_DOUBLE_EQ(m(1), 0.5);

  EXPECT_THROW(pool_tokens({}), DimensionMismatch);
}

TEST(PoolTokens, MatchesScalarSummation) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 1 + trial;
    std::vector<Vector> vs;
    for (int i = 0; i < k; ++i) {
      Vector v(7);
      for (int j = 0; j < 7; ++j) v(j) = normal(rng);
      vs.push_back(v);
    }
    const Vector m = pool_tokens(vs);
    for (int j = 0; j < 7; ++j) {
      double s = 0.0;
      for (const auto& v : vs) s += v(j);
      EXPECT_NEAR(m(j), s / k, 1e-12);
    }
  }
}

TEST(HashEmbed, DeterministicUnitVectors) {
  const auto a = hash_embed("tent", 16, 7);
  const auto b = hash_embed("tent", 16, 7);
  ASSERT_EQ(a.size(), 3u);  // start, token, end
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
  for (const auto& v : hash_embed("tent stove lantern 42", 16, 7)) EXPECT_NEAR(v.norm(), 1.0, 1e-6);
}

TEST(HashEmbed, RepeatedTokensShareVectors) {
  const auto v = hash_embed("tent tent", 8, 3);
  ASSERT_EQ(v.size(), 4u);
  EXPECT_EQ(v[1], v[2]);
  EXPECT_NE(v[0], v[1]);
}

TEST(HashEmbed, SeedChangesVectors) {
  EXPECT_NE(hash_embed("tent", 8, 1)[1], hash_embed("tent", 8, 2)[1]);
  EXPECT_THROW(hash_embed("tent", 0, 1), DimensionMismatch);
}

TEST(HashEmbed, EmptyTextKeepsBoundaries) {
  EXPECT_EQ(hash_embed("", 4, 1).size(), 2u);
  EXPECT_EQ(hash_embed("  Tent ", 4, 1), hash_embed("tent", 4, 1));
}

TEST(HashEmbeddingProvider, PoolsTokens) {
  HashEmbeddingProvider p(12, 9);
  EXPECT_EQ(p.dim(), 12);
  EXPECT_TRUE(p.pooled("camp stove").isApprox(pool_tokens(hash_embed("camp stove", 12, 9))));
}

class EmbeddingFile : public ::testing::Test {
 protected:
  void write(const std::string& body) {
    std::ofstream os(path_);
    os << body;
  }
  TempDir dir_;
  std::filesystem::path path_ = dir_ / "emb.jsonl";
};

TEST_F(EmbeddingFile, RoundTripAndNormalizedLookup) {
  Vector tent(3), stove(3);
  tent << 0.25, -1.0, 2.0;
  stove << 1.0, 0.0, 0.0;
  write_embedding_file(path_, "toy", 3, {{"tent", tent}, {"Camp  Stove", stove}});
  const auto p = load_embedding_file(path_);
  EXPECT_EQ(p->dim(), 3);
  EXPECT_EQ(p->model_id(), "toy");
  EXPECT_EQ(p->size(), 2u);
  EXPECT_EQ(p->pooled("tent"), tent);
  EXPECT_EQ(p->pooled("TENT  "), tent);
  EXPECT_EQ(p->pooled("camp stove"), stove);
}

TEST_F(EmbeddingFile, StrictAndLenientMisses) {
  Vector tent = Vector::Ones(4);
  write_embedding_file(path_, "toy", 4, {{"tent", tent}});
  EXPECT_THROW(load_embedding_file(path_)->pooled("unseen"), KeyMissing);

  const auto lenient = load_embedding_file(path_, LookupMode::kLenient, 5);
  const Vector v = lenient->pooled("unseen");
  EXPECT_EQ(v, HashEmbeddingProvider(4, 5).pooled("unseen"));
  lenient->pooled("also unseen");
  EXPECT_EQ(lenient->misses(), 2u);
  EXPECT_EQ(lenient->pooled("tent"), tent);
}

TEST_F(EmbeddingFile, MalformedInput) {
  write("not json\n");
  EXPECT_THROW(load_embedding_file(path_), FormatError);

  write("{\"version\":2,\"dim\":2}\n");
  EXPECT_THROW(load_embedding_file(path_), VersionError);

  write("{\"version\":1,\"dim\":0}\n");
  EXPECT_THROW(load_embedding_file(path_), FormatError);

  write("{\"version\":1,\"dim\":2}\n{\"key\":\"a\",\"vec\":[1,2,3]}\n");
  EXPECT_THROW(load_embedding_file(path_), DimensionMismatch);

  write("{\"version\":1,\"dim\":2}\n{\"key\":\"a\",\"vec\":[1,\"x\"]}\n");
  EXPECT_THROW(load_embedding_file(path_), FormatError);

  write("{\"version\":1,\"dim\":2}\n{\"vec\":[1,2]}\n");
  EXPECT_THROW(load_embedding_file(path_), FormatError);

  EXPECT_THROW(load_embedding_file(dir_ / "missing.jsonl"), Error);
}

TEST_F(EmbeddingFile, DiagnosticNamesLine) {
  write("{\"version\":1,\"dim\":1}\n{\"key\":\"a\",\"vec\":[1]}\n\n{\"key\":7,\"vec\":[1]}\n");
  try {
    load_embedding_file(path_);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
}

TEST(PrepareTree, ResolvesTextsTagsAndLabels) {
  const DomTree t = make_tree("Camping", {{kNoParent, "ul", "", Label::kNegative},
                                          {0, "li", "Tent", Label::kPositive},
                                          {0, "blink", "tent", Label::kUnlabeled}});
  HashEmbeddingProvider p(6, 1);
  const PreparedTree pt = prepare_tree(t, p);
  ASSERT_EQ(pt.size(), 3u);
  EXPECT_EQ(pt.text.rows(), 3);
  EXPECT_EQ(pt.text.cols(), 6);
  EXPECT_TRUE(pt.text.row(1).isApprox(pt.text.row(2)));
  EXPECT_TRUE(pt.interest.row(0).transpose().isApprox(p.pooled("camping")));
  EXPECT_EQ(pt.labels, (std::vector<int>{0, 1, -1}));
  EXPECT_EQ(pt.tags[1], tag_id("li"));
  EXPECT_EQ(pt.tags[2], 0);  // UNK
}

}  // namespace
}  // namespace trenc
