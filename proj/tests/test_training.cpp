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
#include "trenc/mlp.hpp"
#include "trenc/optimizer.hpp"
#include "trenc/synthetic.hpp"
#include "trenc/training.hpp"

namespace trenc {
namespace {

using trenc::testing::TempDir;

TEST(LearningRate, WarmupThenLinearDecay) {
  // 100 steps, 10 warmup steps.
  EXPECT_EQ(warmup_steps(100, 0.1), 10);
  EXPECT_EQ(lr_at(0, 100, 1e-4, 0.1), 0.0);
  EXPECT_NEAR(lr_at(5, 100, 1e-4, 0.1), 0.5e-4, 1e-12);
  EXPECT_DOUBLE_EQ(lr_at(10, 100, 1e-4, 0.1), 1e-4);
  EXPECT_NEAR(lr_at(55, 100, 1e-4, 0.1), 0.5e-4, 1e-12);
  EXPECT_EQ(lr_at(100, 100, 1e-4, 0.1), 0.0);
  EXPECT_EQ(warmup_steps(7, 0.1), 1);  // ceil(0.7)
  EXPECT_DOUBLE_EQ(lr_at(1, 7, 1.0, 0.1), 1.0);
}

TEST(LearningRate, NoWarmupStartsAtPeakAfterFirstStep) {
  EXPECT_EQ(lr_at(0, 10, 2.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(lr_at(1, 10, 2.0, 0.0), 1.8);
  EXPECT_EQ(lr_at(3, 0, 2.0, 0.0), 0.0);
}

ParameterSet small_params() {
  ParameterSet ps;
  ps.add("w", 2, 3);
  ps.add("b", 1, 3);
  ps[0] << 1.0, -2.0, 0.5, 0.25, 3.0, -1.0;
  ps[1] << 0.1, 0.2, 0.3;
  return ps;
}

TEST(AdamW, ZeroGradientWithoutDecayIsNoOp) {
  TrainConfig cfg;
  cfg.weight_decay = 0.0;
  ParameterSet ps = small_params();
  const ParameterSet before = ps;
  AdamW opt(ps, cfg);
  for (int i = 0; i < 3; ++i) opt.step(ps, ps.zeros_like(), 1e-2);
  for (std::size_t i = 0; i < ps.size(); ++i) EXPECT_EQ(ps[i], before[i]);
}

TEST(AdamW, ZeroGradientOnlyDecays) {
  TrainConfig cfg;
  cfg.weight_decay = 0.1;
  ParameterSet ps = small_params();
  const ParameterSet before = ps;
  AdamW opt(ps, cfg);
  opt.step(ps, ps.zeros_like(), 0.5);
  for (std::size_t i = 0; i < ps.size(); ++i) EXPECT_TRUE(ps[i].isApprox(before[i] * (1.0 - 0.05)));
}

TEST(AdamW, FirstStepMovesBySignedLearningRate) {
  TrainConfig cfg;
  cfg.weight_decay = 0.0;
  ParameterSet ps = small_params();
  const ParameterSet before = ps;
  ParameterSet g = ps.zeros_like();
  g[0] << 2.0, -0.5, 1e-3, 4.0, -3.0, 1.0;
  g[1] << -1.0, 1.0, 0.0;
  AdamW opt(ps, cfg);
  opt.step(ps, g, 0.01);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (Eigen::Index k = 0; k < ps[i].size(); ++k) {
      const double gk = g[i].data()[k];
      const double expected = before[i].data()[k] - 0.01 * gk / (std::abs(gk) + 1e-8);
      EXPECT_NEAR(ps[i].data()[k], expected, 1e-12);
    }
  }
  EXPECT_EQ(opt.steps_taken(), 1);
}

ParameterSet tagged(double v) {
  ParameterSet ps;
  ps.add("x", 1, 1);
  ps[0](0, 0) = v;
  return ps;
}

TEST(SnapshotSet, OrdersByScoreThenStep) {
  SnapshotSet s(3);
  EXPECT_TRUE(s.offer(tagged(1), 0.5, 10, 1));
  EXPECT_TRUE(s.offer(tagged(2), 0.7, 20, 2));
  EXPECT_TRUE(s.offer(tagged(3), 0.5, 5, 3));
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].step, 20);
  EXPECT_EQ(s[1].step, 5);
  EXPECT_EQ(s[2].step, 10);

  // Equal score but later step does not beat the minimum.
  EXPECT_FALSE(s.offer(tagged(4), 0.5, 30, 4));
  EXPECT_TRUE(s.offer(tagged(5), 0.6, 40, 5));
  EXPECT_EQ(s.size(), 3u);
  EXPECT_EQ(s[2].step, 5);
  EXPECT_THROW(SnapshotSet(0), ConfigError);
}

TEST(SnapshotSet, SixthSnapshotEvictsMinimum) {
  SnapshotSet s(5);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> scores;
  for (int i = 0; i < 40; ++i) {
    const double f = std::round(u(rng) * 20) / 20;
    scores.push_back(f);
    s.offer(tagged(i), f, i, i);
    EXPECT_LE(s.size(), 5u);
    for (std::size_t k = 1; k < s.size(); ++k) EXPECT_GE(s[k - 1].val_f1, s[k].val_f1);
  }
  std::vector<double> sorted = scores;
  std::sort(sorted.rbegin(), sorted.rend());
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(s[k].val_f1, sorted[k]);
}

TEST(MajorityVote, Examples) {
  EXPECT_EQ(majority_vote({{1}, {1}, {1}, {0}, {0}}), std::vector<int>{1});
  EXPECT_EQ(majority_vote({{1}, {1}, {0}, {0}}), std::vector<int>{0});
  EXPECT_EQ(majority_vote({{1}}), std::vector<int>{1});
  EXPECT_THROW(majority_vote({}), EmptySplit);
  EXPECT_THROW(majority_vote({{1, 0}, {1}}), DimensionMismatch);
}

TEST(MajorityVote, MatchesCountingOracle) {
  std::mt19937_64 rng(9);
  std::bernoulli_distribution coin(0.5);
  for (int voters = 1; voters <= 6; ++voters) {
    std::vector<std::vector<int>> votes(static_cast<std::size_t>(voters), std::vector<int>(50));
    for (auto& v : votes)
      for (auto& x : v) x = coin(rng) ? 1 : 0;
    const auto got = majority_vote(votes);
    for (std::size_t i = 0; i < 50; ++i) {
      int ones = 0;
      for (const auto& v : votes) ones += v[i];
      EXPECT_EQ(got[i], ones > voters - ones ? 1 : 0);
    }
  }
}

class TrainingLoop : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto corpus = generate_synthetic_corpus(12, 3, SyntheticTask::kText);
    HashEmbeddingProvider prov(model_cfg_.d_embed, 13);
    for (std::size_t i = 0; i < corpus.trees.size(); ++i) {
      (i < 9 ? train_ : val_).push_back(prepare_tree(corpus.trees[i], prov));
    }
    cfg_.peak_lr = 1e-3;
    cfg_.batch_size = 4;
    cfg_.max_epochs = 4;
    cfg_.patience = 10;
  }

  ModelConfig model_cfg_ = trenc::testing::toy_model_config();
  TrainConfig cfg_;
  std::vector<PreparedTree> train_, val_;
};

TEST_F(TrainingLoop, PatienceZeroRunsOneEpoch) {
  cfg_.patience = 0;
  TrencModel model(model_cfg_, 1);
  const TrainResult r = train(model, train_, val_, cfg_);
  EXPECT_EQ(r.epochs_run, 1);
  EXPECT_TRUE(r.stopped_early);
  ASSERT_EQ(r.history.size(), 1u);
  EXPECT_EQ(r.history[0].step, 3);
  EXPECT_EQ(r.snapshots.size(), 1u);
}

TEST_F(TrainingLoop, SameSeedSameTrajectory) {
  TrencModel a(model_cfg_, 1), b(model_cfg_, 1);
  const TrainResult ra = train(a, train_, val_, cfg_);
  const TrainResult rb = train(b, train_, val_, cfg_);
  ASSERT_EQ(ra.history.size(), 4u);
  for (std::size_t i = 0; i < ra.history.size(); ++i) {
    EXPECT_EQ(ra.history[i].train_loss, rb.history[i].train_loss);
    EXPECT_EQ(ra.history[i].val_f1, rb.history[i].val_f1);
    EXPECT_EQ(to_json(ra.history[i]).dump(), to_json(rb.history[i]).dump());
  }
  for (std::size_t i = 0; i < a.parameters().size(); ++i) EXPECT_EQ(a.parameters()[i], b.parameters()[i]);

  cfg_.seed = 7;
  TrencModel c(model_cfg_, 1);
  const TrainResult rc = train(c, train_, val_, cfg_);
  EXPECT_NE(rc.history[0].train_loss, ra.history[0].train_loss);
}

TEST_F(TrainingLoop, ThreadCountDoesNotChangeResults) {
  TrencModel a(model_cfg_, 1), b(model_cfg_, 1);
  cfg_.max_epochs = 2;
  TrainOptions opts;
  opts.threads = 3;
  const TrainResult ra = train(a, train_, val_, cfg_);
  const TrainResult rb = train(b, train_, val_, cfg_, opts);
  for (std::size_t i = 0; i < ra.history.size(); ++i) EXPECT_EQ(ra.history[i].train_loss, rb.history[i].train_loss);
  for (std::size_t i = 0; i < a.parameters().size(); ++i) EXPECT_EQ(a.parameters()[i], b.parameters()[i]);
}

TEST_F(TrainingLoop, ResumeMatchesUninterruptedRun) {
  TrencModel full(model_cfg_, 1);
  const TrainResult rf = train(full, train_, val_, cfg_);

  TrainState saved;
  TrencModel first(model_cfg_, 1);
  TrainOptions stop;
  stop.on_epoch_end = [&](const TrainState& s) {
    saved = s;
    return s.epochs_done < 2;
  };
  train(first, train_, val_, cfg_, stop);
  ASSERT_EQ(saved.epochs_done, 2);

  TempDir dir;
  save_train_state(dir / "state.ckpt", TrencModel::kKind, model_cfg_, saved);
  const LoadedTrainState loaded = load_train_state(dir / "state.ckpt");
  EXPECT_EQ(loaded.kind, "trenc");
  EXPECT_EQ(loaded.config, model_cfg_);
  EXPECT_EQ(loaded.state.step, saved.step);
  EXPECT_EQ(loaded.state.snapshots.size(), saved.snapshots.size());

  TrencModel resumed(model_cfg_, 99);
  TrainOptions opts;
  opts.resume = &loaded.state;
  const TrainResult rr = train(resumed, train_, val_, cfg_, opts);
  ASSERT_EQ(rr.history.size(), rf.history.size());
  for (std::size_t i = 0; i < rf.history.size(); ++i) {
    EXPECT_EQ(to_json(rr.history[i]).dump(), to_json(rf.history[i]).dump()) << "epoch " << i + 1;
  }
  for (std::size_t i = 0; i < full.parameters().size(); ++i) EXPECT_EQ(full.parameters()[i], resumed.parameters()[i]);
  ASSERT_EQ(rr.snapshots.size(), rf.snapshots.size());
  for (std::size_t k = 0; k < rf.snapshots.size(); ++k) EXPECT_EQ(rr.snapshots[k].step, rf.snapshots[k].step);
}

TEST_F(TrainingLoop, LogRecordsAreConsistent) {
  TrencModel model(model_cfg_, 1);
  std::vector<LogRecord> seen;
  TrainOptions opts;
  opts.on_log = [&](const LogRecord& r) { seen.push_back(r); };
  const TrainResult r = train(model, train_, val_, cfg_, opts);
  ASSERT_EQ(seen.size(), r.history.size());
  for (std::size_t i = 0; i < seen.size(); ++i) {
    EXPECT_EQ(seen[i].epoch, static_cast<int>(i) + 1);
    EXPECT_EQ(seen[i].step, 3 * static_cast<std::int64_t>(i + 1));
    EXPECT_TRUE(std::isfinite(seen[i].train_loss));
    EXPECT_GE(seen[i].val_f1, 0.0);
    EXPECT_LE(seen[i].val_f1, 1.0);
    const LogRecord back = log_record_from_json(to_json(seen[i]));
    EXPECT_EQ(to_json(back).dump(), to_json(seen[i]).dump());
  }
  // Step 12 of 12 total is the last update: lr_at(11, 12, ...).
  EXPECT_DOUBLE_EQ(seen.back().lr, lr_at(11, 12, cfg_));
}

TEST_F(TrainingLoop, RejectsEmptySplits) {
  TrencModel model(model_cfg_, 1);
  EXPECT_THROW(train(model, {}, val_, cfg_), EmptySplit);
  EXPECT_THROW(train(model, train_, {}, cfg_), EmptySplit);
  cfg_.batch_size = 0;
  EXPECT_THROW(train(model, train_, val_, cfg_), ConfigError);
}

TEST_F(TrainingLoop, NonFiniteLossAborts) {
  TrencModel model(model_cfg_, 1);
  model.parameters()[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
  for (auto& t : train_) t.text.setConstant(std::numeric_limits<double>::quiet_NaN());
  EXPECT_THROW(train(model, train_, val_, cfg_), NonFinite);
}

TEST_F(TrainingLoop, EnsembleOfIdenticalSnapshotsEqualsSingleModel) {
  TrencModel model(model_cfg_, 4);
  SnapshotSet set(5);
  for (int i = 0; i < 5; ++i) set.offer(model.parameters(), 0.5, i, i);
  const auto members = ensemble_members<TrencModel>(model_cfg_, set);
  ASSERT_EQ(members.size(), 5u);
  for (const auto& t : val_) {
    const EnsemblePrediction e = predict_ensemble(members, t);
    const Vector p = model.probabilities(t);
    EXPECT_EQ(e.labels, predict_labels(p));
    EXPECT_TRUE(e.mean_probability.isApprox(p));
  }
}

TEST_F(TrainingLoop, MlpOverfitsTextTask) {
  // A single tree whose labels are determined by text.
  cfg_.max_epochs = 150;
  cfg_.patience = 150;
  cfg_.batch_size = 1;
  cfg_.peak_lr = 3e-3;
  const std::vector<PreparedTree> one{train_[0]};
  ModelConfig mc = model_cfg_;
  mc.dropout = 0.0;
  MlpModel mlp(mc, 2);
  TrainOptions opts;
  opts.on_epoch_end = [&](const TrainState&) { return pooled_f1(mlp, one) < 1.0; };
  train(mlp, one, one, cfg_, opts);
  EXPECT_EQ(pooled_f1(mlp, one), 1.0);

  MlpModel zero(mc, 2);
  zero.parameters().set_zero();
  for (int y : predict_labels(zero.probabilities(one[0]))) EXPECT_EQ(y, 0);
}

}  // namespace
}  // namespace trenc
