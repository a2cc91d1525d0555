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
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <future>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "trenc/checkpoint.hpp"
#include "trenc/config.hpp"
#include "trenc/errors.hpp"
#include "trenc/evaluation.hpp"
#include "trenc/nn.hpp"
#include "trenc/optimizer.hpp"
#include "trenc/prepare.hpp"
#include "trenc/text.hpp"
#include "trenc/trenc_model.hpp"

namespace trenc {

// ---------------------------------------------------------------------------
// Snapshots and voting.

struct Snapshot {
  ParameterSet params;
  double val_f1 = 0.0;
  std::int64_t step = 0;
  int epoch = 0;
};

/// Best-on-validation parameter snapshots, ordered by F1 descending and then
/// by earlier step.
class SnapshotSet {
 public:
  explicit SnapshotSet(std::size_t capacity = 5) : capacity_(capacity) {
    if (capacity_ < 1) throw ConfigError("snapshot capacity must be >= 1");
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<Snapshot>& entries() const { return entries_; }
  const Snapshot& operator[](std::size_t i) const { return entries_[i]; }

  /// Inserts unless the set is full and the candidate does not beat the
  /// current minimum. Returns whether it was kept.
  bool offer(const ParameterSet& params, double f1, std::int64_t step, int epoch) {
    Snapshot s{params, f1, step, epoch};
    if (entries_.size() == capacity_) {
      if (!before(s, entries_.back())) return false;
      entries_.pop_back();
    }
    auto pos = std::upper_bound(entries_.begin(), entries_.end(), s, before);
    entries_.insert(pos, std::move(s));
    return true;
  }

  void restore(std::vector<Snapshot> entries) {
    if (entries.size() > capacity_) throw FormatError("too many snapshots for the configured capacity");
    std::stable_sort(entries.begin(), entries.end(), before);
    entries_ = std::move(entries);
  }

 private:
  static bool before(const Snapshot& a, const Snapshot& b) {
    if (a.val_f1 != b.val_f1) return a.val_f1 > b.val_f1;
    return a.step < b.step;
  }

  std::size_t capacity_;
  std::vector<Snapshot> entries_;
};

/// Per node, 1 iff strictly more than half of the voters say 1.
inline std::vector<int> majority_vote(const std::vector<std::vector<int>>& votes) {
  if (votes.empty()) throw EmptySplit("majority_vote needs at least one voter");
  const std::size_t n = votes.front().size();
  std::vector<int> counts(n, 0);
  for (const auto& v : votes) {
    if (v.size() != n) throw DimensionMismatch("voters disagree on node count");
    for (std::size_t i = 0; i < n; ++i) counts[i] += v[i] == 1 ? 1 : 0;
  }
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = 2 * counts[i] > static_cast<int>(votes.size()) ? 1 : 0;
  return out;
}

struct EnsemblePrediction {
  Vector mean_probability;
  std::vector<int> labels;
};

template <class Model>
EnsemblePrediction predict_ensemble(const std::vector<Model>& members, const PreparedTree& tree) {
  if (members.empty()) throw EmptySplit("ensemble has no members");
  EnsemblePrediction out;
  out.mean_probability = Vector::Zero(static_cast<Eigen::Index>(tree.size()));
  std::vector<std::vector<int>> votes;
  for (const auto& m : members) {
    const Vector p = m.probabilities(tree);
    out.mean_probability += p;
    votes.push_back(predict_labels(p));
  }
  out.mean_probability /= static_cast<double>(members.size());
  out.labels = majority_vote(votes);
  return out;
}

template <class Model>
std::vector<Model> ensemble_members(const ModelConfig& cfg, const SnapshotSet& snapshots) {
  std::vector<Model> out;
  for (const auto& s : snapshots.entries()) out.emplace_back(cfg, s.params);
  return out;
}

// ---------------------------------------------------------------------------
// Training loop.

struct LogRecord {
  int epoch = 0;
  std::int64_t step = 0;  // optimizer updates applied so far
  double lr = 0.0;        // learning rate of the epoch's last update
  double train_loss = 0.0;
  double val_f1 = 0.0;
  bool snapshot_saved = false;
};

inline nlohmann::ordered_json to_json(const LogRecord& r) {
  nlohmann::ordered_json j;
  j["epoch"] = r.epoch;
  j["step"] = r.step;
  j["lr"] = r.lr;
  j["train_loss"] = r.train_loss;
  j["val_f1"] = r.val_f1;
  j["snapshot_saved"] = r.snapshot_saved;
  return j;
}

inline LogRecord log_record_from_json(const nlohmann::json& j) {
  LogRecord r;
  r.epoch = j.at("epoch").get<int>();
  r.step = j.at("step").get<std::int64_t>();
  r.lr = j.at("lr").get<double>();
  r.train_loss = j.at("train_loss").get<double>();
  r.val_f1 = j.at("val_f1").get<double>();
  r.snapshot_saved = j.at("snapshot_saved").get<bool>();
  return r;
}

/// Everything needed to continue a run at an epoch boundary.
struct TrainState {
  int epochs_done = 0;
  std::int64_t step = 0;
  double best_f1 = -1.0;
  int epochs_since_best = 0;
  ParameterSet params;
  ParameterSet adam_m, adam_v;
  std::int64_t adam_t = 0;
  std::vector<Snapshot> snapshots;
  std::vector<LogRecord> history;
};

struct TrainResult {
  SnapshotSet snapshots;
  std::vector<LogRecord> history;
  int epochs_run = 0;
  bool stopped_early = false;
};

struct TrainOptions {
  // Worker threads for per-tree passes inside a batch. Results are reduced in
  // tree order, so the outcome does not depend on this value.
  unsigned threads = 1;
  const TrainState* resume = nullptr;
  // Called after every epoch; returning false stops the run.
  std::function<bool(const TrainState&)> on_epoch_end;
  std::function<void(const LogRecord&)> on_log;
};

inline std::int64_t steps_per_epoch(std::size_t n_train, int batch_size) {
  return static_cast<std::int64_t>((n_train + static_cast<std::size_t>(batch_size) - 1) /
                                   static_cast<std::size_t>(batch_size));
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(seed ^ splitmix64(a)) ^ b);
}

template <class Model>
double pooled_f1(const Model& model, const std::vector<PreparedTree>& trees) {
  Confusion c;
  for (const auto& t : trees) c.add(predict_labels(model.probabilities(t)), t.labels);
  return prf1(c).f1;
}

/// Trains `model` in place. Data order and dropout noise derive from
/// cfg.seed, the epoch and the step, so a run is reproducible bit for bit and
/// can be resumed from any epoch boundary.
template <class Model>
TrainResult train(Model& model, const std::vector<PreparedTree>& train_set, const std::vector<PreparedTree>& val_set,
                  const TrainConfig& cfg, const TrainOptions& opts = {}) {
  cfg.validate();
  if (train_set.empty()) throw EmptySplit("training split is empty");
  if (val_set.empty()) throw EmptySplit("validation split is empty");

  const std::int64_t per_epoch = steps_per_epoch(train_set.size(), cfg.batch_size);
  const std::int64_t total_steps = per_epoch * cfg.max_epochs;
  AdamW opt(model.parameters(), cfg);
  TrainResult result{SnapshotSet(static_cast<std::size_t>(cfg.snapshots_kept)), {}, 0, false};

  TrainState state;
  if (opts.resume) {
    state = *opts.resume;
    if (!state.params.same_layout(model.parameters())) throw FormatError("resume state does not match the model");
    model.parameters() = state.params;
    opt.restore(state.adam_m, state.adam_v, state.adam_t);
    result.snapshots.restore(state.snapshots);
    result.history = state.history;
  }

  const unsigned threads = std::max(1u, opts.threads);
  ParameterSet grads = model.parameters().zeros_like();
  std::vector<ParameterSet> tree_grads;

  for (int epoch = state.epochs_done + 1; epoch <= cfg.max_epochs; ++epoch) {
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    double lr = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const std::size_t batch = end - start;
      std::size_t labeled = 0;
      for (std::size_t k = start; k < end; ++k) {
        for (int y : train_set[order[k]].labels) labeled += y >= 0 ? 1 : 0;
      }
      const double scale = 1.0 / static_cast<double>(std::max<std::size_t>(1, labeled));

      if (tree_grads.size() < batch) tree_grads.resize(batch, grads);
      std::vector<double> losses(batch, 0.0);
      auto run_tree = [&](std::size_t k) {
        tree_grads[k].set_zero();
        std::mt19937_64 drop_rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(state.step) + 0x10000,
                                          static_cast<std::uint64_t>(k)));
        losses[k] = model.accumulate_gradients(train_set[order[start + k]], tree_grads[k], scale, &drop_rng);
      };
      if (threads == 1 || batch == 1) {
        for (std::size_t k = 0; k < batch; ++k) run_tree(k);
      } else {
        for (std::size_t k0 = 0; k0 < batch; k0 += threads) {
          std::vector<std::future<void>> jobs;
          for (std::size_t k = k0; k < std::min(batch, k0 + threads); ++k) {
            jobs.push_back(std::async(std::launch::async, run_tree, k));
          }
          for (auto& j : jobs) j.get();
        }
      }

      grads.set_zero();
      double batch_loss = 0.0;
      for (std::size_t k = 0; k < batch; ++k) {
        batch_loss += losses[k];
        for (std::size_t i = 0; i < grads.size(); ++i) grads[i] += tree_grads[k][i];
      }
      batch_loss *= scale;
      if (!std::isfinite(batch_loss) || !grads.all_finite()) {
        throw NonFinite("non-finite loss or gradient at epoch " + std::to_string(epoch) + ", step " +
                        std::to_string(state.step));
      }
      lr = lr_at(state.step, total_steps, cfg);
      opt.step(model.parameters(), grads, lr);
      ++state.step;
      loss_sum += batch_loss;
    }

    LogRecord rec;
    rec.epoch = epoch;
    rec.step = state.step;
    rec.lr = lr;
    rec.train_loss = loss_sum / static_cast<double>(per_epoch);
    rec.val_f1 = pooled_f1(model, val_set);
    rec.snapshot_saved = result.snapshots.offer(model.parameters(), rec.val_f1, state.step, epoch);
    if (rec.val_f1 > state.best_f1) {
      state.best_f1 = rec.val_f1;
      state.epochs_since_best = 0;
    } else {
      ++state.epochs_since_best;
    }
    result.history.push_back(rec);
    if (opts.on_log) opts.on_log(rec);
    ++result.epochs_run;
    state.epochs_done = epoch;

    const bool patience_out = state.epochs_since_best >= cfg.patience;
    if (opts.on_epoch_end) {
      state.params = model.parameters();
      state.adam_m = opt.first_moment();
      state.adam_v = opt.second_moment();
      state.adam_t = opt.steps_taken();
      state.snapshots = result.snapshots.entries();
      state.history = result.history;
      if (!opts.on_epoch_end(state)) break;
    }
    if (patience_out) {
      result.stopped_early = epoch < cfg.max_epochs;
      break;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Persistence of run state.

inline void save_train_state(const std::filesystem::path& path, const std::string& kind, const ModelConfig& mcfg,
                             const TrainState& s) {
  nlohmann::ordered_json meta;
  meta["kind"] = kind;
  meta["config"] = to_json(mcfg);
  meta["epochs_done"] = s.epochs_done;
  meta["step"] = s.step;
  meta["best_f1"] = s.best_f1;
  meta["epochs_since_best"] = s.epochs_since_best;
  meta["adam_t"] = s.adam_t;
  auto snaps = nlohmann::ordered_json::array();
  for (const auto& sn : s.snapshots) snaps.push_back({{"val_f1", sn.val_f1}, {"step", sn.step}, {"epoch", sn.epoch}});
  meta["snapshots"] = std::move(snaps);
  auto hist = nlohmann::ordered_json::array();
  for (const auto& r : s.history) hist.push_back(to_json(r));
  meta["history"] = std::move(hist);

  std::vector<std::string> names;
  for (std::size_t i = 0; i < s.snapshots.size(); ++i) names.push_back("snapshot" + std::to_string(i));
  std::vector<std::pair<std::string, const ParameterSet*>> sets = {
      {"params", &s.params}, {"adam.m", &s.adam_m}, {"adam.v", &s.adam_v}};
  for (std::size_t i = 0; i < s.snapshots.size(); ++i) sets.emplace_back(names[i], &s.snapshots[i].params);
  save_tensor_container(path, std::move(meta), sets);
}

struct LoadedTrainState {
  std::string kind;
  ModelConfig config;
  TrainState state;
};

inline LoadedTrainState load_train_state(const std::filesystem::path& path) {
  TensorContainer c = load_tensor_container(path);
  LoadedTrainState out;
  auto take = [&](const std::string& name) {
    auto it = c.sets.find(name);
    if (it == c.sets.end()) throw FormatError(path.string() + ": missing tensor set " + name);
    return std::move(it->second);
  };
  try {
    const auto& m = c.meta;
    out.kind = m.at("kind").get<std::string>();
    out.config = model_config_from_json(m.at("config"));
    TrainState& s = out.state;
    s.epochs_done = m.at("epochs_done").get<int>();
    s.step = m.at("step").get<std::int64_t>();
    s.best_f1 = m.at("best_f1").get<double>();
    s.epochs_since_best = m.at("epochs_since_best").get<int>();
    s.adam_t = m.at("adam_t").get<std::int64_t>();
    s.params = take("params");
    s.adam_m = take("adam.m");
    s.adam_v = take("adam.v");
    const auto& snaps = m.at("snapshots");
    for (std::size_t i = 0; i < snaps.size(); ++i) {
      Snapshot sn;
      sn.val_f1 = snaps[i].at("val_f1").get<double>();
      sn.step = snaps[i].at("step").get<std::int64_t>();
      sn.epoch = snaps[i].at("epoch").get<int>();
      sn.params = take("snapshot" + std::to_string(i));
      s.snapshots.push_back(std::move(sn));
    }
    for (const auto& r : m.at("history")) s.history.push_back(log_record_from_json(r));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": bad train state: " + e.what());
  }
  return out;
}

}  // namespace trenc
