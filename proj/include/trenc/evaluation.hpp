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
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trenc/dom.hpp"
#include "trenc/errors.hpp"
#include "trenc/text.hpp"

namespace trenc {

// ---------------------------------------------------------------------------
// Precision / recall / F1 for the positive class.

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  /// Adds aligned predictions and gold labels; gold < 0 (unlabeled) is skipped.
  void add(const std::vector<int>& predicted, const std::vector<int>& gold) {
    if (predicted.size() != gold.size()) throw DimensionMismatch("predictions and labels differ in length");
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (gold[i] < 0) continue;
      const bool p = predicted[i] == 1;
      const bool g = gold[i] == 1;
      if (p && g) ++tp;
      else if (p) ++fp;
      else if (g) ++fn;
      else ++tn;
    }
  }

  Confusion& operator+=(const Confusion& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
};

struct Prf1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Set when a denominator was zero and the 0 convention kicked in.
  bool degenerate = false;
};

inline Prf1 prf1(const Confusion& c) {
  Prf1 r;
  const double tp = static_cast<double>(c.tp);
  if (c.tp + c.fp > 0) r.precision = tp / static_cast<double>(c.tp + c.fp);
  else r.degenerate = true;
  if (c.tp + c.fn > 0) r.recall = tp / static_cast<double>(c.tp + c.fn);
  else r.degenerate = true;
  if (r.precision + r.recall > 0) r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  else r.degenerate = true;
  return r;
}

inline Prf1 prf1(const std::vector<int>& predicted, const std::vector<int>& gold) {
  Confusion c;
  c.add(predicted, gold);
  return prf1(c);
}

inline std::vector<int> gold_labels(const DomTree& tree) {
  std::vector<int> out;
  out.reserve(tree.size());
  for (const auto& n : tree.nodes) out.push_back(static_cast<int>(n.label));
  return out;
}

// ---------------------------------------------------------------------------
// Interest-stratified splits.

struct SplitRatios {
  double train = 0.75, val = 0.10, test = 0.15;
};

struct SplitReplicate {
  std::vector<std::string> train, val, test;  // interests, sorted
};

struct SplitSpec {
  std::uint64_t seed = 42;
  SplitRatios ratios;
  std::vector<SplitReplicate> replicates;

  bool operator==(const SplitSpec& o) const {
    return seed == o.seed && replicates.size() == o.replicates.size() &&
           std::equal(replicates.begin(), replicates.end(), o.replicates.begin(),
                      [](const SplitReplicate& a, const SplitReplicate& b) {
                        return a.train == b.train && a.val == b.val && a.test == b.test;
                      });
  }
};

struct PartitionSizes {
  std::size_t train, val, test;
};

/// Validation and test sizes are ratio * count rounded half-up (at least one
/// each); training gets the remainder.
inline PartitionSizes partition_sizes(std::size_t n, const SplitRatios& r) {
  if (n < 3) throw TooFewInterests("need at least 3 distinct interests, got " + std::to_string(n));
  auto round_half_up = [](double x) { return static_cast<std::size_t>(std::floor(x + 0.5 + 1e-9)); };
  std::size_t val = std::max<std::size_t>(1, round_half_up(r.val * static_cast<double>(n)));
  std::size_t test = std::max<std::size_t>(1, round_half_up(r.test * static_cast<double>(n)));
  while (val + test > n - 1) {
    if (test >= val && test > 1) --test;
    else if (val > 1) --val;
    else break;
  }
  return PartitionSizes{n - val - test, val, test};
}

inline std::vector<std::string> distinct_interests(const std::vector<DomTree>& trees) {
  std::set<std::string> s;
  for (const auto& t : trees) s.insert(t.interest);
  return {s.begin(), s.end()};
}

inline SplitSpec split_interests(std::vector<std::string> interests, std::uint64_t seed,
                                 SplitRatios ratios = {}, int replicates = 5) {
  std::sort(interests.begin(), interests.end());
  interests.erase(std::unique(interests.begin(), interests.end()), interests.end());
  const PartitionSizes sizes = partition_sizes(interests.size(), ratios);
  SplitSpec spec;
  spec.seed = seed;
  spec.ratios = ratios;
  for (int r = 0; r < replicates; ++r) {
    std::vector<std::string> order = interests;
    std::mt19937_64 rng(splitmix64(seed ^ (0x5bd1e995ULL * static_cast<std::uint64_t>(r + 1))));
    std::shuffle(order.begin(), order.end(), rng);
    SplitReplicate rep;
    rep.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(sizes.train));
    rep.val.assign(order.begin() + static_cast<std::ptrdiff_t>(sizes.train),
                   order.begin() + static_cast<std::ptrdiff_t>(sizes.train + sizes.val));
    rep.test.assign(order.begin() + static_cast<std::ptrdiff_t>(sizes.train + sizes.val), order.end());
    std::sort(rep.train.begin(), rep.train.end());
    std::sort(rep.val.begin(), rep.val.end());
    std::sort(rep.test.begin(), rep.test.end());
    spec.replicates.push_back(std::move(rep));
  }
  return spec;
}

/// Shuffles the distinct interests per replicate and cuts them into
/// train/val/test partitions; every tree follows its interest.
inline SplitSpec split_by_interest(const std::vector<DomTree>& trees, std::uint64_t seed, SplitRatios ratios = {},
                                   int replicates = 5) {
  return split_interests(distinct_interests(trees), seed, ratios, replicates);
}

struct TreePartition {
  std::vector<std::size_t> train, val, test;  // indices into the dataset
};

inline TreePartition partition_trees(const std::vector<DomTree>& trees, const SplitReplicate& rep) {
  const std::set<std::string> tr(rep.train.begin(), rep.train.end());
  const std::set<std::string> va(rep.val.begin(), rep.val.end());
  const std::set<std::string> te(rep.test.begin(), rep.test.end());
  TreePartition p;
  for (std::size_t i = 0; i < trees.size(); ++i) {
    const auto& si = trees[i].interest;
    if (tr.count(si)) p.train.push_back(i);
    else if (va.count(si)) p.val.push_back(i);
    else if (te.count(si)) p.test.push_back(i);
  }
  return p;
}

inline nlohmann::ordered_json to_json(const SplitSpec& s) {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["seed"] = s.seed;
  j["ratios"] = {s.ratios.train, s.ratios.val, s.ratios.test};
  auto reps = nlohmann::ordered_json::array();
  for (const auto& r : s.replicates) {
    nlohmann::ordered_json o;
    o["train"] = r.train;
    o["val"] = r.val;
    o["test"] = r.test;
    reps.push_back(std::move(o));
  }
  j["replicates"] = std::move(reps);
  return j;
}

inline SplitSpec split_spec_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != 1) throw VersionError("unsupported splits version");
    SplitSpec s;
    s.seed = j.at("seed").get<std::uint64_t>();
    const auto& r = j.at("ratios");
    s.ratios = SplitRatios{r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>()};
    for (const auto& o : j.at("replicates")) {
      SplitReplicate rep;
      rep.train = o.at("train").get<std::vector<std::string>>();
      rep.val = o.at("val").get<std::vector<std::string>>();
      rep.test = o.at("test").get<std::vector<std::string>>();
      s.replicates.push_back(std::move(rep));
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad splits file: ") + e.what());
  }
}

inline void save_split_spec(const SplitSpec& s, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << to_json(s).dump(2) << '\n';
}

inline SplitSpec load_split_spec(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return split_spec_from_json(j);
}

// ---------------------------------------------------------------------------
// Depth analysis.

struct TreeScore {
  std::size_t tree = 0;
  double depth = 0.0;  // mean node depth
  double f1 = 0.0;
};

struct DepthLevel {
  double lo = 0.0, hi = 0.0;
  std::size_t count = 0;
  std::optional<double> mean_f1;  // empty when no tree falls in the interval
};

inline constexpr int kDepthLevels = 5;

struct DepthTable {
  double min_depth = 0.0, max_depth = 0.0;
  std::array<DepthLevel, kDepthLevels> levels;
};

/// Index of the equal-width depth interval a tree falls into.
inline int depth_level_of(double depth, double lo, double hi) {
  const double width = (hi - lo) / kDepthLevels;
  if (width <= 0.0) return 0;
  const int k = static_cast<int>(std::floor((depth - lo) / width));
  return std::clamp(k, 0, kDepthLevels - 1);
}

/// Splits [min depth, max depth] into five equal-width intervals and averages
/// per-tree F1 inside each.
inline DepthTable depth_report(const std::vector<TreeScore>& scores) {
  if (scores.empty()) throw EmptySplit("depth_report needs at least one tree");
  DepthTable t;
  t.min_depth = scores.front().depth;
  t.max_depth = scores.front().depth;
  for (const auto& s : scores) {
    t.min_depth = std::min(t.min_depth, s.depth);
    t.max_depth = std::max(t.max_depth, s.depth);
  }
  const double width = (t.max_depth - t.min_depth) / kDepthLevels;
  std::array<double, kDepthLevels> sums{};
  for (int k = 0; k < kDepthLevels; ++k) {
    t.levels[static_cast<std::size_t>(k)].lo = t.min_depth + width * k;
    t.levels[static_cast<std::size_t>(k)].hi = t.min_depth + width * (k + 1);
  }
  for (const auto& s : scores) {
    const auto k = static_cast<std::size_t>(depth_level_of(s.depth, t.min_depth, t.max_depth));
    ++t.levels[k].count;
    sums[k] += s.f1;
  }
  for (std::size_t k = 0; k < t.levels.size(); ++k) {
    if (t.levels[k].count) t.levels[k].mean_f1 = sums[k] / static_cast<double>(t.levels[k].count);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Reports.

struct SplitMetrics {
  int replicate = 0;  // 1-based
  Confusion counts;
  Prf1 scores;
};

struct EvalReport {
  std::string model;
  std::vector<SplitMetrics> splits;
  Prf1 macro;  // arithmetic means across splits
  std::vector<TreeScore> per_tree;
  std::optional<DepthTable> depth;
};

inline Prf1 macro_average(const std::vector<SplitMetrics>& splits) {
  Prf1 m;
  if (splits.empty()) return m;
  for (const auto& s : splits) {
    m.precision += s.scores.precision;
    m.recall += s.scores.recall;
    m.f1 += s.scores.f1;
    m.degenerate = m.degenerate || s.scores.degenerate;
  }
  const double k = static_cast<double>(splits.size());
  m.precision /= k;
  m.recall /= k;
  m.f1 /= k;
  return m;
}

inline nlohmann::ordered_json to_json(const DepthTable& t) {
  nlohmann::ordered_json j;
  j["min_depth"] = t.min_depth;
  j["max_depth"] = t.max_depth;
  auto levels = nlohmann::ordered_json::array();
  for (const auto& l : t.levels) {
    nlohmann::ordered_json o;
    o["lo"] = l.lo;
    o["hi"] = l.hi;
    o["trees"] = l.count;
    o["mean_f1"] = l.mean_f1 ? nlohmann::ordered_json(*l.mean_f1) : nlohmann::ordered_json(nullptr);
    levels.push_back(std::move(o));
  }
  j["levels"] = std::move(levels);
  return j;
}

inline nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["model"] = r.model;
  auto splits = nlohmann::ordered_json::array();
  for (const auto& s : r.splits) {
    nlohmann::ordered_json o;
    o["replicate"] = s.replicate;
    o["precision"] = s.scores.precision;
    o["recall"] = s.scores.recall;
    o["f1"] = s.scores.f1;
    o["tp"] = s.counts.tp;
    o["fp"] = s.counts.fp;
    o["fn"] = s.counts.fn;
    o["degenerate"] = s.scores.degenerate;
    splits.push_back(std::move(o));
  }
  j["splits"] = std::move(splits);
  j["macro"] = {{"f1", r.macro.f1}, {"precision", r.macro.precision}, {"recall", r.macro.recall}};
  auto trees = nlohmann::ordered_json::array();
  for (const auto& t : r.per_tree) trees.push_back({{"tree", t.tree}, {"depth", t.depth}, {"f1", t.f1}});
  j["per_tree"] = std::move(trees);
  j["depth"] = r.depth ? to_json(*r.depth) : nlohmann::ordered_json(nullptr);
  return j;
}

/// Plain-text table: one column per split, then macro F1 (precision / recall),
/// all in percent.
inline std::string format_report_table(const std::vector<EvalReport>& reports) {
  std::size_t n_splits = 0;
  for (const auto& r : reports) n_splits = std::max(n_splits, r.splits.size());
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << std::left << std::setw(14) << "Model";
  for (const auto& r : reports.empty() ? std::vector<SplitMetrics>{} : reports.front().splits) {
    os << " | " << std::setw(8) << ("split-" + std::to_string(r.replicate));
  }
  os << " | F1 ( precision / recall )\n";
  for (const auto& r : reports) {
    os << std::left << std::setw(14) << r.model;
    for (const auto& s : r.splits) os << " | " << std::setw(8) << 100.0 * s.scores.f1;
    for (std::size_t k = r.splits.size(); k < n_splits; ++k) os << " | " << std::setw(8) << "-";
    os << " | " << 100.0 * r.macro.f1 << " ( " << 100.0 * r.macro.precision << " / " << 100.0 * r.macro.recall
       << " )\n";
  }
  os << "\nDepth levels (mean node depth -> mean per-tree F1):\n";
  for (const auto& r : reports) {
    if (!r.depth) continue;
    os << r.model << ":\n";
    for (std::size_t k = 0; k < r.depth->levels.size(); ++k) {
      const auto& l = r.depth->levels[k];
      os << "  level " << k + 1 << " [" << l.lo << ", " << l.hi << "] trees=" << l.count << " F1=";
      if (l.mean_f1) os << 100.0 * *l.mean_f1;
      else os << "(empty)";
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace trenc
