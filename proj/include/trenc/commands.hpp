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
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trenc/baselines.hpp"
#include "trenc/checkpoint.hpp"
#include "trenc/config.hpp"
#include "trenc/dataset_io.hpp"
#include "trenc/embedding.hpp"
#include "trenc/errors.hpp"
#include "trenc/evaluation.hpp"
#include "trenc/html_parser.hpp"
#include "trenc/manifest.hpp"
#include "trenc/mlp.hpp"
#include "trenc/prepare.hpp"
#include "trenc/simplify.hpp"
#include "trenc/synthetic.hpp"
#include "trenc/training.hpp"
#include "trenc/trenc_model.hpp"

namespace trenc::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

inline constexpr const char* kSeedEnv = "TREENC_SEED";

/// Seed precedence: environment variable, then flag, then fallback.
inline std::uint64_t effective_seed(std::optional<std::uint64_t> flag, std::uint64_t fallback) {
  if (const char* env = std::getenv(kSeedEnv); env && *env) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw ConfigError(std::string(kSeedEnv) + " is not an unsigned integer: " + env);
    }
  }
  return flag.value_or(fallback);
}

/// Runs a command body and maps failures onto exit codes.
inline int guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const NonFinite& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

inline nlohmann::json read_json_file(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline RunConfig load_run_config(const std::optional<fs::path>& path) {
  if (!path) return RunConfig{};
  return run_config_from_json(read_json_file(*path));
}

inline fs::path manifest_path_for(const fs::path& out) { return fs::path(out.string() + ".manifest.json"); }

// ---------------------------------------------------------------------------
// preprocess

struct PreprocessArgs {
  fs::path in_dir;
  fs::path interest_map;
  fs::path out;
  int max_nodes = 512;
  int min_nodes = 64;
};

inline int cmd_preprocess(const PreprocessArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        if (!fs::is_directory(a.in_dir)) throw ConfigError(a.in_dir.string() + " is not a directory");
        const nlohmann::json map = read_json_file(a.interest_map);
        if (!map.is_object()) throw FormatError("interest map must be a JSON object {filename: interest}");
        if (a.min_nodes < 1 || a.max_nodes < a.min_nodes) throw ConfigError("need max-nodes >= min-nodes >= 1");

        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(a.in_dir)) {
          const auto ext = ascii_lower(e.path().extension().string());
          if (e.is_regular_file() && (ext == ".html" || ext == ".htm")) files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());

        std::vector<DomTree> dataset;
        std::size_t skipped = 0;
        for (const auto& f : files) {
          const std::string name = f.filename().string();
          try {
            auto it = map.find(name);
            if (it == map.end() || !it->is_string()) throw ConfigError("no interest in the interest map");
            DomTree tree = parse_html(read_file(f));
            tree.interest = it->get<std::string>();
            tree.source_url = name;
            const DomTree simple = simplify_tree(tree);
            const auto parts = split_tree(simple, a.max_nodes, a.min_nodes);
            out << name << ": " << tree.size() << " nodes, " << simple.size() << " after simplification, "
                << parts.size() << " tree(s) [";
            for (std::size_t k = 0; k < parts.size(); ++k) out << (k ? " " : "") << parts[k].size();
            out << "]\n";
            dataset.insert(dataset.end(), parts.begin(), parts.end());
          } catch (const Error& e) {
            ++skipped;
            err << "warning: skipping " << name << ": " << e.what() << '\n';
          }
        }
        save_dataset(dataset, a.out);
        RunManifest m;
        m.command = "preprocess";
        m.config = {{"max_nodes", a.max_nodes}, {"min_nodes", a.min_nodes}};
        m.inputs = {a.in_dir, a.interest_map};
        m.outputs = {a.out};
        write_manifest(m, manifest_path_for(a.out));
        out << "wrote " << dataset.size() << " trees from " << files.size() - skipped << " of " << files.size()
            << " files to " << a.out.string() << '\n';
        return kExitOk;
      },
      err);
}

// ---------------------------------------------------------------------------
// split

struct SplitArgs {
  fs::path in;
  fs::path out;
  std::optional<std::uint64_t> seed;
  int replicates = 5;
};

inline int cmd_split(const SplitArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        if (a.replicates < 1) throw ConfigError("replicates must be >= 1");
        const std::uint64_t seed = effective_seed(a.seed, 42);
        const auto trees = load_dataset(a.in);
        const SplitSpec spec = split_by_interest(trees, seed, SplitRatios{}, a.replicates);
        save_split_spec(spec, a.out);
        RunManifest m;
        m.command = "split";
        m.seed = seed;
        m.config = {{"replicates", a.replicates}, {"ratios", {0.75, 0.10, 0.15}}};
        m.inputs = {a.in};
        m.outputs = {a.out};
        write_manifest(m, manifest_path_for(a.out));
        const auto& r = spec.replicates.front();
        out << "interests per replicate: train " << r.train.size() << ", val " << r.val.size() << ", test "
            << r.test.size() << '\n';
        return kExitOk;
      },
      err);
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  int trees = 40;
  std::optional<std::uint64_t> seed;
  std::string task = "text";  // "text" or "structure"
  fs::path out;
};

inline int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        if (a.task != "text" && a.task != "structure") throw ConfigError("unknown synthetic task " + a.task);
        const std::uint64_t seed = effective_seed(a.seed, 42);
        const auto task = a.task == "text" ? SyntheticTask::kText : SyntheticTask::kStructure;
        const SyntheticCorpus corpus = generate_synthetic_corpus(a.trees, seed, task);
        save_dataset(corpus.trees, a.out);
        RunManifest m;
        m.command = "synth";
        m.seed = seed;
        m.config = {{"trees", a.trees}, {"task", a.task}};
        m.outputs = {a.out};
        write_manifest(m, manifest_path_for(a.out));
        out << "wrote " << corpus.trees.size() << " trees to " << a.out.string() << '\n';
        return kExitOk;
      },
      err);
}

// ---------------------------------------------------------------------------
// shared loading

struct ReplicateData {
  std::vector<DomTree> trees;
  TreePartition partition;
};

inline ReplicateData load_replicate(const fs::path& data, const fs::path& splits, int replicate) {
  ReplicateData r;
  r.trees = load_dataset(data);
  const SplitSpec spec = load_split_spec(splits);
  if (replicate < 1 || replicate > static_cast<int>(spec.replicates.size())) {
    throw ConfigError("replicate must lie in 1.." + std::to_string(spec.replicates.size()));
  }
  r.partition = partition_trees(r.trees, spec.replicates[static_cast<std::size_t>(replicate - 1)]);
  return r;
}

inline std::vector<DomTree> select(const std::vector<DomTree>& trees, const std::vector<std::size_t>& idx) {
  std::vector<DomTree> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(trees[i]);
  return out;
}

/// "hash" builds a hash provider; anything else is read as an embedding file.
inline std::unique_ptr<EmbeddingProvider> make_provider(const std::string& spec, int dim,
                                                        const EmbeddingConfig& cfg, bool lenient) {
  if (spec.empty() || spec == "hash") return std::make_unique<HashEmbeddingProvider>(dim, cfg.hash_seed);
  auto p = load_embedding_file(spec, lenient ? LookupMode::kLenient : LookupMode::kStrict, cfg.hash_seed);
  if (p->dim() != dim) {
    throw DimensionMismatch("embedding file dim " + std::to_string(p->dim()) + " != model d_embed " +
                            std::to_string(dim));
  }
  return p;
}

inline std::string snapshot_name(std::size_t rank) { return "snapshot-" + std::to_string(rank) + ".ckpt"; }

inline std::vector<Checkpoint> load_snapshots(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("checkpoint directory " + dir.string() + " does not exist");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() && name.rfind("snapshot-", 0) == 0 && e.path().extension() == ".ckpt") {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("no snapshots in " + dir.string());
  std::vector<Checkpoint> out;
  for (const auto& f : files) out.push_back(load_checkpoint(f));
  for (const auto& c : out) {
    if (c.kind != out.front().kind || !(c.config == out.front().config)) {
      throw FormatError("snapshots in " + dir.string() + " disagree on model kind or config");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  fs::path data;
  fs::path splits;
  int replicate = 1;
  std::string embeddings = "hash";
  bool lenient = false;
  std::optional<fs::path> config;
  fs::path out;
  std::string model = "trenc";
  std::optional<std::uint64_t> seed;
  bool resume = false;
  int stop_after = 0;  // epochs in this invocation; 0 = run to completion
  unsigned threads = 1;
};

inline constexpr const char* kStateFile = "state.ckpt";
inline constexpr const char* kTrainLog = "train_log.jsonl";

template <class Model>
int run_training(const TrainArgs& a, const RunConfig& rc, const std::vector<PreparedTree>& train_set,
                 const std::vector<PreparedTree>& val_set, std::ostream& out) {
  Model model(rc.model, rc.train.seed);
  TrainOptions opts;
  opts.threads = a.threads;
  std::optional<LoadedTrainState> resumed;
  if (a.resume) {
    resumed = load_train_state(a.out / kStateFile);
    if (resumed->kind != Model::kKind || !(resumed->config == rc.model)) {
      throw ConfigError("resume state was written for a different model or config");
    }
    opts.resume = &resumed->state;
  }
  int epochs_this_run = 0;
  opts.on_log = [&](const LogRecord& r) {
    out << "epoch " << r.epoch << " step " << r.step << " loss " << r.train_loss << " val_f1 " << r.val_f1
        << (r.snapshot_saved ? " [snapshot]" : "") << '\n';
  };
  opts.on_epoch_end = [&](const TrainState& s) {
    save_train_state(a.out / kStateFile, Model::kKind, rc.model, s);
    ++epochs_this_run;
    return a.stop_after <= 0 || epochs_this_run < a.stop_after;
  };
  const TrainResult result = train(model, train_set, val_set, rc.train, opts);

  std::ostringstream log;
  for (const auto& r : result.history) log << to_json(r).dump() << '\n';
  write_file(a.out / kTrainLog, log.str());

  for (const auto& e : fs::directory_iterator(a.out)) {
    const auto name = e.path().filename().string();
    if (name.rfind("snapshot-", 0) == 0 && e.path().extension() == ".ckpt") fs::remove(e.path());
  }
  std::vector<fs::path> outputs = {a.out / kTrainLog, a.out / kStateFile};
  for (std::size_t k = 0; k < result.snapshots.size(); ++k) {
    const Snapshot& s = result.snapshots[k];
    nlohmann::ordered_json extra = {{"rank", k + 1}, {"val_f1", s.val_f1}, {"step", s.step}, {"epoch", s.epoch}};
    const fs::path p = a.out / snapshot_name(k + 1);
    save_checkpoint(p, Model::kKind, rc.model, s.params, extra);
    outputs.push_back(p);
  }

  RunManifest m;
  m.command = "train";
  m.seed = rc.train.seed;
  m.config = to_json(rc);
  m.config["model_kind"] = Model::kKind;
  m.config["replicate"] = a.replicate;
  m.config["embeddings"] = a.embeddings;
  m.inputs = {a.data, a.splits};
  if (a.config) m.inputs.push_back(*a.config);
  if (a.embeddings != "hash") m.inputs.emplace_back(a.embeddings);
  m.outputs = outputs;
  write_manifest(m, a.out / "manifest.json");
  out << "kept " << result.snapshots.size() << " snapshot(s) after " << result.history.size() << " epoch(s)\n";
  return kExitOk;
}

inline int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        RunConfig rc = load_run_config(a.config);
        rc.train.seed = effective_seed(a.seed, rc.train.seed);
        if (a.model != "trenc" && a.model != "mlp") throw ConfigError("unknown model kind " + a.model);
        const ReplicateData d = load_replicate(a.data, a.splits, a.replicate);
        const auto provider = make_provider(a.embeddings, rc.model.d_embed, rc.embedding, a.lenient);
        const auto train_set = prepare_trees(select(d.trees, d.partition.train), *provider);
        const auto val_set = prepare_trees(select(d.trees, d.partition.val), *provider);
        fs::create_directories(a.out);
        if (a.model == "mlp") return run_training<MlpModel>(a, rc, train_set, val_set, out);
        return run_training<TrencModel>(a, rc, train_set, val_set, out);
      },
      err);
}

// ---------------------------------------------------------------------------
// predict / evaluate

struct NodePrediction {
  std::size_t tree_id = 0;
  int node_id = 0;
  double prob = 0.0;
  int label = 0;
};

inline std::string prediction_line(const NodePrediction& p) {
  nlohmann::ordered_json j;
  j["tree_id"] = p.tree_id;
  j["node_id"] = p.node_id;
  j["prob"] = p.prob;
  j["label"] = p.label;
  return j.dump();
}

inline std::vector<NodePrediction> read_predictions(const fs::path& path) {
  std::istringstream is(read_file(path));
  std::vector<NodePrediction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (collapse_whitespace(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back(NodePrediction{j.at("tree_id").get<std::size_t>(), j.at("node_id").get<int>(),
                                   j.at("prob").get<double>(), j.at("label").get<int>()});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

struct PredictArgs {
  fs::path data;
  fs::path splits;
  std::vector<int> replicates = {1};
  std::string ckpt_dir;  // "{n}" is replaced by the replicate number
  std::string embeddings = "hash";
  bool lenient = false;
  std::optional<fs::path> config;  // embedding settings; similarity/rules baselines
  std::string baseline;            // "", "rules", "similarity", "mlp"
  std::optional<fs::path> scores;  // score an existing prediction file instead
  fs::path out;
};

inline std::string replicate_dir(const std::string& pattern, int n) {
  std::string s = pattern;
  const auto pos = s.find("{n}");
  if (pos != std::string::npos) s.replace(pos, 3, std::to_string(n));
  return s;
}

/// Per-node predictions for the test partition of one replicate.
inline std::vector<NodePrediction> predict_replicate(const PredictArgs& a, const RunConfig& rc,
                                                     const ReplicateData& d, int replicate) {
  std::vector<NodePrediction> preds;
  auto emit = [&](std::size_t tree_id, const Vector& prob, const std::vector<int>& labels) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      preds.push_back(NodePrediction{tree_id, static_cast<int>(i), prob(static_cast<Eigen::Index>(i)), labels[i]});
    }
  };
  const auto& test = d.partition.test;

  if (a.baseline == "rules") {
    for (auto t : test) {
      const auto labels = heuristic_classify(d.trees[t]);
      Vector prob(static_cast<Eigen::Index>(labels.size()));
      for (std::size_t i = 0; i < labels.size(); ++i) prob(static_cast<Eigen::Index>(i)) = labels[i];
      emit(t, prob, labels);
    }
    return preds;
  }
  if (a.baseline == "similarity") {
    const auto provider = make_provider(a.embeddings, rc.model.d_embed, rc.embedding, a.lenient);
    const SimilarityResult fit = similarity_classify(select(d.trees, d.partition.val), *provider);
    for (auto t : test) {
      const auto sims = similarity_scores(d.trees[t], *provider);
      Vector prob = Eigen::Map<const Vector>(sims.data(), static_cast<Eigen::Index>(sims.size()));
      emit(t, prob, threshold_labels(sims, fit.threshold));
    }
    return preds;
  }

  if (a.ckpt_dir.empty()) throw ConfigError("--ckpt-dir is required for model predictions");
  const auto snaps = load_snapshots(replicate_dir(a.ckpt_dir, replicate));
  const std::string expected = a.baseline == "mlp" ? MlpModel::kKind : TrencModel::kKind;
  if (snaps.front().kind != expected) {
    throw ConfigError("snapshots hold a " + snaps.front().kind + " model, expected " + expected);
  }
  const ModelConfig& mcfg = snaps.front().config;
  const auto provider = make_provider(a.embeddings, mcfg.d_embed, rc.embedding, a.lenient);
  auto run = [&](auto tag) {
    using Model = decltype(tag);
    std::vector<Model> members;
    for (const auto& s : snaps) members.emplace_back(mcfg, s.params);
    for (auto t : test) {
      const auto r = predict_ensemble(members, prepare_tree(d.trees[t], *provider));
      emit(t, r.mean_probability, r.labels);
    }
  };
  if (expected == MlpModel::kKind) run(MlpModel(mcfg, snaps.front().params));
  else run(TrencModel(mcfg, snaps.front().params));
  return preds;
}

inline void write_predictions(const fs::path& path, const std::vector<NodePrediction>& preds) {
  std::ostringstream os;
  for (const auto& p : preds) os << prediction_line(p) << '\n';
  write_file(path, os.str());
}

inline void check_baseline(const std::string& b) {
  if (!b.empty() && b != "rules" && b != "similarity" && b != "mlp") throw ConfigError("unknown baseline " + b);
}

inline int cmd_predict(const PredictArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        check_baseline(a.baseline);
        if (a.replicates.size() != 1) throw ConfigError("predict takes exactly one --replicate");
        const RunConfig rc = load_run_config(a.config);
        const ReplicateData d = load_replicate(a.data, a.splits, a.replicates.front());
        const auto preds = predict_replicate(a, rc, d, a.replicates.front());
        write_predictions(a.out, preds);
        RunManifest m;
        m.command = "predict";
        m.config = {{"replicate", a.replicates.front()}, {"baseline", a.baseline}, {"ckpt_dir", a.ckpt_dir}};
        m.inputs = {a.data, a.splits};
        m.outputs = {a.out};
        write_manifest(m, manifest_path_for(a.out));
        out << "wrote " << preds.size() << " node predictions to " << a.out.string() << '\n';
        return kExitOk;
      },
      err);
}

inline std::string model_label(const PredictArgs& a) {
  if (a.scores) return "Predictions";
  if (a.baseline == "rules") return "Rules";
  if (a.baseline == "similarity") return "Similarity";
  if (a.baseline == "mlp") return "MLP";
  return "TrENC";
}

inline int cmd_evaluate(const PredictArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        check_baseline(a.baseline);
        if (a.replicates.empty()) throw ConfigError("at least one --replicate is needed");
        if (a.replicates.size() > 1 && !a.scores && (a.baseline.empty() || a.baseline == "mlp") &&
            a.ckpt_dir.find("{n}") == std::string::npos) {
          throw ConfigError("--ckpt-dir must contain {n} when several replicates are evaluated");
        }
        const RunConfig rc = load_run_config(a.config);
        std::optional<std::vector<NodePrediction>> given;
        if (a.scores) given = read_predictions(*a.scores);

        EvalReport report;
        report.model = model_label(a);
        std::vector<NodePrediction> all_preds;
        for (int rep : a.replicates) {
          const ReplicateData d = load_replicate(a.data, a.splits, rep);
          std::vector<NodePrediction> preds;
          if (given) {
            const std::set<std::size_t> test(d.partition.test.begin(), d.partition.test.end());
            for (const auto& p : *given) {
              if (test.count(p.tree_id)) preds.push_back(p);
            }
          } else {
            preds = predict_replicate(a, rc, d, rep);
          }
          std::map<std::size_t, std::vector<int>> labels;
          for (auto t : d.partition.test) labels[t].assign(d.trees[t].size(), 0);
          for (const auto& p : preds) {
            auto it = labels.find(p.tree_id);
            if (it == labels.end() || p.node_id < 0 || p.node_id >= static_cast<int>(it->second.size())) {
              throw FormatError("prediction for unknown node " + std::to_string(p.tree_id) + "/" +
                                std::to_string(p.node_id));
            }
            it->second[static_cast<std::size_t>(p.node_id)] = p.label;
          }
          SplitMetrics sm;
          sm.replicate = rep;
          for (const auto& [t, lab] : labels) {
            const auto gold = gold_labels(d.trees[t]);
            sm.counts.add(lab, gold);
            report.per_tree.push_back(TreeScore{t, average_depth(d.trees[t]), prf1(lab, gold).f1});
          }
          if (labels.empty()) throw EmptySplit("test partition of replicate " + std::to_string(rep) + " is empty");
          sm.scores = prf1(sm.counts);
          report.splits.push_back(sm);
          if (!given) all_preds.insert(all_preds.end(), preds.begin(), preds.end());
        }
        report.macro = macro_average(report.splits);
        report.depth = depth_report(report.per_tree);

        write_file(a.out, to_json(report).dump(2) + "\n");
        const std::string table = format_report_table({report});
        write_file(fs::path(a.out.string() + ".txt"), table);
        std::vector<fs::path> outputs = {a.out, fs::path(a.out.string() + ".txt")};
        if (!given) {
          const fs::path pred_path = fs::path(a.out.string() + ".predictions.jsonl");
          write_predictions(pred_path, all_preds);
          outputs.push_back(pred_path);
        }
        RunManifest m;
        m.command = "evaluate";
        m.config = {{"replicates", a.replicates}, {"baseline", a.baseline}, {"ckpt_dir", a.ckpt_dir}};
        m.inputs = {a.data, a.splits};
        if (a.scores) m.inputs.push_back(*a.scores);
        m.outputs = outputs;
        write_manifest(m, manifest_path_for(a.out));
        out << table;
        return kExitOk;
      },
      err);
}

}  // namespace trenc::cli
