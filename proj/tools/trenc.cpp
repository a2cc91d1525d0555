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

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trenc/commands.hpp"

namespace {

using namespace trenc::cli;

template <class T>
void optional_option(CLI::App* app, const std::string& name, std::optional<T>& target, const std::string& help) {
  app->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree-encoder node classifier for hub-page DOM trees"};
  app.set_version_flag("--version", TRENC_VERSION);
  app.require_subcommand(1);

  PreprocessArgs pre;
  auto* p = app.add_subcommand("preprocess", "Parse, simplify and split HTML pages into a dataset");
  p->add_option("--in", pre.in_dir, "Directory of .html files")->required();
  p->add_option("--interest-map", pre.interest_map, "JSON object {filename: interest}")->required();
  p->add_option("--out", pre.out, "Output dataset (JSONL)")->required();
  p->add_option("--max-nodes", pre.max_nodes, "Maximum nodes per tree")->capture_default_str();
  p->add_option("--min-nodes", pre.min_nodes, "Minimum nodes per tree")->capture_default_str();

  SplitArgs split;
  auto* s = app.add_subcommand("split", "Interest-stratified train/val/test splits");
  s->add_option("--in", split.in, "Dataset (JSONL)")->required();
  s->add_option("--out", split.out, "Output splits file")->required();
  optional_option(s, "--seed", split.seed, "Shuffle seed (default 42)");
  s->add_option("--replicates", split.replicates, "Number of random splits")->capture_default_str();

  TrainArgs tr;
  std::optional<std::string> config;
  auto* t = app.add_subcommand("train", "Train a model on one replicate");
  t->add_option("--data", tr.data, "Dataset (JSONL)")->required();
  t->add_option("--splits", tr.splits, "Splits file")->required();
  t->add_option("--replicate", tr.replicate, "1-based replicate")->capture_default_str();
  t->add_option("--embeddings", tr.embeddings, "'hash' or an embedding file")->capture_default_str();
  t->add_flag("--lenient", tr.lenient, "Fall back to hash vectors for missing embedding keys");
  optional_option(t, "--config", config, "Run config (JSON)");
  t->add_option("--out", tr.out, "Checkpoint directory")->required();
  t->add_option("--model", tr.model, "trenc or mlp")->check(CLI::IsMember({"trenc", "mlp"}))->capture_default_str();
  optional_option(t, "--seed", tr.seed, "Seed (overrides the config)");
  t->add_flag("--resume", tr.resume, "Continue from the state file in --out");
  t->add_option("--stop-after", tr.stop_after, "Stop after this many epochs in this invocation");
  t->add_option("--threads", tr.threads, "Worker threads per batch")->capture_default_str();

  PredictArgs pr;
  std::optional<std::string> pr_config, pr_scores;
  auto add_predict_options = [&](CLI::App* c, bool many) {
    c->add_option("--data", pr.data, "Dataset (JSONL)")->required();
    c->add_option("--splits", pr.splits, "Splits file")->required();
    auto* rep = c->add_option("--replicate", pr.replicates, "1-based replicate");
    if (many) rep->description("1-based replicate (repeatable)");
    else rep->expected(1);
    c->add_option("--ckpt-dir", pr.ckpt_dir, "Snapshot directory; {n} expands to the replicate");
    c->add_option("--embeddings", pr.embeddings, "'hash' or an embedding file")->capture_default_str();
    c->add_flag("--lenient", pr.lenient, "Fall back to hash vectors for missing embedding keys");
    optional_option(c, "--config", pr_config, "Run config (JSON) for embedding settings");
    c->add_option("--baseline", pr.baseline, "rules, similarity or mlp")
        ->check(CLI::IsMember({"rules", "similarity", "mlp"}));
    c->add_option("--out", pr.out, "Output file")->required();
  };
  auto* pd = app.add_subcommand("predict", "Ensemble predictions on a test partition");
  add_predict_options(pd, false);
  auto* ev = app.add_subcommand("evaluate", "Score test partitions and write a report");
  add_predict_options(ev, true);
  optional_option(ev, "--scores", pr_scores, "Score an existing prediction file");

  SynthArgs syn;
  auto* sy = app.add_subcommand("synth", "Generate a labeled synthetic dataset");
  sy->add_option("--trees", syn.trees, "Number of trees")->capture_default_str();
  optional_option(sy, "--seed", syn.seed, "Generator seed (default 42)");
  sy->add_option("--task", syn.task, "text or structure")->check(CLI::IsMember({"text", "structure"}))
      ->capture_default_str();
  sy->add_option("--out", syn.out, "Output dataset (JSONL)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (sy->parsed()) return cmd_synth(syn, std::cout, std::cerr);
  if (p->parsed()) return cmd_preprocess(pre, std::cout, std::cerr);
  if (s->parsed()) return cmd_split(split, std::cout, std::cerr);
  if (t->parsed()) {
    if (config) tr.config = *config;
    return cmd_train(tr, std::cout, std::cerr);
  }
  if (pr_config) pr.config = *pr_config;
  if (pr_scores) pr.scores = *pr_scores;
  if (pr.replicates.empty()) pr.replicates = {1};
  if (pd->parsed()) return cmd_predict(pr, std::cout, std::cerr);
  return cmd_evaluate(pr, std::cout, std::cerr);
}
