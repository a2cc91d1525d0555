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

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "trenc/config.hpp"
#include "trenc/dom.hpp"

namespace trenc::testing {

/// Random pre-ordered tree: node k attaches to a random node on the current
/// rightmost path, which is exactly the set of parents that keeps DFS order.
inline DomTree random_tree(std::mt19937_64& rng, int n, const std::string& interest = "camping",
                           bool empty_texts = false) {
  static const std::vector<std::string> kTags = {"div", "ul", "li", "p", "span", "h2", "h3", "a", "td", "section"};
  static const std::vector<std::string> kWords = {"tent", "stove", "lantern", "camping", "chair", "boots",
                                                  "map",  "rope",  "knife",   "42",      "cooler"};
  std::uniform_int_distribution<int> tag(0, static_cast<int>(kTags.size()) - 1);
  std::uniform_int_distribution<int> word(0, static_cast<int>(kWords.size()) - 1);
  std::uniform_int_distribution<int> label(-1, 1);
  std::uniform_int_distribution<int> len(empty_texts ? 0 : 1, 4);
  std::vector<NodeSpec> specs;
  std::vector<int> path;
  for (int k = 0; k < n; ++k) {
    int parent = kNoParent;
    if (k > 0) {
      const auto keep = std::uniform_int_distribution<std::size_t>(1, path.size())(rng);
      path.resize(keep);
      parent = path.back();
    }
    std::string text;
    for (int w = len(rng); w > 0; --w) text += (text.empty() ? "" : " ") + kWords[static_cast<std::size_t>(word(rng))];
    specs.push_back(NodeSpec{parent, kTags[static_cast<std::size_t>(tag(rng))], text, static_cast<Label>(label(rng))});
    path.push_back(k);
  }
  return make_tree(interest, specs);
}

/// Small encoder used across the suites.
inline ModelConfig toy_model_config() {
  ModelConfig c;
  c.d_model = 16;
  c.n_layers = 2;
  c.n_heads = 2;
  c.d_k = 8;
  c.ffn_dim = 32;
  c.cls_hidden = 8;
  c.d_embed = 32;
  c.dropout = 0.1;
  c.mlp_layers = 2;
  return c;
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("trenc-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace trenc::testing
