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
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trenc/dom.hpp"
#include "trenc/errors.hpp"

namespace trenc {

inline constexpr int kDatasetVersion = 1;

/// One tree as a single-line JSON document. Field order is fixed so output is
/// byte-stable.
inline std::string tree_to_json_line(const DomTree& tree) {
  nlohmann::ordered_json doc;
  doc["version"] = kDatasetVersion;
  doc["interest"] = tree.interest;
  doc["source_url"] = tree.source_url ? nlohmann::ordered_json(*tree.source_url) : nlohmann::ordered_json(nullptr);
  auto nodes = nlohmann::ordered_json::array();
  for (const auto& n : tree.nodes) {
    nlohmann::ordered_json node;
    node["id"] = n.id;
    node["parent"] = n.parent == kNoParent ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(n.parent);
    node["tag"] = n.tag;
    node["text"] = n.text;
    node["label"] = n.label == Label::kUnlabeled ? nlohmann::ordered_json(nullptr)
                                                 : nlohmann::ordered_json(static_cast<int>(n.label));
    nodes.push_back(std::move(node));
  }
  doc["nodes"] = std::move(nodes);
  return doc.dump();
}

inline DomTree tree_from_json_line(const std::string& line, std::size_t line_no = 0) {
  const std::string where = "line " + std::to_string(line_no);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(where + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) throw FormatError(where + ": expected a JSON object");
  if (!doc.contains("version") || !doc["version"].is_number_integer()) {
    throw FormatError(where + ": missing integer field 'version'");
  }
  if (doc["version"].get<int>() != kDatasetVersion) {
    throw VersionError(where + ": unsupported dataset version " + doc["version"].dump());
  }
  if (!doc.contains("interest") || !doc["interest"].is_string()) {
    throw FormatError(where + ": missing string field 'interest'");
  }
  if (!doc.contains("nodes") || !doc["nodes"].is_array()) {
    throw FormatError(where + ": missing array field 'nodes'");
  }
  DomTree tree;
  tree.interest = doc["interest"].get<std::string>();
  if (doc.contains("source_url") && !doc["source_url"].is_null()) {
    if (!doc["source_url"].is_string()) throw FormatError(where + ": 'source_url' must be string or null");
    tree.source_url = doc["source_url"].get<std::string>();
  }
  const auto& nodes = doc["nodes"];
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto& jn = nodes[k];
    const std::string at = where + ", nodes[" + std::to_string(k) + "]";
    if (!jn.is_object()) throw FormatError(at + ": expected an object");
    DomNode n;
    if (!jn.contains("id") || !jn["id"].is_number_integer()) throw FormatError(at + ": bad 'id'");
    n.id = jn["id"].get<int>();
    if (!jn.contains("parent")) throw FormatError(at + ": missing 'parent'");
    if (jn["parent"].is_null()) {
      n.parent = kNoParent;
    } else if (jn["parent"].is_number_integer()) {
      n.parent = jn["parent"].get<int>();
      if (n.parent < 0 || n.parent >= n.id) {
        throw FormatError(at + ": 'parent' " + std::to_string(n.parent) + " must precede id " +
                          std::to_string(n.id));
      }
    } else {
      throw FormatError(at + ": 'parent' must be integer or null");
    }
    if (!jn.contains("tag") || !jn["tag"].is_string()) throw FormatError(at + ": bad 'tag'");
    n.tag = jn["tag"].get<std::string>();
    if (!jn.contains("text") || !jn["text"].is_string()) throw FormatError(at + ": bad 'text'");
    n.text = jn["text"].get<std::string>();
    if (!jn.contains("label")) throw FormatError(at + ": missing 'label'");
    const auto& jl = jn["label"];
    if (jl.is_null()) {
      n.label = Label::kUnlabeled;
    } else if (jl.is_number_integer() && (jl.get<int>() == 0 || jl.get<int>() == 1)) {
      n.label = jl.get<int>() == 1 ? Label::kPositive : Label::kNegative;
    } else {
      throw FormatError(at + ": 'label' must be 0, 1 or null");
    }
    tree.nodes.push_back(std::move(n));
  }
  try {
    validate_tree(tree);
  } catch (const FormatError& e) {
    throw FormatError(where + ": " + e.what());
  }
  return tree;
}

inline void write_dataset(std::ostream& os, const std::vector<DomTree>& trees) {
  for (const auto& t : trees) os << tree_to_json_line(t) << '\n';
}

inline std::vector<DomTree> read_dataset(std::istream& is) {
  std::vector<DomTree> trees;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    trees.push_back(tree_from_json_line(line, line_no));
  }
  return trees;
}

inline void save_dataset(const std::vector<DomTree>& trees, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  write_dataset(os, trees);
  if (!os) throw Error("failed writing " + path.string());
}

inline std::vector<DomTree> load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  try {
    return read_dataset(is);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace trenc
