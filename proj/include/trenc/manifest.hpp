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
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trenc/errors.hpp"
#include "trenc/text.hpp"

#ifndef TRENC_VERSION
#define TRENC_VERSION "0.1.0"
#endif

namespace trenc {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << content;
  if (!os) throw Error("failed writing " + path.string());
}

/// FNV-1a digest of a file, or of every regular file below a directory in
/// path order.
inline std::string content_hash(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(path)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::uint64_t h = fnv1a64("");
    for (const auto& f : files) {
      h = fnv1a64(fs::relative(f, path).generic_string(), h);
      h = fnv1a64(read_file(f), h);
    }
    return hex64(h);
  }
  return hex64(fnv1a64(read_file(path)));
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Record of one command run. Only `timestamp` varies between identical runs.
struct RunManifest {
  std::string command;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
  std::uint64_t seed = 0;
};

inline nlohmann::ordered_json to_json(const RunManifest& m, bool with_timestamp = true) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["version"] = TRENC_VERSION;
  j["seed"] = m.seed;
  j["config"] = m.config;
  auto inputs = nlohmann::ordered_json::array();
  for (const auto& p : m.inputs) inputs.push_back({{"path", p.generic_string()}, {"fnv1a64", content_hash(p)}});
  j["inputs"] = std::move(inputs);
  auto outputs = nlohmann::ordered_json::array();
  for (const auto& p : m.outputs) outputs.push_back(p.generic_string());
  j["outputs"] = std::move(outputs);
  if (with_timestamp) j["timestamp"] = utc_timestamp();
  return j;
}

inline void write_manifest(const RunManifest& m, const std::filesystem::path& path) {
  write_file(path, to_json(m).dump(2) + "\n");
}

}  // namespace trenc
