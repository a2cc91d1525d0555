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

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "trenc/config.hpp"
#include "trenc/errors.hpp"
#include "trenc/nn.hpp"

namespace trenc {

// Container layout: 8-byte magic, u32 version, u64 metadata length, UTF-8
// JSON metadata, then raw little-endian float64 tensor data in the order the
// metadata lists it.
inline constexpr char kContainerMagic[8] = {'T', 'R', 'E', 'N', 'C', 'C', 'K', 'P'};
inline constexpr std::uint32_t kContainerVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

struct TensorContainer {
  nlohmann::json meta;
  std::map<std::string, ParameterSet> sets;
};

inline void save_tensor_container(const std::filesystem::path& path, nlohmann::ordered_json meta,
                                  const std::vector<std::pair<std::string, const ParameterSet*>>& sets) {
  auto layout = nlohmann::ordered_json::array();
  for (const auto& [name, ps] : sets) {
    nlohmann::ordered_json s;
    s["name"] = name;
    auto tensors = nlohmann::ordered_json::array();
    for (const auto& t : ps->tensors()) {
      tensors.push_back({{"name", t.name}, {"rows", t.value.rows()}, {"cols", t.value.cols()}});
    }
    s["tensors"] = std::move(tensors);
    layout.push_back(std::move(s));
  }
  meta["sets"] = std::move(layout);
  const std::string text = meta.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os.write(kContainerMagic, sizeof kContainerMagic);
  const std::uint32_t version = kContainerVersion;
  const std::uint64_t len = text.size();
  os.write(reinterpret_cast<const char*>(&version), sizeof version);
  os.write(reinterpret_cast<const char*>(&len), sizeof len);
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, ps] : sets) {
    for (const auto& t : ps->tensors()) {
      os.write(reinterpret_cast<const char*>(t.value.data()),
               static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(t.value.size())));
    }
  }
  if (!os) throw Error("failed writing " + path.string());
}

inline TensorContainer load_tensor_container(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kContainerMagic, sizeof magic) != 0) {
    throw FormatError(path.string() + ": not a trenc checkpoint");
  }
  std::uint32_t version = 0;
  std::uint64_t len = 0;
  is.read(reinterpret_cast<char*>(&version), sizeof version);
  is.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!is) throw FormatError(path.string() + ": truncated header");
  if (version != kContainerVersion) {
    throw VersionError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  if (len > (std::uint64_t{1} << 32)) throw FormatError(path.string() + ": implausible metadata size");
  std::string text(static_cast<std::size_t>(len), '\0');
  is.read(text.data(), static_cast<std::streamsize>(len));
  if (!is) throw FormatError(path.string() + ": truncated metadata");

  TensorContainer out;
  try {
    out.meta = nlohmann::json::parse(text);
    for (const auto& s : out.meta.at("sets")) {
      ParameterSet ps;
      for (const auto& t : s.at("tensors")) {
        const auto rows = t.at("rows").get<Eigen::Index>();
        const auto cols = t.at("cols").get<Eigen::Index>();
        if (rows < 0 || cols < 0) throw FormatError(path.string() + ": negative tensor shape");
        const std::size_t id = ps.add(t.at("name").get<std::string>(), rows, cols);
        Matrix& m = ps[id];
        is.read(reinterpret_cast<char*>(m.data()),
                static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
        if (!is) throw FormatError(path.string() + ": truncated tensor data");
      }
      out.sets.emplace(s.at("name").get<std::string>(), std::move(ps));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": bad metadata: " + e.what());
  }
  return out;
}

struct Checkpoint {
  std::string kind;  // "trenc" or "mlp"
  ModelConfig config;
  ParameterSet params;
  nlohmann::json extra;
};

inline void save_checkpoint(const std::filesystem::path& path, const std::string& kind, const ModelConfig& cfg,
                            const ParameterSet& params, const nlohmann::ordered_json& extra = {}) {
  nlohmann::ordered_json meta;
  meta["kind"] = kind;
  meta["config"] = to_json(cfg);
  meta["extra"] = extra.is_null() ? nlohmann::ordered_json::object() : extra;
  save_tensor_container(path, std::move(meta), {{"params", &params}});
}

/// Loads a checkpoint. Shapes are validated when a model is built from it.
inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  TensorContainer c = load_tensor_container(path);
  Checkpoint ck;
  try {
    ck.kind = c.meta.at("kind").get<std::string>();
    ck.config = model_config_from_json(c.meta.at("config"));
    ck.extra = c.meta.value("extra", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": bad checkpoint metadata: " + e.what());
  }
  auto it = c.sets.find("params");
  if (it == c.sets.end()) throw FormatError(path.string() + ": no parameter tensors");
  ck.params = std::move(it->second);
  return ck;
}

}  // namespace trenc
