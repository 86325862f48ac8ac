// Copyright 2026 The detsdv Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// TOML reading helpers shared by the descriptor and scenario parsers.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "detsdv/error.h"
#include "toml.hpp"

namespace detsdv::internal {

inline std::string JoinPath(const std::string &base, std::string_view key) {
  if (base.empty()) {
    return std::string(key);
  }
  return base + "." + std::string(key);
}

inline std::string IndexPath(const std::string &base, size_t index) {
  return base + "[" + std::to_string(index) + "]";
}

[[noreturn]] inline void Throw(ErrorCode code, const std::string &path, const std::string &message) {
  throw Error(code, path, message);
}

/// Table entries in declaration order (toml++ stores tables sorted by key).
inline std::vector<std::pair<std::string, const toml::node *>> OrderedEntries(const toml::table &table) {
  std::vector<std::tuple<toml::source_position, std::string, const toml::node *>> keyed;
  for (auto &&[key, node] : table) {
    keyed.emplace_back(key.source().begin, std::string(key.str()), &node);
  }
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto &a, const auto &b) {
    const auto &pa = std::get<0>(a);
    const auto &pb = std::get<0>(b);
    if (pa.line != pb.line) {
      return pa.line < pb.line;
    }
    return pa.column < pb.column;
  });
  std::vector<std::pair<std::string, const toml::node *>> out;
  out.reserve(keyed.size());
  for (auto &[pos, key, node] : keyed) {
    out.emplace_back(std::move(key), node);
  }
  return out;
}

/// Typed accessors over one TOML table that remember which keys were read,
/// so leftovers can be rejected as unknown.
class TableReader {
 public:
  TableReader(const toml::table &table, std::string path)
      : table_(table), path_(std::move(path)) {}

  const std::string &path() const { return path_; }
  std::string PathOf(std::string_view key) const { return JoinPath(path_, key); }

  const toml::node *Find(std::string_view key) {
    const toml::node *node = table_.get(key);
    if (node != nullptr) {
      consumed_.insert(std::string(key));
    }
    return node;
  }

  const toml::node &Require(std::string_view key) {
    const toml::node *node = Find(key);
    if (node == nullptr) {
      Throw(ErrorCode::kSchema, PathOf(key), "missing required key");
    }
    return *node;
  }

  std::string RequiredString(std::string_view key) { return AsString(Require(key), key); }

  std::optional<std::string> OptionalString(std::string_view key) {
    const toml::node *node = Find(key);
    if (node == nullptr) {
      return std::nullopt;
    }
    return AsString(*node, key);
  }

  std::int64_t RequiredInt(std::string_view key) { return AsInt(Require(key), key); }

  std::optional<std::int64_t> OptionalInt(std::string_view key) {
    const toml::node *node = Find(key);
    if (node == nullptr) {
      return std::nullopt;
    }
    return AsInt(*node, key);
  }

  bool RequiredBool(std::string_view key) { return AsBool(Require(key), key); }

  std::optional<bool> OptionalBool(std::string_view key) {
    const toml::node *node = Find(key);
    if (node == nullptr) {
      return std::nullopt;
    }
    return AsBool(*node, key);
  }

  double RequiredNumber(std::string_view key) { return AsNumber(Require(key), key); }

  std::optional<double> OptionalNumber(std::string_view key) {
    const toml::node *node = Find(key);
    if (node == nullptr) {
      return std::nullopt;
    }
    return AsNumber(*node, key);
  }

  const toml::table &RequiredTable(std::string_view key) { return AsTable(Require(key), key); }

  const toml::table *OptionalTable(std::string_view key) {
    const toml::node *node = Find(key);
    if (node == nullptr) {
      return nullptr;
    }
    return &AsTable(*node, key);
  }

  const toml::array *OptionalArray(std::string_view key) {
    const toml::node *node = Find(key);
    if (node == nullptr) {
      return nullptr;
    }
    if (!node->is_array()) {
      Throw(ErrorCode::kSchema, PathOf(key), "expected array");
    }
    return node->as_array();
  }

  void Finish() const {
    for (auto &&[key, node] : table_) {
      if (consumed_.count(std::string(key.str())) == 0) {
        Throw(ErrorCode::kSchema, PathOf(key.str()), "unknown key");
      }
    }
  }

 private:
  std::string AsString(const toml::node &node, std::string_view key) const {
    if (!node.is_string()) {
      Throw(ErrorCode::kSchema, PathOf(key), "expected string");
    }
    return node.as_string()->get();
  }

  std::int64_t AsInt(const toml::node &node, std::string_view key) const {
    if (!node.is_integer()) {
      Throw(ErrorCode::kSchema, PathOf(key), "expected integer");
    }
    return node.as_integer()->get();
  }

  bool AsBool(const toml::node &node, std::string_view key) const {
    if (!node.is_boolean()) {
      Throw(ErrorCode::kSchema, PathOf(key), "expected boolean");
    }
    return node.as_boolean()->get();
  }

  double AsNumber(const toml::node &node, std::string_view key) const {
    double value = 0.0;
    if (node.is_integer()) {
      value = static_cast<double>(node.as_integer()->get());
    } else if (node.is_floating_point()) {
      value = node.as_floating_point()->get();
    } else {
      Throw(ErrorCode::kSchema, PathOf(key), "expected number");
    }
    if (!std::isfinite(value)) {
      Throw(ErrorCode::kInvariant, PathOf(key), "value must be finite");
    }
    return value;
  }

  const toml::table &AsTable(const toml::node &node, std::string_view key) const {
    if (!node.is_table()) {
      Throw(ErrorCode::kSchema, PathOf(key), "expected table");
    }
    return *node.as_table();
  }

  const toml::table &table_;
  std::string path_;
  std::set<std::string> consumed_;
};

inline toml::table ParseToml(std::string_view text) {
  try {
    return toml::parse(text);
  } catch (const toml::parse_error &e) {
    const auto &begin = e.source().begin;
    std::ostringstream msg;
    msg << e.description() << " (line " << begin.line << ", column " << begin.column << ")";
    Throw(ErrorCode::kSyntax, "", msg.str());
  }
}

}  // namespace detsdv::internal
