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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace detsdv {

enum class ErrorCode {
  kSyntax,
  kSchema,
  kInvariant,
  kDisconnected,
  kNoFeasibleNode,
  kCapacityExhausted,
  kNoPath,
  kNoDisjointPath,
  kInfeasibleSchedule,
  kOversubscribed,
  kUnscheduledFlow,
  kContract,
  kMalformedRecord,
  kConfigMismatch,
  kUnknownLink,
  kUnsupportedFormat,
  kIo,
};

/// Stable upper-case name used in JSON error records, e.g. "NO_FEASIBLE_NODE".
std::string_view ErrorCodeName(ErrorCode code);

/// Every failure raised by the library. `key_path` locates the offending
/// input (a dotted descriptor key, a port, a flow id or a byte offset).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string key_path, const std::string &message)
      : std::runtime_error(message), code_(code), key_path_(std::move(key_path)) {}

  ErrorCode code() const { return code_; }
  const std::string &key_path() const { return key_path_; }

  /// {code, key_path, message}
  nlohmann::ordered_json ToJson() const;

 private:
  ErrorCode code_;
  std::string key_path_;
};

}  // namespace detsdv
