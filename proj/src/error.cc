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

#include "detsdv/error.h"

namespace detsdv {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
  case ErrorCode::kSyntax:
    return "SYNTAX";
  case ErrorCode::kSchema:
    return "SCHEMA";
  case ErrorCode::kInvariant:
    return "INVARIANT";
  case ErrorCode::kDisconnected:
    return "DISCONNECTED";
  case ErrorCode::kNoFeasibleNode:
    return "NO_FEASIBLE_NODE";
  case ErrorCode::kCapacityExhausted:
    return "CAPACITY_EXHAUSTED";
  case ErrorCode::kNoPath:
    return "NO_PATH";
  case ErrorCode::kNoDisjointPath:
    return "NO_DISJOINT_PATH";
  case ErrorCode::kInfeasibleSchedule:
    return "INFEASIBLE_SCHEDULE";
  case ErrorCode::kOversubscribed:
    return "OVERSUBSCRIBED";
  case ErrorCode::kUnscheduledFlow:
    return "UNSCHEDULED_FLOW";
  case ErrorCode::kContract:
    return "CONTRACT";
  case ErrorCode::kMalformedRecord:
    return "MALFORMED_RECORD";
  case ErrorCode::kConfigMismatch:
    return "CONFIG_MISMATCH";
  case ErrorCode::kUnknownLink:
    return "UNKNOWN_LINK";
  case ErrorCode::kUnsupportedFormat:
    return "UNSUPPORTED_FORMAT";
  case ErrorCode::kIo:
    return "IO";
  }
  return "UNKNOWN";
}

nlohmann::ordered_json Error::ToJson() const {
  nlohmann::ordered_json j;
  j["code"] = std::string(ErrorCodeName(code_));
  j["key_path"] = key_path_;
  j["message"] = what();
  return j;
}

}  // namespace detsdv
