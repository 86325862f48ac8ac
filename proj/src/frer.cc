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

#include <algorithm>

#include "detsdv/error.h"
#include "detsdv/tsn_config.h"

namespace detsdv {

namespace {
// Largest window the signed 16-bit sequence delta can express.
constexpr std::int64_t kMaxRecoveryWindow = 32767;
constexpr std::int64_t kMinRecoveryWindow = 8;
}  // namespace

FrerConfig DeriveFrer(const PlannedFlow &flow, const WorstCaseBound &bound) {
  if (flow.route.paths.size() != 2) {
    throw Error(ErrorCode::kContract, flow.id, "FRER needs exactly two disjoint paths");
  }
  if (flow.interval <= 0) {
    throw Error(ErrorCode::kContract, flow.id, "FRER needs a flow interval");
  }
  Nanos longest = bound.total;
  for (const Nanos t : bound.path_totals) {
    longest = std::max(longest, t);
  }
  std::int64_t window = kMaxRecoveryWindow;
  if (bound.bounded) {
    const std::int64_t in_flight = (longest + flow.interval - 1) / flow.interval;
    window = 2 * static_cast<std::int64_t>(flow.frames_per_message()) * std::max<std::int64_t>(in_flight, 1);
  }
  window = std::clamp(window, kMinRecoveryWindow, kMaxRecoveryWindow);
  return FrerConfig{flow.id, flow.route.source, flow.route.destination, 65536,
                    static_cast<int>(window)};
}

const PlannedFlow *TsnConfig::FindFlow(std::string_view id) const {
  for (const auto &f : flows) {
    if (f.id == id) {
      return &f;
    }
  }
  return nullptr;
}

const FrerConfig *TsnConfig::FindFrer(std::string_view flow_id) const {
  for (const auto &f : frer) {
    if (f.flow_id == flow_id) {
      return &f;
    }
  }
  return nullptr;
}

}  // namespace detsdv
