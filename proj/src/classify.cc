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

#include "detsdv/tsn_config.h"

namespace detsdv {

std::string_view TrafficClassName(TrafficClass cls) {
  switch (cls) {
  case TrafficClass::kControl:
    return "CONTROL";
  case TrafficClass::kStream:
    return "STREAM";
  case TrafficClass::kService:
    return "SERVICE";
  case TrafficClass::kBestEffort:
    return "BEST_EFFORT";
  }
  return "BEST_EFFORT";
}

TrafficClass Classify(const FlowSpec &flow, std::string_view domain) {
  const TrafficSpec &t = flow.traffic_spec;
  const bool periodic = t.time.periodicity_ms.has_value();
  if (t.guarantee == 4 || domain == "safety") {
    return TrafficClass::kControl;
  }
  // "Aperiodic high-rate" is read as an aperiodic flow asking for bounded bandwidth.
  if (flow.data_spec.data_size >= kMtuBytes || (!periodic && t.guarantee == 1)) {
    return TrafficClass::kStream;
  }
  if (periodic && t.time.max_latency_ms.has_value()) {
    return TrafficClass::kService;
  }
  return TrafficClass::kBestEffort;
}

int AssignPriority(TrafficClass cls) {
  switch (cls) {
  case TrafficClass::kControl:
    return 7;
  case TrafficClass::kStream:
    return 5;
  case TrafficClass::kService:
    return 3;
  case TrafficClass::kBestEffort:
    return 0;
  }
  return 0;
}

std::int64_t FragmentWireBits(const Link &link, std::int64_t payload, int priority) {
  if (link.medium == LinkMedium::kCan) {
    std::int64_t bits = 0;
    std::int64_t left = std::max<std::int64_t>(payload, 1);
    while (left > 0) {
      const int dlc = static_cast<int>(std::min<std::int64_t>(left, kCanMaxDlc));
      bits += CanWireBits(dlc);
      left -= dlc;
    }
    return bits;
  }
  return EthernetWireBytes(payload, IsTagged(priority)) * 8;
}

Nanos FragmentTxNanos(const Link &link, std::int64_t payload, int priority) {
  return TransmissionNanos(FragmentWireBits(link, payload, priority), link.rate_bps);
}

Nanos MessageTxNanos(const Link &link, const PlannedFlow &flow) {
  Nanos total = 0;
  for (const std::int64_t payload : flow.fragments) {
    total += FragmentTxNanos(link, payload, flow.priority);
  }
  return total;
}

ScheduleOptions ScheduleOptionsFrom(const TimingSpec &timing) {
  ScheduleOptions o;
  o.clock_sync_error = MicrosToNanos(timing.clock_sync_error_us);
  o.sporadic_interval = MillisToNanos(timing.sporadic_interval_ms);
  return o;
}

}  // namespace detsdv
