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

// 5G QoS mapping, CAN to Ethernet gatewaying and data-layer QoS profiles.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "detsdv/descriptors.h"
#include "detsdv/tsn_config.h"
#include "json.hpp"

namespace detsdv {

struct FlowConstraintVector {
  bool deadline = false;
  bool jitter = false;
  bool bandwidth = false;

  bool operator==(const FlowConstraintVector &) const = default;
};

/// deadline = MaxLatency present, jitter = Jitter present,
/// bandwidth = STREAM class or Guarantee 1.
FlowConstraintVector ConstraintsOf(const FlowSpec &flow, TrafficClass cls);

enum class ResourceType { kGbr, kDcGbr, kNonGbr };

std::string_view ResourceTypeName(ResourceType type);

struct FiveQiProfile {
  ResourceType resource_type = ResourceType::kNonGbr;
  int priority_level = 10;
  /// Absent means no budget.
  std::optional<double> delay_budget_ms;
  double per_target = 1e-2;

  bool operator==(const FiveQiProfile &) const = default;
  nlohmann::ordered_json ToJson() const;
};

/// Resource type from the deadline / jitter / bandwidth truth table; the
/// other fields from the time and traffic specs.
FiveQiProfile MapTo5qi(const FlowConstraintVector &v, const TrafficTimeSpec &time,
                       const TrafficSpec &traffic);

constexpr std::uint32_t kMaxCanId = 0x1FFFFFFF;
/// can_id + dlc + capture_time
constexpr std::size_t kRecordHeaderBytes = 13;

struct GatewayFrame {
  std::uint32_t can_id = 0;
  std::uint8_t dlc = 0;
  std::vector<std::uint8_t> payload;
  std::uint64_t capture_time_us = 0;

  bool operator==(const GatewayFrame &) const = default;
};

constexpr std::size_t RecordBytes(int dlc) { return kRecordHeaderBytes + static_cast<std::size_t>(dlc); }

/// Appends one record: can_id (4, BE), dlc (1), payload, capture_time_us (8, BE).
/// Raises CONTRACT for frames that violate the CAN limits.
void AppendRecord(const GatewayFrame &frame, std::vector<std::uint8_t> &out);

/// Raises MALFORMED_RECORD with the byte offset of the bad record.
std::vector<GatewayFrame> Unpack(const std::vector<std::uint8_t> &payload);

enum class GatewayStrategy { kPeriodicSnapshot, kOneToOne, kAllPacking };

std::string_view GatewayStrategyName(GatewayStrategy strategy);
GatewayStrategy ParseGatewayStrategy(std::string_view name);

struct GatewayOptions {
  GatewayStrategy strategy = GatewayStrategy::kAllPacking;
  std::size_t max_payload = kMtuBytes;
  /// Snapshot window.
  std::uint64_t period_us = 10'000;
  /// All-packing flush triggers; 0 disables.
  std::size_t flush_count = 0;
  std::uint64_t flush_timeout_us = 0;
};

struct GatewayPayload {
  std::uint64_t emit_time_us = 0;
  std::vector<std::uint8_t> bytes;
  std::size_t records = 0;
};

/// Streaming encoder for one CAN bus. Frames must be pushed in capture order.
class Gateway {
 public:
  explicit Gateway(GatewayOptions options);

  /// Payloads completed by this frame.
  std::vector<GatewayPayload> Push(const GatewayFrame &frame);
  /// Payloads due by `now_us` (closed snapshot windows, expired all-packing timeouts).
  std::vector<GatewayPayload> Poll(std::uint64_t now_us);
  /// Everything still buffered.
  std::vector<GatewayPayload> Flush();

  const GatewayOptions &options() const { return options_; }
  std::size_t pending_records() const { return pending_records_; }

 private:
  void Emit(std::uint64_t at, std::vector<GatewayPayload> &out);

  GatewayOptions options_;
  std::vector<std::uint8_t> pending_;
  std::size_t pending_records_ = 0;
  std::uint64_t first_capture_us_ = 0;
  std::uint64_t window_ = 0;
};

std::vector<GatewayPayload> PackPeriodicSnapshot(const std::vector<GatewayFrame> &frames,
                                                 std::uint64_t period_us,
                                                 std::size_t max_payload = kMtuBytes);
std::vector<std::uint8_t> PackOneToOne(const GatewayFrame &frame);
std::vector<GatewayPayload> PackAll(const std::vector<GatewayFrame> &frames,
                                    std::size_t max_payload = kMtuBytes,
                                    std::size_t flush_count = 0,
                                    std::uint64_t flush_timeout_us = 0);

enum class QosReliability { kReliable, kBestEffort };

struct DataLayerQosProfile {
  std::string flow_id;
  QosReliability reliability = QosReliability::kBestEffort;
  std::optional<double> deadline_ms;
  std::optional<double> latency_budget_ms;
  int history_depth = 1;

  bool operator==(const DataLayerQosProfile &) const = default;
  nlohmann::ordered_json ToJson() const;
};

/// RELIABLE iff Delivery; deadline = Periodicity; latency budget = MaxLatency;
/// history 1 for periodic flows, 16 for aperiodic ones.
DataLayerQosProfile DeriveDataLayerQos(const std::string &flow_id, const FlowSpec &flow);

}  // namespace detsdv
