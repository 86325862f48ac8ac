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

// Service and topology descriptors: the declarative inputs of the planner.
//
// Both are TOML documents. Service descriptors use the key names
//
//   title
//   [ServiceMetadata] Author, Version, Domain
//   [Flows.<id>.NodeSpecs.<role>] Image, ImageType, Replicas, CPU, Memory,
//                                 Storage, GPU, Energy, Offloading, Criticality
//   [Flows.<id>.DataSpecs] DataFormat, DataSize
//   [Flows.<id>.TrafficSpecs] Guarantee, Reliability, Delivery, Wired,
//                             Source, Destination, Criticality
//   [Flows.<id>.TrafficSpecs.TrafficTimeSpecs] MaxLatency, Periodicity,
//                                              TransmitOffset, Jitter
//
// Units: milliseconds for the time specs, MiB for Memory, bytes for Storage
// and DataSize. Unknown keys are rejected.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "detsdv/units.h"

namespace detsdv {

enum class CriticalityLevel { kMust, kShould, kMay };

std::string_view CriticalityName(CriticalityLevel level);

struct Criticality {
  CriticalityLevel level = CriticalityLevel::kMust;
  /// Allowed relative shortfall; always 0 for MUST.
  double slack = 0.0;

  bool operator==(const Criticality &) const = default;
};

/// Per-field criticality; fields not listed are MUST.
using CriticalityMap = std::map<std::string, Criticality>;

Criticality CriticalityOf(const CriticalityMap &map, std::string_view field);

struct NodeSpec {
  std::string image;
  std::string image_type;
  std::int64_t replicas = 1;
  std::int64_t cpu = 1;
  std::int64_t memory_mib = 0;
  std::int64_t storage_bytes = 0;
  bool gpu = false;
  std::int64_t energy = 0;
  // Recorded and exported, never consulted by placement.
  bool offloading = false;
  CriticalityMap criticality;

  bool operator==(const NodeSpec &) const = default;
};

struct NodeRole {
  std::string name;
  NodeSpec spec;

  bool operator==(const NodeRole &) const = default;
};

struct DataSpec {
  std::string data_format;
  std::int64_t data_size = 1;

  bool operator==(const DataSpec &) const = default;
};

struct TrafficTimeSpec {
  std::optional<double> max_latency_ms;
  /// Absent means aperiodic (event triggered).
  std::optional<double> periodicity_ms;
  double transmit_offset_ms = 0.0;
  std::optional<double> jitter_ms;

  bool operator==(const TrafficTimeSpec &) const = default;
};

/// Guarantee ladder: 0 best effort, 1 bounded bandwidth, 2 bounded latency,
/// 3 bounded latency and jitter, 4 bounded latency, jitter and zero loss.
struct TrafficSpec {
  int guarantee = 0;
  bool reliability = false;
  bool delivery = false;
  bool wired = true;
  TrafficTimeSpec time;
  /// Talker / listener: a node role of the flow or a topology device id.
  /// Defaults are resolved by the planner.
  std::optional<std::string> source;
  std::optional<std::string> destination;
  /// Keys: Reliability, MaxLatency, Jitter.
  CriticalityMap criticality;

  bool operator==(const TrafficSpec &) const = default;
};

struct FlowSpec {
  std::string id;
  /// Declaration order is preserved.
  std::vector<NodeRole> node_specs;
  DataSpec data_spec;
  TrafficSpec traffic_spec;

  const NodeSpec *FindRole(std::string_view role) const;
  bool operator==(const FlowSpec &) const = default;
};

struct ServiceMetadata {
  std::string author;
  std::string version;
  std::string domain;

  bool operator==(const ServiceMetadata &) const = default;
};

struct ServiceDescriptor {
  std::string title;
  ServiceMetadata metadata;
  std::vector<FlowSpec> flows;

  bool operator==(const ServiceDescriptor &) const = default;
};

struct EcuNode {
  std::string id;
  std::int64_t cpu_cores = 1;
  std::int64_t memory_mib = 1;
  std::int64_t storage_bytes = 1;
  bool gpu = false;
  std::int64_t energy_class = 0;
  std::vector<std::string> attached_devices;

  bool operator==(const EcuNode &) const = default;
};

constexpr int kQueuesPerPort = 8;

struct SwitchPort {
  std::string id;
  /// The link this port terminates.
  std::string link;
  bool tsn_capable = true;
  int queues = kQueuesPerPort;

  bool operator==(const SwitchPort &) const = default;
};

struct SwitchNode {
  std::string id;
  std::vector<SwitchPort> ports;
  double processing_delay_us = 0.0;

  const SwitchPort *PortForLink(std::string_view link) const;
  bool operator==(const SwitchNode &) const = default;
};

enum class LinkMedium { kEthernet, kCan };

struct Link {
  std::string id;
  std::string endpoint_a;
  std::string endpoint_b;
  std::int64_t rate_bps = 1;
  double propagation_delay_us = 0.0;
  LinkMedium medium = LinkMedium::kEthernet;

  /// The endpoint that is not `node`.
  const std::string &Peer(std::string_view node) const;
  bool operator==(const Link &) const = default;
};

enum class DeviceKind { kSensor, kActuator };

struct Device {
  std::string id;
  DeviceKind kind = DeviceKind::kSensor;
  std::string bus;

  bool operator==(const Device &) const = default;
};

/// Network-wide timing assumptions used by the planner.
struct TimingSpec {
  /// Worst per-node clock offset the schedule must tolerate.
  double clock_sync_error_us = 1.0;
  /// Standing-window interval and minimum inter-arrival time of aperiodic flows.
  double sporadic_interval_ms = 1.0;

  bool operator==(const TimingSpec &) const = default;
};

struct TopologyDescriptor {
  std::vector<EcuNode> ecus;
  std::vector<SwitchNode> switches;
  std::vector<Link> links;
  std::vector<Device> devices;
  TimingSpec timing;

  const EcuNode *FindEcu(std::string_view id) const;
  const SwitchNode *FindSwitch(std::string_view id) const;
  const Link *FindLink(std::string_view id) const;
  const Device *FindDevice(std::string_view id) const;
  /// ECU listing `device_id` in its attached_devices, if any.
  const EcuNode *AttachingEcu(std::string_view device_id) const;
  /// Processing delay of a node; ECUs have none.
  Nanos ProcessingNanos(std::string_view node_id) const;

  bool operator==(const TopologyDescriptor &) const = default;
};

/// Errors are detsdv::Error with code SYNTAX, SCHEMA or INVARIANT and the
/// dotted key path of the offending value.
ServiceDescriptor ParseServiceDescriptor(std::string_view text);

/// Additionally raises DISCONNECTED listing unreachable node ids.
TopologyDescriptor ParseTopologyDescriptor(std::string_view text);

std::string Serialize(const ServiceDescriptor &descriptor);
std::string Serialize(const TopologyDescriptor &descriptor);

/// Re-checks every type invariant of an in-memory descriptor.
void Validate(const ServiceDescriptor &descriptor);
void Validate(const TopologyDescriptor &descriptor);

/// Reads a whole file; raises IO on failure.
std::string ReadFile(const std::string &path);

}  // namespace detsdv
