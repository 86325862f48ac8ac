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

// Centralized TSN configuration: traffic classes, explicit routes, gate
// control lists, credit-based shaper slopes, FRER configs and analytic
// worst-case latency bounds.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "detsdv/descriptors.h"
#include "detsdv/units.h"

namespace detsdv {

enum class TrafficClass { kControl, kStream, kService, kBestEffort };

std::string_view TrafficClassName(TrafficClass cls);

/// Total and deterministic. `domain` is the owning service's metadata domain.
TrafficClass Classify(const FlowSpec &flow, std::string_view domain);

/// PCP / queue index: CONTROL 7, STREAM 5, SERVICE 3, BEST_EFFORT 0.
int AssignPriority(TrafficClass cls);

/// Classes that receive exclusive TAS windows.
inline bool IsScheduledClass(TrafficClass cls) {
  return cls == TrafficClass::kControl || cls == TrafficClass::kService;
}

/// An egress port: the transmitting node and the link it drives.
struct PortRef {
  std::string node;
  std::string link;

  auto operator<=>(const PortRef &) const = default;
  std::string ToString() const { return node + "/" + link; }
};

struct Path {
  /// nodes.size() == links.size() + 1
  std::vector<std::string> nodes;
  std::vector<std::string> links;

  size_t hops() const { return links.size(); }
  PortRef Egress(size_t hop) const { return PortRef{nodes[hop], links[hop]}; }
  bool operator==(const Path &) const = default;
};

struct FlowRoute {
  std::string flow_id;
  std::string source;
  std::string destination;
  /// One path, or two fully disjoint paths for replicated flows.
  std::vector<Path> paths;
};

struct RouteRequest {
  std::string flow_id;
  std::string source;
  std::string destination;
  bool reliability = false;
  /// NO_DISJOINT_PATH when no disjoint pair exists; otherwise fall back to one path.
  bool reliability_must = true;
  /// CAN links are usable only by small, unscheduled flows.
  bool allow_can = false;
};

/// Shortest path by hop count, ties broken by the lexicographically smallest
/// link-id sequence. With reliability, the minimum-total-hop pair of link- and
/// node-disjoint paths. Raises NO_PATH / NO_DISJOINT_PATH.
FlowRoute Route(const RouteRequest &request, const TopologyDescriptor &topology);

/// True iff the two paths share no link and no intermediate node.
bool PathsDisjoint(const Path &a, const Path &b);

/// A flow as seen by the configurator: everything needed to schedule,
/// bound and simulate it.
struct PlannedFlow {
  std::string id;
  TrafficClass cls = TrafficClass::kBestEffort;
  int priority = 0;
  std::int64_t message_bytes = 0;
  /// MTU-sized payloads of one message.
  std::vector<std::int64_t> fragments;
  bool periodic = false;
  /// Period for periodic flows, minimum inter-arrival for aperiodic ones.
  Nanos interval = 0;
  /// Release phase of periodic flows.
  Nanos offset = 0;
  std::optional<Nanos> max_latency;
  FlowRoute route;

  size_t frames_per_message() const { return fragments.size(); }
};

/// Bits on the wire for one fragment on a link of the given medium.
std::int64_t FragmentWireBits(const Link &link, std::int64_t payload, int priority);
/// Serialization time of one fragment on `link`.
Nanos FragmentTxNanos(const Link &link, std::int64_t payload, int priority);
/// Serialization time of the whole message on `link`.
Nanos MessageTxNanos(const Link &link, const PlannedFlow &flow);

/// Ethernet egress whose transmitting node supports gate control. ECU ports
/// always do; switch ports per their descriptor.
bool IsTsnEgress(const TopologyDescriptor &topology, const PortRef &port);

struct ScheduleOptions {
  Nanos clock_sync_error = kNanosPerMicro;
  Nanos sporadic_interval = kNanosPerMilli;
  Nanos hyperperiod_cap = 10 * kNanosPerSecond;
};

ScheduleOptions ScheduleOptionsFrom(const TimingSpec &timing);

struct GclEntry {
  Nanos offset = 0;
  Nanos duration = 0;
  /// Bit i set = queue i open.
  std::uint8_t open_queues = 0;

  bool operator==(const GclEntry &) const = default;
};

struct GateControlList {
  PortRef port;
  Nanos cycle_time = 0;
  std::vector<GclEntry> entries;

  /// Sum of entries that close every unscheduled queue.
  Nanos ExclusiveTimePerCycle() const;
  bool operator==(const GateControlList &) const = default;
};

/// Mask opened outside exclusive windows on ports that carry scheduled
/// flows: every queue except the CONTROL and SERVICE queues.
constexpr std::uint8_t kResidualMask = 0x77;
constexpr std::uint8_t kAllQueuesMask = 0xFF;

/// One flow's exclusive window at one hop. `phase` is the absolute nominal
/// start time of instance 0; instance k starts at phase + k * interval.
struct HopWindow {
  PortRef port;
  Nanos phase = 0;
  /// Message serialization plus the sync margin.
  Nanos duration = 0;
  /// Closed interval preceding the window.
  Nanos guard = 0;
};

struct FlowSchedule {
  std::string flow_id;
  size_t path_index = 0;
  std::vector<HopWindow> hops;
};

struct GclSynthesis {
  std::vector<GateControlList> gcls;
  std::vector<FlowSchedule> schedules;

  const FlowSchedule *Find(std::string_view flow_id, size_t path_index) const;
  const GateControlList *FindGcl(const PortRef &port) const;
};

/// First-fit no-wait window placement for CONTROL and SERVICE flows; every
/// other flow is ignored except for port enumeration. Emits a GCL for every
/// TSN-capable Ethernet egress port, ordered by port.
/// Raises INFEASIBLE_SCHEDULE (key_path = flow id) naming the port.
GclSynthesis SynthesizeGcl(const std::vector<PlannedFlow> &flows,
                           const TopologyDescriptor &topology, const ScheduleOptions &options);

struct CbsParams {
  PortRef port;
  int queue = 5;
  std::int64_t idle_slope_bps = 0;
  std::int64_t send_slope_bps = 0;
};

struct PortStreamLoad {
  PortRef port;
  std::int64_t link_rate_bps = 0;
  std::int64_t demand_bps = 0;
};

/// Aggregate STREAM demand per egress port (wire bits per interval).
std::vector<PortStreamLoad> StreamLoads(const std::vector<PlannedFlow> &flows,
                                        const TopologyDescriptor &topology);

/// idle = 1.10 x demand (rounded up), capped at 75% of the link rate.
/// Ports without demand get nothing. Raises OVERSUBSCRIBED (key_path = port).
std::vector<CbsParams> ComputeCbs(const std::vector<PortStreamLoad> &loads);

struct HopBound {
  std::string node;
  std::string link;
  Nanos processing = 0;
  Nanos queuing = 0;
  Nanos transmission = 0;
  Nanos propagation = 0;

  Nanos Sum() const { return processing + queuing + transmission + propagation; }
};

struct WorstCaseBound {
  std::string flow_id;
  /// Worst path of the flow.
  std::vector<HopBound> per_hop;
  Nanos total = 0;
  /// Lower bound on latency, for jitter checks.
  Nanos best_case = 0;
  /// False when the analysis diverged (overloaded port); total is meaningless.
  bool bounded = true;
  /// Bound per path, in path order.
  std::vector<Nanos> path_totals;
};

/// Bounds for every flow with a route. Scheduled flows are read off their
/// windows; the others get a holistic fixed-priority response-time analysis
/// that accounts for blocking, gate closures and credit recovery.
class BoundAnalysis {
 public:
  BoundAnalysis(const std::vector<PlannedFlow> &flows, const GclSynthesis &synthesis,
                const std::vector<CbsParams> &cbs, const TopologyDescriptor &topology,
                const ScheduleOptions &options);

  /// Raises UNSCHEDULED_FLOW for unknown flows or scheduled flows without windows.
  const WorstCaseBound &For(std::string_view flow_id) const;
  const std::map<std::string, WorstCaseBound> &all() const { return bounds_; }

 private:
  std::map<std::string, WorstCaseBound> bounds_;
};

struct FrerConfig {
  std::string flow_id;
  std::string replication_node;
  std::string elimination_node;
  std::uint32_t sequence_space = 65536;
  int recovery_window = 8;
};

/// recovery_window = 2 x frames-per-message x ceil(longer path bound / interval),
/// at least 8. Raises CONTRACT unless the route has two paths.
FrerConfig DeriveFrer(const PlannedFlow &flow, const WorstCaseBound &bound);

/// Everything the network needs to carry the admitted flows.
struct TsnConfig {
  ScheduleOptions options;
  std::vector<PlannedFlow> flows;
  GclSynthesis synthesis;
  std::vector<CbsParams> cbs;
  std::vector<FrerConfig> frer;
  std::map<std::string, WorstCaseBound> bounds;

  const PlannedFlow *FindFlow(std::string_view id) const;
  const FrerConfig *FindFrer(std::string_view flow_id) const;
};

}  // namespace detsdv
