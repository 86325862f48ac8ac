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

// Discrete-event simulation of a planned network: frame release, TAS gates,
// CBS credits, strict priority, FRER elimination, link failures and
// per-node clock offsets. Single-threaded and deterministic per seed.

#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "detsdv/descriptors.h"
#include "detsdv/interop.h"
#include "detsdv/tsn_config.h"
#include "json.hpp"

namespace detsdv {

struct LinkFailure {
  std::string link;
  Nanos fail_at = 0;
  std::optional<Nanos> restore_at;
};

/// Expected constraints of one flow in a scenario.
struct FlowExpectation {
  std::optional<double> max_latency_ms;
  std::optional<double> reliability;
  std::optional<std::int64_t> message_size;
  std::optional<double> rate_hz;
};

/// CAN traffic bridged onto Ethernet: frames generated on `bus` reach the
/// `bridge` ECU, are packed per `options` and forwarded as an unscheduled
/// pseudo-flow "gw:<id>" to `destination`.
struct GatewaySpec {
  std::string id;
  std::string bus;
  std::string bridge;
  std::string destination;
  GatewayOptions options;
  /// Mean CAN frame inter-arrival.
  Nanos frame_interval = kNanosPerMilli;
  int priority = 0;
};

struct SimConfig {
  std::string name = "scenario";
  Nanos duration = kNanosPerSecond;
  std::uint64_t seed = 1;
  Nanos clock_sync_error = kNanosPerMicro;
  Nanos aperiodic_mean_interval = 10 * kNanosPerMilli;
  std::size_t queue_cap = 1024;
  std::vector<LinkFailure> failures;
  std::vector<GatewaySpec> gateways;
  /// Keyed by qualified flow id.
  std::map<std::string, FlowExpectation> expect;
};

/// TOML keys: name, duration_ms, seed, clock_sync_error_us,
/// aperiodic_mean_interval_ms, queue_cap, [[failures]] {link, fail_at_ms,
/// restore_at_ms}, [[gateways]] {id, bus, bridge, destination, strategy,
/// period_ms, flush_count, flush_timeout_ms, frame_interval_ms, priority},
/// [expect."<flow>"] {max_latency_ms, reliability, message_size, rate_hz}.
SimConfig ParseSimConfig(std::string_view text);

enum class FrameFate { kDelivered, kDuplicate, kStale, kDroppedLink, kDroppedOverflow, kInFlight };

std::string_view FrameFateName(FrameFate fate);
FrameFate ParseFrameFate(std::string_view name);
bool IsDropped(FrameFate fate);

/// One hop of one frame copy. Unset times mean the frame never got there.
struct TraceRecord {
  std::uint64_t frame_id = 0;
  std::string flow_id;
  std::uint64_t seq = 0;
  /// FRER path index; 0 for single-path flows.
  int member = 0;
  Nanos created_at = 0;
  int hop = 0;
  std::string node;
  std::string link;
  Nanos arrival = 0;
  std::optional<Nanos> queue_enter;
  std::optional<Nanos> tx_start;
  std::optional<Nanos> tx_end;
  std::optional<Nanos> departure;
  std::int64_t wire_bits = 0;
  FrameFate fate = FrameFate::kInFlight;

  bool operator==(const TraceRecord &) const = default;
};

/// 802.1CB vector recovery over a 16-bit sequence space.
class SequenceRecovery {
 public:
  enum class Outcome { kAccept, kDuplicate, kRogue };

  explicit SequenceRecovery(int window);
  Outcome Accept(std::uint16_t seq);

 private:
  int window_;
  bool take_any_ = true;
  std::uint16_t recov_seq_ = 0;
  /// history_[i] = recov_seq_ - i was seen.
  std::deque<bool> history_;
};

struct LatencyStats {
  Nanos min = 0;
  Nanos max = 0;
  double mean = 0;
  Nanos jitter = 0;
};

struct FlowMetrics {
  std::string flow_id;
  std::int64_t sent = 0;
  std::int64_t delivered = 0;
  std::int64_t dropped = 0;
  std::int64_t duplicates_discarded = 0;
  std::int64_t pending = 0;
  std::int64_t deadline_misses = 0;
  std::optional<double> miss_rate;
  std::optional<double> delivery_ratio;
  std::optional<LatencyStats> latency;
  std::optional<double> inter_frame_mean;
  std::optional<Nanos> inter_frame_max;
  /// max |message inter-arrival - period|, periodic flows only.
  std::optional<Nanos> period_offset;
  /// Delivered messages per second.
  double rate_hz = 0;
  /// Delivered payload bits per second.
  double throughput_bps = 0;
  /// Per-hop decomposition of the slowest delivered frame.
  std::vector<HopBound> worst_frame;
};

struct PortMetrics {
  PortRef port;
  std::int64_t max_queue_len = 0;
  double mean_queue_len = 0;
  double throughput_bps = 0;
};

struct MetricsReport {
  std::string scenario;
  Nanos duration = 0;
  std::vector<FlowMetrics> flows;
  std::vector<PortMetrics> ports;
  std::int64_t frames_created = 0;
  std::int64_t delivered = 0;
  std::int64_t dropped = 0;
  std::int64_t in_flight_at_end = 0;

  const FlowMetrics *Find(std::string_view flow_id) const;
  nlohmann::ordered_json ToJson() const;
  static MetricsReport FromJson(const nlohmann::ordered_json &j);
};

/// The single metrics implementation; works on any complete trace.
MetricsReport ComputeMetrics(const std::string &scenario, const std::vector<TraceRecord> &trace,
                             const std::vector<PlannedFlow> &flows, Nanos duration);

struct SimResult {
  std::vector<TraceRecord> trace;
  MetricsReport metrics;
};

class Simulator {
 public:
  /// Raises CONFIG_MISMATCH when the configuration names unknown nodes,
  /// links or ports, UNKNOWN_LINK for failures on missing links.
  Simulator(const TopologyDescriptor &topology, const TsnConfig &config, const SimConfig &sim);

  /// Frames entering `link` at or after `at` are lost until `restore_at`.
  void InjectFailure(const std::string &link, Nanos at);
  void Restore(const std::string &link, Nanos at);

  SimResult Run();

 private:
  const TopologyDescriptor &topology_;
  const TsnConfig &config_;
  SimConfig sim_;
};

/// Newline-delimited JSON, one object per record, schema "v1".
void WriteTrace(std::ostream &out, const std::string &scenario,
                const std::vector<TraceRecord> &trace);
std::vector<TraceRecord> ReadTrace(std::istream &in);

}  // namespace detsdv
