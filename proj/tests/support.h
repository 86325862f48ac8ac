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

// Builders shared by the test binaries.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "detsdv/descriptors.h"
#include "detsdv/netsim.h"
#include "detsdv/tsn_config.h"

namespace detsdv::testing {

std::string FixturePath(const std::string &name);
TopologyDescriptor LoadTopology(const std::string &name);
ServiceDescriptor LoadService(const std::string &name);

/// ecu_talker - sw1 - ... - swN - ecu_listener, every link alike.
TopologyDescriptor LineTopology(int switches, std::int64_t rate_bps, double processing_us,
                                double propagation_us, double clock_sync_error_us = 0.0);

/// Single path from `source` to `destination` by hop count.
FlowRoute RouteOf(const TopologyDescriptor &topology, const std::string &id,
                  const std::string &source, const std::string &destination,
                  bool reliability = false);

PlannedFlow MakeFlow(const std::string &id, TrafficClass cls, std::int64_t bytes, Nanos interval,
                     bool periodic, FlowRoute route, Nanos offset = 0);

/// Synthesis, shaping, bounds and FRER for a fixed flow set.
TsnConfig Configure(std::vector<PlannedFlow> flows, const TopologyDescriptor &topology,
                    const ScheduleOptions &options);

/// Worst observed latency per flow over delivered frames.
Nanos MaxLatency(const std::vector<TraceRecord> &trace, const std::string &flow_id);

/// Scratch directory unique to this process, removed and recreated.
std::string ScratchDir(const std::string &name);

}  // namespace detsdv::testing
