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

#include "support.h"

#include <filesystem>
#include <map>
#include <sstream>

#include <unistd.h>

namespace detsdv::testing {

std::string FixturePath(const std::string &name) {
  return std::string(DETSDV_FIXTURE_DIR) + "/" + name;
}

TopologyDescriptor LoadTopology(const std::string &name) {
  return ParseTopologyDescriptor(ReadFile(FixturePath(name)));
}

ServiceDescriptor LoadService(const std::string &name) {
  return ParseServiceDescriptor(ReadFile(FixturePath(name)));
}

TopologyDescriptor LineTopology(int switches, std::int64_t rate_bps, double processing_us,
                                double propagation_us, double clock_sync_error_us) {
  std::ostringstream t;
  t << "[timing]\nclock_sync_error_us = " << clock_sync_error_us
    << "\nsporadic_interval_ms = 1.0\n";
  for (const char *id : {"ecu_talker", "ecu_listener"}) {
    t << "[[ecus]]\nid = \"" << id
      << "\"\ncpu_cores = 4\nmemory = 4096\nstorage = 1000000000\n";
  }
  std::vector<std::string> nodes{"ecu_talker"};
  for (int i = 1; i <= switches; ++i) {
    const std::string id = "sw" + std::to_string(i);
    t << "[[switches]]\nid = \"" << id << "\"\nprocessing_delay_us = " << processing_us << "\n";
    nodes.push_back(id);
  }
  nodes.push_back("ecu_listener");
  for (size_t i = 0; i + 1 < nodes.size(); ++i) {
    t << "[[links]]\nid = \"l" << i + 1 << "\"\na = \"" << nodes[i] << "\"\nb = \""
      << nodes[i + 1] << "\"\nrate_bps = " << rate_bps
      << "\npropagation_delay_us = " << propagation_us << "\n";
  }
  return ParseTopologyDescriptor(t.str());
}

FlowRoute RouteOf(const TopologyDescriptor &topology, const std::string &id,
                  const std::string &source, const std::string &destination, bool reliability) {
  return Route(RouteRequest{id, source, destination, reliability, true, false}, topology);
}

PlannedFlow MakeFlow(const std::string &id, TrafficClass cls, std::int64_t bytes, Nanos interval,
                     bool periodic, FlowRoute route, Nanos offset) {
  PlannedFlow f;
  f.id = id;
  f.cls = cls;
  f.priority = AssignPriority(cls);
  f.message_bytes = bytes;
  f.fragments = FragmentPayloads(bytes);
  f.periodic = periodic;
  f.interval = interval;
  f.offset = offset;
  route.flow_id = id;
  f.route = std::move(route);
  return f;
}

TsnConfig Configure(std::vector<PlannedFlow> flows, const TopologyDescriptor &topology,
                    const ScheduleOptions &options) {
  TsnConfig c;
  c.options = options;
  c.synthesis = SynthesizeGcl(flows, topology, options);
  c.cbs = ComputeCbs(StreamLoads(flows, topology));
  BoundAnalysis bounds(flows, c.synthesis, c.cbs, topology, options);
  c.bounds = bounds.all();
  for (const auto &f : flows) {
    if (f.route.paths.size() == 2) {
      c.frer.push_back(DeriveFrer(f, c.bounds.at(f.id)));
    }
  }
  c.flows = std::move(flows);
  return c;
}

Nanos MaxLatency(const std::vector<TraceRecord> &trace, const std::string &flow_id) {
  std::map<std::uint64_t, Nanos> created;
  Nanos worst = -1;
  for (const auto &r : trace) {
    if (r.flow_id == flow_id && r.fate == FrameFate::kDelivered && r.departure) {
      created[r.frame_id] = r.created_at;
    }
  }
  for (const auto &r : trace) {
    auto it = created.find(r.frame_id);
    if (it != created.end() && r.departure) {
      worst = std::max(worst, *r.departure - it->second);
    }
  }
  return worst;
}

std::string ScratchDir(const std::string &name) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() /
                       ("detsdv_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

}  // namespace detsdv::testing
