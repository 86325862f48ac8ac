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

// End-to-end planning: placement, routing, gate scheduling, shaping, bounds,
// admission, redundancy and interoperability profiles.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "detsdv/descriptors.h"
#include "detsdv/interop.h"
#include "detsdv/orchestrator.h"
#include "detsdv/tsn_config.h"
#include "json.hpp"

namespace detsdv {

struct InteropRecord {
  std::string flow_id;
  TrafficClass cls = TrafficClass::kBestEffort;
  FlowConstraintVector constraints;
  FiveQiProfile fiveqi;
  DataLayerQosProfile data_layer;
};

struct DeploymentPlan {
  PlacementPlan placement;
  TsnConfig tsn;
  /// One per declared flow, in declaration order.
  std::vector<AdmissionVerdict> admission;
  std::vector<InteropRecord> interop;

  bool AllAdmitted() const;
};

/// Talker and listener ECUs of a placed flow. A Source/Destination naming a
/// role resolves to replica 0 of that role, a device to its attaching ECU.
/// Defaults: the first role talks; the last role listens when there are at
/// least two, else the ECU of the first actuator, else the talker itself.
/// Raises SCHEMA for names that are neither.
std::pair<std::string, std::string> ResolveEndpoints(const std::string &flow_key,
                                                     const FlowSpec &flow,
                                                     const PlacementPlan &placement,
                                                     const TopologyDescriptor &topology);

/// A flow ready for routing; the route is left empty.
PlannedFlow PlanFlow(const std::string &flow_key, const FlowSpec &flow, std::string_view domain,
                     const ScheduleOptions &options);

/// Flows that cannot be placed, routed, scheduled, shaped or bounded within
/// their requirements are rejected and removed; planning continues with the
/// rest until the admitted set is stable.
DeploymentPlan BuildPlan(const std::vector<ServiceDescriptor> &services,
                         const TopologyDescriptor &topology);

nlohmann::ordered_json TsnConfigToJson(const TsnConfig &config,
                                       const std::vector<AdmissionVerdict> &admission);
/// Inverse of TsnConfigToJson for everything the simulator consumes.
TsnConfig TsnConfigFromJson(const nlohmann::ordered_json &j);

nlohmann::ordered_json InteropToJson(const std::vector<InteropRecord> &records);

}  // namespace detsdv
