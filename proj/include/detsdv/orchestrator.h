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

// Service placement: filter ECUs against node specs, score the feasible
// ones, assign replicas greedily, and admit flows against their bounds.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "detsdv/descriptors.h"
#include "detsdv/tsn_config.h"
#include "json.hpp"

namespace detsdv {

struct Capacity {
  std::int64_t cpu = 0;
  std::int64_t memory_mib = 0;
  std::int64_t storage_bytes = 0;

  bool operator==(const Capacity &) const = default;
};

/// Remaining capacity per ECU id.
using Residual = std::map<std::string, Capacity>;

Residual InitialResidual(const TopologyDescriptor &topology);

struct Violation {
  /// NodeSpec key: CPU, Memory, Storage or GPU.
  std::string field;
  double required = 0;
  double available = 0;
  /// MUST when the field is MUST or when a softer field misses beyond its slack.
  CriticalityLevel criticality = CriticalityLevel::kMust;
};

struct NodeScore {
  std::string ecu_id;
  bool feasible = false;
  double score = 0;
  std::vector<Violation> violated;
};

/// Per field f in {CPU, Memory, Storage}: s = residual / (residual + required),
/// skipped when nothing is required. GPU counts only when requested: 1 if the
/// ECU has one, 0 otherwise. Weights MUST 1, SHOULD 0.5, MAY 0.25.
NodeScore ScoreNode(const NodeSpec &spec, const EcuNode &ecu, const Residual &residual);

/// Feasible ECUs ordered by (score desc, energy_class asc, id asc).
/// Raises NO_FEASIBLE_NODE when none qualifies.
std::vector<NodeScore> FilterFeasible(const NodeSpec &spec, const TopologyDescriptor &topology,
                                      const Residual &residual);

struct Assignment {
  std::string flow_id;
  std::string role;
  int replica = 0;
  std::string ecu_id;

  bool operator==(const Assignment &) const = default;
};

struct PlacementPlan {
  std::vector<Assignment> assignments;
  Residual residual;
  std::vector<std::string> warnings;

  /// Assignments of one role, by replica index.
  std::vector<const Assignment *> Replicas(std::string_view flow_id, std::string_view role) const;
  nlohmann::ordered_json ToJson() const;
  static PlacementPlan FromJson(const nlohmann::ordered_json &j);
};

/// Greedy placement that commits one flow at a time. A flow that cannot be
/// placed leaves the plan untouched.
class Placer {
 public:
  explicit Placer(const TopologyDescriptor &topology);

  /// `flow_key` names the flow in the plan (qualified ids in multi-service runs).
  /// Raises NO_FEASIBLE_NODE or CAPACITY_EXHAUSTED (key_path = flow_key/role).
  void PlaceFlow(const std::string &flow_key, const FlowSpec &flow);
  /// Returns a flow's allocations to the pool.
  void Release(const std::string &flow_key);

  const PlacementPlan &plan() const { return plan_; }

 private:
  const TopologyDescriptor &topology_;
  PlacementPlan plan_;
  /// Allocated capacity per (flow key, ecu), for Release.
  std::map<std::string, std::vector<std::pair<std::string, Capacity>>> allocations_;
};

/// Places every flow of the service in descriptor order; raises on the first failure.
PlacementPlan Place(const ServiceDescriptor &service, const TopologyDescriptor &topology);

struct AdmissionVerdict {
  std::string flow_id;
  bool admitted = true;
  /// MaxLatency, Jitter, or the error code that stopped planning.
  std::string binding;
  std::string reason;
  std::optional<Nanos> bound;
  std::optional<Nanos> max_latency;

  nlohmann::ordered_json ToJson() const;
};

/// admitted iff no MaxLatency, or the bound is finite and within
/// max_latency * (1 + slack); Jitter is checked the same way against
/// total - best_case. `bound` is null for flows that never leave their ECU.
AdmissionVerdict AdmitFlow(const std::string &flow_id, const FlowSpec &flow,
                           const WorstCaseBound *bound);

/// Flow ids are qualified "title/flow". Flows missing from `bounds` are
/// admitted only when they carry no latency or jitter requirement.
std::vector<AdmissionVerdict> Admit(const ServiceDescriptor &service,
                                    const BoundAnalysis &bounds);

/// "title/flow"
std::string QualifiedFlowId(const ServiceDescriptor &service, const FlowSpec &flow);

}  // namespace detsdv
