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

#include "detsdv/orchestrator.h"

#include <algorithm>
#include <set>

#include "detsdv/error.h"

namespace detsdv {

namespace {

double Weight(CriticalityLevel level) {
  switch (level) {
  case CriticalityLevel::kMust:
    return 1.0;
  case CriticalityLevel::kShould:
    return 0.5;
  case CriticalityLevel::kMay:
    return 0.25;
  }
  return 1.0;
}

bool Ranks(const NodeScore &a, const EcuNode &ea, const NodeScore &b, const EcuNode &eb) {
  if (a.score != b.score) {
    return a.score > b.score;
  }
  if (ea.energy_class != eb.energy_class) {
    return ea.energy_class < eb.energy_class;
  }
  return a.ecu_id < b.ecu_id;
}

/// Allocation on a feasible ECU: softer fields may take less than asked.
Capacity Allocation(const NodeSpec &spec, const Capacity &residual) {
  return Capacity{std::min(spec.cpu, residual.cpu), std::min(spec.memory_mib, residual.memory_mib),
                  std::min(spec.storage_bytes, residual.storage_bytes)};
}

}  // namespace

Residual InitialResidual(const TopologyDescriptor &topology) {
  Residual r;
  for (const auto &e : topology.ecus) {
    r[e.id] = Capacity{e.cpu_cores, e.memory_mib, e.storage_bytes};
  }
  return r;
}

NodeScore ScoreNode(const NodeSpec &spec, const EcuNode &ecu, const Residual &residual) {
  const Capacity have = residual.count(ecu.id) != 0 ? residual.at(ecu.id) : Capacity{};
  NodeScore out{ecu.id, true, 0.0, {}};
  double weighted = 0;
  double weights = 0;
  auto field = [&](const char *name, double required, double available) {
    if (required <= 0) {
      return;
    }
    const Criticality crit = CriticalityOf(spec.criticality, name);
    const double w = Weight(crit.level);
    weighted += w * std::max(available, 0.0) / (std::max(available, 0.0) + required);
    weights += w;
    if (available >= required) {
      return;
    }
    const double shortfall = 1.0 - std::max(available, 0.0) / required;
    const CriticalityLevel level =
        crit.level != CriticalityLevel::kMust && shortfall <= crit.slack ? crit.level
                                                                          : CriticalityLevel::kMust;
    out.violated.push_back(Violation{name, required, available, level});
  };
  field("CPU", static_cast<double>(spec.cpu), static_cast<double>(have.cpu));
  field("Memory", static_cast<double>(spec.memory_mib), static_cast<double>(have.memory_mib));
  field("Storage", static_cast<double>(spec.storage_bytes),
        static_cast<double>(have.storage_bytes));
  if (spec.gpu) {
    const Criticality crit = CriticalityOf(spec.criticality, "GPU");
    weighted += Weight(crit.level) * (ecu.gpu ? 1.0 : 0.0);
    weights += Weight(crit.level);
    if (!ecu.gpu) {
      const CriticalityLevel level =
          crit.level != CriticalityLevel::kMust && crit.slack >= 1.0 ? crit.level
                                                                      : CriticalityLevel::kMust;
      out.violated.push_back(Violation{"GPU", 1, 0, level});
    }
  }
  out.score = weights > 0 ? weighted / weights : 1.0;
  out.feasible = std::none_of(out.violated.begin(), out.violated.end(), [](const Violation &v) {
    return v.criticality == CriticalityLevel::kMust;
  });
  return out;
}

std::vector<NodeScore> FilterFeasible(const NodeSpec &spec, const TopologyDescriptor &topology,
                                      const Residual &residual) {
  std::vector<std::pair<NodeScore, const EcuNode *>> ranked;
  for (const auto &e : topology.ecus) {
    NodeScore s = ScoreNode(spec, e, residual);
    if (s.feasible) {
      ranked.emplace_back(std::move(s), &e);
    }
  }
  if (ranked.empty()) {
    throw Error(ErrorCode::kNoFeasibleNode, spec.image, "no ECU satisfies " + spec.image);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto &a, const auto &b) {
    return Ranks(a.first, *a.second, b.first, *b.second);
  });
  std::vector<NodeScore> out;
  for (auto &[s, _] : ranked) {
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<const Assignment *> PlacementPlan::Replicas(std::string_view flow_id,
                                                        std::string_view role) const {
  std::vector<const Assignment *> out;
  for (const auto &a : assignments) {
    if (a.flow_id == flow_id && a.role == role) {
      out.push_back(&a);
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Assignment *a, const Assignment *b) { return a->replica < b->replica; });
  return out;
}

nlohmann::ordered_json PlacementPlan::ToJson() const {
  nlohmann::ordered_json j;
  j["assignments"] = nlohmann::ordered_json::array();
  for (const auto &a : assignments) {
    j["assignments"].push_back(
        {{"flow", a.flow_id}, {"role", a.role}, {"replica", a.replica}, {"ecu", a.ecu_id}});
  }
  j["residual"] = nlohmann::ordered_json::object();
  for (const auto &[id, c] : residual) {
    j["residual"][id] = {{"cpu", c.cpu}, {"memory", c.memory_mib}, {"storage", c.storage_bytes}};
  }
  j["warnings"] = warnings;
  return j;
}

PlacementPlan PlacementPlan::FromJson(const nlohmann::ordered_json &j) {
  PlacementPlan p;
  for (const auto &a : j.at("assignments")) {
    p.assignments.push_back(Assignment{a.at("flow").get<std::string>(),
                                       a.at("role").get<std::string>(), a.at("replica").get<int>(),
                                       a.at("ecu").get<std::string>()});
  }
  for (const auto &[id, c] : j.at("residual").items()) {
    p.residual[id] = Capacity{c.at("cpu").get<std::int64_t>(), c.at("memory").get<std::int64_t>(),
                              c.at("storage").get<std::int64_t>()};
  }
  p.warnings = j.at("warnings").get<std::vector<std::string>>();
  return p;
}

Placer::Placer(const TopologyDescriptor &topology) : topology_(topology) {
  plan_.residual = InitialResidual(topology);
}

void Placer::PlaceFlow(const std::string &flow_key, const FlowSpec &flow) {
  Residual residual = plan_.residual;
  std::vector<Assignment> added;
  std::vector<std::string> warnings;
  std::vector<std::pair<std::string, Capacity>> taken;
  for (const auto &role : flow.node_specs) {
    const std::string key = flow_key + "/" + role.name;
    std::vector<NodeScore> feasible;
    try {
      feasible = FilterFeasible(role.spec, topology_, residual);
    } catch (const Error &e) {
      throw Error(ErrorCode::kNoFeasibleNode, key,
                  "no ECU satisfies the MUST constraints of " + key);
    }
    const int wanted = static_cast<int>(role.spec.replicas);
    int replica = 0;
    auto take = [&](const std::string &ecu) {
      const Capacity got = Allocation(role.spec, residual.at(ecu));
      Capacity &r = residual.at(ecu);
      r.cpu -= got.cpu;
      r.memory_mib -= got.memory_mib;
      r.storage_bytes -= got.storage_bytes;
      taken.emplace_back(ecu, got);
      added.push_back(Assignment{flow_key, role.name, replica++, ecu});
    };
    // Scores are independent across distinct ECUs, so the top of the ranking
    // maximizes the summed score.
    for (const auto &s : feasible) {
      if (replica == wanted) {
        break;
      }
      take(s.ecu_id);
    }
    if (replica < wanted && flow.traffic_spec.reliability) {
      throw Error(ErrorCode::kCapacityExhausted, key,
                  key + " needs " + std::to_string(wanted) + " distinct ECUs for replication, " +
                      std::to_string(feasible.size()) + " feasible");
    }
    while (replica < wanted) {
      std::vector<NodeScore> again;
      try {
        again = FilterFeasible(role.spec, topology_, residual);
      } catch (const Error &) {
        throw Error(ErrorCode::kCapacityExhausted, key,
                    key + ": capacity exhausted after " + std::to_string(replica) + " of " +
                        std::to_string(wanted) + " replicas");
      }
      warnings.push_back(key + ": replica " + std::to_string(replica) + " co-located on " +
                         again.front().ecu_id);
      take(again.front().ecu_id);
    }
  }
  plan_.residual = std::move(residual);
  plan_.assignments.insert(plan_.assignments.end(), added.begin(), added.end());
  plan_.warnings.insert(plan_.warnings.end(), warnings.begin(), warnings.end());
  auto &mine = allocations_[flow_key];
  mine.insert(mine.end(), taken.begin(), taken.end());
}

void Placer::Release(const std::string &flow_key) {
  auto it = allocations_.find(flow_key);
  if (it == allocations_.end()) {
    return;
  }
  for (const auto &[ecu, c] : it->second) {
    Capacity &r = plan_.residual.at(ecu);
    r.cpu += c.cpu;
    r.memory_mib += c.memory_mib;
    r.storage_bytes += c.storage_bytes;
  }
  allocations_.erase(it);
  std::erase_if(plan_.assignments, [&](const Assignment &a) { return a.flow_id == flow_key; });
}

PlacementPlan Place(const ServiceDescriptor &service, const TopologyDescriptor &topology) {
  Placer placer(topology);
  for (const auto &flow : service.flows) {
    placer.PlaceFlow(flow.id, flow);
  }
  return placer.plan();
}

std::string QualifiedFlowId(const ServiceDescriptor &service, const FlowSpec &flow) {
  return service.title + "/" + flow.id;
}

nlohmann::ordered_json AdmissionVerdict::ToJson() const {
  nlohmann::ordered_json j;
  j["flow"] = flow_id;
  j["admitted"] = admitted;
  j["binding"] = binding.empty() ? nlohmann::ordered_json() : nlohmann::ordered_json(binding);
  j["reason"] = reason;
  j["bound_us"] = bound ? nlohmann::ordered_json(NanosToMicros(*bound)) : nlohmann::ordered_json();
  j["max_latency_us"] =
      max_latency ? nlohmann::ordered_json(NanosToMicros(*max_latency)) : nlohmann::ordered_json();
  return j;
}

AdmissionVerdict AdmitFlow(const std::string &flow_id, const FlowSpec &flow,
                           const WorstCaseBound *bound) {
  AdmissionVerdict v;
  v.flow_id = flow_id;
  const TrafficTimeSpec &time = flow.traffic_spec.time;
  if (bound != nullptr && bound->bounded) {
    v.bound = bound->total;
  }
  const Nanos total = bound != nullptr ? bound->total : 0;
  const Nanos best = bound != nullptr ? bound->best_case : 0;
  const bool finite = bound == nullptr || bound->bounded;
  if (time.max_latency_ms) {
    const Criticality crit = CriticalityOf(flow.traffic_spec.criticality, "MaxLatency");
    v.max_latency = MillisToNanos(*time.max_latency_ms);
    const double allowed = static_cast<double>(*v.max_latency) * (1.0 + crit.slack);
    if (!finite || static_cast<double>(total) > allowed) {
      v.admitted = false;
      v.binding = "MaxLatency";
      v.reason = finite ? "worst-case bound " + std::to_string(NanosToMicros(total)) +
                              " us exceeds " + std::to_string(NanosToMicros(*v.max_latency)) +
                              " us"
                        : "worst-case latency is unbounded";
      return v;
    }
  }
  if (time.jitter_ms) {
    const Criticality crit = CriticalityOf(flow.traffic_spec.criticality, "Jitter");
    const double allowed = static_cast<double>(MillisToNanos(*time.jitter_ms)) * (1.0 + crit.slack);
    if (!finite || static_cast<double>(total - best) > allowed) {
      v.admitted = false;
      v.binding = "Jitter";
      v.reason = finite ? "worst-case jitter " + std::to_string(NanosToMicros(total - best)) +
                              " us exceeds the jitter bound"
                        : "worst-case latency is unbounded";
      return v;
    }
  }
  return v;
}

std::vector<AdmissionVerdict> Admit(const ServiceDescriptor &service,
                                    const BoundAnalysis &bounds) {
  std::vector<AdmissionVerdict> out;
  for (const auto &flow : service.flows) {
    const std::string id = QualifiedFlowId(service, flow);
    auto it = bounds.all().find(id);
    if (it != bounds.all().end()) {
      out.push_back(AdmitFlow(id, flow, &it->second));
      continue;
    }
    AdmissionVerdict v;
    v.flow_id = id;
    const TrafficTimeSpec &time = flow.traffic_spec.time;
    if (time.max_latency_ms || time.jitter_ms) {
      v.admitted = false;
      v.binding = std::string(ErrorCodeName(ErrorCode::kUnscheduledFlow));
      v.reason = "no worst-case bound for " + id;
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace detsdv
