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

#include "detsdv/pipeline.h"

#include <algorithm>
#include <set>

#include "detsdv/error.h"
#include "spdlog/spdlog.h"

namespace detsdv {

namespace {

using Json = nlohmann::ordered_json;

struct Candidate {
  std::string key;
  const FlowSpec *spec = nullptr;
  PlannedFlow planned;
};

Json PathJson(const Path &p) { return {{"nodes", p.nodes}, {"links", p.links}}; }

Path PathFrom(const Json &j) {
  return Path{j.at("nodes").get<std::vector<std::string>>(),
              j.at("links").get<std::vector<std::string>>()};
}

Json HopJson(const HopBound &h) {
  return {{"node", h.node},
          {"link", h.link},
          {"processing_us", NanosToMicros(h.processing)},
          {"queuing_us", NanosToMicros(h.queuing)},
          {"transmission_us", NanosToMicros(h.transmission)},
          {"propagation_us", NanosToMicros(h.propagation)}};
}

Nanos Us(const Json &j) { return MicrosToNanos(j.get<double>()); }

TrafficClass ParseClass(const std::string &name) {
  for (auto c : {TrafficClass::kControl, TrafficClass::kStream, TrafficClass::kService,
                 TrafficClass::kBestEffort}) {
    if (TrafficClassName(c) == name) {
      return c;
    }
  }
  throw Error(ErrorCode::kSchema, "class", "unknown traffic class " + name);
}

bool UsesPort(const PlannedFlow &f, const std::string &port) {
  for (const auto &p : f.route.paths) {
    for (size_t h = 0; h < p.hops(); ++h) {
      if (p.Egress(h).ToString() == port) {
        return true;
      }
    }
  }
  return false;
}

AdmissionVerdict Rejected(const std::string &key, const Error &e) {
  AdmissionVerdict v;
  v.flow_id = key;
  v.admitted = false;
  v.binding = std::string(ErrorCodeName(e.code()));
  v.reason = e.what();
  return v;
}

}  // namespace

bool DeploymentPlan::AllAdmitted() const {
  return std::all_of(admission.begin(), admission.end(),
                     [](const AdmissionVerdict &v) { return v.admitted; });
}

std::pair<std::string, std::string> ResolveEndpoints(const std::string &flow_key,
                                                     const FlowSpec &flow,
                                                     const PlacementPlan &placement,
                                                     const TopologyDescriptor &topology) {
  auto resolve = [&](const std::string &name, const char *field) -> std::string {
    if (flow.FindRole(name) != nullptr) {
      const auto replicas = placement.Replicas(flow_key, name);
      if (!replicas.empty()) {
        return replicas.front()->ecu_id;
      }
    }
    if (topology.FindDevice(name) != nullptr) {
      if (const EcuNode *ecu = topology.AttachingEcu(name)) {
        return ecu->id;
      }
    }
    throw Error(ErrorCode::kSchema, flow_key + ".TrafficSpecs." + field,
                name + " is neither a placed role nor an attached device");
  };
  const TrafficSpec &t = flow.traffic_spec;
  const std::string source = resolve(t.source.value_or(flow.node_specs.front().name), "Source");
  if (t.destination) {
    return {source, resolve(*t.destination, "Destination")};
  }
  if (flow.node_specs.size() >= 2) {
    return {source, resolve(flow.node_specs.back().name, "Destination")};
  }
  for (const auto &d : topology.devices) {
    if (d.kind == DeviceKind::kActuator) {
      if (const EcuNode *ecu = topology.AttachingEcu(d.id)) {
        return {source, ecu->id};
      }
    }
  }
  return {source, source};
}

PlannedFlow PlanFlow(const std::string &flow_key, const FlowSpec &flow, std::string_view domain,
                     const ScheduleOptions &options) {
  const TrafficTimeSpec &time = flow.traffic_spec.time;
  PlannedFlow p;
  p.id = flow_key;
  p.cls = Classify(flow, domain);
  p.priority = AssignPriority(p.cls);
  p.message_bytes = flow.data_spec.data_size;
  p.fragments = FragmentPayloads(p.message_bytes);
  p.periodic = time.periodicity_ms.has_value();
  p.interval = p.periodic ? MillisToNanos(*time.periodicity_ms) : options.sporadic_interval;
  p.offset = p.periodic ? MillisToNanos(time.transmit_offset_ms) : 0;
  if (time.max_latency_ms) {
    p.max_latency = MillisToNanos(*time.max_latency_ms);
  }
  return p;
}

DeploymentPlan BuildPlan(const std::vector<ServiceDescriptor> &services,
                         const TopologyDescriptor &topology) {
  DeploymentPlan plan;
  plan.tsn.options = ScheduleOptionsFrom(topology.timing);
  const ScheduleOptions &options = plan.tsn.options;
  Placer placer(topology);
  std::map<std::string, AdmissionVerdict> verdicts;
  std::vector<std::string> order;
  std::vector<Candidate> active;
  std::vector<std::pair<std::string, const FlowSpec *>> local;

  for (const auto &service : services) {
    for (const auto &flow : service.flows) {
      const std::string key = QualifiedFlowId(service, flow);
      order.push_back(key);
      verdicts[key] = AdmissionVerdict{key, true, "", "", std::nullopt, std::nullopt};
      try {
        placer.PlaceFlow(key, flow);
        const auto [source, destination] = ResolveEndpoints(key, flow, placer.plan(), topology);
        InteropRecord rec;
        rec.flow_id = key;
        rec.cls = Classify(flow, service.metadata.domain);
        rec.constraints = ConstraintsOf(flow, rec.cls);
        rec.fiveqi = MapTo5qi(rec.constraints, flow.traffic_spec.time, flow.traffic_spec);
        rec.data_layer = DeriveDataLayerQos(key, flow);
        plan.interop.push_back(std::move(rec));
        if (source == destination) {
          local.emplace_back(key, &flow);
          continue;
        }
        PlannedFlow p = PlanFlow(key, flow, service.metadata.domain, options);
        const TrafficSpec &t = flow.traffic_spec;
        RouteRequest req{key, source, destination, t.reliability,
                         CriticalityOf(t.criticality, "Reliability").level ==
                             CriticalityLevel::kMust,
                         !IsScheduledClass(p.cls) && p.message_bytes <= kCanMaxMessageBytes};
        p.route = Route(req, topology);
        active.push_back(Candidate{key, &flow, std::move(p)});
      } catch (const Error &e) {
        spdlog::warn("{} rejected: {}", key, e.what());
        verdicts[key] = Rejected(key, e);
        placer.Release(key);
        std::erase_if(plan.interop, [&](const InteropRecord &r) { return r.flow_id == key; });
      }
    }
  }

  auto reject = [&](const std::string &key, AdmissionVerdict v) {
    spdlog::warn("{} rejected: {} ({})", key, v.binding, v.reason);
    verdicts[key] = std::move(v);
    placer.Release(key);
    std::erase_if(active, [&](const Candidate &c) { return c.key == key; });
  };

  for (;;) {
    std::vector<PlannedFlow> flows;
    for (const auto &c : active) {
      flows.push_back(c.planned);
    }
    GclSynthesis synthesis;
    std::vector<CbsParams> cbs;
    try {
      synthesis = SynthesizeGcl(flows, topology, options);
      cbs = ComputeCbs(StreamLoads(flows, topology));
    } catch (const Error &e) {
      std::string victim;
      if (e.code() == ErrorCode::kOversubscribed) {
        for (const auto &c : active) {
          if (c.planned.cls == TrafficClass::kStream && UsesPort(c.planned, e.key_path())) {
            victim = c.key;
          }
        }
      } else if (verdicts.count(e.key_path()) != 0) {
        victim = e.key_path();
      }
      if (victim.empty()) {
        throw;
      }
      reject(victim, Rejected(victim, e));
      continue;
    }
    BoundAnalysis bounds(flows, synthesis, cbs, topology, options);
    bool changed = false;
    for (const auto &c : std::vector<Candidate>(active)) {
      AdmissionVerdict v = AdmitFlow(c.key, *c.spec, &bounds.For(c.key));
      if (!v.admitted) {
        reject(c.key, std::move(v));
        changed = true;
      } else {
        verdicts[c.key] = std::move(v);
      }
    }
    if (changed) {
      continue;
    }
    plan.tsn.flows = std::move(flows);
    plan.tsn.synthesis = std::move(synthesis);
    plan.tsn.cbs = std::move(cbs);
    plan.tsn.bounds = bounds.all();
    break;
  }

  for (const auto &[key, flow] : local) {
    verdicts[key] = AdmitFlow(key, *flow, nullptr);
  }
  for (const auto &f : plan.tsn.flows) {
    if (f.route.paths.size() == 2) {
      plan.tsn.frer.push_back(DeriveFrer(f, plan.tsn.bounds.at(f.id)));
    }
  }
  std::set<std::string> placed;
  for (const auto &key : order) {
    plan.admission.push_back(verdicts.at(key));
    if (verdicts.at(key).admitted) {
      placed.insert(key);
    }
  }
  std::erase_if(plan.interop, [&](const InteropRecord &r) { return placed.count(r.flow_id) == 0; });
  plan.placement = placer.plan();
  return plan;
}

Json TsnConfigToJson(const TsnConfig &config, const std::vector<AdmissionVerdict> &admission) {
  Json j;
  j["schema"] = "v1";
  j["options"] = {{"clock_sync_error_us", NanosToMicros(config.options.clock_sync_error)},
                  {"sporadic_interval_us", NanosToMicros(config.options.sporadic_interval)},
                  {"hyperperiod_cap_us", NanosToMicros(config.options.hyperperiod_cap)}};
  j["flows"] = Json::array();
  for (const auto &f : config.flows) {
    Json paths = Json::array();
    for (const auto &p : f.route.paths) {
      paths.push_back(PathJson(p));
    }
    j["flows"].push_back(
        {{"flow", f.id},
         {"class", TrafficClassName(f.cls)},
         {"priority", f.priority},
         {"message_bytes", f.message_bytes},
         {"fragments", f.fragments},
         {"periodic", f.periodic},
         {"interval_us", NanosToMicros(f.interval)},
         {"offset_us", NanosToMicros(f.offset)},
         {"max_latency_us", f.max_latency ? Json(NanosToMicros(*f.max_latency)) : Json()},
         {"source", f.route.source},
         {"destination", f.route.destination},
         {"paths", std::move(paths)}});
  }
  // Every port with a GCL or a shaper, in port order.
  std::map<PortRef, Json> ports;
  auto port_entry = [&](const PortRef &ref) -> Json & {
    auto it = ports.find(ref);
    if (it == ports.end()) {
      it = ports.emplace(ref, Json{{"switch", ref.node},
                                   {"port", ref.link},
                                   {"gcl", nullptr},
                                   {"cbs", Json::array()}})
               .first;
    }
    return it->second;
  };
  for (const auto &g : config.synthesis.gcls) {
    Json entries = Json::array();
    for (const auto &e : g.entries) {
      entries.push_back({{"offset_us", NanosToMicros(e.offset)},
                         {"duration_us", NanosToMicros(e.duration)},
                         {"mask", e.open_queues}});
    }
    port_entry(g.port)["gcl"] = {{"cycle_us", NanosToMicros(g.cycle_time)},
                                 {"entries", std::move(entries)}};
  }
  for (const auto &c : config.cbs) {
    port_entry(c.port)["cbs"].push_back({{"queue", c.queue},
                                         {"idle_slope_bps", c.idle_slope_bps},
                                         {"send_slope_bps", c.send_slope_bps}});
  }
  j["ports"] = Json::array();
  for (auto &[_, p] : ports) {
    j["ports"].push_back(std::move(p));
  }
  j["schedules"] = Json::array();
  for (const auto &s : config.synthesis.schedules) {
    Json hops = Json::array();
    for (const auto &h : s.hops) {
      hops.push_back({{"switch", h.port.node},
                      {"port", h.port.link},
                      {"phase_us", NanosToMicros(h.phase)},
                      {"duration_us", NanosToMicros(h.duration)},
                      {"guard_us", NanosToMicros(h.guard)}});
    }
    j["schedules"].push_back({{"flow", s.flow_id}, {"path", s.path_index}, {"hops", hops}});
  }
  j["frer"] = Json::array();
  for (const auto &f : config.frer) {
    j["frer"].push_back({{"flow", f.flow_id},
                         {"replication_node", f.replication_node},
                         {"elimination_node", f.elimination_node},
                         {"sequence_space", f.sequence_space},
                         {"recovery_window", f.recovery_window}});
  }
  j["bounds"] = Json::array();
  for (const auto &[id, b] : config.bounds) {
    Json per_hop = Json::array();
    for (const auto &h : b.per_hop) {
      per_hop.push_back(HopJson(h));
    }
    Json totals = Json::array();
    for (const Nanos t : b.path_totals) {
      totals.push_back(NanosToMicros(t));
    }
    j["bounds"].push_back({{"flow", id},
                           {"bounded", b.bounded},
                           {"total_us", b.bounded ? Json(NanosToMicros(b.total)) : Json()},
                           {"best_case_us", NanosToMicros(b.best_case)},
                           {"path_totals_us", std::move(totals)},
                           {"per_hop", std::move(per_hop)}});
  }
  j["admission"] = Json::array();
  for (const auto &v : admission) {
    j["admission"].push_back(v.ToJson());
  }
  return j;
}

TsnConfig TsnConfigFromJson(const Json &j) {
  try {
    if (j.at("schema") != "v1") {
      throw Error(ErrorCode::kSchema, "schema", "tsn_config schema must be v1");
    }
    TsnConfig c;
    const Json &o = j.at("options");
    c.options.clock_sync_error = Us(o.at("clock_sync_error_us"));
    c.options.sporadic_interval = Us(o.at("sporadic_interval_us"));
    c.options.hyperperiod_cap = Us(o.at("hyperperiod_cap_us"));
    for (const Json &f : j.at("flows")) {
      PlannedFlow p;
      p.id = f.at("flow").get<std::string>();
      p.cls = ParseClass(f.at("class").get<std::string>());
      p.priority = f.at("priority").get<int>();
      p.message_bytes = f.at("message_bytes").get<std::int64_t>();
      p.fragments = f.at("fragments").get<std::vector<std::int64_t>>();
      p.periodic = f.at("periodic").get<bool>();
      p.interval = Us(f.at("interval_us"));
      p.offset = Us(f.at("offset_us"));
      if (!f.at("max_latency_us").is_null()) {
        p.max_latency = Us(f.at("max_latency_us"));
      }
      p.route.flow_id = p.id;
      p.route.source = f.at("source").get<std::string>();
      p.route.destination = f.at("destination").get<std::string>();
      for (const Json &path : f.at("paths")) {
        p.route.paths.push_back(PathFrom(path));
      }
      c.flows.push_back(std::move(p));
    }
    for (const Json &p : j.at("ports")) {
      const PortRef ref{p.at("switch").get<std::string>(), p.at("port").get<std::string>()};
      if (!p.at("gcl").is_null()) {
        GateControlList g;
        g.port = ref;
        g.cycle_time = Us(p.at("gcl").at("cycle_us"));
        for (const Json &e : p.at("gcl").at("entries")) {
          g.entries.push_back(GclEntry{Us(e.at("offset_us")), Us(e.at("duration_us")),
                                       e.at("mask").get<std::uint8_t>()});
        }
        c.synthesis.gcls.push_back(std::move(g));
      }
      for (const Json &s : p.at("cbs")) {
        c.cbs.push_back(CbsParams{ref, s.at("queue").get<int>(),
                                  s.at("idle_slope_bps").get<std::int64_t>(),
                                  s.at("send_slope_bps").get<std::int64_t>()});
      }
    }
    for (const Json &s : j.at("schedules")) {
      FlowSchedule fs;
      fs.flow_id = s.at("flow").get<std::string>();
      fs.path_index = s.at("path").get<size_t>();
      for (const Json &h : s.at("hops")) {
        fs.hops.push_back(HopWindow{
            PortRef{h.at("switch").get<std::string>(), h.at("port").get<std::string>()},
            Us(h.at("phase_us")), Us(h.at("duration_us")), Us(h.at("guard_us"))});
      }
      c.synthesis.schedules.push_back(std::move(fs));
    }
    for (const Json &f : j.at("frer")) {
      c.frer.push_back(FrerConfig{f.at("flow").get<std::string>(),
                                  f.at("replication_node").get<std::string>(),
                                  f.at("elimination_node").get<std::string>(),
                                  f.at("sequence_space").get<std::uint32_t>(),
                                  f.at("recovery_window").get<int>()});
    }
    for (const Json &b : j.at("bounds")) {
      WorstCaseBound w;
      w.flow_id = b.at("flow").get<std::string>();
      w.bounded = b.at("bounded").get<bool>();
      w.total = w.bounded ? Us(b.at("total_us")) : 0;
      w.best_case = Us(b.at("best_case_us"));
      for (const Json &t : b.at("path_totals_us")) {
        w.path_totals.push_back(Us(t));
      }
      for (const Json &h : b.at("per_hop")) {
        w.per_hop.push_back(HopBound{h.at("node").get<std::string>(),
                                     h.at("link").get<std::string>(), Us(h.at("processing_us")),
                                     Us(h.at("queuing_us")), Us(h.at("transmission_us")),
                                     Us(h.at("propagation_us"))});
      }
      c.bounds.emplace(w.flow_id, std::move(w));
    }
    return c;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kSchema, "tsn_config", e.what());
  }
}

Json InteropToJson(const std::vector<InteropRecord> &records) {
  Json j;
  j["schema"] = "v1";
  j["flows"] = Json::array();
  for (const auto &r : records) {
    j["flows"].push_back({{"flow", r.flow_id},
                          {"class", TrafficClassName(r.cls)},
                          {"constraints",
                           {{"deadline", r.constraints.deadline},
                            {"jitter", r.constraints.jitter},
                            {"bandwidth", r.constraints.bandwidth}}},
                          {"fiveqi", r.fiveqi.ToJson()},
                          {"data_layer", r.data_layer.ToJson()}});
  }
  return j;
}

}  // namespace detsdv
