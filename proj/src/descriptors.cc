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

#include "detsdv/descriptors.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

#include "detsdv/error.h"
#include "toml.hpp"
#include "toml_reader.h"

namespace detsdv {

namespace {

using internal::IndexPath;
using internal::JoinPath;
using internal::OrderedEntries;
using internal::ParseToml;
using internal::TableReader;
using internal::Throw;

const std::set<std::string, std::less<>> kNodeSpecFields = {
    "Image", "ImageType", "Replicas", "CPU", "Memory", "Storage", "GPU", "Energy", "Offloading"};
const std::set<std::string, std::less<>> kTrafficCriticalityFields = {"Reliability", "MaxLatency",
                                                                      "Jitter"};

CriticalityLevel ParseLevel(const std::string &text, const std::string &path) {
  if (text == "MUST") {
    return CriticalityLevel::kMust;
  }
  if (text == "SHOULD") {
    return CriticalityLevel::kShould;
  }
  if (text == "MAY") {
    return CriticalityLevel::kMay;
  }
  Throw(ErrorCode::kSchema, path, "criticality must be MUST, SHOULD or MAY");
}

CriticalityMap ParseCriticality(const toml::table &table, const std::string &path,
                                const std::set<std::string, std::less<>> &allowed) {
  CriticalityMap out;
  for (auto &&[key, node] : table) {
    const std::string field(key.str());
    const std::string field_path = JoinPath(path, field);
    if (allowed.count(field) == 0) {
      Throw(ErrorCode::kSchema, field_path, "criticality names an unknown field");
    }
    Criticality crit;
    if (node.is_string()) {
      crit.level = ParseLevel(node.as_string()->get(), field_path);
    } else if (node.is_table()) {
      TableReader reader(*node.as_table(), field_path);
      crit.level = ParseLevel(reader.RequiredString("Level"), reader.PathOf("Level"));
      crit.slack = reader.OptionalNumber("Slack").value_or(0.0);
      reader.Finish();
    } else {
      Throw(ErrorCode::kSchema, field_path, "expected criticality string or table");
    }
    out[field] = crit;
  }
  return out;
}

void CheckCriticality(const CriticalityMap &map, const std::string &path) {
  for (const auto &[field, crit] : map) {
    const std::string field_path = JoinPath(path, field);
    if (!(crit.slack >= 0.0) || !std::isfinite(crit.slack)) {
      Throw(ErrorCode::kInvariant, JoinPath(field_path, "Slack"), "slack must be >= 0");
    }
    if (crit.level == CriticalityLevel::kMust && crit.slack != 0.0) {
      Throw(ErrorCode::kInvariant, JoinPath(field_path, "Slack"), "MUST implies slack = 0");
    }
  }
}

void CheckNodeSpec(const NodeSpec &spec, const std::string &path) {
  if (spec.replicas < 1) {
    Throw(ErrorCode::kInvariant, JoinPath(path, "Replicas"), "Replicas must be >= 1");
  }
  if (spec.cpu < 1) {
    Throw(ErrorCode::kInvariant, JoinPath(path, "CPU"), "CPU must be >= 1");
  }
  if (spec.memory_mib <= 0) {
    Throw(ErrorCode::kInvariant, JoinPath(path, "Memory"), "Memory must be > 0");
  }
  if (spec.storage_bytes < 0) {
    Throw(ErrorCode::kInvariant, JoinPath(path, "Storage"), "Storage must be >= 0");
  }
  if (spec.energy < 0) {
    Throw(ErrorCode::kInvariant, JoinPath(path, "Energy"), "Energy must be >= 0");
  }
  for (const auto &[field, crit] : spec.criticality) {
    if (kNodeSpecFields.count(field) == 0) {
      Throw(ErrorCode::kSchema, JoinPath(JoinPath(path, "Criticality"), field),
            "criticality names an unknown field");
    }
  }
  CheckCriticality(spec.criticality, JoinPath(path, "Criticality"));
}

void CheckTimeSpec(const TrafficTimeSpec &time, const std::string &path) {
  auto non_negative = [&](const std::optional<double> &v, std::string_view key) {
    if (v && (!std::isfinite(*v) || *v < 0.0)) {
      Throw(ErrorCode::kInvariant, JoinPath(path, key), "value must be >= 0");
    }
  };
  non_negative(time.max_latency_ms, "MaxLatency");
  non_negative(time.periodicity_ms, "Periodicity");
  non_negative(time.transmit_offset_ms, "TransmitOffset");
  non_negative(time.jitter_ms, "Jitter");
  if (time.periodicity_ms && *time.periodicity_ms <= 0.0) {
    Throw(ErrorCode::kInvariant, JoinPath(path, "Periodicity"), "Periodicity must be > 0");
  }
  if (time.periodicity_ms && time.transmit_offset_ms >= *time.periodicity_ms) {
    Throw(ErrorCode::kInvariant, JoinPath(path, "TransmitOffset"),
          "TransmitOffset must be < Periodicity");
  }
}

void CheckFlow(const FlowSpec &flow, const std::string &path) {
  if (flow.id.empty()) {
    Throw(ErrorCode::kInvariant, path, "flow id must be non-empty");
  }
  if (flow.node_specs.empty()) {
    Throw(ErrorCode::kSchema, JoinPath(path, "NodeSpecs"), "at least one node role required");
  }
  std::set<std::string> roles;
  for (const auto &role : flow.node_specs) {
    const std::string role_path = JoinPath(JoinPath(path, "NodeSpecs"), role.name);
    if (role.name.empty() || !roles.insert(role.name).second) {
      Throw(ErrorCode::kInvariant, role_path, "node role names must be unique and non-empty");
    }
    CheckNodeSpec(role.spec, role_path);
  }
  if (flow.data_spec.data_size <= 0) {
    Throw(ErrorCode::kInvariant, JoinPath(path, "DataSpecs.DataSize"), "DataSize must be > 0");
  }
  const std::string traffic_path = JoinPath(path, "TrafficSpecs");
  const TrafficSpec &traffic = flow.traffic_spec;
  if (traffic.guarantee < 0 || traffic.guarantee > 4) {
    Throw(ErrorCode::kInvariant, JoinPath(traffic_path, "Guarantee"), "Guarantee must be in 0..4");
  }
  if (traffic.source && traffic.source->empty()) {
    Throw(ErrorCode::kInvariant, JoinPath(traffic_path, "Source"), "Source must be non-empty");
  }
  if (traffic.destination && traffic.destination->empty()) {
    Throw(ErrorCode::kInvariant, JoinPath(traffic_path, "Destination"),
          "Destination must be non-empty");
  }
  for (const auto &[field, crit] : traffic.criticality) {
    if (kTrafficCriticalityFields.count(field) == 0) {
      Throw(ErrorCode::kSchema, JoinPath(JoinPath(traffic_path, "Criticality"), field),
            "criticality names an unknown field");
    }
  }
  CheckCriticality(traffic.criticality, JoinPath(traffic_path, "Criticality"));
  CheckTimeSpec(traffic.time, JoinPath(traffic_path, "TrafficTimeSpecs"));
}

NodeSpec ParseNodeSpec(const toml::table &table, const std::string &path) {
  TableReader r(table, path);
  NodeSpec spec;
  spec.image = r.RequiredString("Image");
  spec.image_type = r.OptionalString("ImageType").value_or("");
  spec.replicas = r.RequiredInt("Replicas");
  spec.cpu = r.RequiredInt("CPU");
  spec.memory_mib = r.RequiredInt("Memory");
  spec.storage_bytes = r.OptionalInt("Storage").value_or(0);
  spec.gpu = r.OptionalBool("GPU").value_or(false);
  spec.energy = r.OptionalInt("Energy").value_or(0);
  spec.offloading = r.OptionalBool("Offloading").value_or(false);
  if (const toml::table *crit = r.OptionalTable("Criticality")) {
    spec.criticality = ParseCriticality(*crit, r.PathOf("Criticality"), kNodeSpecFields);
  }
  r.Finish();
  return spec;
}

FlowSpec ParseFlow(const std::string &id, const toml::table &table, const std::string &path) {
  TableReader r(table, path);
  FlowSpec flow;
  flow.id = id;

  const toml::table &roles = r.RequiredTable("NodeSpecs");
  for (const auto &[role, node] : OrderedEntries(roles)) {
    const std::string role_path = JoinPath(r.PathOf("NodeSpecs"), role);
    if (!node->is_table()) {
      Throw(ErrorCode::kSchema, role_path, "expected table");
    }
    flow.node_specs.push_back(NodeRole{role, ParseNodeSpec(*node->as_table(), role_path)});
  }

  {
    TableReader d(r.RequiredTable("DataSpecs"), r.PathOf("DataSpecs"));
    flow.data_spec.data_format = d.RequiredString("DataFormat");
    flow.data_spec.data_size = d.RequiredInt("DataSize");
    d.Finish();
  }

  {
    TableReader t(r.RequiredTable("TrafficSpecs"), r.PathOf("TrafficSpecs"));
    TrafficSpec &traffic = flow.traffic_spec;
    const std::int64_t guarantee = t.RequiredInt("Guarantee");
    if (guarantee < 0 || guarantee > 4) {
      Throw(ErrorCode::kInvariant, t.PathOf("Guarantee"), "Guarantee must be in 0..4");
    }
    traffic.guarantee = static_cast<int>(guarantee);
    traffic.reliability = t.RequiredBool("Reliability");
    traffic.delivery = t.RequiredBool("Delivery");
    traffic.wired = t.RequiredBool("Wired");
    traffic.source = t.OptionalString("Source");
    traffic.destination = t.OptionalString("Destination");
    if (const toml::table *crit = t.OptionalTable("Criticality")) {
      traffic.criticality =
          ParseCriticality(*crit, t.PathOf("Criticality"), kTrafficCriticalityFields);
    }
    if (const toml::table *time = t.OptionalTable("TrafficTimeSpecs")) {
      TableReader tt(*time, t.PathOf("TrafficTimeSpecs"));
      traffic.time.max_latency_ms = tt.OptionalNumber("MaxLatency");
      traffic.time.periodicity_ms = tt.OptionalNumber("Periodicity");
      traffic.time.transmit_offset_ms = tt.OptionalNumber("TransmitOffset").value_or(0.0);
      traffic.time.jitter_ms = tt.OptionalNumber("Jitter");
      tt.Finish();
    }
    t.Finish();
  }
  r.Finish();
  CheckFlow(flow, path);
  return flow;
}

// ---- serialization helpers ----

std::string Quote(std::string_view s) {
  std::string out = "\"";
  for (const char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    switch (ch) {
    case '"':
      out += "\\\"";
      break;
    case '\\':
      out += "\\\\";
      break;
    case '\n':
      out += "\\n";
      break;
    case '\t':
      out += "\\t";
      break;
    case '\r':
      out += "\\r";
      break;
    default:
      if (c < 0x20 || c == 0x7f) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "\\u%04x", c);
        out += buf;
      } else {
        out += ch;
      }
    }
  }
  out += "\"";
  return out;
}

/// Bare keys stay bare; anything else is quoted.
std::string Key(std::string_view key) {
  const bool bare = !key.empty() && std::all_of(key.begin(), key.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
  return bare ? std::string(key) : Quote(key);
}

std::string Number(double v) {
  if (std::trunc(v) == v && std::fabs(v) < 1e15) {
    return std::to_string(static_cast<std::int64_t>(v));
  }
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eE") == std::string::npos) {
    s += ".0";
  }
  return s;
}

std::string Bool(bool b) { return b ? "true" : "false"; }

void WriteCriticality(std::ostringstream &out, const std::string &header, const CriticalityMap &map) {
  if (map.empty()) {
    return;
  }
  out << "\n[" << header << ".Criticality]\n";
  for (const auto &[field, crit] : map) {
    out << Key(field) << " = { Level = " << Quote(CriticalityName(crit.level))
        << ", Slack = " << Number(crit.slack) << " }\n";
  }
}

std::string LinkMediumName(LinkMedium m) { return m == LinkMedium::kCan ? "CAN" : "ETHERNET"; }
std::string DeviceKindName(DeviceKind k) { return k == DeviceKind::kActuator ? "ACTUATOR" : "SENSOR"; }

}  // namespace

std::string_view CriticalityName(CriticalityLevel level) {
  switch (level) {
  case CriticalityLevel::kMust:
    return "MUST";
  case CriticalityLevel::kShould:
    return "SHOULD";
  case CriticalityLevel::kMay:
    return "MAY";
  }
  return "MUST";
}

Criticality CriticalityOf(const CriticalityMap &map, std::string_view field) {
  auto it = map.find(std::string(field));
  return it == map.end() ? Criticality{} : it->second;
}

const NodeSpec *FlowSpec::FindRole(std::string_view role) const {
  for (const auto &r : node_specs) {
    if (r.name == role) {
      return &r.spec;
    }
  }
  return nullptr;
}

const SwitchPort *SwitchNode::PortForLink(std::string_view link) const {
  for (const auto &p : ports) {
    if (p.link == link) {
      return &p;
    }
  }
  return nullptr;
}

const std::string &Link::Peer(std::string_view node) const {
  return node == endpoint_a ? endpoint_b : endpoint_a;
}

const EcuNode *TopologyDescriptor::FindEcu(std::string_view id) const {
  for (const auto &e : ecus) {
    if (e.id == id) {
      return &e;
    }
  }
  return nullptr;
}

const SwitchNode *TopologyDescriptor::FindSwitch(std::string_view id) const {
  for (const auto &s : switches) {
    if (s.id == id) {
      return &s;
    }
  }
  return nullptr;
}

const Link *TopologyDescriptor::FindLink(std::string_view id) const {
  for (const auto &l : links) {
    if (l.id == id) {
      return &l;
    }
  }
  return nullptr;
}

const Device *TopologyDescriptor::FindDevice(std::string_view id) const {
  for (const auto &d : devices) {
    if (d.id == id) {
      return &d;
    }
  }
  return nullptr;
}

const EcuNode *TopologyDescriptor::AttachingEcu(std::string_view device_id) const {
  for (const auto &e : ecus) {
    if (std::find(e.attached_devices.begin(), e.attached_devices.end(), device_id) !=
        e.attached_devices.end()) {
      return &e;
    }
  }
  return nullptr;
}

Nanos TopologyDescriptor::ProcessingNanos(std::string_view node_id) const {
  const SwitchNode *sw = FindSwitch(node_id);
  return sw == nullptr ? 0 : MicrosToNanos(sw->processing_delay_us);
}

void Validate(const ServiceDescriptor &d) {
  if (d.title.empty()) {
    Throw(ErrorCode::kInvariant, "title", "title must be non-empty");
  }
  if (d.flows.empty()) {
    Throw(ErrorCode::kInvariant, "Flows", "at least one flow required");
  }
  std::set<std::string> ids;
  for (const auto &flow : d.flows) {
    const std::string path = JoinPath("Flows", flow.id);
    if (!ids.insert(flow.id).second) {
      Throw(ErrorCode::kInvariant, path, "duplicate flow id");
    }
    CheckFlow(flow, path);
  }
}

ServiceDescriptor ParseServiceDescriptor(std::string_view text) {
  const toml::table root = ParseToml(text);
  TableReader r(root, "");
  ServiceDescriptor d;
  d.title = r.RequiredString("title");
  {
    TableReader m(r.RequiredTable("ServiceMetadata"), "ServiceMetadata");
    d.metadata.author = m.RequiredString("Author");
    d.metadata.version = m.RequiredString("Version");
    d.metadata.domain = m.RequiredString("Domain");
    m.Finish();
  }
  const toml::table &flows = r.RequiredTable("Flows");
  for (const auto &[id, node] : OrderedEntries(flows)) {
    const std::string path = JoinPath("Flows", id);
    if (!node->is_table()) {
      Throw(ErrorCode::kSchema, path, "expected table");
    }
    d.flows.push_back(ParseFlow(id, *node->as_table(), path));
  }
  r.Finish();
  Validate(d);
  return d;
}

std::string Serialize(const ServiceDescriptor &d) {
  std::ostringstream out;
  out << "title = " << Quote(d.title) << "\n\n";
  out << "[ServiceMetadata]\n";
  out << "Author = " << Quote(d.metadata.author) << "\n";
  out << "Version = " << Quote(d.metadata.version) << "\n";
  out << "Domain = " << Quote(d.metadata.domain) << "\n\n";
  out << "[Flows]\n";
  for (const auto &flow : d.flows) {
    const std::string flow_header = "Flows." + Key(flow.id);
    out << "\n[" << flow_header << "]\n";
    out << "[" << flow_header << ".NodeSpecs]\n";
    for (const auto &role : flow.node_specs) {
      const std::string role_header = flow_header + ".NodeSpecs." + Key(role.name);
      const NodeSpec &s = role.spec;
      out << "[" << role_header << "]\n";
      out << "Image = " << Quote(s.image) << "\n";
      out << "ImageType = " << Quote(s.image_type) << "\n";
      out << "Replicas = " << s.replicas << "\n";
      out << "CPU = " << s.cpu << "\n";
      out << "Memory = " << s.memory_mib << "\n";
      out << "Storage = " << s.storage_bytes << "\n";
      out << "GPU = " << Bool(s.gpu) << "\n";
      out << "Energy = " << s.energy << "\n";
      out << "Offloading = " << Bool(s.offloading) << "\n";
      WriteCriticality(out, role_header, s.criticality);
    }
    out << "\n[" << flow_header << ".DataSpecs]\n";
    out << "DataFormat = " << Quote(flow.data_spec.data_format) << "\n";
    out << "DataSize = " << flow.data_spec.data_size << "\n";

    const TrafficSpec &t = flow.traffic_spec;
    const std::string traffic_header = flow_header + ".TrafficSpecs";
    out << "\n[" << traffic_header << "]\n";
    out << "Guarantee = " << t.guarantee << "\n";
    out << "Reliability = " << Bool(t.reliability) << "\n";
    out << "Delivery = " << Bool(t.delivery) << "\n";
    out << "Wired = " << Bool(t.wired) << "\n";
    if (t.source) {
      out << "Source = " << Quote(*t.source) << "\n";
    }
    if (t.destination) {
      out << "Destination = " << Quote(*t.destination) << "\n";
    }
    WriteCriticality(out, traffic_header, t.criticality);
    out << "\n[" << traffic_header << ".TrafficTimeSpecs]\n";
    if (t.time.max_latency_ms) {
      out << "MaxLatency = " << Number(*t.time.max_latency_ms) << "\n";
    }
    if (t.time.periodicity_ms) {
      out << "Periodicity = " << Number(*t.time.periodicity_ms) << "\n";
    }
    out << "TransmitOffset = " << Number(t.time.transmit_offset_ms) << "\n";
    if (t.time.jitter_ms) {
      out << "Jitter = " << Number(*t.time.jitter_ms) << "\n";
    }
  }
  return out.str();
}

// ---- topology ----

void Validate(const TopologyDescriptor &t) {
  std::set<std::string> ids;
  auto claim = [&](const std::string &id, const std::string &path) {
    if (id.empty()) {
      Throw(ErrorCode::kInvariant, path, "identifier must be non-empty");
    }
    if (!ids.insert(id).second) {
      Throw(ErrorCode::kInvariant, path, "duplicate identifier '" + id + "'");
    }
  };
  std::set<std::string> nodes;
  for (size_t i = 0; i < t.ecus.size(); ++i) {
    const EcuNode &e = t.ecus[i];
    const std::string path = IndexPath("ecus", i);
    claim(e.id, path + ".id");
    nodes.insert(e.id);
    if (e.cpu_cores <= 0) {
      Throw(ErrorCode::kInvariant, path + ".cpu_cores", "cpu_cores must be > 0");
    }
    if (e.memory_mib <= 0) {
      Throw(ErrorCode::kInvariant, path + ".memory", "memory must be > 0");
    }
    if (e.storage_bytes <= 0) {
      Throw(ErrorCode::kInvariant, path + ".storage", "storage must be > 0");
    }
    if (e.energy_class < 0) {
      Throw(ErrorCode::kInvariant, path + ".energy_class", "energy_class must be >= 0");
    }
  }
  for (size_t i = 0; i < t.switches.size(); ++i) {
    claim(t.switches[i].id, IndexPath("switches", i) + ".id");
    nodes.insert(t.switches[i].id);
  }
  for (size_t i = 0; i < t.links.size(); ++i) {
    const Link &l = t.links[i];
    const std::string path = IndexPath("links", i);
    claim(l.id, path + ".id");
    if (nodes.count(l.endpoint_a) == 0) {
      Throw(ErrorCode::kSchema, path + ".a", "unknown node '" + l.endpoint_a + "'");
    }
    if (nodes.count(l.endpoint_b) == 0) {
      Throw(ErrorCode::kSchema, path + ".b", "unknown node '" + l.endpoint_b + "'");
    }
    if (l.endpoint_a == l.endpoint_b) {
      Throw(ErrorCode::kInvariant, path, "link endpoints must differ");
    }
    if (l.rate_bps <= 0) {
      Throw(ErrorCode::kInvariant, path + ".rate_bps", "rate must be > 0");
    }
    if (!std::isfinite(l.propagation_delay_us) || l.propagation_delay_us < 0.0) {
      Throw(ErrorCode::kInvariant, path + ".propagation_delay_us", "propagation delay must be >= 0");
    }
  }
  for (size_t i = 0; i < t.switches.size(); ++i) {
    const SwitchNode &s = t.switches[i];
    const std::string path = IndexPath("switches", i);
    if (!std::isfinite(s.processing_delay_us) || s.processing_delay_us < 0.0) {
      Throw(ErrorCode::kInvariant, path + ".processing_delay_us", "processing delay must be >= 0");
    }
    std::set<std::string> port_ids;
    std::set<std::string> port_links;
    for (size_t p = 0; p < s.ports.size(); ++p) {
      const SwitchPort &port = s.ports[p];
      const std::string ppath = IndexPath(path + ".ports", p);
      if (port.id.empty() || !port_ids.insert(port.id).second) {
        Throw(ErrorCode::kInvariant, ppath + ".id", "port ids must be unique and non-empty");
      }
      if (port.queues != kQueuesPerPort) {
        Throw(ErrorCode::kInvariant, ppath + ".queues", "ports have exactly 8 priority queues");
      }
      const Link *link = t.FindLink(port.link);
      if (link == nullptr) {
        Throw(ErrorCode::kSchema, ppath + ".link", "unknown link '" + port.link + "'");
      }
      if (link->endpoint_a != s.id && link->endpoint_b != s.id) {
        Throw(ErrorCode::kInvariant, ppath + ".link", "link does not terminate on this switch");
      }
      if (!port_links.insert(port.link).second) {
        Throw(ErrorCode::kInvariant, ppath + ".link", "link bound to more than one port");
      }
    }
    for (const Link &l : t.links) {
      if ((l.endpoint_a == s.id || l.endpoint_b == s.id) && port_links.count(l.id) == 0) {
        Throw(ErrorCode::kInvariant, path + ".ports", "link '" + l.id + "' has no port");
      }
    }
  }
  std::map<std::string, std::string> attached_to;
  for (size_t i = 0; i < t.ecus.size(); ++i) {
    const EcuNode &e = t.ecus[i];
    for (size_t k = 0; k < e.attached_devices.size(); ++k) {
      const std::string path = IndexPath(IndexPath("ecus", i) + ".attached_devices", k);
      const std::string &dev = e.attached_devices[k];
      if (t.FindDevice(dev) == nullptr) {
        Throw(ErrorCode::kSchema, path, "unknown device '" + dev + "'");
      }
      if (!attached_to.emplace(dev, e.id).second) {
        Throw(ErrorCode::kInvariant, path, "device attached to more than one ECU");
      }
    }
  }
  for (size_t i = 0; i < t.devices.size(); ++i) {
    const Device &d = t.devices[i];
    const std::string path = IndexPath("devices", i);
    claim(d.id, path + ".id");
    const Link *bus = t.FindLink(d.bus);
    if (bus == nullptr) {
      Throw(ErrorCode::kSchema, path + ".bus", "unknown link '" + d.bus + "'");
    }
    auto it = attached_to.find(d.id);
    if (it != attached_to.end() && bus->endpoint_a != it->second && bus->endpoint_b != it->second) {
      Throw(ErrorCode::kInvariant, path + ".bus", "bus does not reach the attaching ECU");
    }
  }
  if (!std::isfinite(t.timing.clock_sync_error_us) || t.timing.clock_sync_error_us < 0.0) {
    Throw(ErrorCode::kInvariant, "timing.clock_sync_error_us", "must be >= 0");
  }
  if (!std::isfinite(t.timing.sporadic_interval_ms) || t.timing.sporadic_interval_ms <= 0.0) {
    Throw(ErrorCode::kInvariant, "timing.sporadic_interval_ms", "must be > 0");
  }

  // Connectivity over all links regardless of medium.
  if (nodes.empty()) {
    return;
  }
  std::map<std::string, std::vector<std::string>> adj;
  for (const Link &l : t.links) {
    adj[l.endpoint_a].push_back(l.endpoint_b);
    adj[l.endpoint_b].push_back(l.endpoint_a);
  }
  const std::string &start = !t.ecus.empty() ? t.ecus.front().id : t.switches.front().id;
  std::set<std::string> seen{start};
  std::queue<std::string> frontier;
  frontier.push(start);
  while (!frontier.empty()) {
    const std::string n = frontier.front();
    frontier.pop();
    for (const auto &m : adj[n]) {
      if (seen.insert(m).second) {
        frontier.push(m);
      }
    }
  }
  std::vector<std::string> unreachable;
  for (const auto &n : nodes) {
    if (seen.count(n) == 0) {
      unreachable.push_back(n);
    }
  }
  if (!unreachable.empty()) {
    std::string list;
    for (const auto &n : unreachable) {
      list += (list.empty() ? "" : ",") + n;
    }
    Throw(ErrorCode::kDisconnected, list, "unreachable from '" + start + "': " + list);
  }
}

namespace {

template <typename Fn>
void ForEachTableInArray(const toml::array *array, const std::string &path, Fn &&fn) {
  if (array == nullptr) {
    return;
  }
  for (size_t i = 0; i < array->size(); ++i) {
    const toml::node &node = *array->get(i);
    const std::string item_path = IndexPath(path, i);
    if (!node.is_table()) {
      Throw(ErrorCode::kSchema, item_path, "expected table");
    }
    TableReader reader(*node.as_table(), item_path);
    fn(reader);
    reader.Finish();
  }
}

}  // namespace

TopologyDescriptor ParseTopologyDescriptor(std::string_view text) {
  const toml::table root = ParseToml(text);
  TableReader r(root, "");
  TopologyDescriptor t;

  if (const toml::table *timing = r.OptionalTable("timing")) {
    TableReader tr(*timing, "timing");
    t.timing.clock_sync_error_us =
        tr.OptionalNumber("clock_sync_error_us").value_or(t.timing.clock_sync_error_us);
    t.timing.sporadic_interval_ms =
        tr.OptionalNumber("sporadic_interval_ms").value_or(t.timing.sporadic_interval_ms);
    tr.Finish();
  }

  ForEachTableInArray(r.OptionalArray("ecus"), "ecus", [&](TableReader &e) {
    EcuNode ecu;
    ecu.id = e.RequiredString("id");
    ecu.cpu_cores = e.RequiredInt("cpu_cores");
    ecu.memory_mib = e.RequiredInt("memory");
    ecu.storage_bytes = e.RequiredInt("storage");
    ecu.gpu = e.OptionalBool("gpu").value_or(false);
    ecu.energy_class = e.OptionalInt("energy_class").value_or(0);
    if (const toml::array *devs = e.OptionalArray("attached_devices")) {
      for (size_t i = 0; i < devs->size(); ++i) {
        const toml::node &n = *devs->get(i);
        if (!n.is_string()) {
          Throw(ErrorCode::kSchema, IndexPath(e.PathOf("attached_devices"), i), "expected string");
        }
        ecu.attached_devices.push_back(n.as_string()->get());
      }
    }
    t.ecus.push_back(std::move(ecu));
  });

  // Switch ports may be omitted; they are derived from incident links after
  // all links are known.
  std::vector<std::optional<bool>> auto_ports;
  ForEachTableInArray(r.OptionalArray("switches"), "switches", [&](TableReader &s) {
    SwitchNode sw;
    sw.id = s.RequiredString("id");
    sw.processing_delay_us = s.OptionalNumber("processing_delay_us").value_or(0.0);
    const std::optional<bool> default_tsn = s.OptionalBool("tsn_capable");
    const toml::array *ports = s.OptionalArray("ports");
    ForEachTableInArray(ports, s.PathOf("ports"), [&](TableReader &p) {
      SwitchPort port;
      port.id = p.RequiredString("id");
      port.link = p.RequiredString("link");
      port.tsn_capable = p.OptionalBool("tsn_capable").value_or(default_tsn.value_or(true));
      port.queues = static_cast<int>(p.OptionalInt("queues").value_or(kQueuesPerPort));
      sw.ports.push_back(std::move(port));
    });
    auto_ports.push_back(ports == nullptr ? std::optional<bool>(default_tsn.value_or(true))
                                          : std::nullopt);
    t.switches.push_back(std::move(sw));
  });

  ForEachTableInArray(r.OptionalArray("links"), "links", [&](TableReader &l) {
    Link link;
    link.id = l.RequiredString("id");
    link.endpoint_a = l.RequiredString("a");
    link.endpoint_b = l.RequiredString("b");
    link.rate_bps = l.RequiredInt("rate_bps");
    link.propagation_delay_us = l.OptionalNumber("propagation_delay_us").value_or(0.0);
    const std::string medium = l.OptionalString("medium").value_or("ETHERNET");
    if (medium == "ETHERNET") {
      link.medium = LinkMedium::kEthernet;
    } else if (medium == "CAN") {
      link.medium = LinkMedium::kCan;
    } else {
      Throw(ErrorCode::kSchema, l.PathOf("medium"), "medium must be ETHERNET or CAN");
    }
    t.links.push_back(std::move(link));
  });

  ForEachTableInArray(r.OptionalArray("devices"), "devices", [&](TableReader &d) {
    Device dev;
    dev.id = d.RequiredString("id");
    const std::string kind = d.RequiredString("kind");
    if (kind == "SENSOR") {
      dev.kind = DeviceKind::kSensor;
    } else if (kind == "ACTUATOR") {
      dev.kind = DeviceKind::kActuator;
    } else {
      Throw(ErrorCode::kSchema, d.PathOf("kind"), "kind must be SENSOR or ACTUATOR");
    }
    dev.bus = d.RequiredString("bus");
    t.devices.push_back(std::move(dev));
  });
  r.Finish();

  for (size_t i = 0; i < t.switches.size(); ++i) {
    if (!auto_ports[i]) {
      continue;
    }
    SwitchNode &sw = t.switches[i];
    for (const Link &l : t.links) {
      if (l.endpoint_a == sw.id || l.endpoint_b == sw.id) {
        sw.ports.push_back(SwitchPort{l.id, l.id, *auto_ports[i], kQueuesPerPort});
      }
    }
  }

  Validate(t);
  return t;
}

std::string Serialize(const TopologyDescriptor &t) {
  std::ostringstream out;
  out << "[timing]\n";
  out << "clock_sync_error_us = " << Number(t.timing.clock_sync_error_us) << "\n";
  out << "sporadic_interval_ms = " << Number(t.timing.sporadic_interval_ms) << "\n";
  for (const EcuNode &e : t.ecus) {
    out << "\n[[ecus]]\n";
    out << "id = " << Quote(e.id) << "\n";
    out << "cpu_cores = " << e.cpu_cores << "\n";
    out << "memory = " << e.memory_mib << "\n";
    out << "storage = " << e.storage_bytes << "\n";
    out << "gpu = " << Bool(e.gpu) << "\n";
    out << "energy_class = " << e.energy_class << "\n";
    out << "attached_devices = [";
    for (size_t i = 0; i < e.attached_devices.size(); ++i) {
      out << (i == 0 ? "" : ", ") << Quote(e.attached_devices[i]);
    }
    out << "]\n";
  }
  for (const SwitchNode &s : t.switches) {
    out << "\n[[switches]]\n";
    out << "id = " << Quote(s.id) << "\n";
    out << "processing_delay_us = " << Number(s.processing_delay_us) << "\n";
    out << "ports = [\n";
    for (const SwitchPort &p : s.ports) {
      out << "  { id = " << Quote(p.id) << ", link = " << Quote(p.link)
          << ", tsn_capable = " << Bool(p.tsn_capable) << ", queues = " << p.queues << " },\n";
    }
    out << "]\n";
  }
  for (const Link &l : t.links) {
    out << "\n[[links]]\n";
    out << "id = " << Quote(l.id) << "\n";
    out << "a = " << Quote(l.endpoint_a) << "\n";
    out << "b = " << Quote(l.endpoint_b) << "\n";
    out << "rate_bps = " << l.rate_bps << "\n";
    out << "propagation_delay_us = " << Number(l.propagation_delay_us) << "\n";
    out << "medium = " << Quote(LinkMediumName(l.medium)) << "\n";
  }
  for (const Device &d : t.devices) {
    out << "\n[[devices]]\n";
    out << "id = " << Quote(d.id) << "\n";
    out << "kind = " << Quote(DeviceKindName(d.kind)) << "\n";
    out << "bus = " << Quote(d.bus) << "\n";
  }
  return out.str();
}

std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, path, "cannot open file");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detsdv
