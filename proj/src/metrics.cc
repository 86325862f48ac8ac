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

#include <algorithm>
#include <cmath>
#include <set>

#include "detsdv/error.h"
#include "detsdv/netsim.h"

namespace detsdv {

namespace {

using Json = nlohmann::ordered_json;

struct FrameView {
  const TraceRecord *first = nullptr;
  const TraceRecord *last = nullptr;
  std::vector<const TraceRecord *> hops;
};

Json Micros(std::optional<Nanos> v) { return v ? Json(NanosToMicros(*v)) : Json(); }
Json Maybe(std::optional<double> v) { return v ? Json(*v) : Json(); }

Nanos ToNanos(const Json &us) { return static_cast<Nanos>(std::llround(us.get<double>() * 1e3)); }

std::optional<double> OptDouble(const Json &j, const char *key) {
  if (!j.contains(key) || j.at(key).is_null()) {
    return std::nullopt;
  }
  return j.at(key).get<double>();
}

}  // namespace

std::string_view FrameFateName(FrameFate fate) {
  switch (fate) {
  case FrameFate::kDelivered:
    return "delivered";
  case FrameFate::kDuplicate:
    return "duplicate";
  case FrameFate::kStale:
    return "stale";
  case FrameFate::kDroppedLink:
    return "dropped_link";
  case FrameFate::kDroppedOverflow:
    return "dropped_overflow";
  case FrameFate::kInFlight:
    return "in_flight";
  }
  return "in_flight";
}

FrameFate ParseFrameFate(std::string_view name) {
  for (auto f : {FrameFate::kDelivered, FrameFate::kDuplicate, FrameFate::kStale,
                 FrameFate::kDroppedLink, FrameFate::kDroppedOverflow, FrameFate::kInFlight}) {
    if (FrameFateName(f) == name) {
      return f;
    }
  }
  throw Error(ErrorCode::kSchema, "fate", "unknown frame fate " + std::string(name));
}

bool IsDropped(FrameFate fate) {
  return fate != FrameFate::kDelivered && fate != FrameFate::kInFlight;
}

const FlowMetrics *MetricsReport::Find(std::string_view flow_id) const {
  for (const auto &f : flows) {
    if (f.flow_id == flow_id) {
      return &f;
    }
  }
  return nullptr;
}

MetricsReport ComputeMetrics(const std::string &scenario, const std::vector<TraceRecord> &trace,
                             const std::vector<PlannedFlow> &flows, Nanos duration) {
  MetricsReport report;
  report.scenario = scenario;
  report.duration = duration;

  std::map<std::uint64_t, FrameView> frames;
  for (const auto &r : trace) {
    FrameView &v = frames[r.frame_id];
    v.hops.push_back(&r);
  }
  for (auto &[_, v] : frames) {
    std::sort(v.hops.begin(), v.hops.end(),
              [](const TraceRecord *a, const TraceRecord *b) { return a->hop < b->hop; });
    v.first = v.hops.front();
    v.last = v.hops.back();
  }

  std::map<std::string, std::vector<const FrameView *>> by_flow;
  for (const auto &f : flows) {
    by_flow[f.id];
  }
  for (const auto &[_, v] : frames) {
    by_flow[v.first->flow_id].push_back(&v);
    ++report.frames_created;
    const FrameFate fate = v.first->fate;
    if (fate == FrameFate::kDelivered) {
      ++report.delivered;
    } else if (fate == FrameFate::kInFlight) {
      ++report.in_flight_at_end;
    } else {
      ++report.dropped;
    }
  }

  const double seconds = static_cast<double>(duration) / static_cast<double>(kNanosPerSecond);
  for (const auto &[flow_id, views] : by_flow) {
    const PlannedFlow *planned = nullptr;
    for (const auto &f : flows) {
      if (f.id == flow_id) {
        planned = &f;
      }
    }
    const std::uint64_t per_message =
        planned != nullptr ? std::max<std::uint64_t>(planned->frames_per_message(), 1) : 1;
    FlowMetrics m;
    m.flow_id = flow_id;
    std::set<std::uint64_t> seqs;
    std::set<std::uint64_t> delivered_seqs;
    std::set<std::uint64_t> waiting_seqs;
    // (delivery time, latency, frame)
    std::vector<std::tuple<Nanos, Nanos, const FrameView *>> deliveries;
    double wire_bits = 0;
    for (const FrameView *v : views) {
      seqs.insert(v->first->seq);
      switch (v->first->fate) {
      case FrameFate::kDelivered: {
        ++m.delivered;
        delivered_seqs.insert(v->first->seq);
        const Nanos at = *v->last->departure;
        deliveries.emplace_back(at, at - v->first->created_at, v);
        wire_bits += static_cast<double>(v->last->wire_bits);
        break;
      }
      case FrameFate::kDuplicate:
        ++m.duplicates_discarded;
        break;
      case FrameFate::kInFlight:
        waiting_seqs.insert(v->first->seq);
        break;
      default:
        ++m.dropped;
        break;
      }
    }
    m.sent = static_cast<std::int64_t>(seqs.size());
    for (const auto s : waiting_seqs) {
      if (delivered_seqs.count(s) == 0) {
        ++m.pending;
      }
    }
    if (m.sent - m.pending > 0) {
      m.delivery_ratio = static_cast<double>(delivered_seqs.size()) /
                         static_cast<double>(m.sent - m.pending);
    }
    std::sort(deliveries.begin(), deliveries.end(), [](const auto &a, const auto &b) {
      if (std::get<0>(a) != std::get<0>(b)) {
        return std::get<0>(a) < std::get<0>(b);
      }
      return std::get<2>(a)->first->frame_id < std::get<2>(b)->first->frame_id;
    });
    if (!deliveries.empty()) {
      LatencyStats s;
      s.min = std::get<1>(deliveries.front());
      s.max = s.min;
      double sum = 0;
      const FrameView *worst = std::get<2>(deliveries.front());
      for (const auto &[at, latency, v] : deliveries) {
        s.min = std::min(s.min, latency);
        if (latency > s.max ||
            (latency == s.max && v->first->frame_id < worst->first->frame_id)) {
          worst = v;
        }
        s.max = std::max(s.max, latency);
        sum += static_cast<double>(latency);
        if (planned != nullptr && planned->max_latency && latency > *planned->max_latency) {
          ++m.deadline_misses;
        }
      }
      s.mean = sum / static_cast<double>(deliveries.size());
      s.jitter = s.max - s.min;
      m.latency = s;
      m.miss_rate = static_cast<double>(m.deadline_misses) / static_cast<double>(deliveries.size());
      for (const TraceRecord *h : worst->hops) {
        m.worst_frame.push_back(HopBound{h->node, h->link, *h->queue_enter - h->arrival,
                                         *h->tx_start - *h->queue_enter,
                                         *h->tx_end - *h->tx_start, *h->departure - *h->tx_end});
      }
    }
    if (deliveries.size() >= 2) {
      Nanos max_gap = 0;
      double sum = 0;
      for (size_t i = 1; i < deliveries.size(); ++i) {
        const Nanos gap = std::get<0>(deliveries[i]) - std::get<0>(deliveries[i - 1]);
        max_gap = std::max(max_gap, gap);
        sum += static_cast<double>(gap);
      }
      m.inter_frame_mean = sum / static_cast<double>(deliveries.size() - 1);
      m.inter_frame_max = max_gap;
    }
    // A message completes when its last fragment arrives.
    std::vector<Nanos> completions;
    for (const auto &[at, latency, v] : deliveries) {
      if (v->first->seq % per_message == per_message - 1) {
        completions.push_back(at);
      }
    }
    if (planned != nullptr && planned->periodic && completions.size() >= 2) {
      Nanos worst = 0;
      for (size_t i = 1; i < completions.size(); ++i) {
        const Nanos off = completions[i] - completions[i - 1] - planned->interval;
        worst = std::max(worst, off < 0 ? -off : off);
      }
      m.period_offset = worst;
    }
    if (seconds > 0) {
      m.rate_hz = static_cast<double>(completions.size()) / seconds;
      m.throughput_bps = wire_bits / seconds;
    }
    report.flows.push_back(std::move(m));
  }

  // Queue occupancy per port: a frame is queued from queue_enter until it
  // starts transmission, is dropped at dequeue, or the run ends.
  std::map<PortRef, std::vector<std::pair<Nanos, int>>> occupancy;
  std::map<PortRef, double> sent_bits;
  for (const auto &[_, v] : frames) {
    for (const TraceRecord *h : v.hops) {
      const PortRef port{h->node, h->link};
      auto &changes = occupancy[port];
      sent_bits[port];
      if (!h->queue_enter) {
        continue;
      }
      const bool overflowed = h == v.last && v.last->fate == FrameFate::kDroppedOverflow;
      if (overflowed) {
        continue;
      }
      const Nanos begin = std::clamp<Nanos>(*h->queue_enter, 0, duration);
      const Nanos end = std::clamp<Nanos>(h->tx_start.value_or(duration), 0, duration);
      if (end > begin) {
        changes.emplace_back(begin, 1);
        changes.emplace_back(end, -1);
      }
      if (h->tx_end && *h->tx_end <= duration) {
        sent_bits[port] += static_cast<double>(h->wire_bits);
      }
    }
  }
  for (auto &[port, changes] : occupancy) {
    std::sort(changes.begin(), changes.end());
    PortMetrics pm;
    pm.port = port;
    std::int64_t len = 0;
    Nanos at = 0;
    double area = 0;
    for (const auto &[t, delta] : changes) {
      area += static_cast<double>(len) * static_cast<double>(t - at);
      at = t;
      len += delta;
      pm.max_queue_len = std::max(pm.max_queue_len, len);
    }
    pm.mean_queue_len = duration > 0 ? area / static_cast<double>(duration) : 0;
    pm.throughput_bps = seconds > 0 ? sent_bits[port] / seconds : 0;
    report.ports.push_back(pm);
  }
  return report;
}

Json MetricsReport::ToJson() const {
  Json j;
  j["schema"] = "v1";
  j["scenario"] = scenario;
  j["duration_ms"] = NanosToMillis(duration);
  j["global"] = {{"frames_created", frames_created},
                 {"delivered", delivered},
                 {"dropped", dropped},
                 {"in_flight_at_end", in_flight_at_end}};
  j["flows"] = Json::array();
  for (const auto &f : flows) {
    Json o;
    o["flow"] = f.flow_id;
    o["sent"] = f.sent;
    o["delivered"] = f.delivered;
    o["dropped"] = f.dropped;
    o["duplicates_discarded"] = f.duplicates_discarded;
    o["pending"] = f.pending;
    o["deadline_misses"] = f.deadline_misses;
    o["miss_rate"] = Maybe(f.miss_rate);
    o["delivery_ratio"] = Maybe(f.delivery_ratio);
    if (f.latency) {
      o["latency_us"] = {{"min", NanosToMicros(f.latency->min)},
                         {"mean", f.latency->mean / 1e3},
                         {"max", NanosToMicros(f.latency->max)},
                         {"jitter", NanosToMicros(f.latency->jitter)}};
    } else {
      o["latency_us"] = nullptr;
    }
    if (f.inter_frame_mean) {
      o["inter_frame_us"] = {{"mean", *f.inter_frame_mean / 1e3},
                             {"max", NanosToMicros(*f.inter_frame_max)}};
    } else {
      o["inter_frame_us"] = nullptr;
    }
    o["period_offset_us"] = Micros(f.period_offset);
    o["rate_hz"] = f.rate_hz;
    o["throughput_bps"] = f.throughput_bps;
    o["worst_frame"] = Json::array();
    for (const auto &h : f.worst_frame) {
      o["worst_frame"].push_back({{"node", h.node},
                                  {"link", h.link},
                                  {"processing_us", NanosToMicros(h.processing)},
                                  {"queuing_us", NanosToMicros(h.queuing)},
                                  {"transmission_us", NanosToMicros(h.transmission)},
                                  {"propagation_us", NanosToMicros(h.propagation)}});
    }
    j["flows"].push_back(std::move(o));
  }
  j["ports"] = Json::array();
  for (const auto &p : ports) {
    j["ports"].push_back({{"node", p.port.node},
                          {"link", p.port.link},
                          {"max_queue_len", p.max_queue_len},
                          {"mean_queue_len", p.mean_queue_len},
                          {"throughput_bps", p.throughput_bps}});
  }
  return j;
}

MetricsReport MetricsReport::FromJson(const Json &j) {
  if (j.value("schema", "") != "v1") {
    throw Error(ErrorCode::kSchema, "schema", "metrics schema must be v1");
  }
  MetricsReport r;
  r.scenario = j.at("scenario").get<std::string>();
  r.duration = static_cast<Nanos>(std::llround(j.at("duration_ms").get<double>() * 1e6));
  const Json &g = j.at("global");
  r.frames_created = g.at("frames_created").get<std::int64_t>();
  r.delivered = g.at("delivered").get<std::int64_t>();
  r.dropped = g.at("dropped").get<std::int64_t>();
  r.in_flight_at_end = g.at("in_flight_at_end").get<std::int64_t>();
  for (const Json &o : j.at("flows")) {
    FlowMetrics f;
    f.flow_id = o.at("flow").get<std::string>();
    f.sent = o.at("sent").get<std::int64_t>();
    f.delivered = o.at("delivered").get<std::int64_t>();
    f.dropped = o.at("dropped").get<std::int64_t>();
    f.duplicates_discarded = o.at("duplicates_discarded").get<std::int64_t>();
    f.pending = o.at("pending").get<std::int64_t>();
    f.deadline_misses = o.at("deadline_misses").get<std::int64_t>();
    f.miss_rate = OptDouble(o, "miss_rate");
    f.delivery_ratio = OptDouble(o, "delivery_ratio");
    if (!o.at("latency_us").is_null()) {
      const Json &l = o.at("latency_us");
      f.latency = LatencyStats{ToNanos(l.at("min")), ToNanos(l.at("max")),
                               l.at("mean").get<double>() * 1e3, ToNanos(l.at("jitter"))};
    }
    if (!o.at("inter_frame_us").is_null()) {
      f.inter_frame_mean = o.at("inter_frame_us").at("mean").get<double>() * 1e3;
      f.inter_frame_max = ToNanos(o.at("inter_frame_us").at("max"));
    }
    if (!o.at("period_offset_us").is_null()) {
      f.period_offset = ToNanos(o.at("period_offset_us"));
    }
    f.rate_hz = o.at("rate_hz").get<double>();
    f.throughput_bps = o.at("throughput_bps").get<double>();
    for (const Json &h : o.at("worst_frame")) {
      f.worst_frame.push_back(HopBound{h.at("node").get<std::string>(),
                                       h.at("link").get<std::string>(),
                                       ToNanos(h.at("processing_us")), ToNanos(h.at("queuing_us")),
                                       ToNanos(h.at("transmission_us")),
                                       ToNanos(h.at("propagation_us"))});
    }
    r.flows.push_back(std::move(f));
  }
  for (const Json &p : j.at("ports")) {
    PortMetrics pm;
    pm.port = PortRef{p.at("node").get<std::string>(), p.at("link").get<std::string>()};
    pm.max_queue_len = p.at("max_queue_len").get<std::int64_t>();
    pm.mean_queue_len = p.at("mean_queue_len").get<double>();
    pm.throughput_bps = p.at("throughput_bps").get<double>();
    r.ports.push_back(pm);
  }
  return r;
}

}  // namespace detsdv
