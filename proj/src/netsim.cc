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

#include "detsdv/netsim.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <tuple>

#include "detsdv/error.h"

namespace detsdv {

namespace {

constexpr Nanos kNever = std::numeric_limits<Nanos>::max();
constexpr int kQueues = kQueuesPerPort;

Nanos Mod(Nanos a, Nanos m) {
  const Nanos r = a % m;
  return r < 0 ? r + m : r;
}

/// Uniform [0, 1) from 53 random bits; avoids library-specific distributions.
double Unit(std::mt19937_64 &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Nanos ExponentialNanos(std::mt19937_64 &rng, Nanos mean) {
  return static_cast<Nanos>(std::llround(-static_cast<double>(mean) * std::log1p(-Unit(rng))));
}

enum class Kind { kRelease, kEnqueue, kTxEnd, kArrive, kWake, kCanFrame, kGatewayTick };

struct Event {
  Nanos time;
  int node;
  int port;
  int priority;
  std::uint64_t frame_id;
  std::uint64_t counter;
  Kind kind;
  int a;
  std::int64_t b;

  // std::priority_queue pops the largest element.
  bool operator<(const Event &o) const {
    return std::make_tuple(time, node, port, -priority, frame_id, counter) >
           std::make_tuple(o.time, o.node, o.port, -o.priority, o.frame_id, o.counter);
  }
};

struct FlowState {
  const PlannedFlow *flow = nullptr;
  bool scheduled = false;
  /// Fed by a CAN gateway instead of its own release process.
  bool gateway = false;
  int source = -1;
  /// Port index per hop, per path.
  std::vector<std::vector<int>> ports;
  /// Hop-0 window phase per path, for held aperiodic messages.
  std::vector<Nanos> slot_phase;
  std::optional<SequenceRecovery> recovery;
  std::uint64_t next_seq = 0;
  std::mt19937_64 rng;
};

struct Copy {
  int flow;
  std::uint64_t seq;
  int member;
  std::int64_t payload;
  std::vector<TraceRecord> hops;
  FrameFate fate = FrameFate::kInFlight;
};

struct PortState {
  PortRef ref;
  int node = -1;
  int far = -1;
  const Link *link = nullptr;
  const GateControlList *gcl = nullptr;
  std::vector<Nanos> gcl_offsets;
  const CbsParams *cbs = nullptr;
  // Credit in bit-nanoseconds per second: slope [bit/s] x time [ns].
  __int128 credit = 0;
  Nanos credit_at = 0;
  bool cbs_sending = false;
  std::array<std::deque<int>, kQueues> queues;
  bool busy = false;
  Nanos pending_wake = std::numeric_limits<Nanos>::min();
};

struct GatewayState {
  const GatewaySpec *spec;
  Gateway gateway;
  int flow;
  int bridge;
  Nanos can_latency;
  std::mt19937_64 rng;
};

class Engine {
 public:
  Engine(const TopologyDescriptor &topology, const TsnConfig &config, const SimConfig &sim)
      : topology_(topology), config_(config), sim_(sim) {
    BuildNodes();
    BuildPorts();
    BuildFlows();
    BuildGateways();
  }

  SimResult Run() {
    for (size_t f = 0; f < flows_.size(); ++f) {
      ScheduleFirstRelease(static_cast<int>(f));
    }
    for (size_t g = 0; g < gateways_.size(); ++g) {
      auto &gw = gateways_[g];
      Push(Event{ExponentialNanos(gw.rng, gw.spec->frame_interval), gw.bridge, -1, 0, 0, 0,
                 Kind::kCanFrame, static_cast<int>(g), 0});
      if (gw.spec->options.strategy == GatewayStrategy::kPeriodicSnapshot) {
        Push(Event{static_cast<Nanos>(gw.spec->options.period_us) * kNanosPerMicro, gw.bridge, -1, 0,
                   0, 0, Kind::kGatewayTick, static_cast<int>(g), 0});
      }
    }
    while (!events_.empty()) {
      const Event e = events_.top();
      if (e.time >= sim_.duration) {
        break;
      }
      events_.pop();
      Dispatch(e);
    }
    SimResult result;
    for (auto &c : copies_) {
      for (auto &h : c.hops) {
        h.fate = c.fate;
        result.trace.push_back(std::move(h));
      }
    }
    result.metrics = ComputeMetrics(sim_.name, result.trace, planned_, sim_.duration);
    return result;
  }

 private:
  void BuildNodes() {
    std::vector<std::string> ids;
    for (const auto &e : topology_.ecus) {
      ids.push_back(e.id);
    }
    for (const auto &s : topology_.switches) {
      ids.push_back(s.id);
    }
    std::sort(ids.begin(), ids.end());
    std::mt19937_64 rng(sim_.seed);
    const Nanos eps = sim_.clock_sync_error;
    for (size_t i = 0; i < ids.size(); ++i) {
      node_index_[ids[i]] = static_cast<int>(i);
      const Nanos offset =
          eps == 0 ? 0 : static_cast<Nanos>(rng() % static_cast<std::uint64_t>(2 * eps + 1)) - eps;
      offsets_.push_back(offset);
    }
    node_ids_ = ids;
  }

  int NodeIndex(const std::string &id) const {
    auto it = node_index_.find(id);
    if (it == node_index_.end()) {
      throw Error(ErrorCode::kConfigMismatch, id, "unknown node " + id);
    }
    return it->second;
  }

  void BuildPorts() {
    std::vector<PortRef> refs;
    for (const auto &l : topology_.links) {
      refs.push_back(PortRef{l.endpoint_a, l.id});
      refs.push_back(PortRef{l.endpoint_b, l.id});
    }
    std::sort(refs.begin(), refs.end());
    for (const auto &ref : refs) {
      PortState p;
      p.ref = ref;
      p.link = topology_.FindLink(ref.link);
      p.node = NodeIndex(ref.node);
      p.far = NodeIndex(p.link->Peer(ref.node));
      p.gcl = config_.synthesis.FindGcl(ref);
      if (p.gcl != nullptr) {
        if (p.gcl->cycle_time <= 0 || p.gcl->entries.empty()) {
          throw Error(ErrorCode::kConfigMismatch, ref.ToString(), "empty gate control list");
        }
        for (const auto &e : p.gcl->entries) {
          p.gcl_offsets.push_back(e.offset);
        }
      }
      for (const auto &c : config_.cbs) {
        if (c.port == ref) {
          p.cbs = &c;
        }
      }
      port_index_[ref] = static_cast<int>(ports_.size());
      ports_.push_back(std::move(p));
    }
    for (const auto &g : config_.synthesis.gcls) {
      if (port_index_.count(g.port) == 0) {
        throw Error(ErrorCode::kConfigMismatch, g.port.ToString(), "GCL for unknown port");
      }
    }
    for (const auto &c : config_.cbs) {
      if (port_index_.count(c.port) == 0) {
        throw Error(ErrorCode::kConfigMismatch, c.port.ToString(), "CBS for unknown port");
      }
    }
  }

  int PortIndex(const PortRef &ref) const {
    auto it = port_index_.find(ref);
    if (it == port_index_.end()) {
      throw Error(ErrorCode::kConfigMismatch, ref.ToString(), "unknown port " + ref.ToString());
    }
    return it->second;
  }

  void AddFlow(const PlannedFlow &flow, std::uint64_t salt, bool gateway) {
    FlowState s;
    s.flow = &flow;
    s.gateway = gateway;
    s.scheduled = IsScheduledClass(flow.cls);
    s.source = NodeIndex(flow.route.source);
    for (size_t p = 0; p < flow.route.paths.size(); ++p) {
      const Path &path = flow.route.paths[p];
      std::vector<int> ports;
      for (size_t h = 0; h < path.hops(); ++h) {
        if (topology_.FindLink(path.links[h]) == nullptr) {
          throw Error(ErrorCode::kConfigMismatch, flow.id, "unknown link " + path.links[h]);
        }
        ports.push_back(PortIndex(path.Egress(h)));
      }
      s.ports.push_back(std::move(ports));
      Nanos phase = 0;
      if (s.scheduled) {
        const FlowSchedule *schedule = config_.synthesis.Find(flow.id, p);
        if (schedule == nullptr || schedule->hops.size() != path.hops()) {
          throw Error(ErrorCode::kConfigMismatch, flow.id, "scheduled flow without windows");
        }
        phase = schedule->hops[0].phase;
      }
      s.slot_phase.push_back(phase);
    }
    if (const FrerConfig *frer = config_.FindFrer(flow.id)) {
      s.recovery.emplace(frer->recovery_window);
    }
    std::seed_seq seq{sim_.seed, salt};
    s.rng.seed(seq);
    flows_.push_back(std::move(s));
  }

  void BuildFlows() {
    for (const auto &f : config_.flows) {
      if (f.route.paths.empty() || f.interval <= 0) {
        continue;
      }
      planned_.push_back(f);
    }
    for (const auto &gw : sim_.gateways) {
      PlannedFlow f;
      f.id = "gw:" + gw.id;
      f.cls = TrafficClass::kBestEffort;
      f.priority = gw.priority;
      f.message_bytes = static_cast<std::int64_t>(gw.options.max_payload);
      f.fragments = {f.message_bytes};
      f.periodic = false;
      f.interval = gw.frame_interval;
      f.route = Route(RouteRequest{f.id, gw.bridge, gw.destination, false, false, false}, topology_);
      planned_.push_back(std::move(f));
    }
    const size_t own = planned_.size() - sim_.gateways.size();
    for (size_t i = 0; i < planned_.size(); ++i) {
      AddFlow(planned_[i], i + 1, i >= own);
    }
  }

  void BuildGateways() {
    for (const auto &gw : sim_.gateways) {
      const Link *bus = topology_.FindLink(gw.bus);
      if (bus == nullptr || bus->medium != LinkMedium::kCan) {
        throw Error(ErrorCode::kConfigMismatch, gw.id, "gateway bus " + gw.bus + " is not a CAN link");
      }
      if (bus->endpoint_a != gw.bridge && bus->endpoint_b != gw.bridge) {
        throw Error(ErrorCode::kConfigMismatch, gw.id, "bridge " + gw.bridge + " is not on " + gw.bus);
      }
      int flow = -1;
      for (size_t i = 0; i < planned_.size(); ++i) {
        if (planned_[i].id == "gw:" + gw.id) {
          flow = static_cast<int>(i);
        }
      }
      std::seed_seq seq{sim_.seed, static_cast<std::uint64_t>(0x6777) + gateways_.size()};
      std::mt19937_64 rng(seq);
      gateways_.push_back(GatewayState{
          &gw, Gateway(gw.options), flow, NodeIndex(gw.bridge),
          TransmissionNanos(CanWireBits(kCanMaxDlc), bus->rate_bps) +
              MicrosToNanos(bus->propagation_delay_us),
          rng});
    }
  }

  void Push(Event e) {
    e.counter = counter_++;
    events_.push(e);
  }

  // --- failures --------------------------------------------------------

  bool LinkDown(const std::string &link, Nanos t) const {
    for (const auto &f : sim_.failures) {
      if (f.link == link && f.fail_at <= t && (!f.restore_at || t < *f.restore_at)) {
        return true;
      }
    }
    return false;
  }

  bool LinkDownDuring(const std::string &link, Nanos a, Nanos b) const {
    for (const auto &f : sim_.failures) {
      if (f.link == link && f.fail_at <= b && (!f.restore_at || *f.restore_at > a)) {
        return true;
      }
    }
    return false;
  }

  // --- gates -------------------------------------------------------------

  size_t EntryAt(const PortState &p, Nanos t, Nanos *pos) const {
    *pos = Mod(t + offsets_[p.node], p.gcl->cycle_time);
    auto it = std::upper_bound(p.gcl_offsets.begin(), p.gcl_offsets.end(), *pos);
    return static_cast<size_t>(it - p.gcl_offsets.begin()) - 1;
  }

  std::uint8_t GateMask(const PortState &p, Nanos t) const {
    if (p.gcl == nullptr) {
      return kAllQueuesMask;
    }
    Nanos pos = 0;
    return p.gcl->entries[EntryAt(p, t, &pos)].open_queues;
  }

  Nanos NextGateChange(const PortState &p, Nanos t) const {
    Nanos pos = 0;
    const GclEntry &e = p.gcl->entries[EntryAt(p, t, &pos)];
    return t + (e.offset + e.duration - pos);
  }

  // --- credit-based shaper -------------------------------------------------

  void UpdateCredit(PortState &p, Nanos t) {
    if (p.cbs == nullptr || t <= p.credit_at) {
      return;
    }
    const int q = p.cbs->queue;
    const __int128 idle = p.cbs->idle_slope_bps;
    if (p.cbs_sending) {
      p.credit += static_cast<__int128>(p.cbs->send_slope_bps) * (t - p.credit_at);
    } else if (!p.queues[q].empty()) {
      p.credit += idle * (t - p.credit_at);
    } else if (p.credit < 0) {
      p.credit = std::min<__int128>(0, p.credit + idle * (t - p.credit_at));
    } else {
      p.credit = 0;
    }
    p.credit_at = t;
  }

  // --- transmission --------------------------------------------------------

  void TryTransmit(int pi, Nanos t) {
    PortState &p = ports_[pi];
    if (p.busy) {
      return;
    }
    UpdateCredit(p, t);
    const std::uint8_t mask = GateMask(p, t);
    for (int q = kQueues - 1; q >= 0; --q) {
      auto &queue = p.queues[q];
      if (queue.empty() || ((mask >> q) & 1) == 0) {
        continue;
      }
      const bool shaped = p.cbs != nullptr && p.cbs->queue == q;
      if (shaped && p.credit < 0) {
        continue;
      }
      while (!queue.empty()) {
        const int ci = queue.front();
        queue.pop_front();
        Copy &c = copies_[ci];
        TraceRecord &rec = c.hops.back();
        rec.tx_start = t;
        if (LinkDown(p.ref.link, t)) {
          c.fate = FrameFate::kDroppedLink;
          continue;
        }
        const Link &link = *p.link;
        rec.wire_bits = FragmentWireBits(link, c.payload, flows_[c.flow].flow->priority);
        const Nanos end = t + TransmissionNanos(rec.wire_bits, link.rate_bps);
        rec.tx_end = end;
        p.busy = true;
        p.cbs_sending = shaped;
        Push(Event{end, p.node, pi, q, rec.frame_id, 0, Kind::kTxEnd, ci, 0});
        return;
      }
      if (shaped && p.credit > 0) {
        p.credit = 0;
      }
    }
    ScheduleWake(pi, t);
  }

  void ScheduleWake(int pi, Nanos t) {
    PortState &p = ports_[pi];
    bool waiting = false;
    for (const auto &q : p.queues) {
      waiting = waiting || !q.empty();
    }
    if (!waiting) {
      return;
    }
    Nanos wake = p.gcl != nullptr ? NextGateChange(p, t) : kNever;
    if (p.cbs != nullptr && !p.queues[p.cbs->queue].empty() && p.credit < 0) {
      const __int128 idle = p.cbs->idle_slope_bps;
      const Nanos need = static_cast<Nanos>((-p.credit + idle - 1) / idle);
      wake = std::min(wake, t + need);
    }
    if (wake == kNever) {
      return;
    }
    if (p.pending_wake <= t || wake < p.pending_wake) {
      p.pending_wake = wake;
      Push(Event{wake, p.node, pi, 0, 0, 0, Kind::kWake, pi, 0});
    }
  }

  void Enqueue(int ci, int pi, Nanos t) {
    PortState &p = ports_[pi];
    Copy &c = copies_[ci];
    TraceRecord &rec = c.hops.back();
    if (!rec.queue_enter) {
      rec.queue_enter = t;
    }
    const int q = flows_[c.flow].flow->priority;
    if (p.queues[q].size() >= sim_.queue_cap) {
      c.fate = FrameFate::kDroppedOverflow;
      return;
    }
    if (p.cbs != nullptr && p.cbs->queue == q) {
      UpdateCredit(p, t);
    }
    p.queues[q].push_back(ci);
    TryTransmit(pi, t);
  }

  void TxEnd(const Event &e) {
    PortState &p = ports_[e.port];
    if (p.cbs_sending) {
      UpdateCredit(p, e.time);
      p.cbs_sending = false;
      if (p.queues[p.cbs->queue].empty() && p.credit > 0) {
        p.credit = 0;
      }
    }
    p.busy = false;
    const Copy &c = copies_[e.a];
    Push(Event{e.time + MicrosToNanos(p.link->propagation_delay_us), p.far, -1,
               flows_[c.flow].flow->priority, c.hops.back().frame_id, 0, Kind::kArrive, e.a,
               0});
    TryTransmit(e.port, e.time);
  }

  void Arrive(const Event &e) {
    Copy &c = copies_[e.a];
    FlowState &f = flows_[c.flow];
    TraceRecord &rec = c.hops.back();
    if (LinkDownDuring(rec.link, *rec.tx_start, e.time)) {
      c.fate = FrameFate::kDroppedLink;
      return;
    }
    rec.departure = e.time;
    const Path &path = f.flow->route.paths[c.member];
    const size_t next = static_cast<size_t>(rec.hop) + 1;
    if (next == path.hops()) {
      if (!f.recovery) {
        c.fate = FrameFate::kDelivered;
        return;
      }
      switch (f.recovery->Accept(static_cast<std::uint16_t>(c.seq & 0xFFFF))) {
      case SequenceRecovery::Outcome::kAccept:
        c.fate = FrameFate::kDelivered;
        break;
      case SequenceRecovery::Outcome::kDuplicate:
        c.fate = FrameFate::kDuplicate;
        break;
      case SequenceRecovery::Outcome::kRogue:
        c.fate = FrameFate::kStale;
        break;
      }
      return;
    }
    TraceRecord hop = rec;
    hop.hop = static_cast<int>(next);
    hop.node = path.nodes[next];
    hop.link = path.links[next];
    hop.arrival = e.time;
    hop.queue_enter.reset();
    hop.tx_start.reset();
    hop.tx_end.reset();
    hop.departure.reset();
    hop.wire_bits = 0;
    c.hops.push_back(std::move(hop));
    const Nanos ready = e.time + topology_.ProcessingNanos(path.nodes[next]);
    const int pi = f.ports[c.member][next];
    Push(Event{ready, ports_[pi].node, pi, f.flow->priority, c.hops.back().frame_id, 0,
               Kind::kEnqueue, e.a, pi});
  }

  // --- sources ---------------------------------------------------------------

  void ScheduleFirstRelease(int fi) {
    FlowState &f = flows_[fi];
    if (f.gateway) {
      return;
    }
    if (f.flow->periodic) {
      // Instance k leaves at offset + k * interval on the talker's clock.
      PushRelease(fi, f.flow->offset - offsets_[f.source], 0);
    } else {
      const Nanos gap = std::max(f.flow->interval,
                                 ExponentialNanos(f.rng, sim_.aperiodic_mean_interval));
      PushRelease(fi, gap - offsets_[f.source], 0);
    }
  }

  void PushRelease(int fi, Nanos t, std::int64_t instance) {
    if (t >= sim_.duration) {
      return;
    }
    Push(Event{t, flows_[fi].source, -1, flows_[fi].flow->priority, 0, 0, Kind::kRelease, fi,
               instance});
  }

  void CreateMessage(int fi, Nanos t, const std::vector<std::int64_t> &fragments) {
    FlowState &f = flows_[fi];
    for (const auto payload : fragments) {
      const std::uint64_t seq = f.next_seq++;
      for (size_t p = 0; p < f.flow->route.paths.size(); ++p) {
        const Path &path = f.flow->route.paths[p];
        Copy c{fi, seq, static_cast<int>(p), payload, {}, FrameFate::kInFlight};
        TraceRecord rec;
        rec.frame_id = next_frame_id_++;
        rec.flow_id = f.flow->id;
        rec.seq = seq;
        rec.member = static_cast<int>(p);
        rec.created_at = t;
        rec.hop = 0;
        rec.node = path.nodes[0];
        rec.link = path.links[0];
        rec.arrival = t;
        rec.queue_enter = t;
        c.hops.push_back(std::move(rec));
        const int ci = static_cast<int>(copies_.size());
        copies_.push_back(std::move(c));
        const int pi = f.ports[p][0];
        if (f.scheduled && !f.flow->periodic) {
          // Held by the talker until the next standing slot on its own clock.
          const Nanos local = t + offsets_[f.source];
          const Nanos slot = local + Mod(f.slot_phase[p] - local, f.flow->interval);
          Push(Event{slot - offsets_[f.source], f.source, pi, f.flow->priority,
                     copies_[ci].hops[0].frame_id, 0, Kind::kEnqueue, ci, pi});
        } else {
          Enqueue(ci, pi, t);
        }
      }
    }
  }

  void Release(const Event &e) {
    const int fi = e.a;
    FlowState &f = flows_[fi];
    CreateMessage(fi, e.time, f.flow->fragments);
    if (f.flow->periodic) {
      const Nanos local = f.flow->offset + (e.b + 1) * f.flow->interval;
      PushRelease(fi, local - offsets_[f.source], e.b + 1);
    } else {
      const Nanos gap = std::max(f.flow->interval,
                                 ExponentialNanos(f.rng, sim_.aperiodic_mean_interval));
      PushRelease(fi, e.time + gap, e.b + 1);
    }
  }

  void EmitPayloads(GatewayState &gw, const std::vector<GatewayPayload> &payloads, Nanos t) {
    for (const auto &p : payloads) {
      CreateMessage(gw.flow, t, {static_cast<std::int64_t>(p.bytes.size())});
    }
  }

  void CanFrame(const Event &e) {
    GatewayState &gw = gateways_[e.a];
    GatewayFrame frame;
    frame.can_id = static_cast<std::uint32_t>(gw.rng() & 0x7FF);
    frame.dlc = kCanMaxDlc;
    for (int i = 0; i < kCanMaxDlc; ++i) {
      frame.payload.push_back(static_cast<std::uint8_t>(gw.rng()));
    }
    const Nanos at_bridge = e.time + gw.can_latency;
    frame.capture_time_us = static_cast<std::uint64_t>(std::max<Nanos>(at_bridge, 0) / kNanosPerMicro);
    const bool was_empty = gw.gateway.pending_records() == 0;
    EmitPayloads(gw, gw.gateway.Push(frame), at_bridge);
    const auto &o = gw.spec->options;
    if (o.strategy == GatewayStrategy::kAllPacking && o.flush_timeout_us != 0 && was_empty &&
        gw.gateway.pending_records() > 0) {
      Push(Event{at_bridge + static_cast<Nanos>(o.flush_timeout_us) * kNanosPerMicro, gw.bridge,
                 -1, 0, 0, 0, Kind::kGatewayTick, e.a, 0});
    }
    const Nanos gap = std::max<Nanos>(1, ExponentialNanos(gw.rng, gw.spec->frame_interval));
    Push(Event{e.time + gap, gw.bridge, -1, 0, 0, 0, Kind::kCanFrame, e.a, 0});
  }

  void GatewayTick(const Event &e) {
    GatewayState &gw = gateways_[e.a];
    EmitPayloads(gw, gw.gateway.Poll(static_cast<std::uint64_t>(e.time / kNanosPerMicro)), e.time);
    const auto &o = gw.spec->options;
    if (o.strategy == GatewayStrategy::kPeriodicSnapshot) {
      Push(Event{e.time + static_cast<Nanos>(o.period_us) * kNanosPerMicro, gw.bridge, -1, 0, 0, 0,
                 Kind::kGatewayTick, e.a, 0});
    }
  }

  void Dispatch(const Event &e) {
    switch (e.kind) {
    case Kind::kRelease:
      Release(e);
      break;
    case Kind::kEnqueue:
      Enqueue(e.a, static_cast<int>(e.b), e.time);
      break;
    case Kind::kTxEnd:
      TxEnd(e);
      break;
    case Kind::kArrive:
      Arrive(e);
      break;
    case Kind::kWake:
      if (ports_[e.a].pending_wake == e.time) {
        ports_[e.a].pending_wake = std::numeric_limits<Nanos>::min();
      }
      TryTransmit(e.a, e.time);
      break;
    case Kind::kCanFrame:
      CanFrame(e);
      break;
    case Kind::kGatewayTick:
      GatewayTick(e);
      break;
    }
  }

  const TopologyDescriptor &topology_;
  const TsnConfig &config_;
  const SimConfig &sim_;

  std::vector<std::string> node_ids_;
  std::map<std::string, int> node_index_;
  std::vector<Nanos> offsets_;
  std::vector<PortState> ports_;
  std::map<PortRef, int> port_index_;
  std::vector<PlannedFlow> planned_;
  std::vector<FlowState> flows_;
  std::vector<GatewayState> gateways_;
  std::vector<Copy> copies_;
  std::priority_queue<Event> events_;
  std::uint64_t counter_ = 0;
  std::uint64_t next_frame_id_ = 0;
};

}  // namespace

SequenceRecovery::SequenceRecovery(int window) : window_(std::max(window, 1)) {}

SequenceRecovery::Outcome SequenceRecovery::Accept(std::uint16_t seq) {
  if (take_any_) {
    take_any_ = false;
    recov_seq_ = seq;
    history_.assign(static_cast<size_t>(window_), false);
    history_[0] = true;
    return Outcome::kAccept;
  }
  const int delta = static_cast<std::int16_t>(static_cast<std::uint16_t>(seq - recov_seq_));
  if (std::abs(delta) >= window_) {
    return Outcome::kRogue;
  }
  if (delta <= 0) {
    if (history_[static_cast<size_t>(-delta)]) {
      return Outcome::kDuplicate;
    }
    history_[static_cast<size_t>(-delta)] = true;
    return Outcome::kAccept;
  }
  for (int i = 0; i < delta; ++i) {
    history_.push_front(false);
    history_.pop_back();
  }
  history_[0] = true;
  recov_seq_ = seq;
  return Outcome::kAccept;
}

Simulator::Simulator(const TopologyDescriptor &topology, const TsnConfig &config,
                     const SimConfig &sim)
    : topology_(topology), config_(config), sim_(sim) {
  for (const auto &f : sim_.failures) {
    if (topology_.FindLink(f.link) == nullptr) {
      throw Error(ErrorCode::kUnknownLink, f.link, "failure on unknown link " + f.link);
    }
  }
  // Surface configuration mismatches at construction.
  Engine probe(topology_, config_, sim_);
}

void Simulator::InjectFailure(const std::string &link, Nanos at) {
  if (topology_.FindLink(link) == nullptr) {
    throw Error(ErrorCode::kUnknownLink, link, "failure on unknown link " + link);
  }
  sim_.failures.push_back(LinkFailure{link, at, std::nullopt});
}

void Simulator::Restore(const std::string &link, Nanos at) {
  if (topology_.FindLink(link) == nullptr) {
    throw Error(ErrorCode::kUnknownLink, link, "restore of unknown link " + link);
  }
  for (auto &f : sim_.failures) {
    if (f.link == link && f.fail_at <= at && !f.restore_at) {
      f.restore_at = at;
      return;
    }
  }
}

SimResult Simulator::Run() {
  Engine engine(topology_, config_, sim_);
  return engine.Run();
}

}  // namespace detsdv
