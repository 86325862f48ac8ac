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
#include <optional>
#include <set>

#include "detsdv/error.h"
#include "detsdv/tsn_config.h"

namespace detsdv {

namespace {

/// Occupancy of one reservation: [start, start + length) every `period`.
struct Reservation {
  Nanos start;
  Nanos length;
  Nanos period;
  Nanos guard;
  std::uint8_t mask;
};

Nanos Mod(Nanos a, Nanos m) {
  const Nanos r = a % m;
  return r < 0 ? r + m : r;
}

/// Forward shift of `x` that clears the overlap with `y`, 0 if disjoint.
/// Two periodic intervals collide iff their start difference modulo the
/// gcd of the periods falls inside (-|y|, |x|).
Nanos ShiftToClear(const Reservation &x, const Reservation &y) {
  const Nanos g = Gcd(x.period, y.period);
  const Nanos d = Mod(y.start - x.start, g);
  if (d >= x.length && d <= g - y.length) {
    return 0;
  }
  const Nanos shift = Mod(d + y.length, g);
  return shift == 0 ? g : shift;
}

/// A frame of some flow may sit in its queue over [start, start + length)
/// every `period`, waiting for its own window.
struct Wait {
  Nanos start;
  Nanos length;
  Nanos period;
  std::uint8_t mask;
};

struct PortState {
  std::vector<Reservation> reserved;
  std::vector<Wait> waits;
  Nanos cycle = 0;
};

/// Open part of a reservation, as a reservation without guard.
Reservation Opening(const Reservation &r) {
  return Reservation{r.start + r.guard, r.length - r.guard, r.period, 0, r.mask};
}

Reservation AsReservation(const Wait &w) {
  return Reservation{w.start, w.length, w.period, 0, w.mask};
}

Nanos GuardBand(const Link &link, const ScheduleOptions &options) {
  return std::max(TransmissionNanos(kMaxWireBytes * 8, link.rate_bps),
                  2 * options.clock_sync_error);
}

}  // namespace

bool IsTsnEgress(const TopologyDescriptor &topology, const PortRef &port) {
  const Link *link = topology.FindLink(port.link);
  if (link == nullptr || link->medium != LinkMedium::kEthernet) {
    return false;
  }
  if (topology.FindEcu(port.node) != nullptr) {
    return true;
  }
  const SwitchNode *sw = topology.FindSwitch(port.node);
  if (sw == nullptr) {
    return false;
  }
  const SwitchPort *p = sw->PortForLink(port.link);
  return p != nullptr && p->tsn_capable;
}

Nanos GateControlList::ExclusiveTimePerCycle() const {
  Nanos total = 0;
  for (const auto &e : entries) {
    if ((e.open_queues & kResidualMask) == 0) {
      total += e.duration;
    }
  }
  return total;
}

const FlowSchedule *GclSynthesis::Find(std::string_view flow_id, size_t path_index) const {
  for (const auto &s : schedules) {
    if (s.flow_id == flow_id && s.path_index == path_index) {
      return &s;
    }
  }
  return nullptr;
}

const GateControlList *GclSynthesis::FindGcl(const PortRef &port) const {
  for (const auto &g : gcls) {
    if (g.port == port) {
      return &g;
    }
  }
  return nullptr;
}

namespace {

struct PortCommit {
  PortRef port;
  Reservation reservation;
  Wait wait;
  Nanos cycle;
};

struct PathPlacement {
  FlowSchedule schedule;
  std::vector<PortCommit> commits;
};

/// First-fit windows along one path with the first window at least `delay`
/// after the release. Returns nothing after raising `delay` for a retry.
std::optional<PathPlacement> PlacePath(const PlannedFlow &flow, const Path &path,
                                       size_t path_index,
                                       const std::map<PortRef, PortState> &ports,
                                       const TopologyDescriptor &topology,
                                       const ScheduleOptions &options, Nanos &delay) {
  auto infeasible = [&](const PortRef &port, const std::string &why) {
    return Error(ErrorCode::kInfeasibleSchedule, flow.id,
                 "cannot schedule " + flow.id + " on " + port.ToString() + ": " + why);
  };
  const Nanos eps2 = 2 * options.clock_sync_error;
  const std::uint8_t mask = static_cast<std::uint8_t>(1u << flow.priority);
  const PortState empty;
  PathPlacement out{FlowSchedule{flow.id, path_index, {}}, {}};
  // Nominal end of transmission of each fragment at the previous hop.
  std::vector<Nanos> prev_tx_end;
  for (size_t h = 0; h < path.hops(); ++h) {
    const PortRef port = path.Egress(h);
    if (!IsTsnEgress(topology, port)) {
      throw infeasible(port, "port is not TSN-capable");
    }
    const Link &link = *topology.FindLink(port.link);
    std::vector<Nanos> tx;
    Nanos duration = eps2;
    for (const auto payload : flow.fragments) {
      tx.push_back(FragmentTxNanos(link, payload, flow.priority));
      duration += tx.back();
    }
    const Nanos guard = GuardBand(link, options);
    if (guard + duration > flow.interval) {
      throw infeasible(port, "window and guard band exceed the interval");
    }

    // Earliest window start, and when the first fragment enters the queue.
    // Held aperiodic messages enter the queue as their window opens.
    Nanos earliest = (flow.periodic ? flow.offset : 0) + delay;
    std::optional<Nanos> queued;
    if (h == 0 && flow.periodic) {
      queued = flow.offset;
    }
    if (h > 0) {
      const Link &in = *topology.FindLink(path.links[h - 1]);
      const Nanos hop_delay =
          MicrosToNanos(in.propagation_delay_us) + topology.ProcessingNanos(port.node);
      Nanos before = 0;
      earliest = 0;
      for (size_t i = 0; i < tx.size(); ++i) {
        earliest = std::max(earliest, prev_tx_end[i] + hop_delay - before);
        before += tx[i];
      }
      queued = prev_tx_end[0] + hop_delay;
    }

    auto found = ports.find(port);
    const PortState &state = found == ports.end() ? empty : found->second;
    const Nanos cycle = state.cycle == 0
                            ? flow.interval
                            : LcmCapped(state.cycle, flow.interval, options.hyperperiod_cap);
    if (cycle < 0 || cycle > options.hyperperiod_cap) {
      throw infeasible(port, "cycle exceeds the hyperperiod cap");
    }

    Reservation candidate{earliest - guard, guard + duration, flow.interval, guard, mask};
    Wait wait{0, 0, flow.interval, mask};
    bool moved = true;
    while (moved) {
      moved = false;
      for (const auto &r : state.reserved) {
        const Nanos shift = ShiftToClear(candidate, r);
        if (shift > 0) {
          candidate.start += shift;
          moved = true;
        }
      }
      // Our window must not open while another flow's frame waits here.
      for (const auto &w : state.waits) {
        if (w.mask != mask) {
          continue;
        }
        const Nanos shift = ShiftToClear(Opening(candidate), AsReservation(w));
        if (shift > 0) {
          candidate.start += shift;
          moved = true;
        }
      }
      const Nanos phase = candidate.start + guard;
      if (phase - earliest >= flow.interval) {
        throw infeasible(port, "no free window within one period");
      }
      if (queued) {
        const Nanos from = *queued - eps2;
        wait = Wait{from, phase - from, flow.interval, mask};
        if (wait.length + duration > flow.interval) {
          throw infeasible(port, "waiting time leaves no room in the period");
        }
      }
    }
    // Nor may our frame wait while another window opens the same queue.
    if (wait.length > 0) {
      for (const auto &r : state.reserved) {
        if (r.mask != mask) {
          continue;
        }
        const Nanos shift = ShiftToClear(AsReservation(wait), Opening(r));
        if (shift == 0) {
          continue;
        }
        if (h == 0) {
          throw infeasible(port, "the release waits across another window of its queue");
        }
        delay += shift;
        if (delay >= flow.interval) {
          throw infeasible(port, "no window sequence avoids the windows of its queue");
        }
        return std::nullopt;
      }
    }

    const Nanos phase = candidate.start + guard;
    out.schedule.hops.push_back(HopWindow{port, phase, duration, guard});
    out.commits.push_back(PortCommit{port, candidate, wait, cycle});
    prev_tx_end.clear();
    Nanos at = phase;
    for (const Nanos t : tx) {
      at += t;
      prev_tx_end.push_back(at);
    }
  }
  return out;
}

}  // namespace

GclSynthesis SynthesizeGcl(const std::vector<PlannedFlow> &flows,
                           const TopologyDescriptor &topology, const ScheduleOptions &options) {
  std::vector<const PlannedFlow *> order;
  for (const auto &f : flows) {
    if (IsScheduledClass(f.cls)) {
      order.push_back(&f);
    }
  }
  std::sort(order.begin(), order.end(), [](const PlannedFlow *a, const PlannedFlow *b) {
    const bool ac = a->cls == TrafficClass::kControl;
    const bool bc = b->cls == TrafficClass::kControl;
    if (ac != bc) {
      return ac;
    }
    if (a->interval != b->interval) {
      return a->interval < b->interval;
    }
    return a->id < b->id;
  });

  std::map<PortRef, PortState> ports;
  GclSynthesis out;
  for (const PlannedFlow *flow : order) {
    if (flow->interval <= 0) {
      throw Error(ErrorCode::kContract, flow->id, "scheduled flow without interval");
    }
    for (size_t p = 0; p < flow->route.paths.size(); ++p) {
      // A frame queued behind its own window must not face another window
      // that opens the same queue: FIFO order would hand that window to it.
      // When a downstream hop cannot avoid this, the first window is pushed
      // later and the path is placed again.
      Nanos delay = 0;
      std::optional<PathPlacement> placed;
      while (!placed) {
        placed = PlacePath(*flow, flow->route.paths[p], p, ports, topology, options, delay);
      }
      for (auto &[port, reservation, wait, cycle] : placed->commits) {
        PortState &state = ports[port];
        state.reserved.push_back(reservation);
        if (wait.length > 0) {
          state.waits.push_back(wait);
        }
        state.cycle = cycle;
      }
      out.schedules.push_back(std::move(placed->schedule));
    }
  }

  // Every TSN egress port gets a list, whether or not it carries windows.
  std::set<PortRef> all_ports;
  for (const auto &link : topology.links) {
    for (const auto *node : {&link.endpoint_a, &link.endpoint_b}) {
      PortRef port{*node, link.id};
      if (IsTsnEgress(topology, port)) {
        all_ports.insert(port);
      }
    }
  }
  for (const auto &port : all_ports) {
    GateControlList gcl{port, options.sporadic_interval, {}};
    auto it = ports.find(port);
    if (it == ports.end()) {
      gcl.entries.push_back(GclEntry{0, options.sporadic_interval, kAllQueuesMask});
      out.gcls.push_back(std::move(gcl));
      continue;
    }
    const PortState &state = it->second;
    gcl.cycle_time = state.cycle;
    // Guard and window pieces within one cycle, split at the cycle boundary.
    struct Piece {
      Nanos begin;
      Nanos end;
      std::uint8_t mask;
    };
    std::vector<Piece> pieces;
    auto add = [&](Nanos begin, Nanos length, std::uint8_t mask) {
      if (length <= 0) {
        return;
      }
      const Nanos b = Mod(begin, state.cycle);
      const Nanos e = b + length;
      if (e <= state.cycle) {
        pieces.push_back(Piece{b, e, mask});
      } else {
        pieces.push_back(Piece{b, state.cycle, mask});
        pieces.push_back(Piece{0, e - state.cycle, mask});
      }
    };
    for (const auto &r : state.reserved) {
      for (Nanos k = 0; k < state.cycle / r.period; ++k) {
        add(r.start + k * r.period, r.guard, 0);
        add(r.start + r.guard + k * r.period, r.length - r.guard, r.mask);
      }
    }
    std::sort(pieces.begin(), pieces.end(),
              [](const Piece &a, const Piece &b) { return a.begin < b.begin; });
    Nanos at = 0;
    for (const auto &piece : pieces) {
      if (piece.begin > at) {
        gcl.entries.push_back(GclEntry{at, piece.begin - at, kResidualMask});
      }
      gcl.entries.push_back(GclEntry{piece.begin, piece.end - piece.begin, piece.mask});
      at = piece.end;
    }
    if (at < state.cycle) {
      gcl.entries.push_back(GclEntry{at, state.cycle - at, kResidualMask});
    }
    out.gcls.push_back(std::move(gcl));
  }
  return out;
}

}  // namespace detsdv
