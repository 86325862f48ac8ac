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

#include "detsdv/error.h"
#include "detsdv/tsn_config.h"

namespace detsdv {

namespace {

// Busy periods longer than this are treated as unbounded.
constexpr Nanos kDivergence = 10 * kNanosPerSecond;
constexpr int kMaxJitterRounds = 1000;

Nanos CeilDiv(Nanos a, Nanos b) { return (a + b - 1) / b; }

/// One traversal of one port by one flow path.
struct Visit {
  const PlannedFlow *flow;
  size_t path;
  size_t hop;
  std::vector<Nanos> frame_tx;
  Nanos train_tx = 0;
  Nanos max_frame_tx = 0;
  Nanos jitter = 0;
  Nanos response = 0;
  bool diverged = false;
};

/// Fixed values of one hop for a given flow path.
struct HopFacts {
  Nanos processing;
  Nanos propagation;
  std::vector<Nanos> tx;
};

std::vector<HopFacts> Facts(const PlannedFlow &flow, const Path &path,
                            const TopologyDescriptor &topology) {
  std::vector<HopFacts> out;
  for (size_t h = 0; h < path.hops(); ++h) {
    const Link &link = *topology.FindLink(path.links[h]);
    HopFacts f{h == 0 ? 0 : topology.ProcessingNanos(path.nodes[h]),
               MicrosToNanos(link.propagation_delay_us),
               {}};
    for (const auto payload : flow.fragments) {
      f.tx.push_back(FragmentTxNanos(link, payload, flow.priority));
    }
    out.push_back(std::move(f));
  }
  return out;
}

/// Latency of a message that never queues behind anything but itself.
Nanos NoQueueMinimum(const std::vector<HopFacts> &facts) {
  Nanos total = 0;
  for (size_t h = 0; h < facts.size(); ++h) {
    total += facts[h].processing + facts[h].propagation;
    if (h == 0) {
      for (const Nanos t : facts[h].tx) {
        total += t;
      }
    } else {
      total += facts[h].tx.back();
    }
  }
  return total;
}

std::vector<HopBound> ScheduledPath(const PlannedFlow &flow, const Path &path,
                                    const FlowSchedule &schedule,
                                    const std::vector<HopFacts> &facts,
                                    const ScheduleOptions &options) {
  const size_t last = flow.fragments.size() - 1;
  // Aperiodic messages may just miss the standing slot and wait a full interval.
  const Nanos release = flow.periodic ? flow.offset : schedule.hops[0].phase - flow.interval;
  std::vector<HopBound> hops;
  Nanos arrival = 0;
  for (size_t h = 0; h < path.hops(); ++h) {
    const HopWindow &w = schedule.hops[h];
    const HopFacts &f = facts[h];
    const Nanos ready = h == 0 ? release : arrival + f.processing;
    Nanos ahead = 0;
    for (size_t j = 0; j < last; ++j) {
      ahead += f.tx[j];
    }
    HopBound b{path.nodes[h], path.links[h], f.processing, w.phase + ahead - ready,
               f.tx[last], f.propagation};
    arrival = w.phase + ahead + f.tx[last] + f.propagation;
    hops.push_back(b);
  }
  // Clock offsets can delay the final delivery by up to 2 epsilon.
  hops.back().queuing += 2 * options.clock_sync_error;
  return hops;
}

}  // namespace

BoundAnalysis::BoundAnalysis(const std::vector<PlannedFlow> &flows, const GclSynthesis &synthesis,
                             const std::vector<CbsParams> &cbs,
                             const TopologyDescriptor &topology, const ScheduleOptions &options) {
  std::map<PortRef, std::vector<Visit>> visits;
  for (const auto &flow : flows) {
    if (IsScheduledClass(flow.cls) || flow.route.paths.empty() || flow.interval <= 0) {
      continue;
    }
    for (size_t p = 0; p < flow.route.paths.size(); ++p) {
      const Path &path = flow.route.paths[p];
      for (size_t h = 0; h < path.hops(); ++h) {
        const Link &link = *topology.FindLink(path.links[h]);
        Visit v{&flow, p, h, {}, 0, 0, 0, 0, false};
        for (const auto payload : flow.fragments) {
          v.frame_tx.push_back(FragmentTxNanos(link, payload, flow.priority));
          v.train_tx += v.frame_tx.back();
          v.max_frame_tx = std::max(v.max_frame_tx, v.frame_tx.back());
        }
        visits[path.Egress(h)].push_back(std::move(v));
      }
    }
  }

  auto cbs_for = [&](const PortRef &port) -> const CbsParams * {
    for (const auto &c : cbs) {
      if (c.port == port) {
        return &c;
      }
    }
    return nullptr;
  };

  // Response time of every visit at its port given the current jitters.
  auto solve_port = [&](const PortRef &port, std::vector<Visit> &list) {
    const Link &link = *topology.FindLink(port.link);
    const GateControlList *gcl = synthesis.FindGcl(port);
    const Nanos exclusive = gcl != nullptr ? gcl->ExclusiveTimePerCycle() : 0;
    const Nanos cycle = gcl != nullptr ? gcl->cycle_time : 1;
    const CbsParams *shaper = cbs_for(port);
    for (Visit &v : list) {
      const int prio = v.flow->priority;
      Nanos blocking = 0;
      Nanos stream_max_frame = 0;
      for (const Visit &o : list) {
        if (o.flow->priority < prio) {
          blocking = std::max(blocking, o.max_frame_tx);
        }
        if (o.flow->cls == TrafficClass::kStream) {
          stream_max_frame = std::max(stream_max_frame, o.max_frame_tx);
        }
      }
      const bool shaped = shaper != nullptr && v.flow->cls == TrafficClass::kStream;
      // Under CBS a frame of tx time t costs t * rate / idle of credit. Credit
      // keeps accruing while a lower-priority frame holds the link, so that
      // blocking is paid once, after the credit of the backlog is earned.
      auto cost = [&](const Visit &o) {
        if (!shaped) {
          return o.train_tx;
        }
        Nanos c = 0;
        for (const Nanos t : o.frame_tx) {
          c += static_cast<Nanos>((static_cast<__int128>(t) * link.rate_bps +
                                   shaper->idle_slope_bps - 1) /
                                  shaper->idle_slope_bps);
        }
        return c;
      };
      Nanos base = blocking;
      if (shaped) {
        base += static_cast<Nanos>(
            (static_cast<__int128>(stream_max_frame) * (link.rate_bps - shaper->idle_slope_bps) +
             shaper->idle_slope_bps - 1) /
            shaper->idle_slope_bps);
      }
      Nanos w = base + cost(v);
      v.diverged = false;
      for (;;) {
        Nanos next = base + exclusive * (w / cycle + 1);
        for (const Visit &o : list) {
          if (o.flow->priority < prio) {
            continue;
          }
          if (shaped && o.flow->cls != TrafficClass::kStream) {
            continue;
          }
          next += CeilDiv(w + o.jitter, o.flow->interval) * cost(o);
        }
        if (next > kDivergence) {
          v.diverged = true;
          break;
        }
        if (next == w) {
          break;
        }
        w = next;
      }
      v.response = v.diverged ? kDivergence : w;
    }
  };

  // Holistic iteration: jitter at a hop is the accumulated queuing upstream.
  bool settled = false;
  for (int round = 0; round < kMaxJitterRounds && !settled; ++round) {
    for (auto &[port, list] : visits) {
      solve_port(port, list);
    }
    std::map<std::tuple<std::string, size_t, size_t>, Nanos> slack;
    for (const auto &[port, list] : visits) {
      for (const Visit &v : list) {
        slack[{v.flow->id, v.path, v.hop}] = v.response - v.frame_tx.back();
      }
    }
    settled = true;
    for (auto &[port, list] : visits) {
      for (Visit &v : list) {
        Nanos j = 0;
        for (size_t h = 0; h < v.hop; ++h) {
          j += slack[{v.flow->id, v.path, h}];
        }
        j = std::min(j, kDivergence);
        if (j != v.jitter) {
          v.jitter = j;
          settled = false;
        }
      }
    }
  }

  std::map<std::tuple<std::string, size_t, size_t>, const Visit *> index;
  for (const auto &[port, list] : visits) {
    for (const Visit &v : list) {
      index[{v.flow->id, v.path, v.hop}] = &v;
    }
  }

  for (const auto &flow : flows) {
    if (flow.route.paths.empty()) {
      continue;
    }
    const bool scheduled = IsScheduledClass(flow.cls);
    WorstCaseBound bound{flow.id, {}, 0, 0, true, {}};
    bool complete = true;
    Nanos best = -1;
    for (size_t p = 0; p < flow.route.paths.size(); ++p) {
      const Path &path = flow.route.paths[p];
      const auto facts = Facts(flow, path, topology);
      std::vector<HopBound> hops;
      Nanos path_best = NoQueueMinimum(facts);
      if (scheduled) {
        const FlowSchedule *schedule = synthesis.Find(flow.id, p);
        if (schedule == nullptr || schedule->hops.size() != path.hops()) {
          complete = false;
          break;
        }
        hops = ScheduledPath(flow, path, *schedule, facts, options);
      } else if (flow.interval <= 0) {
        complete = false;
        break;
      } else {
        for (size_t h = 0; h < path.hops(); ++h) {
          const Visit &v = *index.at({flow.id, p, h});
          if (v.diverged || !settled) {
            bound.bounded = false;
          }
          const Nanos tx = facts[h].tx.back();
          hops.push_back(HopBound{path.nodes[h], path.links[h], facts[h].processing,
                                  v.response - tx, tx, facts[h].propagation});
        }
      }
      Nanos total = 0;
      for (const auto &h : hops) {
        total += h.Sum();
      }
      if (scheduled) {
        Nanos lower = total - 4 * options.clock_sync_error - (flow.periodic ? 0 : flow.interval);
        path_best = std::max(path_best, lower);
      }
      bound.path_totals.push_back(total);
      if (total > bound.total || bound.per_hop.empty()) {
        bound.total = total;
        bound.per_hop = std::move(hops);
      }
      best = best < 0 ? path_best : std::min(best, path_best);
    }
    if (!complete) {
      continue;
    }
    bound.best_case = best;
    bounds_.emplace(flow.id, std::move(bound));
  }
}

const WorstCaseBound &BoundAnalysis::For(std::string_view flow_id) const {
  auto it = bounds_.find(std::string(flow_id));
  if (it == bounds_.end()) {
    throw Error(ErrorCode::kUnscheduledFlow, std::string(flow_id),
                "no bound for flow " + std::string(flow_id));
  }
  return it->second;
}

}  // namespace detsdv
