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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.h"
#include "detsdv/error.h"
#include "detsdv/interop.h"
#include "detsdv/netsim.h"
#include "detsdv/orchestrator.h"
#include "detsdv/pipeline.h"
#include "detsdv/report.h"
#include "support.h"

namespace detsdv::testing {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::vector<Nanos> Latencies(const std::vector<TraceRecord> &trace, const std::string &flow_id) {
  std::map<std::uint64_t, std::pair<Nanos, Nanos>> frames;
  for (const auto &r : trace) {
    if (r.flow_id != flow_id || r.fate != FrameFate::kDelivered || !r.departure) {
      continue;
    }
    auto [it, fresh] = frames.try_emplace(r.frame_id, r.created_at, *r.departure);
    if (!fresh) {
      it->second.second = std::max(it->second.second, *r.departure);
    }
  }
  std::vector<Nanos> out;
  for (const auto &[_, v] : frames) {
    out.push_back(v.second - v.first);
  }
  return out;
}

// --- 1: 5QI truth table ---------------------------------------------------

Outcome FiveQiTable() {
  // Deadline, jitter, bandwidth -> expected resource type.
  struct Row {
    bool d, j, b;
    ResourceType type;
  };
  const std::vector<Row> rows = {
      {false, false, false, ResourceType::kNonGbr}, {false, false, true, ResourceType::kNonGbr},
      {false, true, false, ResourceType::kGbr},     {false, true, true, ResourceType::kDcGbr},
      {true, false, false, ResourceType::kGbr},     {true, false, true, ResourceType::kDcGbr},
      {true, true, false, ResourceType::kGbr},      {true, true, true, ResourceType::kDcGbr},
  };
  int ok = 0;
  for (const auto &row : rows) {
    TrafficTimeSpec time;
    if (row.d) {
      time.max_latency_ms = 10;
    }
    if (row.j) {
      time.jitter_ms = 1;
    }
    TrafficSpec traffic;
    traffic.time = time;
    const FiveQiProfile p = MapTo5qi(FlowConstraintVector{row.d, row.j, row.b}, time, traffic);
    ok += p.resource_type == row.type ? 1 : 0;
  }
  return {ok == 8, std::to_string(ok) + "/8 rows"};
}

// --- 2: 100 us over 5 hops ------------------------------------------------

Outcome FiveHopLatency() {
  const TopologyDescriptor topo = LoadTopology("topology_5hop.toml");
  // Hand sum: 100 B payload + 38 B overhead + 4 B tag = 1136 bits = 1136 ns
  // at 1 Gbit/s on each of 5 links; 4 switches at 2 us; 5 x 0.1 us of wire.
  const Nanos expected = 5 * 1136 + 4 * 2000 + 5 * 100;
  ScheduleOptions options = ScheduleOptionsFrom(topo.timing);
  const TsnConfig config =
      Configure({MakeFlow("ctl", TrafficClass::kControl, 100, kNanosPerMilli, true,
                          RouteOf(topo, "ctl", "ecu_talker", "ecu_listener"))},
                topo, options);
  SimConfig sim;
  sim.clock_sync_error = 0;
  sim.duration = kNanosPerSecond;
  const SimResult result = Simulator(topo, config, sim).Run();
  const std::vector<Nanos> lat = Latencies(result.trace, "ctl");
  if (lat.empty()) {
    return {false, "no deliveries"};
  }
  const Nanos worst = *std::max_element(lat.begin(), lat.end());
  const bool pass = worst <= 100'000 && worst == expected && lat.size() >= 999;
  return {pass, "observed max " + std::to_string(worst) + " ns, hand sum " +
                    std::to_string(expected) + " ns, " + std::to_string(lat.size()) +
                    " frames"};
}

// --- 3: exclusive-window isolation ----------------------------------------

Outcome WindowIsolation() {
  std::ostringstream detail;
  bool pass = true;
  Nanos worst_eps0 = 0;
  Nanos worst_eps1 = 0;
  for (const Nanos eps : {Nanos{0}, kNanosPerMicro}) {
    TopologyDescriptor topo = LoadTopology("topology_5hop.toml");
    ScheduleOptions options = ScheduleOptionsFrom(topo.timing);
    options.clock_sync_error = eps;
    const FlowRoute route = RouteOf(topo, "x", "ecu_talker", "ecu_listener");
    for (int point = 1; point <= 10; ++point) {
      // Best-effort offered load from 10% to 100% of the line rate.
      const Nanos be_wire = (1500 + 38) * 8;
      const Nanos be_interval = be_wire * 10 / point;
      std::vector<PlannedFlow> flows{
          MakeFlow("ctl", TrafficClass::kControl, 100, kNanosPerMilli, true, route),
          MakeFlow("be", TrafficClass::kBestEffort, 1500, be_interval, true, route, 3001)};
      const TsnConfig config = Configure(flows, topo, options);
      SimConfig sim;
      sim.clock_sync_error = eps;
      sim.duration = 200 * kNanosPerMilli;
      sim.seed = static_cast<std::uint64_t>(point);
      const SimResult result = Simulator(topo, config, sim).Run();
      const std::vector<Nanos> lat = Latencies(result.trace, "ctl");
      const FlowMetrics *be = result.metrics.Find("be");
      if (lat.size() < 199 || be == nullptr || be->delivered == 0) {
        pass = false;
        detail << "eps=" << eps << " point " << point << " starved; ";
        continue;
      }
      const auto [lo, hi] = std::minmax_element(lat.begin(), lat.end());
      const Nanos jitter = *hi - *lo;
      (eps == 0 ? worst_eps0 : worst_eps1) = std::max(eps == 0 ? worst_eps0 : worst_eps1, jitter);
    }
  }
  pass = pass && worst_eps0 == 0 && worst_eps1 <= 2 * kNanosPerMicro;
  detail << "max jitter " << worst_eps0 << " ns at eps=0, " << worst_eps1
         << " ns at eps=1us over 10 load points";
  return {pass, detail.str()};
}

// --- 4: bound soundness ---------------------------------------------------

struct RandomScenario {
  TopologyDescriptor topology;
  std::vector<PlannedFlow> flows;
  ScheduleOptions options;
};

RandomScenario MakeRandomScenario(std::mt19937_64 &rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int ecus = pick(2, 5);
  const int switches = pick(1, 3);
  const double eps_us = pick(0, 1);
  std::ostringstream t;
  t << "[timing]\nclock_sync_error_us = " << eps_us << "\nsporadic_interval_ms = 1.0\n";
  for (int i = 0; i < ecus; ++i) {
    t << "[[ecus]]\nid = \"e" << i << "\"\ncpu_cores = 4\nmemory = 4096\nstorage = 1000000\n";
  }
  for (int i = 0; i < switches; ++i) {
    t << "[[switches]]\nid = \"s" << i << "\"\nprocessing_delay_us = " << pick(1, 5) << "\n";
  }
  const std::int64_t rates[] = {100'000'000, 1'000'000'000};
  int link = 0;
  auto add = [&](const std::string &a, const std::string &b) {
    t << "[[links]]\nid = \"k" << link++ << "\"\na = \"" << a << "\"\nb = \"" << b
      << "\"\nrate_bps = " << rates[pick(0, 1)] << "\npropagation_delay_us = " << pick(0, 5) * 0.1
      << "\n";
  };
  for (int i = 1; i < switches; ++i) {
    add("s" + std::to_string(pick(0, i - 1)), "s" + std::to_string(i));
  }
  for (int i = 0; i < ecus; ++i) {
    add("e" + std::to_string(i), "s" + std::to_string(pick(0, switches - 1)));
  }
  RandomScenario s;
  s.topology = ParseTopologyDescriptor(t.str());
  s.options = ScheduleOptionsFrom(s.topology.timing);
  const int flows = pick(1, 4);
  const TrafficClass classes[] = {TrafficClass::kControl, TrafficClass::kStream,
                                  TrafficClass::kService, TrafficClass::kBestEffort};
  const Nanos periods[] = {kNanosPerMilli, 2 * kNanosPerMilli, 5 * kNanosPerMilli,
                           10 * kNanosPerMilli};
  for (int i = 0; i < flows; ++i) {
    const int src = pick(0, ecus - 1);
    int dst = pick(0, ecus - 2);
    dst += dst >= src ? 1 : 0;
    const TrafficClass cls = classes[pick(0, 3)];
    const bool periodic = IsScheduledClass(cls) ? pick(0, 3) != 0 : pick(0, 1) != 0;
    const Nanos interval = periodic ? periods[pick(0, 3)] : s.options.sporadic_interval;
    const std::string id = "f" + std::to_string(i);
    s.flows.push_back(MakeFlow(id, cls, pick(46, 3000), interval, periodic,
                               RouteOf(s.topology, id, "e" + std::to_string(src),
                                       "e" + std::to_string(dst)),
                               periodic ? pick(0, 500) * kNanosPerMicro : 0));
  }
  return s;
}

Outcome BoundSoundness() {
  std::mt19937_64 rng(20260214);
  int scenarios = 0;
  int flows_checked = 0;
  int violations = 0;
  int attempts = 0;
  std::string first;
  while (scenarios < 200 && attempts < 5000) {
    ++attempts;
    RandomScenario s = MakeRandomScenario(rng);
    TsnConfig config;
    try {
      config = Configure(s.flows, s.topology, s.options);
    } catch (const Error &) {
      continue;
    }
    ++scenarios;
    SimConfig sim;
    sim.clock_sync_error = s.options.clock_sync_error;
    sim.duration = 100 * kNanosPerMilli;
    sim.aperiodic_mean_interval = 2 * kNanosPerMilli;
    sim.seed = static_cast<std::uint64_t>(attempts);
    const SimResult result = Simulator(s.topology, config, sim).Run();
    for (const auto &f : config.flows) {
      const WorstCaseBound &bound = config.bounds.at(f.id);
      if (!bound.bounded) {
        continue;
      }
      ++flows_checked;
      const std::vector<Nanos> lat = Latencies(result.trace, f.id);
      const Nanos worst = lat.empty() ? 0 : *std::max_element(lat.begin(), lat.end());
      if (worst > bound.total) {
        ++violations;
        if (first.empty()) {
          first = "; first: attempt " + std::to_string(attempts) + " " + f.id + " " +
                  std::string(TrafficClassName(f.cls)) + " observed " + std::to_string(worst) +
                  " > bound " + std::to_string(bound.total);
        }
      }
    }
  }
  return {scenarios >= 200 && violations == 0 && flows_checked > 0,
          std::to_string(scenarios) + " scenarios, " + std::to_string(flows_checked) +
              " admitted flows, " + std::to_string(violations) + " violations" + first};
}

// --- 5: FRER under a path failure -----------------------------------------

Outcome FrerFailover() {
  const TopologyDescriptor topo = LoadTopology("topology_3ecu.toml");
  const DeploymentPlan plan = BuildPlan({LoadService("wheelchair.toml")}, topo);
  if (plan.tsn.frer.empty()) {
    return {false, "no replicated flow in the plan"};
  }
  const std::string flow = plan.tsn.frer.front().flow_id;
  const PlannedFlow *planned = plan.tsn.FindFlow(flow);
  const std::string cut = planned->route.paths[0].links.back();
  auto delivered = [&](bool fail, std::int64_t &duplicates_delivered) {
    SimConfig sim;
    sim.duration = kNanosPerSecond;
    sim.seed = 5;
    if (fail) {
      sim.failures.push_back(LinkFailure{cut, 500 * kNanosPerMilli, std::nullopt});
    }
    const SimResult r = Simulator(topo, plan.tsn, sim).Run();
    std::map<std::uint64_t, int> seen;
    std::set<std::uint64_t> frames;
    for (const auto &rec : r.trace) {
      if (rec.flow_id == flow && rec.fate == FrameFate::kDelivered &&
          frames.insert(rec.frame_id).second) {
        ++seen[rec.seq];
      }
    }
    duplicates_delivered = 0;
    std::set<std::uint64_t> seqs;
    for (const auto &[seq, n] : seen) {
      duplicates_delivered += n - 1;
      seqs.insert(seq);
    }
    return seqs;
  };
  std::int64_t dup_ref = 0;
  std::int64_t dup_fail = 0;
  const std::set<std::uint64_t> reference = delivered(false, dup_ref);
  const std::set<std::uint64_t> failed = delivered(true, dup_fail);
  const bool pass = !reference.empty() && reference == failed && dup_fail == 0 && dup_ref == 0;
  return {pass, flow + ": " + std::to_string(failed.size()) + "/" +
                    std::to_string(reference.size()) + " sequence numbers with " + cut +
                    " down from 500 ms, " + std::to_string(dup_fail) + " duplicates delivered"};
}

// --- 6: CBS long-run throughput -------------------------------------------

Outcome CbsThroughput() {
  const TopologyDescriptor topo = LineTopology(1, 1'000'000'000, 2.0, 0.1);
  const ScheduleOptions options = ScheduleOptionsFrom(topo.timing);
  // Offered: one 1542-byte tagged frame every 10 us, about 1.23 Gbit/s.
  std::vector<PlannedFlow> flows{
      MakeFlow("video", TrafficClass::kStream, 1500, 10 * kNanosPerMicro, true,
               RouteOf(topo, "video", "ecu_talker", "ecu_listener"))};
  TsnConfig config;
  config.options = options;
  config.synthesis = SynthesizeGcl(flows, topo, options);
  const std::int64_t idle = 300'000'000;
  const PortRef port{"ecu_talker", "l1"};
  config.cbs.push_back(CbsParams{port, 5, idle, idle - 1'000'000'000});
  config.flows = flows;
  SimConfig sim;
  sim.duration = kNanosPerSecond;
  const SimResult r = Simulator(topo, config, sim).Run();
  double observed = 0;
  for (const auto &p : r.metrics.ports) {
    if (p.port == port) {
      observed = p.throughput_bps;
    }
  }
  const double ratio = observed / static_cast<double>(idle);
  std::ostringstream d;
  d << "port throughput " << observed / 1e6 << " Mbit/s vs idle slope " << idle / 1e6
    << " Mbit/s (ratio " << ratio << ")";
  return {std::abs(ratio - 1.0) <= 0.05, d.str()};
}

// --- 7: scenario fixtures -------------------------------------------------

Outcome ScenarioFixtures() {
  const TopologyDescriptor topo = LoadTopology("topology_3hop.toml");
  const DeploymentPlan plan =
      BuildPlan({LoadService("cam.toml"), LoadService("ctlta.toml")}, topo);
  struct Case {
    std::string sim;
    std::string flow;
    double latency_ms, reliability;
    std::int64_t bytes;
  };
  // Use-case table rows.
  const std::vector<Case> cases = {
      {"sim_cam.toml", "ContextAwareManeuvering/Mcm", 50, 0.99, 100},
      {"sim_ctlta.toml", "CrossTrafficLeftTurnAssist/Warning", 10, 0.999, 1000},
  };
  bool pass = plan.AllAdmitted();
  std::ostringstream d;
  for (const auto &c : cases) {
    const SimConfig sim = ParseSimConfig(ReadFile(FixturePath(c.sim)));
    const FlowExpectation &e = sim.expect.at(c.flow);
    const bool constants = e.max_latency_ms == c.latency_ms && e.reliability == c.reliability &&
                           e.message_size == c.bytes && plan.tsn.FindFlow(c.flow) != nullptr &&
                           plan.tsn.FindFlow(c.flow)->message_bytes == c.bytes;
    const SimResult r = Simulator(topo, plan.tsn, sim).Run();
    ScenarioFixture fixture{sim.name, sim.expect, {}};
    for (const auto &f : plan.tsn.flows) {
      fixture.message_bytes[f.id] = f.message_bytes;
    }
    const Verdict v = Evaluate(fixture, r.metrics);
    const FlowMetrics *m = r.metrics.Find(c.flow);
    pass = pass && constants && v.pass;
    d << sim.name << " " << (v.pass ? "pass" : "fail");
    if (m != nullptr && m->latency) {
      d << " (max " << NanosToMicros(m->latency->max) << " us, ratio "
        << m->delivery_ratio.value_or(0) << ")";
    }
    d << (constants ? "" : " constants mismatch") << "; ";
  }
  return {pass, d.str()};
}

// --- 8: placement against brute force -------------------------------------

double Weight(CriticalityLevel level) {
  return level == CriticalityLevel::kMust ? 1.0 : level == CriticalityLevel::kShould ? 0.5 : 0.25;
}

// Independent oracle of the scoring rule: weighted mean of r / (r + q) over
// requested capacities, GPU counting 1 or 0 when requested.
std::pair<bool, double> OracleScore(const NodeSpec &spec, const EcuNode &ecu, const Capacity &r) {
  double num = 0;
  double den = 0;
  bool feasible = true;
  auto field = [&](const char *name, double q, double have) {
    if (q <= 0) {
      return;
    }
    const Criticality c = CriticalityOf(spec.criticality, name);
    have = std::max(have, 0.0);
    num += Weight(c.level) * have / (have + q);
    den += Weight(c.level);
    if (have < q && (c.level == CriticalityLevel::kMust || 1.0 - have / q > c.slack)) {
      feasible = false;
    }
  };
  field("CPU", static_cast<double>(spec.cpu), static_cast<double>(r.cpu));
  field("Memory", static_cast<double>(spec.memory_mib), static_cast<double>(r.memory_mib));
  field("Storage", static_cast<double>(spec.storage_bytes), static_cast<double>(r.storage_bytes));
  if (spec.gpu) {
    const Criticality c = CriticalityOf(spec.criticality, "GPU");
    num += ecu.gpu ? Weight(c.level) : 0.0;
    den += Weight(c.level);
    if (!ecu.gpu && (c.level == CriticalityLevel::kMust || c.slack < 1.0)) {
      feasible = false;
    }
  }
  return {feasible, den > 0 ? num / den : 1.0};
}

// Best summed score over every anti-affine assignment of every role of
// `flow`, roles placed in order against a shrinking residual.
double BruteForce(const FlowSpec &flow, size_t role, const TopologyDescriptor &topo,
                  std::map<std::string, Capacity> residual) {
  if (role == flow.node_specs.size()) {
    return 0;
  }
  const NodeSpec &spec = flow.node_specs[role].spec;
  const size_t n = topo.ecus.size();
  double best = -1;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != spec.replicas) {
      continue;
    }
    double sum = 0;
    bool ok = true;
    auto next = residual;
    for (size_t i = 0; i < n && ok; ++i) {
      if ((mask & (1u << i)) == 0) {
        continue;
      }
      const EcuNode &e = topo.ecus[i];
      const auto [feasible, score] = OracleScore(spec, e, residual.at(e.id));
      ok = feasible;
      sum += score;
      Capacity &c = next.at(e.id);
      c.cpu -= std::min(spec.cpu, c.cpu);
      c.memory_mib -= std::min(spec.memory_mib, c.memory_mib);
      c.storage_bytes -= std::min(spec.storage_bytes, c.storage_bytes);
    }
    if (!ok) {
      continue;
    }
    const double rest = BruteForce(flow, role + 1, topo, next);
    if (rest >= 0) {
      best = std::max(best, sum + rest);
    }
  }
  return best;
}

Outcome PlacementOracle() {
  const std::vector<std::string> topologies = {"topology_3ecu.toml", "topology_3hop.toml",
                                               "topology_5hop.toml"};
  const std::vector<std::string> services = {"wheelchair.toml", "cam.toml", "ctlta.toml",
                                             "rvh.toml", "software_update.toml",
                                             "speed_harmonisation.toml"};
  int compared = 0;
  int mismatched = 0;
  std::string first;
  for (const auto &tname : topologies) {
    const TopologyDescriptor topo = LoadTopology(tname);
    for (const auto &sname : services) {
      const ServiceDescriptor service = LoadService(sname);
      Placer placer(topo);
      for (const auto &flow : service.flows) {
        const Residual before = placer.plan().residual;
        const double oracle = BruteForce(flow, 0, topo, before);
        bool placed = true;
        try {
          placer.PlaceFlow(flow.id, flow);
        } catch (const Error &) {
          placed = false;
        }
        bool anti_affine = placed;
        double greedy = 0;
        if (placed) {
          Residual r = before;
          for (const auto &role : flow.node_specs) {
            std::set<std::string> ecus;
            const auto replicas = placer.plan().Replicas(flow.id, role.name);
            for (const Assignment *a : replicas) {
              ecus.insert(a->ecu_id);
              greedy += OracleScore(role.spec, *topo.FindEcu(a->ecu_id), r.at(a->ecu_id)).second;
            }
            anti_affine = anti_affine && ecus.size() == replicas.size();
            for (const Assignment *a : replicas) {
              Capacity &c = r.at(a->ecu_id);
              c.cpu -= std::min(role.spec.cpu, c.cpu);
              c.memory_mib -= std::min(role.spec.memory_mib, c.memory_mib);
              c.storage_bytes -= std::min(role.spec.storage_bytes, c.storage_bytes);
            }
          }
        }
        ++compared;
        // No anti-affine assignment exists: greedy must refuse or co-locate.
        const bool agree = oracle < 0 ? !anti_affine
                                      : placed && anti_affine && std::abs(greedy - oracle) < 1e-9;
        if (!agree) {
          ++mismatched;
          if (first.empty()) {
            first = "; first: " + sname + " on " + tname + " flow " + flow.id;
          }
        }
      }
    }
  }
  return {mismatched == 0 && compared > 0, std::to_string(compared) + " flow placements, " +
                                               std::to_string(mismatched) + " mismatches" + first};
}

// --- 9: gatewaying invertibility ------------------------------------------

std::vector<GatewayFrame> RandomFrames(std::mt19937_64 &rng) {
  std::uniform_int_distribution<int> count(0, 120);
  std::uniform_int_distribution<int> dlc(0, 8);
  std::uniform_int_distribution<std::uint32_t> id(0, kMaxCanId);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> gap(0, 4000);
  std::vector<GatewayFrame> frames(static_cast<size_t>(count(rng)));
  std::uint64_t at = static_cast<std::uint64_t>(gap(rng));
  for (auto &f : frames) {
    f.can_id = id(rng);
    f.dlc = static_cast<std::uint8_t>(dlc(rng));
    for (int i = 0; i < f.dlc; ++i) {
      f.payload.push_back(static_cast<std::uint8_t>(byte(rng)));
    }
    at += static_cast<std::uint64_t>(gap(rng));
    f.capture_time_us = at;
  }
  return frames;
}

Outcome GatewayRoundTrip() {
  std::mt19937_64 rng(9);
  int failures[3] = {0, 0, 0};
  auto concat = [](const std::vector<GatewayPayload> &payloads, bool &fits) {
    std::vector<GatewayFrame> out;
    for (const auto &p : payloads) {
      fits = fits && p.bytes.size() <= static_cast<size_t>(kMtuBytes);
      const auto part = Unpack(p.bytes);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  };
  for (int i = 0; i < 10'000; ++i) {
    const std::vector<GatewayFrame> frames = RandomFrames(rng);
    bool fits = true;
    failures[0] += concat(PackPeriodicSnapshot(frames, 10'000), fits) == frames && fits ? 0 : 1;
    fits = true;
    failures[1] += concat(PackAll(frames), fits) == frames && fits ? 0 : 1;
    std::vector<GatewayFrame> single;
    for (const auto &f : frames) {
      const auto part = Unpack(PackOneToOne(f));
      single.insert(single.end(), part.begin(), part.end());
    }
    failures[2] += single == frames ? 0 : 1;
  }
  // Saturation: 80 dlc=8 frames fill one payload with 1500 / 21 = 71 records.
  std::vector<GatewayFrame> full;
  for (std::uint32_t i = 0; i < 80; ++i) {
    full.push_back(GatewayFrame{i, 8, std::vector<std::uint8_t>(8, 0xAB), i});
  }
  const auto packed = PackAll(full);
  const bool saturated = !packed.empty() && packed[0].records == 71 &&
                         packed[0].bytes.size() == 71 * 21 &&
                         Unpack(packed[0].bytes).size() == 71;
  const bool pass = failures[0] == 0 && failures[1] == 0 && failures[2] == 0 && saturated;
  return {pass, "round-trip failures snapshot/all/1:1 = " + std::to_string(failures[0]) + "/" +
                    std::to_string(failures[1]) + "/" + std::to_string(failures[2]) +
                    " of 10000; saturated payload " +
                    (packed.empty() ? std::string("none") : std::to_string(packed[0].records)) +
                    " records"};
}

// --- 10: determinism ------------------------------------------------------

std::string Slurp(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome Determinism() {
  const std::vector<std::string> files = {"placement.json", "tsn_config.json", "trace.ndjson",
                                          "metrics.json"};
  std::vector<std::map<std::string, std::string>> runs;
  for (int run = 0; run < 2; ++run) {
    const std::string out = ScratchDir("determinism" + std::to_string(run));
    const int plan = RunCli({"plan", "--service", FixturePath("cam.toml"), "--service",
                             FixturePath("ctlta.toml"), "--service", FixturePath("rvh.toml"),
                             "--topology", FixturePath("topology_3hop.toml"), "--out", out});
    const int sim = RunCli({"simulate", "--topology", FixturePath("topology_3hop.toml"), "--sim",
                            FixturePath("sim_cam.toml"), "--sim", FixturePath("sim_ctlta.toml"),
                            "--sim", FixturePath("sim_failure.toml"), "--out", out, "--seed",
                            "42"});
    if (plan != kExitOk || (sim != kExitOk && sim != kExitVerdict)) {
      return {false, "pipeline exit codes " + std::to_string(plan) + "/" + std::to_string(sim)};
    }
    std::map<std::string, std::string> contents;
    for (const auto &f : files) {
      contents[f] = Slurp(std::filesystem::path(out) / f);
    }
    runs.push_back(std::move(contents));
    std::filesystem::remove_all(out);
  }
  int identical = 0;
  for (const auto &f : files) {
    identical += !runs[0][f].empty() && runs[0][f] == runs[1][f] ? 1 : 0;
  }
  return {identical == 4, std::to_string(identical) + "/4 artifacts byte-identical"};
}

}  // namespace
}  // namespace detsdv::testing

int main() {
  using namespace detsdv::testing;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"5QI truth table", FiveQiTable},
      {"TSN latency goal, 5 hops", FiveHopLatency},
      {"exclusive-window isolation", WindowIsolation},
      {"bound soundness", BoundSoundness},
      {"FRER failover", FrerFailover},
      {"CBS throughput", CbsThroughput},
      {"scenario fixtures", ScenarioFixtures},
      {"placement oracle", PlacementOracle},
      {"gatewaying invertibility", GatewayRoundTrip},
      {"determinism", Determinism},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first
              << " (" << secs << " s): " << o.detail << std::endl;
  }
  return failed;
}
