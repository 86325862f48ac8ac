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

#include "detsdv/error.h"
#include "detsdv/tsn_config.h"

namespace detsdv {

std::vector<PortStreamLoad> StreamLoads(const std::vector<PlannedFlow> &flows,
                                        const TopologyDescriptor &topology) {
  std::map<PortRef, PortStreamLoad> loads;
  for (const auto &f : flows) {
    if (f.cls != TrafficClass::kStream || f.interval <= 0) {
      continue;
    }
    for (const auto &path : f.route.paths) {
      for (size_t h = 0; h < path.hops(); ++h) {
        const Link &link = *topology.FindLink(path.links[h]);
        if (link.medium != LinkMedium::kEthernet) {
          continue;
        }
        std::int64_t bits = 0;
        for (const auto payload : f.fragments) {
          bits += FragmentWireBits(link, payload, f.priority);
        }
        const PortRef port = path.Egress(h);
        auto [it, inserted] = loads.try_emplace(port, PortStreamLoad{port, link.rate_bps, 0});
        // Rounded up so the reserved rate never falls short of the demand.
        it->second.demand_bps += (bits * kNanosPerSecond + f.interval - 1) / f.interval;
      }
    }
  }
  std::vector<PortStreamLoad> out;
  for (auto &[_, load] : loads) {
    out.push_back(load);
  }
  return out;
}

std::vector<CbsParams> ComputeCbs(const std::vector<PortStreamLoad> &loads) {
  std::vector<CbsParams> out;
  for (const auto &load : loads) {
    if (load.demand_bps <= 0) {
      continue;
    }
    const std::int64_t idle = (load.demand_bps * 11 + 9) / 10;
    if (idle * 4 > load.link_rate_bps * 3) {
      throw Error(ErrorCode::kOversubscribed, load.port.ToString(),
                  "STREAM reservation of " + std::to_string(idle) + " bit/s on " +
                      load.port.ToString() + " exceeds 75% of " +
                      std::to_string(load.link_rate_bps) + " bit/s");
    }
    out.push_back(CbsParams{load.port, AssignPriority(TrafficClass::kStream), idle,
                            idle - load.link_rate_bps});
  }
  return out;
}

}  // namespace detsdv
