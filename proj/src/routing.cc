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
#include <limits>
#include <map>
#include <queue>
#include <set>

#include "detsdv/error.h"
#include "detsdv/tsn_config.h"

namespace detsdv {

namespace {

struct Adjacent {
  const Link *link;
  std::string peer;
};

/// Usable links per node, sorted by link id.
std::map<std::string, std::vector<Adjacent>> BuildAdjacency(const TopologyDescriptor &topology,
                                                            bool allow_can) {
  std::vector<const Link *> links;
  for (const Link &l : topology.links) {
    if (l.medium == LinkMedium::kCan && !allow_can) {
      continue;
    }
    links.push_back(&l);
  }
  std::sort(links.begin(), links.end(), [](const Link *a, const Link *b) { return a->id < b->id; });
  std::map<std::string, std::vector<Adjacent>> adj;
  for (const auto &e : topology.ecus) {
    adj[e.id];
  }
  for (const auto &s : topology.switches) {
    adj[s.id];
  }
  for (const Link *l : links) {
    adj[l->endpoint_a].push_back(Adjacent{l, l->endpoint_b});
    adj[l->endpoint_b].push_back(Adjacent{l, l->endpoint_a});
  }
  return adj;
}

std::optional<Path> ShortestPath(const std::map<std::string, std::vector<Adjacent>> &adj,
                                 const std::string &source, const std::string &destination) {
  std::map<std::string, int> dist{{destination, 0}};
  std::queue<std::string> frontier;
  frontier.push(destination);
  while (!frontier.empty()) {
    const std::string n = frontier.front();
    frontier.pop();
    for (const Adjacent &a : adj.at(n)) {
      if (dist.emplace(a.peer, dist[n] + 1).second) {
        frontier.push(a.peer);
      }
    }
  }
  if (dist.count(source) == 0) {
    return std::nullopt;
  }
  Path path;
  path.nodes.push_back(source);
  std::string at = source;
  while (at != destination) {
    const int d = dist.at(at);
    // Adjacency is sorted by link id, so the first qualifying step yields the
    // lexicographically smallest link sequence among shortest paths.
    for (const Adjacent &a : adj.at(at)) {
      auto it = dist.find(a.peer);
      if (it != dist.end() && it->second == d - 1) {
        path.links.push_back(a.link->id);
        path.nodes.push_back(a.peer);
        at = a.peer;
        break;
      }
    }
  }
  return path;
}

/// Successive-shortest-path min-cost flow of two units on the node-split
/// graph; a unit of node capacity forces node disjointness.
std::optional<std::pair<Path, Path>> DisjointPair(
    const std::map<std::string, std::vector<Adjacent>> &adj, const std::string &source,
    const std::string &destination) {
  std::vector<std::string> names;
  std::map<std::string, int> index;
  for (const auto &[n, _] : adj) {
    index[n] = static_cast<int>(names.size());
    names.push_back(n);
  }
  struct Arc {
    int to;
    int cap;
    int cost;
    int rev;
    const Link *link;  // null for internal node arcs
  };
  const int vertex_count = 2 * static_cast<int>(names.size());
  std::vector<std::vector<Arc>> g(vertex_count);
  auto add_arc = [&](int u, int v, int cost, const Link *link) {
    g[u].push_back(Arc{v, 1, cost, static_cast<int>(g[v].size()), link});
    g[v].push_back(Arc{u, 0, -cost, static_cast<int>(g[u].size()) - 1, link});
  };
  auto in = [](int i) { return 2 * i; };
  auto out = [](int i) { return 2 * i + 1; };
  for (const auto &[n, _] : adj) {
    if (n != source && n != destination) {
      add_arc(in(index[n]), out(index[n]), 0, nullptr);
    }
  }
  std::set<std::string> seen_links;
  for (const auto &[n, list] : adj) {
    for (const Adjacent &a : list) {
      if (!seen_links.insert(a.link->id).second) {
        continue;
      }
      const int u = index[a.link->endpoint_a];
      const int v = index[a.link->endpoint_b];
      add_arc(out(u), in(v), 1, a.link);
      add_arc(out(v), in(u), 1, a.link);
    }
  }
  const int s = out(index.at(source));
  const int t = in(index.at(destination));

  for (int unit = 0; unit < 2; ++unit) {
    constexpr int kInf = std::numeric_limits<int>::max() / 2;
    std::vector<int> dist(vertex_count, kInf);
    std::vector<std::pair<int, int>> parent(vertex_count, {-1, -1});
    dist[s] = 0;
    for (int round = 0; round < vertex_count; ++round) {
      bool changed = false;
      for (int u = 0; u < vertex_count; ++u) {
        if (dist[u] == kInf) {
          continue;
        }
        for (size_t k = 0; k < g[u].size(); ++k) {
          const Arc &arc = g[u][k];
          if (arc.cap > 0 && dist[u] + arc.cost < dist[arc.to]) {
            dist[arc.to] = dist[u] + arc.cost;
            parent[arc.to] = {u, static_cast<int>(k)};
            changed = true;
          }
        }
      }
      if (!changed) {
        break;
      }
    }
    if (dist[t] == kInf) {
      return std::nullopt;
    }
    for (int v = t; v != s; v = parent[v].first) {
      Arc &arc = g[parent[v].first][parent[v].second];
      arc.cap -= 1;
      g[arc.to][arc.rev].cap += 1;
    }
  }

  // Forward arcs with exhausted capacity carry flow.
  auto walk = [&]() {
    Path p;
    int v = s;
    p.nodes.push_back(source);
    while (v != t) {
      bool moved = false;
      for (Arc &arc : g[v]) {
        const bool forward = arc.link != nullptr ? arc.cost > 0 : arc.cost == 0 && arc.to == v + 1;
        if (forward && arc.cap == 0 && g[arc.to][arc.rev].cap > 0) {
          arc.cap = -1;  // consumed by this walk
          if (arc.link != nullptr) {
            p.links.push_back(arc.link->id);
            p.nodes.push_back(names[arc.to / 2]);
          }
          v = arc.to;
          moved = true;
          break;
        }
      }
      if (!moved) {
        break;
      }
    }
    return p;
  };
  Path a = walk();
  Path b = walk();
  if (a.nodes.back() != destination || b.nodes.back() != destination) {
    return std::nullopt;
  }
  auto shorter = [](const Path &x, const Path &y) {
    if (x.hops() != y.hops()) {
      return x.hops() < y.hops();
    }
    return x.links < y.links;
  };
  if (shorter(b, a)) {
    std::swap(a, b);
  }
  return std::make_pair(std::move(a), std::move(b));
}

}  // namespace

bool PathsDisjoint(const Path &a, const Path &b) {
  std::set<std::string> links(a.links.begin(), a.links.end());
  for (const auto &l : b.links) {
    if (links.count(l) != 0) {
      return false;
    }
  }
  std::set<std::string> inner;
  for (size_t i = 1; i + 1 < a.nodes.size(); ++i) {
    inner.insert(a.nodes[i]);
  }
  for (size_t i = 1; i + 1 < b.nodes.size(); ++i) {
    if (inner.count(b.nodes[i]) != 0) {
      return false;
    }
  }
  return true;
}

FlowRoute Route(const RouteRequest &request, const TopologyDescriptor &topology) {
  auto is_node = [&](const std::string &id) {
    return topology.FindEcu(id) != nullptr || topology.FindSwitch(id) != nullptr;
  };
  if (!is_node(request.source) || !is_node(request.destination)) {
    throw Error(ErrorCode::kNoPath, request.flow_id,
                "endpoint " + request.source + " -> " + request.destination + " is not a node");
  }
  if (request.source == request.destination) {
    throw Error(ErrorCode::kContract, request.flow_id, "source and destination coincide");
  }
  const auto adj = BuildAdjacency(topology, request.allow_can);
  FlowRoute route{request.flow_id, request.source, request.destination, {}};
  if (request.reliability) {
    if (auto pair = DisjointPair(adj, request.source, request.destination)) {
      route.paths.push_back(std::move(pair->first));
      route.paths.push_back(std::move(pair->second));
      return route;
    }
    if (request.reliability_must) {
      throw Error(ErrorCode::kNoDisjointPath, request.flow_id,
                  "no link- and node-disjoint path pair between " + request.source + " and " +
                      request.destination);
    }
  }
  auto path = ShortestPath(adj, request.source, request.destination);
  if (!path) {
    throw Error(ErrorCode::kNoPath, request.flow_id,
                "no path between " + request.source + " and " + request.destination);
  }
  route.paths.push_back(std::move(*path));
  return route;
}

}  // namespace detsdv
