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

#include <random>
#include <string>

#include <gtest/gtest.h>

#include "detsdv/descriptors.h"
#include "detsdv/error.h"
#include "support.h"

namespace detsdv {
namespace {

using testing::FixturePath;

ErrorCode CodeOf(const std::function<void()> &fn, std::string *key = nullptr) {
  try {
    fn();
  } catch (const Error &e) {
    if (key != nullptr) {
      *key = e.key_path();
    }
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kIo;
}

std::string Listing() { return ReadFile(FixturePath("wheelchair.toml")); }

std::string Replace(std::string text, const std::string &from, const std::string &to) {
  const auto at = text.find(from);
  EXPECT_NE(at, std::string::npos) << from;
  return text.replace(at, from.size(), to);
}

TEST(ServiceDescriptor, ParsesTheListing) {
  const ServiceDescriptor d = ParseServiceDescriptor(Listing());
  EXPECT_EQ(d.title, "WheelchairDriver");
  EXPECT_EQ(d.metadata.author, "TheWheelChairCompany");
  EXPECT_EQ(d.metadata.domain, "safety");
  ASSERT_EQ(d.flows.size(), 1u);
  const FlowSpec &f = d.flows[0];
  EXPECT_EQ(f.id, "Flow1");
  const NodeSpec *a = f.FindRole("NodeA");
  ASSERT_NE(a, nullptr);
  EXPECT_EQ(a->replicas, 2);
  EXPECT_EQ(a->cpu, 2);
  EXPECT_EQ(a->memory_mib, 1024);
  EXPECT_EQ(a->storage_bytes, 51200000000);
  EXPECT_FALSE(a->gpu);
  EXPECT_EQ(a->energy, 1);
  EXPECT_EQ(f.data_spec.data_size, 8096);
  EXPECT_EQ(f.traffic_spec.guarantee, 4);
  EXPECT_TRUE(f.traffic_spec.reliability);
  EXPECT_TRUE(f.traffic_spec.delivery);
  EXPECT_EQ(f.traffic_spec.time.max_latency_ms, 50.0);
  EXPECT_EQ(f.traffic_spec.time.periodicity_ms, 100.0);
  EXPECT_EQ(f.traffic_spec.time.jitter_ms, 10.0);
  EXPECT_EQ(f.traffic_spec.time.transmit_offset_ms, 0.0);
}

TEST(ServiceDescriptor, MinimalFlowIsAperiodicAndUnbounded) {
  const ServiceDescriptor d = ParseServiceDescriptor(R"(
title = "Min"
[ServiceMetadata]
Author = "a"
Version = "1"
Domain = "infotainment"
[Flows.F.NodeSpecs.R]
Image = "img"
Replicas = 1
CPU = 1
Memory = 16
[Flows.F.DataSpecs]
DataFormat = "raw"
DataSize = 10
[Flows.F.TrafficSpecs]
Guarantee = 0
Reliability = false
Delivery = false
Wired = true
)");
  const TrafficTimeSpec &t = d.flows[0].traffic_spec.time;
  EXPECT_FALSE(t.periodicity_ms);
  EXPECT_FALSE(t.max_latency_ms);
  EXPECT_FALSE(t.jitter_ms);
}

TEST(ServiceDescriptor, ZeroReplicasIsAnInvariantError) {
  std::string key;
  const std::string text = Replace(Listing(), "Replicas = 2", "Replicas = 0");
  EXPECT_EQ(CodeOf([&] { ParseServiceDescriptor(text); }, &key), ErrorCode::kInvariant);
  EXPECT_EQ(key, "Flows.Flow1.NodeSpecs.NodeA.Replicas");
}

TEST(ServiceDescriptor, SyntaxAndSchemaErrors) {
  EXPECT_EQ(CodeOf([] { ParseServiceDescriptor("title = \"x"); }), ErrorCode::kSyntax);
  std::string key;
  const std::string unknown = Replace(Listing(), "Energy = 1", "Energy = 1\nColour = \"red\"");
  EXPECT_EQ(CodeOf([&] { ParseServiceDescriptor(unknown); }, &key), ErrorCode::kSchema);
  EXPECT_EQ(key, "Flows.Flow1.NodeSpecs.NodeA.Colour");
  const std::string wrong_type = Replace(Listing(), "CPU = 2", "CPU = \"two\"");
  EXPECT_EQ(CodeOf([&] { ParseServiceDescriptor(wrong_type); }), ErrorCode::kSchema);
  const std::string offset = Replace(Listing(), "TransmitOffset = 0", "TransmitOffset = 100");
  EXPECT_EQ(CodeOf([&] { ParseServiceDescriptor(offset); }), ErrorCode::kInvariant);
  const std::string guarantee = Replace(Listing(), "Guarantee = 4", "Guarantee = 5");
  EXPECT_EQ(CodeOf([&] { ParseServiceDescriptor(guarantee); }), ErrorCode::kInvariant);
}

TEST(ServiceDescriptor, CriticalityLevelsAndSlack) {
  const std::string text =
      Replace(Listing(), "Offloading = false",
              "Offloading = false\n\n[Flows.Flow1.NodeSpecs.NodeA.Criticality]\n"
              "Memory = { Level = \"SHOULD\", Slack = 0.25 }\nGPU = \"MAY\"");
  const ServiceDescriptor d = ParseServiceDescriptor(text);
  const NodeSpec &a = *d.flows[0].FindRole("NodeA");
  EXPECT_EQ(CriticalityOf(a.criticality, "Memory"), (Criticality{CriticalityLevel::kShould, 0.25}));
  EXPECT_EQ(CriticalityOf(a.criticality, "GPU").level, CriticalityLevel::kMay);
  EXPECT_EQ(CriticalityOf(a.criticality, "CPU").level, CriticalityLevel::kMust);

  const std::string must_slack =
      Replace(Listing(), "Offloading = false",
              "Offloading = false\n\n[Flows.Flow1.NodeSpecs.NodeA.Criticality]\n"
              "CPU = { Level = \"MUST\", Slack = 0.1 }");
  EXPECT_EQ(CodeOf([&] { ParseServiceDescriptor(must_slack); }), ErrorCode::kInvariant);
}

TEST(ServiceDescriptor, ListingRoundTrips) {
  const ServiceDescriptor d = ParseServiceDescriptor(Listing());
  EXPECT_EQ(ParseServiceDescriptor(Serialize(d)), d);
}

constexpr const char *kSmallTopology = R"(
[[ecus]]
id = "ecu1"
cpu_cores = 2
memory = 1024
storage = 1000
[[ecus]]
id = "ecu2"
cpu_cores = 2
memory = 1024
storage = 1000
[[switches]]
id = "sw"
processing_delay_us = 1.5
[[links]]
id = "l1"
a = "ecu1"
b = "sw"
rate_bps = 1000000000
[[links]]
id = "l2"
a = "sw"
b = "ecu2"
rate_bps = 1000000000
)";

TEST(TopologyDescriptor, MinimalTestbed) {
  const TopologyDescriptor t = ParseTopologyDescriptor(kSmallTopology);
  EXPECT_EQ(t.ecus.size(), 2u);
  ASSERT_EQ(t.switches.size(), 1u);
  EXPECT_EQ(t.links.size(), 2u);
  EXPECT_TRUE(t.devices.empty());
  // Ports are derived from the links that terminate on the switch.
  EXPECT_EQ(t.switches[0].ports.size(), 2u);
  EXPECT_NE(t.switches[0].PortForLink("l1"), nullptr);
  EXPECT_EQ(t.ProcessingNanos("sw"), 1500);
  EXPECT_EQ(t.ProcessingNanos("ecu1"), 0);
  EXPECT_EQ(ParseTopologyDescriptor(Serialize(t)), t);
}

TEST(TopologyDescriptor, DanglingLinkEndpoint) {
  std::string text = kSmallTopology;
  text = Replace(text, "b = \"ecu2\"", "b = \"ecu9\"");
  std::string key;
  EXPECT_EQ(CodeOf([&] { ParseTopologyDescriptor(text); }, &key), ErrorCode::kSchema);
  EXPECT_EQ(key, "links[1].b");
}

TEST(TopologyDescriptor, DisjointIslands) {
  const std::string text = std::string(kSmallTopology) + R"(
[[ecus]]
id = "ecu3"
cpu_cores = 1
memory = 1
storage = 1
[[ecus]]
id = "ecu4"
cpu_cores = 1
memory = 1
storage = 1
[[links]]
id = "l3"
a = "ecu3"
b = "ecu4"
rate_bps = 1000
)";
  EXPECT_EQ(CodeOf([&] { ParseTopologyDescriptor(text); }), ErrorCode::kDisconnected);
}

TEST(TopologyDescriptor, FixturesParseAndRoundTrip) {
  for (const char *name : {"topology_3ecu.toml", "topology_3hop.toml", "topology_5hop.toml"}) {
    const TopologyDescriptor t = testing::LoadTopology(name);
    EXPECT_EQ(ParseTopologyDescriptor(Serialize(t)), t) << name;
  }
}

// ---- randomized round trip ----------------------------------------------

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  int Int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  std::int64_t Big(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_);
  }
  bool Coin() { return Int(0, 1) == 1; }
  double Real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  /// Printable text including characters TOML must escape.
  std::string Text(int min_len = 0) {
    static const std::string alphabet =
        "abcXYZ019 _-.:/\"\\\t\n#=[]{}'\xc3\xa9";
    std::string s;
    const int n = Int(min_len, 10);
    for (int i = 0; i < n; ++i) {
      const char c = alphabet[static_cast<size_t>(Int(0, static_cast<int>(alphabet.size()) - 3))];
      s += c;
    }
    if (Int(0, 4) == 0) {
      s += "\xc3\xa9";  // A complete UTF-8 sequence.
    }
    return s;
  }

  Criticality Crit() {
    const int l = Int(0, 2);
    if (l == 0) {
      return {CriticalityLevel::kMust, 0.0};
    }
    return {l == 1 ? CriticalityLevel::kShould : CriticalityLevel::kMay, Real(0, 1)};
  }

  ServiceDescriptor Service() {
    ServiceDescriptor d;
    d.title = Text(1);
    d.metadata = {Text(), Text(), Text()};
    const int flows = Int(1, 3);
    for (int i = 0; i < flows; ++i) {
      FlowSpec f;
      f.id = Text(1) + std::to_string(i);
      const int roles = Int(1, 3);
      for (int r = 0; r < roles; ++r) {
        NodeSpec s;
        s.image = Text(1);
        s.image_type = Text();
        s.replicas = Int(1, 3);
        s.cpu = Int(1, 16);
        s.memory_mib = Big(1, 1 << 20);
        s.storage_bytes = Big(0, std::int64_t{1} << 40);
        s.gpu = Coin();
        s.energy = Int(0, 5);
        s.offloading = Coin();
        for (const char *field : {"CPU", "Memory", "GPU", "Storage"}) {
          if (Coin()) {
            s.criticality[field] = Crit();
          }
        }
        f.node_specs.push_back(NodeRole{Text(1) + "r" + std::to_string(r), s});
      }
      f.data_spec = {Text(), Big(1, 100000)};
      TrafficSpec &t = f.traffic_spec;
      t.guarantee = Int(0, 4);
      t.reliability = Coin();
      t.delivery = Coin();
      t.wired = Coin();
      if (Coin()) {
        t.time.max_latency_ms = Real(0, 1000);
      }
      if (Coin()) {
        t.time.periodicity_ms = Real(0.001, 1000);
        t.time.transmit_offset_ms = Real(0, *t.time.periodicity_ms);
      }
      if (Coin()) {
        t.time.jitter_ms = Real(0, 10);
      }
      if (Coin()) {
        t.source = Text(1);
      }
      if (Coin()) {
        t.destination = Text(1);
      }
      for (const char *field : {"Reliability", "MaxLatency", "Jitter"}) {
        if (Coin()) {
          t.criticality[field] = Crit();
        }
      }
      f.traffic_spec = t;
      d.flows.push_back(std::move(f));
    }
    return d;
  }

  std::mt19937_64 &rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

TEST(ServiceDescriptor, RandomDescriptorsRoundTrip) {
  Gen gen(1234);
  for (int i = 0; i < 500; ++i) {
    const ServiceDescriptor d = gen.Service();
    // Role names within a flow must be distinct; regenerate on collision.
    bool unique = true;
    for (const auto &f : d.flows) {
      for (size_t a = 0; a < f.node_specs.size(); ++a) {
        for (size_t b = a + 1; b < f.node_specs.size(); ++b) {
          unique = unique && f.node_specs[a].name != f.node_specs[b].name;
        }
      }
    }
    if (!unique) {
      continue;
    }
    ASSERT_NO_THROW(Validate(d)) << Serialize(d);
    const std::string text = Serialize(d);
    ServiceDescriptor back;
    ASSERT_NO_THROW(back = ParseServiceDescriptor(text)) << text;
    ASSERT_EQ(back, d) << text;
    EXPECT_EQ(Serialize(back), text);
  }
}

TEST(ServiceDescriptor, MutatedInputNeverEscapesTheErrorType) {
  Gen gen(99);
  const std::string listing = Listing();
  int accepted = 0;
  for (int i = 0; i < 3000; ++i) {
    std::string text = listing;
    const int edits = gen.Int(1, 4);
    for (int e = 0; e < edits && !text.empty(); ++e) {
      const size_t at = static_cast<size_t>(gen.Int(0, static_cast<int>(text.size()) - 1));
      switch (gen.Int(0, 3)) {
      case 0:
        text[at] = static_cast<char>(gen.Int(0, 255));
        break;
      case 1:
        text.erase(at, static_cast<size_t>(gen.Int(1, 20)));
        break;
      case 2:
        text.insert(at, gen.Text(1));
        break;
      default:
        text.resize(at);
      }
    }
    try {
      const ServiceDescriptor d = ParseServiceDescriptor(text);
      Validate(d);
      ++accepted;
    } catch (const Error &) {
    } catch (const std::exception &e) {
      FAIL() << "escaped " << e.what() << " for:\n" << text;
    }
  }
  EXPECT_LT(accepted, 3000);
}

TEST(TopologyDescriptor, MutatedInputNeverEscapesTheErrorType) {
  Gen gen(7);
  const std::string base = ReadFile(FixturePath("topology_3hop.toml"));
  for (int i = 0; i < 2000; ++i) {
    std::string text = base;
    const size_t at = static_cast<size_t>(gen.Int(0, static_cast<int>(text.size()) - 1));
    if (gen.Coin()) {
      text[at] = static_cast<char>(gen.Int(0, 255));
    } else {
      text.erase(at, static_cast<size_t>(gen.Int(1, 40)));
    }
    try {
      ParseTopologyDescriptor(text);
    } catch (const Error &) {
    } catch (const std::exception &e) {
      FAIL() << "escaped " << e.what() << " for:\n" << text;
    }
  }
}

TEST(Io, MissingFile) {
  EXPECT_EQ(CodeOf([] { ReadFile("/nonexistent/file.toml"); }), ErrorCode::kIo);
}

}  // namespace
}  // namespace detsdv
