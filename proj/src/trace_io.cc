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

#include <istream>
#include <ostream>

#include "detsdv/error.h"
#include "detsdv/netsim.h"
#include "toml_reader.h"

namespace detsdv {

namespace {

using internal::IndexPath;
using internal::ParseToml;
using internal::TableReader;
using Json = nlohmann::ordered_json;

Nanos PositiveMillis(TableReader &r, std::string_view key, Nanos fallback) {
  const auto v = r.OptionalNumber(key);
  if (!v) {
    return fallback;
  }
  if (*v <= 0) {
    throw Error(ErrorCode::kInvariant, r.PathOf(key), "must be positive");
  }
  return MillisToNanos(*v);
}

std::uint64_t NonNegative(TableReader &r, std::string_view key, std::uint64_t fallback) {
  const auto v = r.OptionalInt(key);
  if (!v) {
    return fallback;
  }
  if (*v < 0) {
    throw Error(ErrorCode::kInvariant, r.PathOf(key), "must not be negative");
  }
  return static_cast<std::uint64_t>(*v);
}

const toml::table &TableAt(const toml::array &array, size_t i, const std::string &path) {
  if (!array[i].is_table()) {
    throw Error(ErrorCode::kSchema, path, "expected table");
  }
  return *array[i].as_table();
}

Json OptNanos(const std::optional<Nanos> &v) { return v ? Json(*v) : Json(); }

std::optional<Nanos> ReadOptNanos(const Json &j, const char *key) {
  const Json &v = j.at(key);
  if (v.is_null()) {
    return std::nullopt;
  }
  return v.get<Nanos>();
}

}  // namespace

SimConfig ParseSimConfig(std::string_view text) {
  const toml::table root = ParseToml(text);
  TableReader r(root, "");
  SimConfig sim;
  sim.name = r.OptionalString("name").value_or(sim.name);
  sim.duration = PositiveMillis(r, "duration_ms", sim.duration);
  if (const auto seed = r.OptionalInt("seed")) {
    sim.seed = static_cast<std::uint64_t>(*seed);
  }
  if (const auto eps = r.OptionalNumber("clock_sync_error_us")) {
    if (*eps < 0) {
      throw Error(ErrorCode::kInvariant, "clock_sync_error_us", "must not be negative");
    }
    sim.clock_sync_error = MicrosToNanos(*eps);
  }
  sim.aperiodic_mean_interval =
      PositiveMillis(r, "aperiodic_mean_interval_ms", sim.aperiodic_mean_interval);
  sim.queue_cap = NonNegative(r, "queue_cap", sim.queue_cap);
  if (sim.queue_cap == 0) {
    throw Error(ErrorCode::kInvariant, "queue_cap", "must be positive");
  }

  if (const toml::array *failures = r.OptionalArray("failures")) {
    for (size_t i = 0; i < failures->size(); ++i) {
      const std::string path = IndexPath("failures", i);
      TableReader f(TableAt(*failures, i, path), path);
      LinkFailure lf;
      lf.link = f.RequiredString("link");
      const double at = f.RequiredNumber("fail_at_ms");
      if (at < 0) {
        throw Error(ErrorCode::kInvariant, f.PathOf("fail_at_ms"), "must not be negative");
      }
      lf.fail_at = MillisToNanos(at);
      if (const auto restore = f.OptionalNumber("restore_at_ms")) {
        lf.restore_at = MillisToNanos(*restore);
        if (*lf.restore_at <= lf.fail_at) {
          throw Error(ErrorCode::kInvariant, f.PathOf("restore_at_ms"),
                      "restore must follow the failure");
        }
      }
      f.Finish();
      sim.failures.push_back(std::move(lf));
    }
  }

  if (const toml::array *gateways = r.OptionalArray("gateways")) {
    for (size_t i = 0; i < gateways->size(); ++i) {
      const std::string path = IndexPath("gateways", i);
      TableReader g(TableAt(*gateways, i, path), path);
      GatewaySpec gw;
      gw.id = g.RequiredString("id");
      gw.bus = g.RequiredString("bus");
      gw.bridge = g.RequiredString("bridge");
      gw.destination = g.RequiredString("destination");
      if (const auto s = g.OptionalString("strategy")) {
        try {
          gw.options.strategy = ParseGatewayStrategy(*s);
        } catch (const Error &e) {
          throw Error(ErrorCode::kSchema, g.PathOf("strategy"), e.what());
        }
      }
      if (const auto p = g.OptionalNumber("period_ms")) {
        if (*p <= 0) {
          throw Error(ErrorCode::kInvariant, g.PathOf("period_ms"), "must be positive");
        }
        gw.options.period_us = static_cast<std::uint64_t>(std::llround(*p * 1e3));
      }
      gw.options.flush_count = NonNegative(g, "flush_count", 0);
      if (const auto t = g.OptionalNumber("flush_timeout_ms")) {
        if (*t < 0) {
          throw Error(ErrorCode::kInvariant, g.PathOf("flush_timeout_ms"), "must not be negative");
        }
        gw.options.flush_timeout_us = static_cast<std::uint64_t>(std::llround(*t * 1e3));
      }
      gw.frame_interval = PositiveMillis(g, "frame_interval_ms", gw.frame_interval);
      gw.priority = static_cast<int>(g.OptionalInt("priority").value_or(0));
      if (gw.priority < 0 || gw.priority > 7) {
        throw Error(ErrorCode::kInvariant, g.PathOf("priority"), "priority must be 0..7");
      }
      g.Finish();
      sim.gateways.push_back(std::move(gw));
    }
  }

  if (const toml::table *expect = r.OptionalTable("expect")) {
    for (auto &&[key, node] : *expect) {
      const std::string flow(key.str());
      const std::string path = "expect." + flow;
      if (!node.is_table()) {
        throw Error(ErrorCode::kSchema, path, "expected table");
      }
      TableReader e(*node.as_table(), path);
      FlowExpectation x;
      x.max_latency_ms = e.OptionalNumber("max_latency_ms");
      x.reliability = e.OptionalNumber("reliability");
      x.message_size = e.OptionalInt("message_size");
      x.rate_hz = e.OptionalNumber("rate_hz");
      e.Finish();
      sim.expect[flow] = x;
    }
  }
  r.Finish();
  return sim;
}

void WriteTrace(std::ostream &out, const std::string &scenario,
                const std::vector<TraceRecord> &trace) {
  for (const auto &t : trace) {
    Json j;
    j["schema"] = "v1";
    j["scenario"] = scenario;
    j["frame"] = t.frame_id;
    j["flow"] = t.flow_id;
    j["seq"] = t.seq;
    j["member"] = t.member;
    j["created_at_ns"] = t.created_at;
    j["hop"] = t.hop;
    j["node"] = t.node;
    j["link"] = t.link;
    j["arrival_ns"] = t.arrival;
    j["queue_enter_ns"] = OptNanos(t.queue_enter);
    j["tx_start_ns"] = OptNanos(t.tx_start);
    j["tx_end_ns"] = OptNanos(t.tx_end);
    j["departure_ns"] = OptNanos(t.departure);
    j["wire_bits"] = t.wire_bits;
    j["fate"] = FrameFateName(t.fate);
    out << j.dump() << '\n';
  }
}

std::vector<TraceRecord> ReadTrace(std::istream &in) {
  std::vector<TraceRecord> out;
  std::string line;
  size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) {
      continue;
    }
    const std::string where = "line " + std::to_string(number);
    try {
      const Json j = Json::parse(line);
      if (j.at("schema") != "v1") {
        throw Error(ErrorCode::kSchema, where, "trace schema must be v1");
      }
      TraceRecord t;
      t.frame_id = j.at("frame").get<std::uint64_t>();
      t.flow_id = j.at("flow").get<std::string>();
      t.seq = j.at("seq").get<std::uint64_t>();
      t.member = j.at("member").get<int>();
      t.created_at = j.at("created_at_ns").get<Nanos>();
      t.hop = j.at("hop").get<int>();
      t.node = j.at("node").get<std::string>();
      t.link = j.at("link").get<std::string>();
      t.arrival = j.at("arrival_ns").get<Nanos>();
      t.queue_enter = ReadOptNanos(j, "queue_enter_ns");
      t.tx_start = ReadOptNanos(j, "tx_start_ns");
      t.tx_end = ReadOptNanos(j, "tx_end_ns");
      t.departure = ReadOptNanos(j, "departure_ns");
      t.wire_bits = j.at("wire_bits").get<std::int64_t>();
      t.fate = ParseFrameFate(j.at("fate").get<std::string>());
      out.push_back(std::move(t));
    } catch (const nlohmann::json::parse_error &e) {
      throw Error(ErrorCode::kSyntax, where, e.what());
    } catch (const nlohmann::json::exception &e) {
      throw Error(ErrorCode::kSchema, where, e.what());
    }
  }
  return out;
}

}  // namespace detsdv
