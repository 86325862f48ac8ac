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

#include "detsdv/interop.h"

#include "detsdv/error.h"

namespace detsdv {

namespace {

constexpr int kHistoryPeriodic = 1;
constexpr int kHistoryAperiodic = 16;

nlohmann::ordered_json Optional(const std::optional<double> &v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json();
}

}  // namespace

FlowConstraintVector ConstraintsOf(const FlowSpec &flow, TrafficClass cls) {
  const TrafficSpec &t = flow.traffic_spec;
  return FlowConstraintVector{t.time.max_latency_ms.has_value(), t.time.jitter_ms.has_value(),
                              cls == TrafficClass::kStream || t.guarantee == 1};
}

std::string_view ResourceTypeName(ResourceType type) {
  switch (type) {
  case ResourceType::kGbr:
    return "GBR";
  case ResourceType::kDcGbr:
    return "DC_GBR";
  case ResourceType::kNonGbr:
    return "NON_GBR";
  }
  return "NON_GBR";
}

nlohmann::ordered_json FiveQiProfile::ToJson() const {
  return {{"resource_type", ResourceTypeName(resource_type)},
          {"priority_level", priority_level},
          {"delay_budget_ms", Optional(delay_budget_ms)},
          {"per_target", per_target}};
}

FiveQiProfile MapTo5qi(const FlowConstraintVector &v, const TrafficTimeSpec &time,
                       const TrafficSpec &traffic) {
  FiveQiProfile p;
  if (!v.deadline && !v.jitter) {
    p.resource_type = ResourceType::kNonGbr;
  } else {
    p.resource_type = v.bandwidth ? ResourceType::kDcGbr : ResourceType::kGbr;
  }
  p.priority_level = 10 - 2 * traffic.guarantee;
  p.delay_budget_ms = time.max_latency_ms;
  p.per_target = traffic.delivery ? 1e-5 : 1e-2;
  return p;
}

void AppendRecord(const GatewayFrame &frame, std::vector<std::uint8_t> &out) {
  if (frame.can_id > kMaxCanId || frame.dlc > kCanMaxDlc || frame.payload.size() != frame.dlc) {
    throw Error(ErrorCode::kContract, "can_id " + std::to_string(frame.can_id),
                "frame violates classic CAN limits");
  }
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(frame.can_id >> shift));
  }
  out.push_back(frame.dlc);
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  for (int shift = 56; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(frame.capture_time_us >> shift));
  }
}

std::vector<GatewayFrame> Unpack(const std::vector<std::uint8_t> &payload) {
  std::vector<GatewayFrame> out;
  size_t at = 0;
  auto malformed = [&](const std::string &why) {
    return Error(ErrorCode::kMalformedRecord, std::to_string(at),
                 "malformed record at byte " + std::to_string(at) + ": " + why);
  };
  while (at < payload.size()) {
    if (payload.size() - at < 5) {
      throw malformed("truncated header");
    }
    GatewayFrame f;
    for (size_t i = 0; i < 4; ++i) {
      f.can_id = (f.can_id << 8) | payload[at + i];
    }
    f.dlc = payload[at + 4];
    if (f.can_id > kMaxCanId) {
      throw malformed("identifier exceeds 29 bits");
    }
    if (f.dlc > kCanMaxDlc) {
      throw malformed("dlc exceeds 8");
    }
    if (payload.size() - at < RecordBytes(f.dlc)) {
      throw malformed("truncated record");
    }
    f.payload.assign(payload.begin() + static_cast<std::ptrdiff_t>(at + 5),
                     payload.begin() + static_cast<std::ptrdiff_t>(at + 5 + f.dlc));
    for (size_t i = 0; i < 8; ++i) {
      f.capture_time_us = (f.capture_time_us << 8) | payload[at + 5 + f.dlc + i];
    }
    out.push_back(std::move(f));
    at += RecordBytes(out.back().dlc);
  }
  return out;
}

std::string_view GatewayStrategyName(GatewayStrategy strategy) {
  switch (strategy) {
  case GatewayStrategy::kPeriodicSnapshot:
    return "snapshot";
  case GatewayStrategy::kOneToOne:
    return "one_to_one";
  case GatewayStrategy::kAllPacking:
    return "all";
  }
  return "all";
}

GatewayStrategy ParseGatewayStrategy(std::string_view name) {
  for (auto s : {GatewayStrategy::kPeriodicSnapshot, GatewayStrategy::kOneToOne,
                 GatewayStrategy::kAllPacking}) {
    if (GatewayStrategyName(s) == name) {
      return s;
    }
  }
  throw Error(ErrorCode::kSchema, "strategy",
              "unknown gateway strategy " + std::string(name) +
                  " (expected snapshot, one_to_one or all)");
}

Gateway::Gateway(GatewayOptions options) : options_(options) {
  if (options_.max_payload < RecordBytes(kCanMaxDlc)) {
    throw Error(ErrorCode::kContract, "max_payload", "payload limit below one record");
  }
  if (options_.strategy == GatewayStrategy::kPeriodicSnapshot && options_.period_us == 0) {
    throw Error(ErrorCode::kContract, "period_us", "snapshot period must be positive");
  }
}

void Gateway::Emit(std::uint64_t at, std::vector<GatewayPayload> &out) {
  if (pending_records_ == 0) {
    return;
  }
  out.push_back(GatewayPayload{at, std::move(pending_), pending_records_});
  pending_.clear();
  pending_records_ = 0;
}

std::vector<GatewayPayload> Gateway::Push(const GatewayFrame &frame) {
  std::vector<GatewayPayload> out;
  const std::size_t size = RecordBytes(frame.dlc);
  switch (options_.strategy) {
  case GatewayStrategy::kOneToOne:
    AppendRecord(frame, pending_);
    pending_records_ = 1;
    Emit(frame.capture_time_us, out);
    return out;
  case GatewayStrategy::kPeriodicSnapshot: {
    const std::uint64_t window = frame.capture_time_us / options_.period_us;
    if (pending_records_ > 0 && window != window_) {
      Emit((window_ + 1) * options_.period_us, out);
    }
    window_ = window;
    // A window's records continue in a fresh payload once one fills up;
    // all of them leave together when the window closes.
    if (pending_.size() + size > options_.max_payload) {
      out.push_back(GatewayPayload{(window_ + 1) * options_.period_us, std::move(pending_),
                                   pending_records_});
      pending_.clear();
      pending_records_ = 0;
    }
    AppendRecord(frame, pending_);
    ++pending_records_;
    return out;
  }
  case GatewayStrategy::kAllPacking:
    out = Poll(frame.capture_time_us);
    if (pending_.size() + size > options_.max_payload) {
      Emit(frame.capture_time_us, out);
    }
    if (pending_records_ == 0) {
      first_capture_us_ = frame.capture_time_us;
    }
    AppendRecord(frame, pending_);
    ++pending_records_;
    if (options_.flush_count != 0 && pending_records_ >= options_.flush_count) {
      Emit(frame.capture_time_us, out);
    }
    return out;
  }
  return out;
}

std::vector<GatewayPayload> Gateway::Poll(std::uint64_t now_us) {
  std::vector<GatewayPayload> out;
  if (pending_records_ == 0) {
    return out;
  }
  if (options_.strategy == GatewayStrategy::kPeriodicSnapshot) {
    const std::uint64_t close = (window_ + 1) * options_.period_us;
    if (now_us >= close) {
      Emit(close, out);
    }
  } else if (options_.strategy == GatewayStrategy::kAllPacking && options_.flush_timeout_us != 0) {
    const std::uint64_t due = first_capture_us_ + options_.flush_timeout_us;
    if (now_us >= due) {
      Emit(due, out);
    }
  }
  return out;
}

std::vector<GatewayPayload> Gateway::Flush() {
  std::vector<GatewayPayload> out;
  const std::uint64_t at = options_.strategy == GatewayStrategy::kPeriodicSnapshot
                               ? (window_ + 1) * options_.period_us
                               : first_capture_us_;
  Emit(at, out);
  return out;
}

std::vector<GatewayPayload> PackPeriodicSnapshot(const std::vector<GatewayFrame> &frames,
                                                 std::uint64_t period_us,
                                                 std::size_t max_payload) {
  Gateway g(GatewayOptions{GatewayStrategy::kPeriodicSnapshot, max_payload, period_us, 0, 0});
  std::vector<GatewayPayload> out;
  for (const auto &f : frames) {
    for (auto &p : g.Push(f)) {
      out.push_back(std::move(p));
    }
  }
  for (auto &p : g.Flush()) {
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<std::uint8_t> PackOneToOne(const GatewayFrame &frame) {
  std::vector<std::uint8_t> out;
  AppendRecord(frame, out);
  return out;
}

std::vector<GatewayPayload> PackAll(const std::vector<GatewayFrame> &frames,
                                    std::size_t max_payload, std::size_t flush_count,
                                    std::uint64_t flush_timeout_us) {
  Gateway g(GatewayOptions{GatewayStrategy::kAllPacking, max_payload, 10'000, flush_count,
                           flush_timeout_us});
  std::vector<GatewayPayload> out;
  for (const auto &f : frames) {
    for (auto &p : g.Push(f)) {
      out.push_back(std::move(p));
    }
  }
  for (auto &p : g.Flush()) {
    out.push_back(std::move(p));
  }
  return out;
}

nlohmann::ordered_json DataLayerQosProfile::ToJson() const {
  return {{"flow", flow_id},
          {"reliability", reliability == QosReliability::kReliable ? "RELIABLE" : "BEST_EFFORT"},
          {"deadline_ms", Optional(deadline_ms)},
          {"latency_budget_ms", Optional(latency_budget_ms)},
          {"history_depth", history_depth}};
}

DataLayerQosProfile DeriveDataLayerQos(const std::string &flow_id, const FlowSpec &flow) {
  const TrafficSpec &t = flow.traffic_spec;
  DataLayerQosProfile p;
  p.flow_id = flow_id;
  p.reliability = t.delivery ? QosReliability::kReliable : QosReliability::kBestEffort;
  p.deadline_ms = t.time.periodicity_ms;
  p.latency_budget_ms = t.time.max_latency_ms;
  p.history_depth = t.time.periodicity_ms ? kHistoryPeriodic : kHistoryAperiodic;
  return p;
}

}  // namespace detsdv
