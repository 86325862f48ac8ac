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

// Scenario verdicts and rendering of plan and simulation results.

#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "detsdv/netsim.h"
#include "json.hpp"

namespace detsdv {

/// A use case with the constraints its flows must meet in simulation.
struct ScenarioFixture {
  std::string name;
  /// Keyed by qualified flow id.
  std::map<std::string, FlowExpectation> expect;
  /// Message size of each planned flow, for the message_size check.
  std::map<std::string, std::int64_t> message_bytes;
};

struct FlowVerdict {
  std::string flow_id;
  bool pass = true;
  /// First failing metric; empty on pass.
  std::string binding;
  std::string detail;
};

struct Verdict {
  std::string scenario;
  bool pass = true;
  std::vector<FlowVerdict> flows;

  nlohmann::ordered_json ToJson() const;
  static Verdict FromJson(const nlohmann::ordered_json &j);
};

/// Observed max latency against max_latency_ms, delivery ratio against
/// reliability, delivered message rate against 95% of rate_hz, and planned
/// message size against message_size. A flow without deliveries fails with
/// binding "no deliveries".
Verdict Evaluate(const ScenarioFixture &fixture, const MetricsReport &report);

enum class ReportFormat { kJson, kText, kCsv };

/// Raises UNSUPPORTED_FORMAT.
ReportFormat ParseReportFormat(std::string_view name);

/// Scenarios ordered by name, flows by id. `reports` and `verdicts` are
/// matched by scenario name.
std::string Render(const std::vector<Verdict> &verdicts, const std::vector<MetricsReport> &reports,
                   ReportFormat format);

}  // namespace detsdv
