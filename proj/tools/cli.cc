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

#include "cli.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "detsdv/error.h"
#include "detsdv/netsim.h"
#include "detsdv/pipeline.h"
#include "detsdv/report.h"
#include "spdlog/sinks/stdout_color_sinks.h"
#include "spdlog/spdlog.h"

namespace detsdv {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct Manifest {
  std::vector<std::string> services;
  std::string topology;
  std::vector<std::string> sims;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::string format = "text";
};

void ConfigureLogging() {
  static bool done = false;
  if (done) {
    return;
  }
  done = true;
  auto logger = spdlog::stderr_color_st("detsdv");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char *level = std::getenv("DETSDV_LOG")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

void PrintError(const Error &e, const std::string &file = "") {
  Json j = e.ToJson();
  if (!file.empty()) {
    j["file"] = file;
  }
  std::cout << j.dump() << std::endl;
}

void WriteFile(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    throw Error(ErrorCode::kIo, path.string(), "cannot write " + path.string());
  }
}

Json ReadJson(const fs::path &path) {
  const std::string text = ReadFile(path.string());
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error &e) {
    throw Error(ErrorCode::kSyntax, path.string(), e.what());
  }
}

TopologyDescriptor LoadTopology(const std::string &path) {
  if (path.empty()) {
    throw Error(ErrorCode::kIo, "--topology", "--topology is required");
  }
  return ParseTopologyDescriptor(ReadFile(path));
}

int Validate(const Manifest &m) {
  bool ok = true;
  auto check = [&](const std::string &path, auto parse) {
    try {
      parse(ReadFile(path));
    } catch (const Error &e) {
      PrintError(e, path);
      ok = false;
    }
  };
  for (const auto &s : m.services) {
    check(s, [](const std::string &text) { ParseServiceDescriptor(text); });
  }
  if (!m.topology.empty()) {
    check(m.topology, [](const std::string &text) { ParseTopologyDescriptor(text); });
  }
  return ok ? kExitOk : kExitInput;
}

int Plan(const Manifest &m) {
  const TopologyDescriptor topology = LoadTopology(m.topology);
  std::vector<ServiceDescriptor> services;
  for (const auto &s : m.services) {
    services.push_back(ParseServiceDescriptor(ReadFile(s)));
  }
  const DeploymentPlan plan = BuildPlan(services, topology);
  fs::create_directories(m.out);
  WriteFile(fs::path(m.out) / "placement.json", plan.placement.ToJson().dump(2) + "\n");
  WriteFile(fs::path(m.out) / "tsn_config.json",
            TsnConfigToJson(plan.tsn, plan.admission).dump(2) + "\n");
  WriteFile(fs::path(m.out) / "interop.json", InteropToJson(plan.interop).dump(2) + "\n");
  for (const auto &v : plan.admission) {
    if (!v.admitted) {
      std::cout << v.ToJson().dump() << std::endl;
    }
  }
  return plan.AllAdmitted() ? kExitOk : kExitRejected;
}

struct ScenarioRun {
  SimResult result;
  Verdict verdict;
};

int Simulate(const Manifest &m) {
  const TopologyDescriptor topology = LoadTopology(m.topology);
  const TsnConfig config = TsnConfigFromJson(ReadJson(fs::path(m.out) / "tsn_config.json"));
  std::vector<SimConfig> sims;
  if (m.sims.empty()) {
    sims.emplace_back();
  }
  for (const auto &path : m.sims) {
    sims.push_back(ParseSimConfig(ReadFile(path)));
  }
  for (auto &s : sims) {
    if (m.seed) {
      s.seed = *m.seed;
    }
  }
  // Scenarios share only immutable inputs; each event loop is single-threaded.
  std::vector<std::future<ScenarioRun>> runs;
  for (const auto &sim : sims) {
    runs.push_back(std::async(std::launch::async, [&topology, &config, sim] {
      Simulator simulator(topology, config, sim);
      ScenarioRun run;
      run.result = simulator.Run();
      ScenarioFixture fixture{sim.name, sim.expect, {}};
      for (const auto &f : config.flows) {
        fixture.message_bytes[f.id] = f.message_bytes;
      }
      run.verdict = Evaluate(fixture, run.result.metrics);
      return run;
    }));
  }
  std::ostringstream trace;
  Json metrics{{"schema", "v1"}, {"scenarios", Json::array()}};
  Json verdicts{{"schema", "v1"}, {"verdicts", Json::array()}};
  bool pass = true;
  for (size_t i = 0; i < runs.size(); ++i) {
    ScenarioRun run = runs[i].get();
    WriteTrace(trace, sims[i].name, run.result.trace);
    metrics["scenarios"].push_back(run.result.metrics.ToJson());
    verdicts["verdicts"].push_back(run.verdict.ToJson());
    pass = pass && run.verdict.pass;
    spdlog::info("scenario {}: {}", sims[i].name, run.verdict.pass ? "pass" : "fail");
  }
  WriteFile(fs::path(m.out) / "trace.ndjson", trace.str());
  WriteFile(fs::path(m.out) / "metrics.json", metrics.dump(2) + "\n");
  WriteFile(fs::path(m.out) / "verdicts.json", verdicts.dump(2) + "\n");
  return pass ? kExitOk : kExitVerdict;
}

int Report(const Manifest &m) {
  const ReportFormat format = ParseReportFormat(m.format);
  std::vector<MetricsReport> reports;
  const Json metrics = ReadJson(fs::path(m.out) / "metrics.json");
  for (const Json &s : metrics.at("scenarios")) {
    reports.push_back(MetricsReport::FromJson(s));
  }
  std::vector<Verdict> verdicts;
  const fs::path verdict_path = fs::path(m.out) / "verdicts.json";
  if (fs::exists(verdict_path)) {
    const Json doc = ReadJson(verdict_path);
    for (const Json &v : doc.at("verdicts")) {
      verdicts.push_back(Verdict::FromJson(v));
    }
  }
  std::cout << Render(verdicts, reports, format);
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string> &args) {
  ConfigureLogging();
  CLI::App app{"detsdv: service placement, TSN planning and network simulation"};
  app.require_subcommand(1);
  Manifest m;
  auto add_common = [&](CLI::App *cmd) {
    cmd->add_option("--service", m.services, "Service descriptor (TOML)");
    cmd->add_option("--topology", m.topology, "Topology descriptor (TOML)");
    cmd->add_option("--sim", m.sims, "Simulation scenario (TOML)");
    cmd->add_option("--out", m.out, "Output directory");
    cmd->add_option("--seed", m.seed, "Override the scenario seeds");
    cmd->add_option("--format", m.format, "json, text or csv");
  };
  CLI::App *validate = app.add_subcommand("validate", "Parse and check descriptors");
  CLI::App *plan = app.add_subcommand("plan", "Place services and configure the network");
  CLI::App *simulate = app.add_subcommand("simulate", "Simulate a plan");
  CLI::App *report = app.add_subcommand("report", "Render simulation results");
  for (CLI::App *cmd : {validate, plan, simulate, report}) {
    add_common(cmd);
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp &e) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    std::cerr << e.what() << '\n';
    return kExitInput;
  }
  try {
    if (validate->parsed()) {
      return Validate(m);
    }
    if (plan->parsed()) {
      return Plan(m);
    }
    if (simulate->parsed()) {
      return Simulate(m);
    }
    return Report(m);
  } catch (const Error &e) {
    PrintError(e);
    return kExitInput;
  } catch (const nlohmann::json::exception &e) {
    PrintError(Error(ErrorCode::kSchema, m.out, e.what()));
    return kExitInput;
  } catch (const fs::filesystem_error &e) {
    PrintError(Error(ErrorCode::kIo, e.path1().string(), e.what()));
    return kExitInput;
  }
}

}  // namespace detsdv
