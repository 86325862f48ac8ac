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

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cli.h"
#include "json.hpp"
#include "support.h"

namespace detsdv {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using testing::FixturePath;

struct CliRun {
  int code = 0;
  std::string out;
};

CliRun Cli(const std::vector<std::string> &args) {
  ::testing::internal::CaptureStdout();
  CliRun r;
  r.code = RunCli(args);
  r.out = ::testing::internal::GetCapturedStdout();
  return r;
}

std::string Slurp(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void Write(const fs::path &path, const std::string &text) {
  std::ofstream(path, std::ios::binary) << text;
}

std::vector<Json> JsonLines(const std::string &text) {
  std::vector<Json> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) {
      out.push_back(Json::parse(line));
    }
  }
  return out;
}

TEST(Validate, ListingIsValid) {
  const CliRun r = Cli({"validate", "--service", FixturePath("wheelchair.toml"), "--topology",
                     FixturePath("topology_3ecu.toml")});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out, "");
}

TEST(Validate, InvariantAndIoErrors) {
  const fs::path dir = testing::ScratchDir("cli_validate");
  std::string text = Slurp(FixturePath("wheelchair.toml"));
  const auto at = text.find("Replicas = ");
  ASSERT_NE(at, std::string::npos);
  text.replace(at, text.find('\n', at) - at, "Replicas = 0");
  Write(dir / "zero.toml", text);

  CliRun r = Cli({"validate", "--service", (dir / "zero.toml").string()});
  EXPECT_EQ(r.code, kExitInput);
  auto lines = JsonLines(r.out);
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_EQ(lines[0]["code"], "INVARIANT");
  EXPECT_EQ(lines[0]["file"], (dir / "zero.toml").string());

  r = Cli({"validate", "--service", (dir / "missing.toml").string(), "--service",
           FixturePath("cam.toml")});
  EXPECT_EQ(r.code, kExitInput);
  lines = JsonLines(r.out);
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_EQ(lines[0]["code"], "IO");

  EXPECT_EQ(Cli({"validate", "--bogus"}).code, kExitInput);
  EXPECT_EQ(Cli({}).code, kExitInput);
}

TEST(Plan, WritesThreeArtifacts) {
  const fs::path out = testing::ScratchDir("cli_plan");
  const CliRun r = Cli({"plan", "--service", FixturePath("wheelchair.toml"), "--topology",
                     FixturePath("topology_3ecu.toml"), "--out", out.string()});
  EXPECT_EQ(r.code, kExitOk) << r.out;
  for (const char *name : {"placement.json", "tsn_config.json", "interop.json"}) {
    ASSERT_TRUE(fs::exists(out / name)) << name;
    EXPECT_NO_THROW(Json::parse(Slurp(out / name))) << name;
  }
  const Json tsn = Json::parse(Slurp(out / "tsn_config.json"));
  EXPECT_FALSE(tsn.at("ports").empty());
  EXPECT_FALSE(tsn.at("frer").empty());
}

TEST(Plan, GpuServiceOnGpuLessTopologyIsRejected) {
  const fs::path dir = testing::ScratchDir("cli_gpu");
  std::string service = Slurp(FixturePath("cam.toml"));
  service.replace(service.find("GPU = false"), 11, "GPU = true");
  Write(dir / "gpu.toml", service);
  std::string topo = Slurp(FixturePath("topology_3hop.toml"));
  topo.replace(topo.find("gpu = true"), 10, "gpu = false");
  Write(dir / "topo.toml", topo);

  const CliRun r = Cli({"plan", "--service", (dir / "gpu.toml").string(), "--topology",
                     (dir / "topo.toml").string(), "--out", dir.string()});
  EXPECT_EQ(r.code, kExitRejected);
  const auto lines = JsonLines(r.out);
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_EQ(lines[0]["admitted"], false);
  EXPECT_EQ(lines[0]["binding"], "NO_FEASIBLE_NODE");
  EXPECT_TRUE(fs::exists(dir / "placement.json"));
}

TEST(Simulate, FailureScenarioFailsItsVerdict) {
  const fs::path out = testing::ScratchDir("cli_sim");
  const std::string topo = FixturePath("topology_3hop.toml");
  ASSERT_EQ(Cli({"plan", "--service", FixturePath("cam.toml"), "--service",
                 FixturePath("ctlta.toml"), "--topology", topo, "--out", out.string()})
                .code,
            kExitOk);
  EXPECT_EQ(Cli({"simulate", "--topology", topo, "--sim", FixturePath("sim_cam.toml"), "--out",
                 out.string()})
                .code,
            kExitOk);
  EXPECT_EQ(Cli({"simulate", "--topology", topo, "--sim", FixturePath("sim_cam.toml"), "--sim",
                 FixturePath("sim_failure.toml"), "--out", out.string()})
                .code,
            kExitVerdict);
  const Json verdicts = Json::parse(Slurp(out / "verdicts.json"));
  ASSERT_EQ(verdicts.at("verdicts").size(), 2u);
  EXPECT_EQ(verdicts["verdicts"][0]["pass"], true);
  EXPECT_EQ(verdicts["verdicts"][1]["scenario"], "backbone_failure");
  EXPECT_EQ(verdicts["verdicts"][1]["pass"], false);

  const CliRun report = Cli({"report", "--out", out.string(), "--format", "csv"});
  EXPECT_EQ(report.code, kExitOk);
  EXPECT_EQ(report.out.rfind("scenario,flow,pass", 0), 0u);
  EXPECT_NE(report.out.find("backbone_failure,ContextAwareManeuvering/Mcm,fail,"),
            std::string::npos);
  EXPECT_EQ(Cli({"report", "--out", out.string(), "--format", "xml"}).code, kExitInput);
}

TEST(Simulate, MissingPlanIsAnInputError) {
  const fs::path out = testing::ScratchDir("cli_noplan");
  const CliRun r = Cli({"simulate", "--topology", FixturePath("topology_3hop.toml"), "--out",
                     out.string()});
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_EQ(JsonLines(r.out).at(0)["code"], "IO");
}

TEST(Simulate, SameSeedSameBytes) {
  const std::string topo = FixturePath("topology_3hop.toml");
  std::vector<std::string> artifacts;
  for (int i = 0; i < 2; ++i) {
    const fs::path out = testing::ScratchDir("cli_det" + std::to_string(i));
    ASSERT_EQ(Cli({"plan", "--service", FixturePath("cam.toml"), "--topology", topo, "--out",
                   out.string()})
                  .code,
              kExitOk);
    ASSERT_EQ(Cli({"simulate", "--topology", topo, "--sim", FixturePath("sim_cam.toml"),
                   "--seed", "3", "--out", out.string()})
                  .code,
              kExitOk);
    std::string all;
    for (const char *name : {"tsn_config.json", "trace.ndjson", "metrics.json"}) {
      all += Slurp(out / name);
    }
    artifacts.push_back(all);
  }
  EXPECT_EQ(artifacts[0], artifacts[1]);
  EXPECT_FALSE(artifacts[0].empty());
}

}  // namespace
}  // namespace detsdv
