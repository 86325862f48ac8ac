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

#include "detsdv/report.h"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "detsdv/error.h"

namespace detsdv {

namespace {

using Json = nlohmann::ordered_json;

constexpr double kRateTolerance = 0.95;

std::string Num(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(3) << v;
  return s.str();
}

const Verdict *FindVerdict(const std::vector<Verdict> &verdicts, const std::string &scenario) {
  for (const auto &v : verdicts) {
    if (v.scenario == scenario) {
      return &v;
    }
  }
  return nullptr;
}

const FlowVerdict *FindFlow(const Verdict *v, const std::string &flow) {
  if (v == nullptr) {
    return nullptr;
  }
  for (const auto &f : v->flows) {
    if (f.flow_id == flow) {
      return &f;
    }
  }
  return nullptr;
}

std::vector<std::string> Scenarios(const std::vector<Verdict> &verdicts,
                                   const std::vector<MetricsReport> &reports) {
  std::vector<std::string> names;
  for (const auto &v : verdicts) {
    names.push_back(v.scenario);
  }
  for (const auto &r : reports) {
    names.push_back(r.scenario);
  }
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return names;
}

const MetricsReport *FindReport(const std::vector<MetricsReport> &reports,
                                const std::string &scenario) {
  for (const auto &r : reports) {
    if (r.scenario == scenario) {
      return &r;
    }
  }
  return nullptr;
}

std::vector<const FlowMetrics *> SortedFlows(const MetricsReport &r) {
  std::vector<const FlowMetrics *> out;
  for (const auto &f : r.flows) {
    out.push_back(&f);
  }
  std::sort(out.begin(), out.end(),
            [](const FlowMetrics *a, const FlowMetrics *b) { return a->flow_id < b->flow_id; });
  return out;
}

}  // namespace

Json Verdict::ToJson() const {
  Json j;
  j["scenario"] = scenario;
  j["pass"] = pass;
  j["flows"] = Json::array();
  for (const auto &f : flows) {
    j["flows"].push_back({{"flow", f.flow_id},
                          {"pass", f.pass},
                          {"binding", f.binding.empty() ? Json() : Json(f.binding)},
                          {"detail", f.detail}});
  }
  return j;
}

Verdict Verdict::FromJson(const Json &j) {
  try {
    Verdict v;
    v.scenario = j.at("scenario").get<std::string>();
    v.pass = j.at("pass").get<bool>();
    for (const Json &f : j.at("flows")) {
      FlowVerdict fv;
      fv.flow_id = f.at("flow").get<std::string>();
      fv.pass = f.at("pass").get<bool>();
      fv.binding = f.at("binding").is_null() ? "" : f.at("binding").get<std::string>();
      fv.detail = f.at("detail").get<std::string>();
      v.flows.push_back(std::move(fv));
    }
    return v;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kSchema, "verdicts", e.what());
  }
}

Verdict Evaluate(const ScenarioFixture &fixture, const MetricsReport &report) {
  Verdict verdict;
  verdict.scenario = fixture.name;
  for (const auto &[flow_id, x] : fixture.expect) {
    FlowVerdict v;
    v.flow_id = flow_id;
    auto fail = [&](const std::string &metric, const std::string &detail) {
      if (v.pass) {
        v.pass = false;
        v.binding = metric;
        v.detail = detail;
      }
    };
    const FlowMetrics *m = report.Find(flow_id);
    if (m == nullptr || m->delivered == 0 || !m->latency) {
      fail("no deliveries", "no frame of " + flow_id + " was delivered");
    } else {
      if (x.max_latency_ms) {
        const double observed = NanosToMillis(m->latency->max);
        if (observed > *x.max_latency_ms) {
          fail("max_latency", "observed " + Num(observed) + " ms > " + Num(*x.max_latency_ms) +
                                  " ms");
        }
      }
      if (x.reliability) {
        const double ratio = m->delivery_ratio.value_or(0.0);
        if (ratio < *x.reliability) {
          fail("reliability", "delivery ratio " + Num(ratio) + " < " + Num(*x.reliability));
        }
      }
      if (x.rate_hz && m->rate_hz < kRateTolerance * *x.rate_hz) {
        fail("rate", "observed " + Num(m->rate_hz) + " Hz < " +
                         Num(kRateTolerance * *x.rate_hz) + " Hz");
      }
      if (x.message_size) {
        auto it = fixture.message_bytes.find(flow_id);
        if (it == fixture.message_bytes.end() || it->second != *x.message_size) {
          fail("message_size", "planned message size differs from " +
                                   std::to_string(*x.message_size) + " bytes");
        }
      }
    }
    verdict.pass = verdict.pass && v.pass;
    verdict.flows.push_back(std::move(v));
  }
  return verdict;
}

ReportFormat ParseReportFormat(std::string_view name) {
  if (name == "json") {
    return ReportFormat::kJson;
  }
  if (name == "text") {
    return ReportFormat::kText;
  }
  if (name == "csv") {
    return ReportFormat::kCsv;
  }
  throw Error(ErrorCode::kUnsupportedFormat, "format",
              "unsupported format " + std::string(name) + " (expected json, text or csv)");
}

std::string Render(const std::vector<Verdict> &verdicts, const std::vector<MetricsReport> &reports,
                   ReportFormat format) {
  const auto names = Scenarios(verdicts, reports);
  std::ostringstream out;
  switch (format) {
  case ReportFormat::kJson: {
    Json j;
    j["schema"] = "v1";
    j["scenarios"] = Json::array();
    for (const auto &name : names) {
      Json s;
      s["scenario"] = name;
      const Verdict *v = FindVerdict(verdicts, name);
      if (v != nullptr) {
        Verdict sorted = *v;
        std::sort(sorted.flows.begin(), sorted.flows.end(),
                  [](const auto &a, const auto &b) { return a.flow_id < b.flow_id; });
        s["verdict"] = sorted.ToJson();
      } else {
        s["verdict"] = nullptr;
      }
      const MetricsReport *r = FindReport(reports, name);
      if (r != nullptr) {
        MetricsReport sorted = *r;
        std::sort(sorted.flows.begin(), sorted.flows.end(),
                  [](const auto &a, const auto &b) { return a.flow_id < b.flow_id; });
        s["metrics"] = sorted.ToJson();
      } else {
        s["metrics"] = nullptr;
      }
      j["scenarios"].push_back(std::move(s));
    }
    out << j.dump(2) << '\n';
    break;
  }
  case ReportFormat::kCsv:
    out << "scenario,flow,pass,binding,delivered,dropped,delivery_ratio,latency_min_us,"
           "latency_mean_us,latency_max_us,jitter_us,rate_hz\n";
    for (const auto &name : names) {
      const Verdict *v = FindVerdict(verdicts, name);
      const MetricsReport *r = FindReport(reports, name);
      if (r == nullptr) {
        continue;
      }
      for (const FlowMetrics *f : SortedFlows(*r)) {
        const FlowVerdict *fv = FindFlow(v, f->flow_id);
        out << name << ',' << f->flow_id << ',' << (fv == nullptr ? "" : fv->pass ? "pass" : "fail")
            << ',' << (fv == nullptr ? "" : fv->binding) << ',' << f->delivered << ','
            << f->dropped << ',' << (f->delivery_ratio ? Num(*f->delivery_ratio) : "") << ',';
        if (f->latency) {
          out << Num(NanosToMicros(f->latency->min)) << ',' << Num(f->latency->mean / 1e3) << ','
              << Num(NanosToMicros(f->latency->max)) << ','
              << Num(NanosToMicros(f->latency->jitter));
        } else {
          out << ",,,";
        }
        out << ',' << Num(f->rate_hz) << '\n';
      }
    }
    break;
  case ReportFormat::kText:
    for (const auto &name : names) {
      const Verdict *v = FindVerdict(verdicts, name);
      const MetricsReport *r = FindReport(reports, name);
      out << "scenario " << name;
      if (v != nullptr) {
        out << ": " << (v->pass ? "PASS" : "FAIL");
      }
      out << '\n';
      if (r == nullptr) {
        continue;
      }
      out << "  frames created " << r->frames_created << ", delivered " << r->delivered
          << ", dropped " << r->dropped << ", in flight " << r->in_flight_at_end << '\n';
      for (const FlowMetrics *f : SortedFlows(*r)) {
        out << "  flow " << f->flow_id;
        if (const FlowVerdict *fv = FindFlow(v, f->flow_id)) {
          out << (fv->pass ? " [pass]" : " [fail: " + fv->binding + "; " + fv->detail + "]");
        }
        out << '\n';
        out << "    delivered " << f->delivered << " dropped " << f->dropped << " misses "
            << f->deadline_misses << '\n';
        if (!f->latency) {
          out << "    no deliveries\n";
          continue;
        }
        out << "    latency us min " << Num(NanosToMicros(f->latency->min)) << " mean "
            << Num(f->latency->mean / 1e3) << " max " << Num(NanosToMicros(f->latency->max))
            << " jitter " << Num(NanosToMicros(f->latency->jitter)) << '\n';
        out << "    worst frame (us): hop node link processing queuing transmission "
               "propagation\n";
        for (size_t h = 0; h < f->worst_frame.size(); ++h) {
          const HopBound &b = f->worst_frame[h];
          out << "      " << h << ' ' << b.node << ' ' << b.link << ' '
              << Num(NanosToMicros(b.processing)) << ' ' << Num(NanosToMicros(b.queuing)) << ' '
              << Num(NanosToMicros(b.transmission)) << ' ' << Num(NanosToMicros(b.propagation))
              << '\n';
        }
      }
    }
    break;
  }
  return out.str();
}

}  // namespace detsdv
