# Copyright 2026 The detsdv Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#  http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Recomputes flow and global metrics from trace.ndjson and compares them
with metrics.json written by the same `detsdv simulate` run."""

import argparse
import collections
import json
import math
import pathlib
import subprocess
import sys
import tempfile


def run(cmd):
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode not in (0, 4):
        sys.exit(f"{' '.join(cmd)} exited {proc.returncode}\n{proc.stdout}{proc.stderr}")


def replay(records, flows, duration_ns):
    frames = collections.defaultdict(list)
    for r in records:
        frames[r["frame"]].append(r)
    glob = collections.Counter(frames_created=len(frames))
    per_flow = collections.defaultdict(list)
    for hops in frames.values():
        hops.sort(key=lambda r: r["hop"])
        fate = hops[0]["fate"]
        if fate == "delivered":
            glob["delivered"] += 1
        elif fate == "in_flight":
            glob["in_flight_at_end"] += 1
        else:
            glob["dropped"] += 1
        per_flow[hops[0]["flow"]].append(hops)

    out = {}
    for flow_id, views in per_flow.items():
        planned = flows.get(flow_id)
        per_message = len(planned["fragments"]) if planned else 1
        seqs = {v[0]["seq"] for v in views}
        delivered = [v for v in views if v[0]["fate"] == "delivered"]
        delivered_seqs = {v[0]["seq"] for v in delivered}
        waiting = {v[0]["seq"] for v in views if v[0]["fate"] == "in_flight"}
        pending = len(waiting - delivered_seqs)
        latencies = [v[-1]["departure_ns"] - v[0]["created_at_ns"] for v in delivered]
        done = sum(1 for v in delivered if v[0]["seq"] % per_message == per_message - 1)
        m = {
            "sent": len(seqs),
            "delivered": len(delivered),
            "dropped": sum(1 for v in views
                           if v[0]["fate"] not in ("delivered", "duplicate", "in_flight")),
            "duplicates_discarded": sum(1 for v in views if v[0]["fate"] == "duplicate"),
            "pending": pending,
            "rate_hz": done / (duration_ns / 1e9),
        }
        if len(seqs) - pending > 0:
            m["delivery_ratio"] = len(delivered_seqs) / (len(seqs) - pending)
        if latencies:
            m["latency_us"] = {
                "min": min(latencies) / 1e3,
                "max": max(latencies) / 1e3,
                "mean": sum(latencies) / len(latencies) / 1e3,
                "jitter": (max(latencies) - min(latencies)) / 1e3,
            }
        out[flow_id] = m
    return glob, out


def close(a, b):
    return math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-6)


def compare(scenario, reported, glob, flows):
    errors = []
    for key in ("frames_created", "delivered", "dropped", "in_flight_at_end"):
        if reported["global"][key] != glob[key]:
            errors.append(f"{scenario} global {key}: {reported['global'][key]} != {glob[key]}")
    listed = {f["flow"]: f for f in reported["flows"]}
    for flow_id, mine in flows.items():
        theirs = listed.get(flow_id)
        if theirs is None:
            errors.append(f"{scenario} {flow_id}: missing from metrics.json")
            continue
        for key, value in mine.items():
            if isinstance(value, dict):
                for sub, v in value.items():
                    if not close(theirs[key][sub], v):
                        errors.append(f"{scenario} {flow_id} {key}.{sub}: {theirs[key][sub]} != {v}")
            elif not close(theirs[key], value):
                errors.append(f"{scenario} {flow_id} {key}: {theirs[key]} != {value}")
        if "latency_us" not in mine and theirs["latency_us"] is not None:
            errors.append(f"{scenario} {flow_id}: latency without deliveries")
    return errors


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--detsdv", required=True)
    parser.add_argument("--fixtures", required=True)
    args = parser.parse_args()
    fx = pathlib.Path(args.fixtures)
    with tempfile.TemporaryDirectory() as tmp:
        topo = str(fx / "topology_3hop.toml")
        run([args.detsdv, "plan", "--topology", topo, "--out", tmp,
             "--service", str(fx / "cam.toml"), "--service", str(fx / "ctlta.toml"),
             "--service", str(fx / "rvh.toml")])
        run([args.detsdv, "simulate", "--topology", topo, "--out", tmp, "--seed", "42",
             "--sim", str(fx / "sim_cam.toml"), "--sim", str(fx / "sim_ctlta.toml"),
             "--sim", str(fx / "sim_rvh.toml"), "--sim", str(fx / "sim_failure.toml")])
        tmp = pathlib.Path(tmp)
        config = json.loads((tmp / "tsn_config.json").read_text())
        planned = {f["flow"]: f for f in config["flows"]}
        by_scenario = collections.defaultdict(list)
        with open(tmp / "trace.ndjson") as trace:
            for line in trace:
                record = json.loads(line)
                by_scenario[record["scenario"]].append(record)
        metrics = json.loads((tmp / "metrics.json").read_text())
        errors = []
        checked = 0
        for reported in metrics["scenarios"]:
            name = reported["scenario"]
            duration_ns = round(reported["duration_ms"] * 1e6)
            glob, flows = replay(by_scenario[name], planned, duration_ns)
            errors += compare(name, reported, glob, flows)
            checked += len(flows)
        if checked == 0:
            errors.append("no flows in the trace")
    for e in errors:
        print(e)
    print(f"{'FAIL' if errors else 'PASS'}: {checked} flows over "
          f"{len(metrics['scenarios'])} scenarios replayed from trace.ndjson")
    return 1 if errors else 0


if __name__ == "__main__":
    sys.exit(main())
