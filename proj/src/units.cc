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

#include "detsdv/units.h"

#include <algorithm>
#include <cmath>

namespace detsdv {

Nanos MillisToNanos(double ms) { return static_cast<Nanos>(std::llround(ms * 1e6)); }
Nanos MicrosToNanos(double us) { return static_cast<Nanos>(std::llround(us * 1e3)); }
double NanosToMicros(Nanos ns) { return static_cast<double>(ns) / 1e3; }
double NanosToMillis(Nanos ns) { return static_cast<double>(ns) / 1e6; }

std::int64_t EthernetWireBytes(std::int64_t payload, bool tagged) {
  const std::int64_t min_payload = tagged ? kMinPayloadTagged : kMinPayloadUntagged;
  return std::max(payload, min_payload) + kEthernetOverheadBytes + (tagged ? kVlanTagBytes : 0);
}

Nanos TransmissionNanos(std::int64_t bits, std::int64_t rate_bps) {
  // bits * 1e9 stays well inside int64 for any frame size we model.
  const std::int64_t scaled = bits * kNanosPerSecond;
  return (scaled + rate_bps - 1) / rate_bps;
}

std::vector<std::int64_t> FragmentPayloads(std::int64_t message_bytes, std::int64_t mtu) {
  std::vector<std::int64_t> out;
  std::int64_t left = message_bytes;
  while (left > mtu) {
    out.push_back(mtu);
    left -= mtu;
  }
  out.push_back(left);
  return out;
}

std::int64_t Gcd(std::int64_t a, std::int64_t b) {
  while (b != 0) {
    const std::int64_t t = a % b;
    a = b;
    b = t;
  }
  return a;
}

std::int64_t LcmCapped(std::int64_t a, std::int64_t b, std::int64_t cap) {
  const std::int64_t g = Gcd(a, b);
  const std::int64_t step = a / g;
  if (step > cap / b) {
    return -1;
  }
  const std::int64_t l = step * b;
  return l > cap ? -1 : l;
}

}  // namespace detsdv
