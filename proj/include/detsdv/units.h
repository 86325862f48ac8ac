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

#pragma once

#include <cstdint>
#include <vector>

namespace detsdv {

/// All internal times are integer nanoseconds.
using Nanos = std::int64_t;

constexpr Nanos kNanosPerMicro = 1'000;
constexpr Nanos kNanosPerMilli = 1'000'000;
constexpr Nanos kNanosPerSecond = 1'000'000'000;

Nanos MillisToNanos(double ms);
Nanos MicrosToNanos(double us);
double NanosToMicros(Nanos ns);
double NanosToMillis(Nanos ns);

// Preamble + SFD + MAC header + FCS + inter-frame gap.
constexpr std::int64_t kEthernetOverheadBytes = 38;
constexpr std::int64_t kVlanTagBytes = 4;
constexpr std::int64_t kMtuBytes = 1500;
constexpr std::int64_t kMinPayloadUntagged = 46;
constexpr std::int64_t kMinPayloadTagged = 42;
/// Largest frame any queue can hold on the wire (tagged, full MTU).
constexpr std::int64_t kMaxWireBytes = kMtuBytes + kEthernetOverheadBytes + kVlanTagBytes;

/// Frames with a non-zero PCP carry an 802.1Q tag.
inline bool IsTagged(int priority) { return priority > 0; }

/// Bytes on the wire for one Ethernet frame carrying `payload` bytes,
/// including the minimum-frame padding.
std::int64_t EthernetWireBytes(std::int64_t payload, bool tagged);

/// Serialization time of `bits` at `rate_bps`, rounded up to whole nanoseconds.
Nanos TransmissionNanos(std::int64_t bits, std::int64_t rate_bps);

/// Splits a message into MTU-sized fragment payloads (last one carries the rest).
std::vector<std::int64_t> FragmentPayloads(std::int64_t message_bytes,
                                           std::int64_t mtu = kMtuBytes);

/// Classic CAN frame size without bit stuffing: 44 framing bits + 8 per data byte.
constexpr std::int64_t CanWireBits(int dlc) { return 44 + 8 * static_cast<std::int64_t>(dlc); }
constexpr int kCanMaxDlc = 8;
/// Largest message payload a flow may route over a CAN link.
constexpr std::int64_t kCanMaxMessageBytes = 64;

std::int64_t Gcd(std::int64_t a, std::int64_t b);
/// Least common multiple; returns -1 when the result would exceed `cap`.
std::int64_t LcmCapped(std::int64_t a, std::int64_t b, std::int64_t cap);

}  // namespace detsdv
