// Copyright 2026 The TumorCP Engine Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tumorcp/grid.hpp"
#include "tumorcp/volume.hpp"

/// Feed protocol, version 1.
///
/// Every message is one frame:
///
///     offset  size  field
///          0     4  magic "TCPF"
///          4     2  version (u16)
///          6     2  op (u16)
///          8     8  payload length (u64)
///         16     n  payload
///
/// All integers and reals are little-endian. Payloads per op:
///
///     HELLO        u16 client_version
///     HELLO_REPLY  u16 protocol_version, u64 dataset_size, u64 base_seed
///     NEXT         u64 epoch, u64 sample_index, u16 hint_len, hint bytes
///     SEED         u64 base_seed
///     SEED_REPLY   u64 base_seed
///     BYE          (empty)
///     BYE_REPLY    u64 samples served on this connection
///     SAMPLE       u16 case_len, case bytes, u32 nx, u32 ny, u32 nz,
///                  f64 dx, f64 dy, f64 dz, u32 record_len, record JSON,
///                  f32[nx*ny*nz] intensities, u8[nx*ny*nz] labels
///     ERROR        u16 code, u16 msg_len, msg bytes
namespace tumorcp::wire {

inline constexpr std::array<char, 4> kMagic{'T', 'C', 'P', 'F'};
inline constexpr std::uint16_t kProtocolVersion = 1;
inline constexpr std::size_t kHeaderSize = 16;
inline constexpr std::uint64_t kMaxPayload = std::uint64_t{1} << 34;

enum class Op : std::uint16_t {
  kHello = 0x0001,
  kNext = 0x0002,
  kSeed = 0x0003,
  kBye = 0x0004,
  kHelloReply = 0x0081,
  kSample = 0x0082,
  kSeedReply = 0x0083,
  kByeReply = 0x0084,
  kError = 0x00ff,
};

bool is_known_op(std::uint16_t op) noexcept;
const char* op_name(Op op) noexcept;

enum class ErrorCodeWire : std::uint16_t {
  kMalformedFrame = 1,
  kNotHelloed = 2,
  kUnknownOp = 3,
  kVersionMismatch = 4,
  kBadRequest = 5,
  kInternal = 6,
};

struct Frame {
  std::uint16_t version = kProtocolVersion;
  std::uint16_t op = 0;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct Header {
  std::uint16_t version = 0;
  std::uint16_t op = 0;
  std::uint64_t length = 0;
};

/// Validates the magic and the length bound; throws kProtocolError.
Header decode_header(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode(const Frame& frame);

/// Decodes exactly one frame occupying all of `bytes`.
Frame decode(std::span<const std::uint8_t> bytes);

struct HelloRequest {
  std::uint16_t client_version = kProtocolVersion;
  friend bool operator==(const HelloRequest&, const HelloRequest&) = default;
};
struct HelloReply {
  std::uint16_t protocol_version = kProtocolVersion;
  std::uint64_t dataset_size = 0;
  std::uint64_t base_seed = 0;
  friend bool operator==(const HelloReply&, const HelloReply&) = default;
};
struct NextRequest {
  std::uint64_t epoch = 0;
  std::uint64_t sample_index = 0;
  std::optional<std::string> case_hint;
  friend bool operator==(const NextRequest&, const NextRequest&) = default;
};
struct SeedMessage {
  std::uint64_t base_seed = 0;
  friend bool operator==(const SeedMessage&, const SeedMessage&) = default;
};
struct ByeReply {
  std::uint64_t samples_served = 0;
  friend bool operator==(const ByeReply&, const ByeReply&) = default;
};
struct ErrorReply {
  ErrorCodeWire code = ErrorCodeWire::kInternal;
  std::string message;
  friend bool operator==(const ErrorReply&, const ErrorReply&) = default;
};
struct SampleReply {
  std::string case_id;
  Dims3 dims;
  Spacing spacing;
  std::string record_json;
  std::vector<float> intensities;
  std::vector<std::uint8_t> labels;
  friend bool operator==(const SampleReply&, const SampleReply&) = default;
};

Frame make_frame(const HelloRequest& m);
Frame make_frame(const HelloReply& m);
Frame make_frame(const NextRequest& m);
Frame make_seed_frame(const SeedMessage& m);
Frame make_seed_reply_frame(const SeedMessage& m);
Frame make_bye_frame();
Frame make_frame(const ByeReply& m);
Frame make_frame(const ErrorReply& m);
Frame make_frame(const SampleReply& m);

// Payload decoders. Each throws kProtocolError on a short, oversized, or
// inconsistent payload.
HelloRequest parse_hello(std::span<const std::uint8_t> payload);
HelloReply parse_hello_reply(std::span<const std::uint8_t> payload);
NextRequest parse_next(std::span<const std::uint8_t> payload);
SeedMessage parse_seed(std::span<const std::uint8_t> payload);
ByeReply parse_bye_reply(std::span<const std::uint8_t> payload);
ErrorReply parse_error(std::span<const std::uint8_t> payload);
SampleReply parse_sample(std::span<const std::uint8_t> payload);

/// Writes a SAMPLE frame straight into `out` without building the payload
/// separately; the result equals encode(make_frame(sample)).
void encode_sample_frame(const std::string& case_id, const Dims3& dims, const Spacing& spacing,
                         const std::string& record_json, std::span<const float> intensities,
                         std::span<const std::uint8_t> labels, std::vector<std::uint8_t>& out);

// Blocking frame I/O on a connected stream socket. `recv_frame` returns
// nullopt on an orderly close before any header byte. Frames announcing more
// than `max_payload` bytes are rejected before anything is allocated.
void send_bytes(int fd, std::span<const std::uint8_t> bytes);
void send_frame(int fd, const Frame& frame);
std::optional<Frame> recv_frame(int fd, std::uint64_t max_payload = kMaxPayload);

}  // namespace tumorcp::wire
