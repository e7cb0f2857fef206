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

#include "tumorcp/wire.hpp"

#include <sys/socket.h>
#include <sys/types.h>
#include <unistd.h>

#include <algorithm>
#include <bit>
#include <cerrno>
#include <cstring>
#include <limits>

namespace tumorcp::wire {
namespace {

[[noreturn]] void protocol_error(const std::string& what) {
  throw Error(ErrorCode::kProtocolError, what);
}

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

  template <typename T>
  void put(T v) {
    static_assert(std::is_arithmetic_v<T>);
    std::uint8_t buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    out_.insert(out_.end(), buf, buf + sizeof(T));
  }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <typename T>
  void array(std::span<const T> values) {
    if constexpr (sizeof(T) == 1 || std::endian::native == std::endian::little) {
      bytes(values.data(), values.size_bytes());
    } else {
      for (T v : values) put(v);
    }
  }

 private:
  std::vector<std::uint8_t>& out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    std::uint8_t buf[sizeof(T)];
    std::memcpy(buf, in_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
  }
  std::string string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  template <typename T>
  std::vector<T> array(std::size_t n) {
    if (n > (in_.size() - pos_) / sizeof(T)) protocol_error("payload too short for array");
    std::vector<T> out(n);
    std::memcpy(out.data(), in_.data() + pos_, n * sizeof(T));
    if constexpr (sizeof(T) > 1 && std::endian::native == std::endian::big) {
      auto* raw = reinterpret_cast<std::uint8_t*>(out.data());
      for (std::size_t i = 0; i < n; ++i) std::reverse(raw + i * sizeof(T), raw + (i + 1) * sizeof(T));
    }
    pos_ += n * sizeof(T);
    return out;
  }
  void finish() const {
    if (pos_ != in_.size()) protocol_error("trailing bytes in payload");
  }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) protocol_error("payload too short");
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

Frame frame_of(Op op, std::vector<std::uint8_t> payload) {
  return Frame{kProtocolVersion, static_cast<std::uint16_t>(op), std::move(payload)};
}

void write_header(std::vector<std::uint8_t>& out, std::uint16_t version, std::uint16_t op,
                  std::uint64_t length) {
  Writer w(out);
  w.bytes(kMagic.data(), kMagic.size());
  w.put(version);
  w.put(op);
  w.put(length);
}

void recv_exact(int fd, std::uint8_t* dst, std::size_t n, bool allow_eof_at_start, bool& eof) {
  std::size_t got = 0;
  eof = false;
  while (got < n) {
    const ssize_t r = ::recv(fd, dst + got, n - got, 0);
    if (r == 0) {
      if (got == 0 && allow_eof_at_start) {
        eof = true;
        return;
      }
      protocol_error("connection closed mid-frame");
    }
    if (r < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kIoError, std::string("recv failed: ") + std::strerror(errno));
    }
    got += static_cast<std::size_t>(r);
  }
}

}  // namespace

bool is_known_op(std::uint16_t op) noexcept {
  switch (static_cast<Op>(op)) {
    case Op::kHello:
    case Op::kNext:
    case Op::kSeed:
    case Op::kBye:
    case Op::kHelloReply:
    case Op::kSample:
    case Op::kSeedReply:
    case Op::kByeReply:
    case Op::kError: return true;
  }
  return false;
}

const char* op_name(Op op) noexcept {
  switch (op) {
    case Op::kHello: return "HELLO";
    case Op::kNext: return "NEXT";
    case Op::kSeed: return "SEED";
    case Op::kBye: return "BYE";
    case Op::kHelloReply: return "HELLO_REPLY";
    case Op::kSample: return "SAMPLE";
    case Op::kSeedReply: return "SEED_REPLY";
    case Op::kByeReply: return "BYE_REPLY";
    case Op::kError: return "ERROR";
  }
  return "UNKNOWN";
}

Header decode_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) protocol_error("short frame header");
  if (std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) protocol_error("bad frame magic");
  Reader r(bytes.subspan(4, kHeaderSize - 4));
  Header h;
  h.version = r.get<std::uint16_t>();
  h.op = r.get<std::uint16_t>();
  h.length = r.get<std::uint64_t>();
  if (h.length > kMaxPayload) protocol_error("frame payload too large");
  return h;
}

std::vector<std::uint8_t> encode(const Frame& frame) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + frame.payload.size());
  write_header(out, frame.version, frame.op, frame.payload.size());
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  return out;
}

Frame decode(std::span<const std::uint8_t> bytes) {
  const Header h = decode_header(bytes);
  if (bytes.size() - kHeaderSize != h.length) protocol_error("frame length does not match payload");
  Frame f;
  f.version = h.version;
  f.op = h.op;
  f.payload.assign(bytes.begin() + kHeaderSize, bytes.end());
  return f;
}

Frame make_frame(const HelloRequest& m) {
  std::vector<std::uint8_t> p;
  Writer(p).put(m.client_version);
  return frame_of(Op::kHello, std::move(p));
}

Frame make_frame(const HelloReply& m) {
  std::vector<std::uint8_t> p;
  Writer w(p);
  w.put(m.protocol_version);
  w.put(m.dataset_size);
  w.put(m.base_seed);
  return frame_of(Op::kHelloReply, std::move(p));
}

Frame make_frame(const NextRequest& m) {
  std::vector<std::uint8_t> p;
  Writer w(p);
  w.put(m.epoch);
  w.put(m.sample_index);
  const std::string hint = m.case_hint.value_or("");
  if (hint.size() > std::numeric_limits<std::uint16_t>::max()) protocol_error("case hint too long");
  w.put(static_cast<std::uint16_t>(hint.size()));
  w.bytes(hint.data(), hint.size());
  return frame_of(Op::kNext, std::move(p));
}

Frame make_seed_frame(const SeedMessage& m) {
  std::vector<std::uint8_t> p;
  Writer(p).put(m.base_seed);
  return frame_of(Op::kSeed, std::move(p));
}

Frame make_seed_reply_frame(const SeedMessage& m) {
  std::vector<std::uint8_t> p;
  Writer(p).put(m.base_seed);
  return frame_of(Op::kSeedReply, std::move(p));
}

Frame make_bye_frame() { return frame_of(Op::kBye, {}); }

Frame make_frame(const ByeReply& m) {
  std::vector<std::uint8_t> p;
  Writer(p).put(m.samples_served);
  return frame_of(Op::kByeReply, std::move(p));
}

Frame make_frame(const ErrorReply& m) {
  std::vector<std::uint8_t> p;
  Writer w(p);
  w.put(static_cast<std::uint16_t>(m.code));
  const std::size_t n = std::min<std::size_t>(m.message.size(), std::numeric_limits<std::uint16_t>::max());
  w.put(static_cast<std::uint16_t>(n));
  w.bytes(m.message.data(), n);
  return frame_of(Op::kError, std::move(p));
}

Frame make_frame(const SampleReply& m) {
  std::vector<std::uint8_t> bytes;
  encode_sample_frame(m.case_id, m.dims, m.spacing, m.record_json, m.intensities, m.labels, bytes);
  return decode(bytes);
}

void encode_sample_frame(const std::string& case_id, const Dims3& dims, const Spacing& spacing,
                         const std::string& record_json, std::span<const float> intensities,
                         std::span<const std::uint8_t> labels, std::vector<std::uint8_t>& out) {
  if (case_id.size() > std::numeric_limits<std::uint16_t>::max()) protocol_error("case id too long");
  if (record_json.size() > std::numeric_limits<std::uint32_t>::max()) protocol_error("record too long");
  constexpr auto kMaxDim = static_cast<std::int64_t>(std::numeric_limits<std::uint32_t>::max());
  if (dims.nx < 0 || dims.ny < 0 || dims.nz < 0 || dims.nx > kMaxDim || dims.ny > kMaxDim ||
      dims.nz > kMaxDim)
    protocol_error("sample dims out of range");
  if (intensities.size() != dims.count() || labels.size() != dims.count())
    protocol_error("sample payload sizes do not match dims");

  const std::uint64_t length = 2 + case_id.size() + 12 + 24 + 4 + record_json.size() +
                               intensities.size_bytes() + labels.size_bytes();
  out.clear();
  out.reserve(kHeaderSize + length);
  write_header(out, kProtocolVersion, static_cast<std::uint16_t>(Op::kSample), length);
  Writer w(out);
  w.put(static_cast<std::uint16_t>(case_id.size()));
  w.bytes(case_id.data(), case_id.size());
  w.put(static_cast<std::uint32_t>(dims.nx));
  w.put(static_cast<std::uint32_t>(dims.ny));
  w.put(static_cast<std::uint32_t>(dims.nz));
  w.put(spacing.dx);
  w.put(spacing.dy);
  w.put(spacing.dz);
  w.put(static_cast<std::uint32_t>(record_json.size()));
  w.bytes(record_json.data(), record_json.size());
  w.array(intensities);
  w.array(labels);
}

HelloRequest parse_hello(std::span<const std::uint8_t> payload) {
  Reader r(payload);
  HelloRequest m{r.get<std::uint16_t>()};
  r.finish();
  return m;
}

HelloReply parse_hello_reply(std::span<const std::uint8_t> payload) {
  Reader r(payload);
  HelloReply m;
  m.protocol_version = r.get<std::uint16_t>();
  m.dataset_size = r.get<std::uint64_t>();
  m.base_seed = r.get<std::uint64_t>();
  r.finish();
  return m;
}

NextRequest parse_next(std::span<const std::uint8_t> payload) {
  Reader r(payload);
  NextRequest m;
  m.epoch = r.get<std::uint64_t>();
  m.sample_index = r.get<std::uint64_t>();
  const auto n = r.get<std::uint16_t>();
  if (n > 0) m.case_hint = r.string(n);
  r.finish();
  return m;
}

SeedMessage parse_seed(std::span<const std::uint8_t> payload) {
  Reader r(payload);
  SeedMessage m{r.get<std::uint64_t>()};
  r.finish();
  return m;
}

ByeReply parse_bye_reply(std::span<const std::uint8_t> payload) {
  Reader r(payload);
  ByeReply m{r.get<std::uint64_t>()};
  r.finish();
  return m;
}

ErrorReply parse_error(std::span<const std::uint8_t> payload) {
  Reader r(payload);
  ErrorReply m;
  m.code = static_cast<ErrorCodeWire>(r.get<std::uint16_t>());
  const auto n = r.get<std::uint16_t>();
  m.message = r.string(n);
  r.finish();
  return m;
}

SampleReply parse_sample(std::span<const std::uint8_t> payload) {
  Reader r(payload);
  SampleReply m;
  m.case_id = r.string(r.get<std::uint16_t>());
  m.dims.nx = r.get<std::uint32_t>();
  m.dims.ny = r.get<std::uint32_t>();
  m.dims.nz = r.get<std::uint32_t>();
  m.spacing.dx = r.get<double>();
  m.spacing.dy = r.get<double>();
  m.spacing.dz = r.get<double>();
  m.record_json = r.string(r.get<std::uint32_t>());
  // Each factor fits in 32 bits, so the product is exact in long double.
  const long double voxels = static_cast<long double>(m.dims.nx) * static_cast<long double>(m.dims.ny) *
                             static_cast<long double>(m.dims.nz);
  if (voxels * 5.0L > static_cast<long double>(payload.size())) protocol_error("sample dims exceed payload");
  const std::size_t n = m.dims.count();
  m.intensities = r.array<float>(n);
  m.labels = r.array<std::uint8_t>(n);
  r.finish();
  return m;
}

void send_bytes(int fd, std::span<const std::uint8_t> bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kIoError, std::string("send failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
}

void send_frame(int fd, const Frame& frame) { send_bytes(fd, encode(frame)); }

std::optional<Frame> recv_frame(int fd, std::uint64_t max_payload) {
  std::uint8_t head[kHeaderSize];
  bool eof = false;
  recv_exact(fd, head, kHeaderSize, true, eof);
  if (eof) return std::nullopt;
  const Header h = decode_header(head);
  if (h.length > max_payload) throw Error(ErrorCode::kProtocolError, "frame payload too large");
  Frame f;
  f.version = h.version;
  f.op = h.op;
  f.payload.resize(static_cast<std::size_t>(h.length));
  if (h.length > 0) recv_exact(fd, f.payload.data(), f.payload.size(), false, eof);
  return f;
}

}  // namespace tumorcp::wire
