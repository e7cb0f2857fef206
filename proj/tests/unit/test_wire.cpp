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

#include <sys/socket.h>
#include <unistd.h>

#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "tumorcp/wire.hpp"

using namespace tumorcp;
using namespace tumorcp::wire;

namespace {

std::string random_string(std::mt19937_64& g, std::size_t min_len, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::string s(len(g), '\0');
  for (auto& c : s) c = static_cast<char>(g() & 0xff);
  return s;
}

SampleReply random_sample(std::mt19937_64& g) {
  SampleReply s;
  s.case_id = random_string(g, 0, 20);
  std::uniform_int_distribution<std::int64_t> side(1, 6);
  s.dims = {side(g), side(g), side(g)};
  s.spacing = {0.5 + (g() % 100) / 10.0, 1.25, 3.0};
  s.record_json = R"({"applied":false})" + random_string(g, 0, 8);
  std::uniform_real_distribution<float> v(-2000.0f, 2000.0f);
  s.intensities.resize(s.dims.count());
  for (auto& x : s.intensities) x = v(g);
  s.labels.resize(s.dims.count());
  for (auto& x : s.labels) x = static_cast<std::uint8_t>(g() % 3);
  return s;
}

std::vector<std::uint8_t> bytes_of(const Frame& f) { return encode(f); }

template <class T, class Parse>
void round_trip(const T& msg, const Frame& frame, Parse parse) {
  const auto bytes = encode(frame);
  const Frame back = decode(bytes);
  CHECK(back == frame);
  CHECK(encode(back) == bytes);
  CHECK(parse(back.payload) == msg);
}

struct SocketPair {
  int fds[2];
  SocketPair() { REQUIRE(::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) == 0); }
  ~SocketPair() {
    ::close(fds[0]);
    if (fds[1] >= 0) ::close(fds[1]);
  }
};

}  // namespace

TEST_SUITE("wire") {
  TEST_CASE("header layout is little-endian") {
    const auto b = bytes_of(make_frame(HelloRequest{1}));
    REQUIRE(b.size() == 18);
    CHECK(std::string(b.begin(), b.begin() + 4) == "TCPF");
    CHECK(b[4] == 1);
    CHECK(b[5] == 0);
    CHECK(b[6] == 0x01);
    CHECK(b[7] == 0x00);
    CHECK(b[8] == 2);
    for (int i = 9; i < 16; ++i) CHECK(b[i] == 0);
    CHECK(b[16] == 1);
    const auto s = bytes_of(make_frame(HelloReply{1, 3, 0x0102030405060708ULL}));
    CHECK(s[6] == 0x81);
    CHECK(s[16 + 2] == 3);
    CHECK(s[16 + 10] == 0x08);
    CHECK(s[16 + 17] == 0x01);
  }

  TEST_CASE("every message type survives a fuzzed round trip") {
    std::mt19937_64 g(99);
    for (int i = 0; i < 500; ++i) {
      const HelloRequest h{static_cast<std::uint16_t>(g())};
      round_trip(h, make_frame(h), parse_hello);
      const HelloReply hr{static_cast<std::uint16_t>(g()), g(), g()};
      round_trip(hr, make_frame(hr), parse_hello_reply);
      NextRequest n{g(), g(), std::nullopt};
      if (g() % 2) n.case_hint = random_string(g, 1, 40);
      round_trip(n, make_frame(n), parse_next);
      const SeedMessage sm{g()};
      round_trip(sm, make_seed_frame(sm), parse_seed);
      round_trip(sm, make_seed_reply_frame(sm), parse_seed);
      const ByeReply br{g()};
      round_trip(br, make_frame(br), parse_bye_reply);
      const ErrorReply er{static_cast<ErrorCodeWire>(1 + g() % 6), random_string(g, 0, 60)};
      round_trip(er, make_frame(er), parse_error);
      const SampleReply sr = random_sample(g);
      round_trip(sr, make_frame(sr), parse_sample);
      std::vector<std::uint8_t> direct;
      encode_sample_frame(sr.case_id, sr.dims, sr.spacing, sr.record_json, sr.intensities, sr.labels, direct);
      CHECK(direct == encode(make_frame(sr)));
    }
    CHECK(decode(encode(make_bye_frame())).payload.empty());
  }

  TEST_CASE("mutated and truncated frames never decode silently wrong") {
    std::mt19937_64 g(7);
    for (int i = 0; i < 2000; ++i) {
      const SampleReply sr = random_sample(g);
      auto bytes = encode(make_frame(sr));
      const std::size_t cut = g() % bytes.size();
      std::vector<std::uint8_t> truncated(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
      CHECK_THROWS_AS(decode(truncated), Error);
      // Flip one payload byte: either a clean protocol error or a parse that
      // re-encodes to exactly the mutated bytes.
      bytes[kHeaderSize + g() % (bytes.size() - kHeaderSize)] ^= static_cast<std::uint8_t>(1 + g() % 255);
      try {
        const Frame f = decode(bytes);
        const SampleReply back = parse_sample(f.payload);
        std::vector<std::uint8_t> again;
        encode_sample_frame(back.case_id, back.dims, back.spacing, back.record_json, back.intensities, back.labels,
                            again);
        CHECK(again == bytes);
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kProtocolError);
      }
    }
  }

  TEST_CASE("header validation") {
    auto b = encode(make_frame(HelloRequest{1}));
    auto bad = b;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode(bad), Error);
    auto longer = b;
    longer.push_back(0);
    CHECK_THROWS_AS(decode(longer), Error);
    auto huge = b;
    huge[15] = 0x40;
    CHECK_THROWS_AS(decode_header(huge), Error);
    CHECK_THROWS_AS(parse_hello(std::vector<std::uint8_t>{1, 0, 0}), Error);
    CHECK_THROWS_AS(parse_next(std::vector<std::uint8_t>(17, 0)), Error);
  }

  TEST_CASE("sample dims must agree with the payload") {
    std::mt19937_64 g(3);
    SampleReply s = random_sample(g);
    s.intensities.pop_back();
    CHECK_THROWS_AS(make_frame(s), Error);
    std::vector<std::uint8_t> p = make_frame(random_sample(g)).payload;
    // Blow up nx in place (after u16 length + case id).
    const std::size_t off = 2 + (static_cast<std::size_t>(p[0]) | (static_cast<std::size_t>(p[1]) << 8));
    p[off + 3] = 0x7f;
    CHECK_THROWS_AS(parse_sample(p), Error);
  }

  TEST_CASE("op table") {
    for (std::uint16_t op : {1, 2, 3, 4, 0x81, 0x82, 0x83, 0x84, 0xff}) CHECK(is_known_op(op));
    for (std::uint16_t op : {0, 5, 0x80, 0x85, 0x100}) CHECK_FALSE(is_known_op(op));
    CHECK(std::string(op_name(Op::kNext)) == "NEXT");
  }

  TEST_CASE("socket framing") {
    SocketPair sp;
    std::mt19937_64 g(5);
    const SampleReply sr = random_sample(g);
    send_frame(sp.fds[1], make_frame(sr));
    send_frame(sp.fds[1], make_frame(HelloRequest{1}));
    auto f1 = recv_frame(sp.fds[0]);
    REQUIRE(f1);
    CHECK(parse_sample(f1->payload) == sr);
    auto f2 = recv_frame(sp.fds[0], 64);
    REQUIRE(f2);
    CHECK(f2->op == static_cast<std::uint16_t>(Op::kHello));
    send_frame(sp.fds[1], make_frame(sr));
    CHECK_THROWS_AS(recv_frame(sp.fds[0], 16), Error);

    SocketPair trunc;
    const auto bytes = encode(make_frame(HelloReply{1, 2, 3}));
    send_bytes(trunc.fds[1], std::span(bytes).first(20));
    ::close(trunc.fds[1]);
    trunc.fds[1] = -1;
    CHECK_THROWS_AS(recv_frame(trunc.fds[0]), Error);

    SocketPair eof;
    ::close(eof.fds[1]);
    eof.fds[1] = -1;
    CHECK_FALSE(recv_frame(eof.fds[0]));
  }
}
