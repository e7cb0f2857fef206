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

#include <cstdint>

namespace tumorcp {

/// Stafford variant 13 of the SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based random stream. Draw n of stream (seed, id) depends only on
/// those three integers, so any worker can reproduce any stream on any
/// platform. No standard-library distributions are involved.
class RngStream {
 public:
  RngStream(std::uint64_t base_seed, std::uint64_t stream_id) noexcept
      : base_seed_(base_seed),
        stream_id_(stream_id),
        key_(mix64(base_seed ^ mix64(stream_id + 0x9e3779b97f4a7c15ULL))) {}

  std::uint64_t base_seed() const noexcept { return base_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi); returns lo when the range is empty.
  double uniform(double lo, double hi) noexcept {
    const double v = lo + (hi - lo) * uniform();
    return v < hi ? v : lo;
  }

  /// Uniform integer in [0, n) by rejection (no modulo bias). n must be > 0.
  std::uint64_t below(std::uint64_t n) noexcept {
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  /// True with probability p (p <= 0 never fires, p >= 1 always fires).
  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Independent child stream, keyed by `tag` and the parent's next draw.
  RngStream fork(std::uint64_t tag) noexcept { return RngStream(base_seed_ ^ mix64(tag), next_u64()); }

 private:
  std::uint64_t base_seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Stream id for one training sample: (case ordinal, epoch, sample index).
constexpr std::uint64_t sample_stream_id(std::uint64_t case_ordinal, std::uint64_t epoch,
                                         std::uint64_t sample_index) noexcept {
  return mix64(mix64(mix64(case_ordinal + 0x632be59bd9b4e019ULL) ^ epoch) + sample_index);
}

}  // namespace tumorcp
