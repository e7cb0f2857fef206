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
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tumorcp/error.hpp"

namespace tumorcp {

/// Signed voxel coordinate. Transformed instances may sit partly outside the
/// volume they came from, so coordinates are allowed to go negative.
struct Index3 {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t z = 0;

  std::int64_t& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }
  std::int64_t operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }

  friend Index3 operator+(Index3 a, Index3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Index3 operator-(Index3 a, Index3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend bool operator==(const Index3&, const Index3&) = default;
  friend auto operator<=>(const Index3&, const Index3&) = default;
};

/// Grid extent, x fastest, z slowest.
struct Dims3 {
  std::int64_t nx = 0;
  std::int64_t ny = 0;
  std::int64_t nz = 0;

  std::int64_t operator[](int axis) const { return axis == 0 ? nx : (axis == 1 ? ny : nz); }
  std::int64_t& operator[](int axis) { return axis == 0 ? nx : (axis == 1 ? ny : nz); }

  std::size_t count() const noexcept {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
           static_cast<std::size_t>(nz);
  }
  bool positive() const noexcept { return nx > 0 && ny > 0 && nz > 0; }
  bool contains(const Index3& p) const noexcept {
    return p.x >= 0 && p.y >= 0 && p.z >= 0 && p.x < nx && p.y < ny && p.z < nz;
  }
  std::size_t linear(std::int64_t x, std::int64_t y, std::int64_t z) const noexcept {
    return static_cast<std::size_t>((z * ny + y) * nx + x);
  }
  std::size_t linear(const Index3& p) const noexcept { return linear(p.x, p.y, p.z); }
  Index3 unravel(std::size_t i) const noexcept {
    const auto li = static_cast<std::int64_t>(i);
    return {li % nx, (li / nx) % ny, li / (nx * ny)};
  }

  friend bool operator==(const Dims3&, const Dims3&) = default;
};

/// Dense 3D array in x-fastest order.
template <typename T>
class Grid {
 public:
  Grid() = default;
  explicit Grid(Dims3 dims, T fill = T{}) : dims_(dims), data_(checked_count(dims), fill) {}
  Grid(Dims3 dims, std::vector<T> data) : dims_(dims), data_(std::move(data)) {
    if (data_.size() != checked_count(dims))
      throw Error(ErrorCode::kShapeMismatch, "grid data size does not match dims");
  }

  const Dims3& dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::int64_t x, std::int64_t y, std::int64_t z) {
    return data_[dims_.linear(x, y, z)];
  }
  const T& operator()(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return data_[dims_.linear(x, y, z)];
  }
  T& operator[](const Index3& p) { return data_[dims_.linear(p)]; }
  const T& operator[](const Index3& p) const { return data_[dims_.linear(p)]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  std::vector<T>& storage() noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  static std::size_t checked_count(const Dims3& d) {
    if (d.nx < 0 || d.ny < 0 || d.nz < 0)
      throw Error(ErrorCode::kInvalidArgument, "negative grid dimension");
    return d.count();
  }

  Dims3 dims_{};
  std::vector<T> data_;
};

using MaskGrid = Grid<std::uint8_t>;
using FloatGrid = Grid<float>;

}  // namespace tumorcp
