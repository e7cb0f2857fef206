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

#include "tumorcp/resample.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tumorcp {
namespace {

std::int64_t clamp_index(std::int64_t i, std::int64_t n) noexcept {
  return i < 0 ? 0 : (i >= n ? n - 1 : i);
}

// One axis of a separable resize. `axis` selects the varying index.
FloatGrid resize_axis(const FloatGrid& in, int axis, std::int64_t out_n) {
  Dims3 od = in.dims();
  const std::int64_t in_n = od[axis];
  od[axis] = out_n;
  FloatGrid out(od);
  if (out_n == in_n) {
    out = in;
    return out;
  }
  const double ratio = static_cast<double>(in_n) / static_cast<double>(out_n);

  // Taps are the same for every line along this axis.
  std::vector<std::array<std::int64_t, 4>> idx(static_cast<std::size_t>(out_n));
  std::vector<std::array<double, 4>> wts(static_cast<std::size_t>(out_n));
  for (std::int64_t i = 0; i < out_n; ++i) {
    const double x = (static_cast<double>(i) + 0.5) * ratio - 0.5;
    const double f = std::floor(x);
    wts[static_cast<std::size_t>(i)] = cubic_weights(x - f);
    const auto base = static_cast<std::int64_t>(f);
    for (int k = 0; k < 4; ++k) idx[static_cast<std::size_t>(i)][k] = clamp_index(base - 1 + k, in_n);
  }

  const Dims3& id = in.dims();
  for (std::int64_t z = 0; z < od.nz; ++z) {
    for (std::int64_t y = 0; y < od.ny; ++y) {
      for (std::int64_t x = 0; x < od.nx; ++x) {
        const std::int64_t i = axis == 0 ? x : (axis == 1 ? y : z);
        const auto& ix = idx[static_cast<std::size_t>(i)];
        const auto& w = wts[static_cast<std::size_t>(i)];
        double acc = 0.0;
        for (int k = 0; k < 4; ++k) {
          const std::int64_t sx = axis == 0 ? ix[k] : x;
          const std::int64_t sy = axis == 1 ? ix[k] : y;
          const std::int64_t sz = axis == 2 ? ix[k] : z;
          if (w[k] != 0.0) acc += w[k] * static_cast<double>(in.storage()[id.linear(sx, sy, sz)]);
        }
        out(x, y, z) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

}  // namespace

std::array<double, 4> cubic_weights(double t) noexcept {
  constexpr double a = -0.5;
  const double t2 = t * t;
  const double t3 = t2 * t;
  // Distances to the taps are 1 + t, t, 1 - t, 2 - t.
  const double w0 = a * (t3 - 2.0 * t2 + t);
  const double w1 = (a + 2.0) * t3 - (a + 3.0) * t2 + 1.0;
  const double s = 1.0 - t;
  const double w2 = (a + 2.0) * s * s * s - (a + 3.0) * s * s + 1.0;
  const double w3 = a * (s * s * s - 2.0 * s * s + s);
  return {w0, w1, w2, w3};
}

double sample_cubic(const FloatGrid& grid, double x, double y, double z) noexcept {
  const Dims3& d = grid.dims();
  const double fx = std::floor(x), fy = std::floor(y), fz = std::floor(z);
  const auto wx = cubic_weights(x - fx);
  const auto wy = cubic_weights(y - fy);
  const auto wz = cubic_weights(z - fz);
  const auto bx = static_cast<std::int64_t>(fx) - 1;
  const auto by = static_cast<std::int64_t>(fy) - 1;
  const auto bz = static_cast<std::int64_t>(fz) - 1;
  const auto& data = grid.storage();
  double acc = 0.0;
  for (int k = 0; k < 4; ++k) {
    if (wz[k] == 0.0) continue;
    const std::int64_t zz = clamp_index(bz + k, d.nz);
    double plane = 0.0;
    for (int j = 0; j < 4; ++j) {
      if (wy[j] == 0.0) continue;
      const std::int64_t yy = clamp_index(by + j, d.ny);
      double row = 0.0;
      for (int i = 0; i < 4; ++i) {
        if (wx[i] == 0.0) continue;
        row += wx[i] * static_cast<double>(data[d.linear(clamp_index(bx + i, d.nx), yy, zz)]);
      }
      plane += wy[j] * row;
    }
    acc += wz[k] * plane;
  }
  return acc;
}

double sample_cubic_2d(const FloatGrid& grid, double x, double y, std::int64_t z) noexcept {
  const Dims3& d = grid.dims();
  const double fx = std::floor(x), fy = std::floor(y);
  const auto wx = cubic_weights(x - fx);
  const auto wy = cubic_weights(y - fy);
  const auto bx = static_cast<std::int64_t>(fx) - 1;
  const auto by = static_cast<std::int64_t>(fy) - 1;
  const auto& data = grid.storage();
  double acc = 0.0;
  for (int j = 0; j < 4; ++j) {
    if (wy[j] == 0.0) continue;
    const std::int64_t yy = clamp_index(by + j, d.ny);
    double row = 0.0;
    for (int i = 0; i < 4; ++i) {
      if (wx[i] == 0.0) continue;
      row += wx[i] * static_cast<double>(data[d.linear(clamp_index(bx + i, d.nx), yy, z)]);
    }
    acc += wy[j] * row;
  }
  return acc;
}

std::uint8_t sample_nearest(const MaskGrid& grid, double x, double y, double z) noexcept {
  const auto ix = static_cast<std::int64_t>(std::floor(x + 0.5));
  const auto iy = static_cast<std::int64_t>(std::floor(y + 0.5));
  const auto iz = static_cast<std::int64_t>(std::floor(z + 0.5));
  const Index3 p{ix, iy, iz};
  return grid.dims().contains(p) ? grid[p] : 0;
}

Dims3 resampled_dims(const Dims3& in, const Spacing& src, const Spacing& tgt, bool clamp_minimum) {
  if (!src.valid() || !tgt.valid())
    throw Error(ErrorCode::kInvalidArgument, "spacings must be positive and finite");
  if (!in.positive()) throw Error(ErrorCode::kInvalidArgument, "cannot resample an empty patch");
  Dims3 out;
  for (int a = 0; a < 3; ++a) {
    const auto n = static_cast<std::int64_t>(
        std::llround(static_cast<double>(in[a]) * src[a] / tgt[a]));
    if (n <= 0 && !clamp_minimum)
      throw Error(ErrorCode::kDegenerateOutput,
                  "resampled extent is zero along axis " + std::to_string(a));
    out[a] = std::max<std::int64_t>(n, 1);
  }
  return out;
}

FloatGrid resize(const FloatGrid& grid, const Dims3& out_dims) {
  if (!out_dims.positive() || !grid.dims().positive())
    throw Error(ErrorCode::kInvalidArgument, "resize needs non-empty extents");
  FloatGrid g = resize_axis(grid, 0, out_dims.nx);
  g = resize_axis(g, 1, out_dims.ny);
  return resize_axis(g, 2, out_dims.nz);
}

MaskGrid resize(const MaskGrid& grid, const Dims3& out_dims) {
  if (!out_dims.positive() || !grid.dims().positive())
    throw Error(ErrorCode::kInvalidArgument, "resize needs non-empty extents");
  const Dims3& id = grid.dims();
  if (id == out_dims) return grid;
  std::array<std::vector<std::int64_t>, 3> src;
  for (int a = 0; a < 3; ++a) {
    const double ratio = static_cast<double>(id[a]) / static_cast<double>(out_dims[a]);
    src[a].resize(static_cast<std::size_t>(out_dims[a]));
    for (std::int64_t i = 0; i < out_dims[a]; ++i) {
      const double x = (static_cast<double>(i) + 0.5) * ratio - 0.5;
      src[a][static_cast<std::size_t>(i)] =
          clamp_index(static_cast<std::int64_t>(std::floor(x + 0.5)), id[a]);
    }
  }
  MaskGrid out(out_dims);
  for (std::int64_t z = 0; z < out_dims.nz; ++z)
    for (std::int64_t y = 0; y < out_dims.ny; ++y)
      for (std::int64_t x = 0; x < out_dims.nx; ++x)
        out(x, y, z) = grid(src[0][static_cast<std::size_t>(x)], src[1][static_cast<std::size_t>(y)],
                            src[2][static_cast<std::size_t>(z)]) != 0;
  return out;
}

FloatGrid resample_patch(const FloatGrid& patch, const Spacing& src, const Spacing& tgt,
                         bool clamp_minimum) {
  return resize(patch, resampled_dims(patch.dims(), src, tgt, clamp_minimum));
}

MaskGrid resample_patch(const MaskGrid& patch, const Spacing& src, const Spacing& tgt,
                        bool clamp_minimum) {
  return resize(patch, resampled_dims(patch.dims(), src, tgt, clamp_minimum));
}

}  // namespace tumorcp
