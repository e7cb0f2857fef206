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

#include "tumorcp/grid.hpp"
#include "tumorcp/volume.hpp"

namespace tumorcp {

/// Keys cubic convolution weights (a = -0.5) for the four taps at offsets
/// -1, 0, 1, 2 around floor(x), where t = x - floor(x). At t = 0 the weights
/// are exactly {0, 1, 0, 0}, so sampling on integer positions is lossless.
std::array<double, 4> cubic_weights(double t) noexcept;

/// Cubic sample with edge clamping. Coordinates are in voxel units.
double sample_cubic(const FloatGrid& grid, double x, double y, double z) noexcept;

/// Bicubic sample inside one z-slice with edge clamping.
double sample_cubic_2d(const FloatGrid& grid, double x, double y, std::int64_t z) noexcept;

/// Nearest-neighbour mask lookup; positions outside the grid read as 0.
std::uint8_t sample_nearest(const MaskGrid& grid, double x, double y, double z) noexcept;

/// Output extent round(n * src / tgt) per axis. With `clamp_minimum` every
/// axis is at least 1; without it a zero axis raises kDegenerateOutput.
Dims3 resampled_dims(const Dims3& in, const Spacing& src, const Spacing& tgt,
                     bool clamp_minimum = true);

// Axis-aligned resize to an explicit extent. Voxel centres are aligned, i.e.
// output index i reads input coordinate (i + 0.5) * n_in / n_out - 0.5.
FloatGrid resize(const FloatGrid& grid, const Dims3& out_dims);
MaskGrid resize(const MaskGrid& grid, const Dims3& out_dims);

/// Resample a patch between voxel spacings. Intensities use separable cubic
/// interpolation; masks use nearest neighbour and stay binary.
FloatGrid resample_patch(const FloatGrid& patch, const Spacing& src, const Spacing& tgt,
                         bool clamp_minimum = true);
MaskGrid resample_patch(const MaskGrid& patch, const Spacing& src, const Spacing& tgt,
                        bool clamp_minimum = true);

}  // namespace tumorcp
