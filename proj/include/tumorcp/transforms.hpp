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
#include <optional>
#include <vector>

#include "tumorcp/extract.hpp"
#include "tumorcp/rng.hpp"

namespace tumorcp {

struct Range {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const noexcept { return v >= lo && v <= hi; }
  friend bool operator==(const Range&, const Range&) = default;
};

/// Gate probabilities and parameter ranges for the object-level transforms.
/// The rigid gate opens three inner gates (mirror, rotate, scale).
struct TransformConfig {
  double p_rigid = 0.5;
  double p_elastic = 0.5;
  double p_gamma = 0.5;
  double p_blur = 0.5;
  double p_mirror_inner = 0.5;
  double p_rotate_inner = 0.5;
  double p_scale_inner = 0.5;
  Range scale_range{0.75, 1.25};
  Range rotation_range{-3.14159265358979323846, 3.14159265358979323846};
  Range elastic_alpha_range{0.0, 900.0};
  Range elastic_sigma_range{9.0, 13.0};
  Range gamma_range{0.7, 1.5};
  Range blur_sigma_range{0.5, 1.0};

  /// Throws kInvalidArgument naming the offending field.
  void validate() const;
  friend bool operator==(const TransformConfig&, const TransformConfig&) = default;
};

/// Bit set over axes; 0 is the identity combination.
enum MirrorAxis : std::uint8_t { kMirrorX = 1, kMirrorY = 2, kMirrorZ = 4 };

struct ElasticParams {
  double alpha = 0.0;
  double sigma = 1.0;
  friend bool operator==(const ElasticParams&, const ElasticParams&) = default;
};

/// One concrete draw. A field is empty when its gate did not fire.
struct TransformParams {
  std::optional<std::uint8_t> mirror_axes;
  std::optional<double> rotation_z;
  std::optional<double> scale;
  std::optional<ElasticParams> elastic;
  std::optional<double> gamma;
  std::optional<double> blur_sigma;

  bool rigid() const noexcept { return mirror_axes || rotation_z || scale; }
  bool any() const noexcept { return rigid() || elastic || gamma || blur_sigma; }
  friend bool operator==(const TransformParams&, const TransformParams&) = default;
};

/// Which gates fired during sampling. The rigid family gate can fire while
/// all three inner gates stay closed.
struct GateDraws {
  bool rigid = false;
  bool elastic = false;
  bool gamma = false;
  bool blur = false;
};

TransformParams sample_params(const TransformConfig& config, RngStream& rng,
                              GateDraws* gates = nullptr);

/// Flip along every axis in `axes` (MirrorAxis bits). Bounds are unchanged.
TumorInstance apply_mirror(const TumorInstance& instance, std::uint8_t axes);

/// In-plane rotation of every z-slice about the slice-plane bbox centre.
/// The output plane grows to hold the rotated footprint.
TumorInstance apply_rotation_z(const TumorInstance& instance, double radians);

/// Resize all three axes by `factor` about the bbox centre.
TumorInstance apply_scale(const TumorInstance& instance, double factor);

/// mirror -> rotate -> scale; absent steps are skipped.
TumorInstance apply_rigid(const TumorInstance& instance, std::optional<std::uint8_t> mirror_axes,
                          std::optional<double> rotation_z, std::optional<double> scale);

TumorInstance apply_elastic(const TumorInstance& instance, double alpha, double sigma,
                            RngStream& rng);

/// Moment-preserving power-law remap over the masked voxels.
TumorInstance apply_gamma(const TumorInstance& instance, double gamma);

/// Gaussian smoothing of the bbox intensities; only masked voxels are
/// written back.
TumorInstance apply_blur(const TumorInstance& instance, double sigma);

/// Applies every present transform in the order
/// mirror, rotate, scale, elastic, gamma, blur.
TumorInstance apply_transforms(const TumorInstance& instance, const TransformParams& params,
                               RngStream& rng);

/// Normalised Gaussian taps, truncated at radius floor(4 sigma + 0.5).
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian smoothing with reflect ("d c b a | a b c d") borders.
void gaussian_filter(FloatGrid& grid, double sigma);

}  // namespace tumorcp
