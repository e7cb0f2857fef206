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
#include <string>

#include "tumorcp/grid.hpp"

namespace tumorcp {

/// Millimetres per voxel along x, y, z. z is the through-plane axis.
struct Spacing {
  double dx = 1.0;
  double dy = 1.0;
  double dz = 1.0;

  double operator[](int axis) const { return axis == 0 ? dx : (axis == 1 ? dy : dz); }
  bool valid() const noexcept;
  friend bool operator==(const Spacing&, const Spacing&) = default;
};

using Label = std::uint8_t;

/// Label IDs used by a dataset. Defaults follow the KiTS19 convention.
struct LabelScheme {
  Label background = 0;
  Label organ = 1;
  Label tumor = 2;
};

/// Scalar intensity volume (Hounsfield-unit scale, 32-bit floats).
struct Volume {
  FloatGrid voxels;
  Spacing spacing;
  std::array<double, 3> origin{0.0, 0.0, 0.0};

  const Dims3& dims() const noexcept { return voxels.dims(); }
  friend bool operator==(const Volume&, const Volume&) = default;
};

/// Per-voxel annotation aligned with a Volume.
struct LabelMap {
  MaskGrid labels;

  const Dims3& dims() const noexcept { return labels.dims(); }
  friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

/// Throws kFormatError on a non-finite intensity or invalid spacing.
void validate(const Volume& volume);

/// Throws kShapeMismatch when the pair is not voxel-aligned.
void validate_pair(const Volume& volume, const LabelMap& labelmap);

/// Throws kFormatError when a voxel carries an ID outside the scheme.
void validate_labels(const LabelMap& labelmap, const LabelScheme& scheme);

}  // namespace tumorcp
