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
#include <string>
#include <vector>

#include "tumorcp/volume.hpp"

namespace tumorcp {

/// Inclusive voxel bounds.
struct Box {
  Index3 lo;
  Index3 hi;

  Dims3 extent() const noexcept { return {hi.x - lo.x + 1, hi.y - lo.y + 1, hi.z - lo.z + 1}; }
  friend bool operator==(const Box&, const Box&) = default;
  friend auto operator<=>(const Box&, const Box&) = default;
};

/// One connected tumor component cut out of a case.
///
/// `bbox` is expressed in the voxel frame of the source case. Geometric
/// transforms keep that frame, so a rotated or scaled instance can report
/// bounds that run past the source volume (or below zero).
struct TumorInstance {
  std::string case_id;
  Box bbox;
  MaskGrid mask;          // extent == bbox.extent()
  FloatGrid intensities;  // same extent; values outside the mask are context only
  std::int64_t voxel_count = 0;
  Spacing spacing;

  friend bool operator==(const TumorInstance&, const TumorInstance&) = default;
};

/// Checks the tight-bbox and count invariants; throws kInvalidArgument.
void check_instance(const TumorInstance& instance);

/// Crops mask and intensities to the bounding box of the mask, shifting
/// `bbox` accordingly, and recounts voxels. Throws kEmptyResult when the
/// mask is empty.
void retighten(TumorInstance& instance);

/// 26-connected components of `tumor_label`, largest first; ties broken by
/// bbox (lo, then hi) lexicographically.
std::vector<TumorInstance> extract_tumors(const LabelMap& labelmap, const Volume& volume,
                                          Label tumor_label, const std::string& case_id = {});

/// Anatomical paste sites of a case.
struct OrganVoxelSet {
  std::string case_id;
  std::vector<Index3> coords;  // index order (x fastest)

  std::size_t count() const noexcept { return coords.size(); }
};

/// Voxels labelled organ, plus tumor voxels when `include_tumor` is set.
/// Throws kEmptyOrganSet when nothing qualifies.
OrganVoxelSet organ_voxel_set(const LabelMap& labelmap, Label organ_label, Label tumor_label,
                              bool include_tumor = true, const std::string& case_id = {});

}  // namespace tumorcp
