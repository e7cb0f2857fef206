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

#include "tumorcp/grid.hpp"
#include "tumorcp/volume.hpp"

namespace tumorcp {

/// Overlap score |a ∩ b| / |a ∪ b| over non-zero voxels. This is the form
/// KiTS-style tumor reports print under the name "Dice" (it is the Jaccard
/// index). Two empty masks score 1. Throws kShapeMismatch.
double dice(const MaskGrid& a, const MaskGrid& b);

/// Conventional Sørensen-Dice 2|a ∩ b| / (|a| + |b|); empty pair scores 1.
double dice_standard(const MaskGrid& a, const MaskGrid& b);

/// Binary mask of the voxels carrying `label`.
MaskGrid label_mask(const LabelMap& labelmap, Label label);

}  // namespace tumorcp
