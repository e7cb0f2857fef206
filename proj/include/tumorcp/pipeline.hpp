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

#include <functional>
#include <optional>
#include <string>

#include "tumorcp/dataset.hpp"
#include "tumorcp/rng.hpp"
#include "tumorcp/transforms.hpp"

namespace tumorcp {

/// How (source, target) pairs are drawn.
enum class PairMode { kIntra, kInter, kMixed };

std::string_view to_string(PairMode mode) noexcept;
PairMode pair_mode_from_string(std::string_view s);

struct PipelineConfig {
  double p_cp = 0.8;
  PairMode mode = PairMode::kMixed;
  double mixed_intra_fraction = 0.5;
  TransformConfig transform;
  bool allow_paste_on_tumor = true;
  std::int64_t min_voxels = 1;
  /// When false a paste that would leave the volume is rejected instead of
  /// being clipped at the border.
  bool paste_clip = true;

  void validate() const;
  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Provenance of one augment_once call. When `applied` is false the
/// source/instance/transform/location/clip fields are all empty; `failure`
/// then says why, if the copy-paste gate had fired.
struct AugmentationRecord {
  std::string target_case;
  bool applied = false;
  std::optional<std::string> source_case;
  std::optional<std::size_t> instance_index;
  std::optional<TransformParams> transform_params;
  std::optional<Index3> paste_location;
  std::optional<std::int64_t> clipped_voxels;
  std::optional<std::string> failure;
  std::uint64_t base_seed = 0;
  std::uint64_t stream_id = 0;

  friend bool operator==(const AugmentationRecord&, const AugmentationRecord&) = default;
};

struct SourceDraw {
  std::size_t source = 0;
  bool intra = true;
};

/// Picks the source case for `target`. Intra returns the target itself;
/// inter draws uniformly among the other cases holding at least one tumor
/// of `min_voxels` or more. Throws kNoTumorSource.
SourceDraw sample_pair(const Dataset& dataset, std::size_t target, PairMode mode,
                       double mixed_intra_fraction, RngStream& rng, std::int64_t min_voxels = 1);

/// Uniform draw over the paste sites. Throws kEmptyOrganSet.
Index3 sample_location(const OrganVoxelSet& organs, RngStream& rng);

struct PasteResult {
  Volume volume;
  LabelMap labelmap;
  std::int64_t clipped_voxels = 0;
  std::int64_t written_voxels = 0;
};

/// Offset that places the instance's centre voxel (floor(extent / 2)) on a
/// target coordinate.
Index3 paste_origin(const TumorInstance& instance, const Index3& location);

/// Writes every in-bounds mask voxel of `instance` (intensity and tumor
/// label) into fresh copies of the target, centred on `location`.
/// Throws kFullyClipped when nothing lands inside, or when `clip` is false
/// and any voxel would fall outside.
PasteResult paste(const TumorInstance& instance, const Volume& volume, const LabelMap& labelmap,
                  const Index3& location, Label tumor_label, bool clip = true);

/// Resamples an instance onto a different voxel spacing and re-tightens it.
TumorInstance resample_instance(const TumorInstance& instance, const Spacing& target);

/// The random decisions of one augment_once call, drawn up-front from the
/// sample's stream. Executing a plan consumes no further draws from it.
struct AugmentationPlan {
  bool copy_paste = false;
  std::optional<SourceDraw> pair;
  std::optional<std::size_t> instance_index;
  TransformParams params;
  GateDraws gates;
  std::optional<std::string> failure;
  RngStream elastic_stream{0, 0};
  RngStream location_stream{0, 0};
};

AugmentationPlan plan_augmentation(const Dataset& dataset, std::size_t target,
                                   const PipelineConfig& config, RngStream& rng);

/// Image-level augmentation hook run on every output (pasted or not).
using ImageHook = std::function<void(Volume&, LabelMap&, RngStream&)>;

struct AugmentResult {
  Volume volume;
  LabelMap labelmap;
  AugmentationRecord record;
};

/// One pass of the copy-paste pipeline on `target`. Degenerate draws
/// (no source tumor, empty transform result, no paste site, fully clipped
/// paste) fall back to the unchanged target with `record.failure` set.
AugmentResult augment_once(const Dataset& dataset, std::size_t target, const PipelineConfig& config,
                           RngStream rng, const ImageHook& hook = {});

}  // namespace tumorcp
