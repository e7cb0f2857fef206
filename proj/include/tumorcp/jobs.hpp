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
#include <filesystem>
#include <string>

#include "json.hpp"

#include "tumorcp/dataset.hpp"
#include "tumorcp/pipeline.hpp"

namespace tumorcp {

// Batch operations behind the command-line tool.

/// Per-case tumor instances: count, voxel counts and bounding boxes.
nlohmann::json extract_summary(const Dataset& dataset);

struct AugmentJob {
  PipelineConfig config;
  std::uint64_t seed = 0;
  std::uint32_t n_per_case = 1;
  unsigned workers = 1;
  std::filesystem::path out_dir;
  ImageHook hook;
};

struct AugmentJobResult {
  std::size_t samples = 0;
  std::size_t applied = 0;
  double seconds = 0.0;
};

/// Writes `n_per_case` augmented pairs for every case under
/// `out_dir/<case>_aug<k>/{imaging,segmentation}.<ext>`, one JSON line per
/// sample in `out_dir/records.jsonl`, and a `dataset.json` manifest so the
/// output is itself a dataset. Output files keep the source format
/// (in-memory cases are written as .nii.gz). Sample k of case i uses stream
/// sample_stream_id(i, 0, k), so the result does not depend on `workers`.
/// Nothing is left behind in `out_dir` when the job fails.
AugmentJobResult run_augment(const Dataset& dataset, const AugmentJob& job);

struct PreviewJob {
  PipelineConfig config;
  std::uint64_t seed = 0;
  std::uint64_t sample_index = 0;
  std::filesystem::path out_dir;
};

/// Renders `before.png` and `after.png` (one axial slice with organ and
/// tumor contours) plus `record.json` for one draw on `case_index`.
/// Returns the record.
AugmentationRecord run_preview(const Dataset& dataset, std::size_t case_index, const PreviewJob& job);

/// Renders axial slice `z` of a case as RGB with contours. Intensities are
/// windowed to [lo, hi].
std::vector<std::uint8_t> render_slice(const Volume& volume, const LabelMap& labelmap,
                                       const LabelScheme& labels, std::int64_t z, float lo, float hi);

/// Dimensions, spacing, and label/instance counts per case.
nlohmann::json dataset_stats(const Dataset& dataset);

/// Runs only the random decisions of `draws` augmentations (round-robin over
/// cases) and reports how often each gate fired next to its configured rate.
nlohmann::json gate_stats(const Dataset& dataset, const PipelineConfig& config, std::uint64_t seed,
                          std::uint64_t draws);

}  // namespace tumorcp
