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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tumorcp/extract.hpp"
#include "tumorcp/io.hpp"

namespace tumorcp {

struct DatasetEntry {
  std::string case_id;
  CasePaths paths;
};

/// The training set as a list of files.
///
/// A dataset directory is described either by a `dataset.json` manifest
///
///     {"organ_label": 1, "tumor_label": 2,
///      "cases": [{"case_id": "a", "volume": "a_img.nii.gz", "labelmap": "a_seg.nii.gz"}]}
///
/// (paths relative to the directory), or, without a manifest, by KiTS-style
/// case folders `<case_id>/imaging.{nii,nii.gz,json}` next to
/// `<case_id>/segmentation.{nii,nii.gz,json}`.
struct DatasetIndex {
  std::filesystem::path root;
  std::vector<DatasetEntry> entries;
  LabelScheme labels;

  /// Throws kFileNotFound for a missing directory and kFormatError for an
  /// empty one ("no cases found") or a malformed manifest.
  static DatasetIndex scan(const std::filesystem::path& dir);

  /// Unique case ids; throws kFormatError.
  void validate() const;

  /// Writes `dataset.json` for the current entries (paths made relative to
  /// `root` when possible).
  void write_manifest() const;
};

/// One loaded case with everything the pipeline samples from.
struct CaseData {
  std::string case_id;
  Volume volume;
  LabelMap labelmap;
  std::vector<TumorInstance> tumors;                // extract_tumors order
  std::optional<OrganVoxelSet> sites_with_tumor;    // organ + tumor voxels
  std::optional<OrganVoxelSet> sites_organ_only;    // organ voxels only
  std::optional<CasePaths> origin;                  // files it was loaded from
};

/// Immutable in-memory snapshot of a dataset. Safe to share read-only
/// between threads.
class Dataset {
 public:
  static Dataset load(const DatasetIndex& index);

  struct InMemoryCase {
    std::string case_id;
    Volume volume;
    LabelMap labelmap;
  };
  static Dataset from_cases(std::vector<InMemoryCase> cases, LabelScheme labels = {});

  std::size_t size() const noexcept { return cases_.size(); }
  const CaseData& at(std::size_t i) const { return cases_.at(i); }
  std::optional<std::size_t> find(const std::string& case_id) const;
  const LabelScheme& labels() const noexcept { return labels_; }

 private:
  static CaseData prepare(std::string case_id, Volume volume, LabelMap labelmap,
                          const LabelScheme& labels);

  std::vector<CaseData> cases_;
  LabelScheme labels_;
};

}  // namespace tumorcp
