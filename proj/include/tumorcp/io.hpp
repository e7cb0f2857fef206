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
#include <utility>

#include "tumorcp/volume.hpp"

namespace tumorcp {

/// On-disk encodings understood by the loader. The format is chosen from the
/// file name: `.nii`, `.nii.gz`, or `.json` (a sidecar describing a `.raw`
/// file with the same stem).
enum class FileFormat { kNifti, kNiftiGz, kRawSidecar };

FileFormat format_from_path(const std::filesystem::path& path);

/// Path of the raw voxel file that belongs to a sidecar JSON.
std::filesystem::path raw_path_for(const std::filesystem::path& sidecar);

Volume read_volume(const std::filesystem::path& path);
LabelMap read_labelmap(const std::filesystem::path& path);

// Intensities are always written as 32-bit floats, labels as unsigned bytes.
// Spacing and origin for a label file are copied from the paired volume.
void write_volume(const std::filesystem::path& path, const Volume& volume);
void write_labelmap(const std::filesystem::path& path, const LabelMap& labelmap,
                    const Volume& geometry);

struct CasePaths {
  std::filesystem::path volume;
  std::filesystem::path labelmap;
};

std::pair<Volume, LabelMap> load_case(const CasePaths& paths);
void save_case(const Volume& volume, const LabelMap& labelmap, const CasePaths& paths);

}  // namespace tumorcp
