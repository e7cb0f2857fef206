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

#include "tumorcp/volume.hpp"

#include <cmath>
#include <string>

namespace tumorcp {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kFileNotFound: return "FileNotFound";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kDegenerateOutput: return "DegenerateOutput";
    case ErrorCode::kEmptyOrganSet: return "EmptyOrganSet";
    case ErrorCode::kEmptyResult: return "EmptyResult";
    case ErrorCode::kFullyClipped: return "FullyClipped";
    case ErrorCode::kNoTumorSource: return "NoTumorSource";
    case ErrorCode::kProtocolError: return "ProtocolError";
  }
  return "Unknown";
}

bool Spacing::valid() const noexcept {
  return std::isfinite(dx) && std::isfinite(dy) && std::isfinite(dz) && dx > 0 && dy > 0 &&
         dz > 0;
}

void validate(const Volume& volume) {
  if (!volume.spacing.valid())
    throw Error(ErrorCode::kFormatError, "spacing must be positive and finite");
  if (!volume.dims().positive())
    throw Error(ErrorCode::kFormatError, "volume dims must be positive");
  for (float v : volume.voxels.values()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kFormatError, "non-finite intensity");
  }
}

void validate_pair(const Volume& volume, const LabelMap& labelmap) {
  const Dims3& a = volume.dims();
  const Dims3& b = labelmap.dims();
  if (!(a == b)) {
    throw Error(ErrorCode::kShapeMismatch,
                "volume dims (" + std::to_string(a.nx) + "," + std::to_string(a.ny) + "," +
                    std::to_string(a.nz) + ") differ from labelmap dims (" +
                    std::to_string(b.nx) + "," + std::to_string(b.ny) + "," +
                    std::to_string(b.nz) + ")");
  }
}

void validate_labels(const LabelMap& labelmap, const LabelScheme& scheme) {
  for (Label l : labelmap.labels.values()) {
    if (l != scheme.background && l != scheme.organ && l != scheme.tumor)
      throw Error(ErrorCode::kFormatError, "undeclared label id " + std::to_string(l));
  }
}

}  // namespace tumorcp
