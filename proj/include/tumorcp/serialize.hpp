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
#include <string>

#include "json.hpp"

#include "tumorcp/pipeline.hpp"

namespace tumorcp {

// JSON forms of the pipeline configuration and provenance records. Config
// parsing is strict: unknown keys are rejected so that a typo cannot
// silently fall back to a default. Missing keys keep their defaults.

nlohmann::json to_json(const TransformConfig& config);
nlohmann::json to_json(const PipelineConfig& config);
nlohmann::json to_json(const TransformParams& params);
nlohmann::json to_json(const AugmentationRecord& record);

TransformConfig transform_config_from_json(const nlohmann::json& j);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
TransformParams transform_params_from_json(const nlohmann::json& j);
AugmentationRecord record_from_json(const nlohmann::json& j);

/// Reads and validates a pipeline config file. Throws kFileNotFound or
/// kFormatError.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Parses and validates a config given as JSON text; empty text gives the
/// defaults.
PipelineConfig parse_pipeline_config(const std::string& text);

/// One JSON-lines row (no trailing newline).
std::string record_line(const AugmentationRecord& record);

}  // namespace tumorcp
