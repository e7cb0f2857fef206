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

#include "tumorcp/serialize.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace tumorcp {
using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::kFormatError, what); }

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) bad(std::string(where) + " must be a JSON object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [k, _] : j.items())
    if (!keys.count(k)) bad(std::string("unknown key '") + k + "' in " + where);
}

json range_json(const Range& r) { return json::array({r.lo, r.hi}); }

Range range_from(const json& j, const char* name) {
  if (!j.is_array() || j.size() != 2) bad(std::string(name) + " must be [lo, hi]");
  return {j[0].get<double>(), j[1].get<double>()};
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json index_json(const Index3& p) { return json::array({p.x, p.y, p.z}); }

}  // namespace

json to_json(const TransformConfig& c) {
  return {{"p_rigid", c.p_rigid},
          {"p_elastic", c.p_elastic},
          {"p_gamma", c.p_gamma},
          {"p_blur", c.p_blur},
          {"p_mirror_inner", c.p_mirror_inner},
          {"p_rotate_inner", c.p_rotate_inner},
          {"p_scale_inner", c.p_scale_inner},
          {"scale_range", range_json(c.scale_range)},
          {"rotation_range", range_json(c.rotation_range)},
          {"elastic_alpha_range", range_json(c.elastic_alpha_range)},
          {"elastic_sigma_range", range_json(c.elastic_sigma_range)},
          {"gamma_range", range_json(c.gamma_range)},
          {"blur_sigma_range", range_json(c.blur_sigma_range)}};
}

json to_json(const PipelineConfig& c) {
  return {{"p_cp", c.p_cp},
          {"mode", std::string(to_string(c.mode))},
          {"mixed_intra_fraction", c.mixed_intra_fraction},
          {"transform", to_json(c.transform)},
          {"allow_paste_on_tumor", c.allow_paste_on_tumor},
          {"min_voxels", c.min_voxels},
          {"paste_clip", c.paste_clip}};
}

json to_json(const TransformParams& p) {
  json j = json::object();
  auto opt = [](const auto& v) -> json { return v ? json(*v) : json(nullptr); };
  if (p.mirror_axes) {
    json axes = json::array();
    if (*p.mirror_axes & kMirrorX) axes.push_back("x");
    if (*p.mirror_axes & kMirrorY) axes.push_back("y");
    if (*p.mirror_axes & kMirrorZ) axes.push_back("z");
    j["mirror_axes"] = axes;
  } else {
    j["mirror_axes"] = nullptr;
  }
  j["rotation_z"] = opt(p.rotation_z);
  j["scale"] = opt(p.scale);
  j["elastic"] = p.elastic ? json{{"alpha", p.elastic->alpha}, {"sigma", p.elastic->sigma}} : json(nullptr);
  j["gamma"] = opt(p.gamma);
  j["blur_sigma"] = opt(p.blur_sigma);
  return j;
}

json to_json(const AugmentationRecord& r) {
  json j;
  j["target_case"] = r.target_case;
  j["applied"] = r.applied;
  j["source_case"] = r.source_case ? json(*r.source_case) : json(nullptr);
  j["instance_index"] = r.instance_index ? json(*r.instance_index) : json(nullptr);
  j["transform_params"] = r.transform_params ? to_json(*r.transform_params) : json(nullptr);
  j["paste_location"] = r.paste_location ? index_json(*r.paste_location) : json(nullptr);
  j["clipped_voxels"] = r.clipped_voxels ? json(*r.clipped_voxels) : json(nullptr);
  j["failure"] = r.failure ? json(*r.failure) : json(nullptr);
  j["base_seed"] = r.base_seed;
  j["stream_id"] = r.stream_id;
  return j;
}

TransformConfig transform_config_from_json(const json& j) {
  reject_unknown(j,
                 {"p_rigid", "p_elastic", "p_gamma", "p_blur", "p_mirror_inner", "p_rotate_inner",
                  "p_scale_inner", "scale_range", "rotation_range", "elastic_alpha_range",
                  "elastic_sigma_range", "gamma_range", "blur_sigma_range"},
                 "transform config");
  TransformConfig c;
  try {
    read_opt(j, "p_rigid", c.p_rigid);
    read_opt(j, "p_elastic", c.p_elastic);
    read_opt(j, "p_gamma", c.p_gamma);
    read_opt(j, "p_blur", c.p_blur);
    read_opt(j, "p_mirror_inner", c.p_mirror_inner);
    read_opt(j, "p_rotate_inner", c.p_rotate_inner);
    read_opt(j, "p_scale_inner", c.p_scale_inner);
    if (j.contains("scale_range")) c.scale_range = range_from(j["scale_range"], "scale_range");
    if (j.contains("rotation_range")) c.rotation_range = range_from(j["rotation_range"], "rotation_range");
    if (j.contains("elastic_alpha_range"))
      c.elastic_alpha_range = range_from(j["elastic_alpha_range"], "elastic_alpha_range");
    if (j.contains("elastic_sigma_range"))
      c.elastic_sigma_range = range_from(j["elastic_sigma_range"], "elastic_sigma_range");
    if (j.contains("gamma_range")) c.gamma_range = range_from(j["gamma_range"], "gamma_range");
    if (j.contains("blur_sigma_range"))
      c.blur_sigma_range = range_from(j["blur_sigma_range"], "blur_sigma_range");
  } catch (const json::exception& e) {
    bad(std::string("transform config: ") + e.what());
  }
  return c;
}

PipelineConfig pipeline_config_from_json(const json& j) {
  reject_unknown(j,
                 {"p_cp", "mode", "mixed_intra_fraction", "transform", "allow_paste_on_tumor",
                  "min_voxels", "paste_clip"},
                 "pipeline config");
  PipelineConfig c;
  try {
    read_opt(j, "p_cp", c.p_cp);
    if (j.contains("mode")) c.mode = pair_mode_from_string(j.at("mode").get<std::string>());
    read_opt(j, "mixed_intra_fraction", c.mixed_intra_fraction);
    if (j.contains("transform")) c.transform = transform_config_from_json(j.at("transform"));
    read_opt(j, "allow_paste_on_tumor", c.allow_paste_on_tumor);
    read_opt(j, "min_voxels", c.min_voxels);
    read_opt(j, "paste_clip", c.paste_clip);
  } catch (const json::exception& e) {
    bad(std::string("pipeline config: ") + e.what());
  } catch (const Error& e) {
    bad(e.what());
  }
  return c;
}

TransformParams transform_params_from_json(const json& j) {
  TransformParams p;
  try {
    if (!j.at("mirror_axes").is_null()) {
      std::uint8_t bits = 0;
      for (const auto& a : j.at("mirror_axes")) {
        const auto s = a.get<std::string>();
        if (s == "x") bits |= kMirrorX;
        else if (s == "y") bits |= kMirrorY;
        else if (s == "z") bits |= kMirrorZ;
        else bad("unknown mirror axis " + s);
      }
      p.mirror_axes = bits;
    }
    if (!j.at("rotation_z").is_null()) p.rotation_z = j.at("rotation_z").get<double>();
    if (!j.at("scale").is_null()) p.scale = j.at("scale").get<double>();
    if (!j.at("elastic").is_null())
      p.elastic = ElasticParams{j.at("elastic").at("alpha").get<double>(),
                                j.at("elastic").at("sigma").get<double>()};
    if (!j.at("gamma").is_null()) p.gamma = j.at("gamma").get<double>();
    if (!j.at("blur_sigma").is_null()) p.blur_sigma = j.at("blur_sigma").get<double>();
  } catch (const json::exception& e) {
    bad(std::string("transform params: ") + e.what());
  }
  return p;
}

AugmentationRecord record_from_json(const json& j) {
  AugmentationRecord r;
  try {
    r.target_case = j.at("target_case").get<std::string>();
    r.applied = j.at("applied").get<bool>();
    if (!j.at("source_case").is_null()) r.source_case = j.at("source_case").get<std::string>();
    if (!j.at("instance_index").is_null()) r.instance_index = j.at("instance_index").get<std::size_t>();
    if (!j.at("transform_params").is_null())
      r.transform_params = transform_params_from_json(j.at("transform_params"));
    if (!j.at("paste_location").is_null()) {
      const auto v = j.at("paste_location").get<std::vector<std::int64_t>>();
      if (v.size() != 3) bad("paste_location needs 3 entries");
      r.paste_location = Index3{v[0], v[1], v[2]};
    }
    if (!j.at("clipped_voxels").is_null()) r.clipped_voxels = j.at("clipped_voxels").get<std::int64_t>();
    if (!j.at("failure").is_null()) r.failure = j.at("failure").get<std::string>();
    r.base_seed = j.at("base_seed").get<std::uint64_t>();
    r.stream_id = j.at("stream_id").get<std::uint64_t>();
  } catch (const json::exception& e) {
    bad(std::string("augmentation record: ") + e.what());
  }
  return r;
}

PipelineConfig parse_pipeline_config(const std::string& text) {
  PipelineConfig c;
  if (text.find_first_not_of(" \t\r\n") != std::string::npos) {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      bad(std::string("config is not valid JSON: ") + e.what());
    }
    c = pipeline_config_from_json(j);
  }
  try {
    c.validate();
  } catch (const Error& e) {
    bad(e.what());
  }
  return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, "config not found: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_pipeline_config(ss.str());
}

std::string record_line(const AugmentationRecord& record) { return to_json(record).dump(); }

}  // namespace tumorcp
