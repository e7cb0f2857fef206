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

#include "tumorcp/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "json.hpp"

namespace tumorcp {
namespace fs = std::filesystem;

namespace {

std::optional<fs::path> find_image(const fs::path& dir, const std::string& stem) {
  for (const char* ext : {".nii.gz", ".nii", ".json"}) {
    fs::path p = dir / (stem + ext);
    std::error_code ec;
    if (fs::is_regular_file(p, ec)) return p;
  }
  return std::nullopt;
}

Label label_field(const nlohmann::json& j, const char* key, Label fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = j.at(key).get<int>();
  if (v < 0 || v > 255) throw Error(ErrorCode::kFormatError, std::string(key) + " out of range");
  return static_cast<Label>(v);
}

std::optional<OrganVoxelSet> try_sites(const LabelMap& l, const LabelScheme& s, bool with_tumor,
                                       const std::string& id) {
  try {
    return organ_voxel_set(l, s.organ, s.tumor, with_tumor, id);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kEmptyOrganSet) throw;
    return std::nullopt;
  }
}

}  // namespace

DatasetIndex DatasetIndex::scan(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec))
    throw Error(ErrorCode::kFileNotFound, "dataset directory not found: " + dir.string());

  DatasetIndex index;
  index.root = dir;
  const fs::path manifest = dir / "dataset.json";
  if (fs::is_regular_file(manifest, ec)) {
    std::ifstream in(manifest);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
      index.labels.background = label_field(j, "background_label", 0);
      index.labels.organ = label_field(j, "organ_label", 1);
      index.labels.tumor = label_field(j, "tumor_label", 2);
      for (const auto& c : j.at("cases")) {
        DatasetEntry e;
        e.case_id = c.at("case_id").get<std::string>();
        e.paths.volume = dir / c.at("volume").get<std::string>();
        e.paths.labelmap = dir / c.at("labelmap").get<std::string>();
        index.entries.push_back(std::move(e));
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormatError, manifest.string() + ": " + e.what());
    }
  } else {
    std::vector<fs::path> dirs;
    for (const auto& de : fs::directory_iterator(dir)) {
      if (de.is_directory()) dirs.push_back(de.path());
    }
    std::sort(dirs.begin(), dirs.end());
    for (const auto& d : dirs) {
      auto img = find_image(d, "imaging");
      auto seg = find_image(d, "segmentation");
      if (img && seg) index.entries.push_back({d.filename().string(), {*img, *seg}});
    }
  }
  if (index.entries.empty())
    throw Error(ErrorCode::kFormatError, "no cases found in " + dir.string());
  index.validate();
  return index;
}

void DatasetIndex::validate() const {
  std::set<std::string> seen;
  for (const auto& e : entries) {
    if (e.case_id.empty()) throw Error(ErrorCode::kFormatError, "empty case_id");
    if (!seen.insert(e.case_id).second)
      throw Error(ErrorCode::kFormatError, "duplicate case_id " + e.case_id);
  }
}

void DatasetIndex::write_manifest() const {
  nlohmann::json j;
  j["background_label"] = labels.background;
  j["organ_label"] = labels.organ;
  j["tumor_label"] = labels.tumor;
  j["cases"] = nlohmann::json::array();
  auto rel = [&](const fs::path& p) {
    std::error_code ec;
    const fs::path r = fs::relative(p, root, ec);
    return (ec || r.empty()) ? p.generic_string() : r.generic_string();
  };
  for (const auto& e : entries) {
    j["cases"].push_back(
        {{"case_id", e.case_id}, {"volume", rel(e.paths.volume)}, {"labelmap", rel(e.paths.labelmap)}});
  }
  std::ofstream out(root / "dataset.json", std::ios::trunc);
  out << j.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::kIoError, "cannot write manifest in " + root.string());
}

CaseData Dataset::prepare(std::string case_id, Volume volume, LabelMap labelmap,
                          const LabelScheme& labels) {
  validate_pair(volume, labelmap);
  CaseData c;
  c.case_id = std::move(case_id);
  c.tumors = extract_tumors(labelmap, volume, labels.tumor, c.case_id);
  c.sites_with_tumor = try_sites(labelmap, labels, true, c.case_id);
  c.sites_organ_only = try_sites(labelmap, labels, false, c.case_id);
  c.volume = std::move(volume);
  c.labelmap = std::move(labelmap);
  return c;
}

Dataset Dataset::load(const DatasetIndex& index) {
  index.validate();
  Dataset ds;
  ds.labels_ = index.labels;
  ds.cases_.reserve(index.entries.size());
  for (const auto& e : index.entries) {
    auto [v, l] = load_case(e.paths);
    ds.cases_.push_back(prepare(e.case_id, std::move(v), std::move(l), index.labels));
    ds.cases_.back().origin = e.paths;
  }
  return ds;
}

Dataset Dataset::from_cases(std::vector<InMemoryCase> cases, LabelScheme labels) {
  Dataset ds;
  ds.labels_ = labels;
  std::set<std::string> seen;
  for (auto& c : cases) {
    if (!seen.insert(c.case_id).second)
      throw Error(ErrorCode::kFormatError, "duplicate case_id " + c.case_id);
    validate(c.volume);
    ds.cases_.push_back(prepare(std::move(c.case_id), std::move(c.volume), std::move(c.labelmap), labels));
  }
  return ds;
}

std::optional<std::size_t> Dataset::find(const std::string& case_id) const {
  for (std::size_t i = 0; i < cases_.size(); ++i)
    if (cases_[i].case_id == case_id) return i;
  return std::nullopt;
}

}  // namespace tumorcp
