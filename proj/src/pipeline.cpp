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

#include "tumorcp/pipeline.hpp"

#include <cmath>

#include "tumorcp/resample.hpp"

namespace tumorcp {
namespace {

constexpr std::uint64_t kElasticTag = 0x656c6173;   // "elas"
constexpr std::uint64_t kLocationTag = 0x6c6f6361;  // "loca"
constexpr std::uint64_t kHookTag = 0x686f6f6b;      // "hook"

bool has_usable_tumor(const CaseData& c, std::int64_t min_voxels) {
  for (const auto& t : c.tumors)
    if (t.voxel_count >= min_voxels) return true;
  return false;
}

bool recoverable(ErrorCode code) {
  return code == ErrorCode::kEmptyResult || code == ErrorCode::kFullyClipped ||
         code == ErrorCode::kEmptyOrganSet || code == ErrorCode::kNoTumorSource;
}

AugmentResult unchanged(const CaseData& target, AugmentationRecord record) {
  return {target.volume, target.labelmap, std::move(record)};
}

}  // namespace

std::string_view to_string(PairMode mode) noexcept {
  switch (mode) {
    case PairMode::kIntra: return "intra";
    case PairMode::kInter: return "inter";
    case PairMode::kMixed: return "mixed";
  }
  return "mixed";
}

PairMode pair_mode_from_string(std::string_view s) {
  if (s == "intra") return PairMode::kIntra;
  if (s == "inter") return PairMode::kInter;
  if (s == "mixed") return PairMode::kMixed;
  throw Error(ErrorCode::kInvalidArgument, "mode must be intra, inter or mixed");
}

void PipelineConfig::validate() const {
  if (!(p_cp >= 0.0 && p_cp <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "p_cp must lie in [0, 1]");
  if (!(mixed_intra_fraction >= 0.0 && mixed_intra_fraction <= 1.0))
    throw Error(ErrorCode::kInvalidArgument, "mixed_intra_fraction must lie in [0, 1]");
  if (min_voxels < 1) throw Error(ErrorCode::kInvalidArgument, "min_voxels must be >= 1");
  transform.validate();
}

SourceDraw sample_pair(const Dataset& dataset, std::size_t target, PairMode mode,
                       double mixed_intra_fraction, RngStream& rng, std::int64_t min_voxels) {
  if (target >= dataset.size()) throw Error(ErrorCode::kInvalidArgument, "target case out of range");
  bool intra = mode == PairMode::kIntra;
  if (mode == PairMode::kMixed) intra = rng.bernoulli(mixed_intra_fraction);

  if (intra) {
    if (!has_usable_tumor(dataset.at(target), min_voxels))
      throw Error(ErrorCode::kNoTumorSource, "target case " + dataset.at(target).case_id + " has no tumor");
    return {target, true};
  }
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < dataset.size(); ++i)
    if (i != target && has_usable_tumor(dataset.at(i), min_voxels)) eligible.push_back(i);
  if (eligible.empty())
    throw Error(ErrorCode::kNoTumorSource, "no other case with a tumor to copy from");
  return {eligible[rng.below(eligible.size())], false};
}

Index3 sample_location(const OrganVoxelSet& organs, RngStream& rng) {
  if (organs.coords.empty()) throw Error(ErrorCode::kEmptyOrganSet, "no paste sites");
  return organs.coords[rng.below(organs.coords.size())];
}

Index3 paste_origin(const TumorInstance& instance, const Index3& location) {
  const Dims3 ext = instance.mask.dims();
  return location - Index3{ext.nx / 2, ext.ny / 2, ext.nz / 2};
}

PasteResult paste(const TumorInstance& instance, const Volume& volume, const LabelMap& labelmap,
                  const Index3& location, Label tumor_label, bool clip) {
  validate_pair(volume, labelmap);
  const Dims3 ext = instance.mask.dims();
  const Dims3 vd = volume.dims();
  const Index3 origin = paste_origin(instance, location);

  std::int64_t inside = 0, outside = 0;
  for (std::int64_t z = 0; z < ext.nz; ++z)
    for (std::int64_t y = 0; y < ext.ny; ++y)
      for (std::int64_t x = 0; x < ext.nx; ++x) {
        if (!instance.mask(x, y, z)) continue;
        if (vd.contains(origin + Index3{x, y, z})) {
          ++inside;
        } else {
          ++outside;
        }
      }
  if (inside == 0) throw Error(ErrorCode::kFullyClipped, "pasted tumor lies entirely outside the volume");
  if (!clip && outside > 0)
    throw Error(ErrorCode::kFullyClipped, "pasted tumor does not fit inside the volume");

  PasteResult r{volume, labelmap, outside, inside};
  for (std::int64_t z = 0; z < ext.nz; ++z)
    for (std::int64_t y = 0; y < ext.ny; ++y)
      for (std::int64_t x = 0; x < ext.nx; ++x) {
        if (!instance.mask(x, y, z)) continue;
        const Index3 p = origin + Index3{x, y, z};
        if (!vd.contains(p)) continue;
        r.volume.voxels[p] = instance.intensities(x, y, z);
        r.labelmap.labels[p] = tumor_label;
      }
  return r;
}

TumorInstance resample_instance(const TumorInstance& instance, const Spacing& target) {
  if (instance.spacing == target) return instance;
  TumorInstance out;
  out.case_id = instance.case_id;
  out.spacing = target;
  out.mask = resample_patch(instance.mask, instance.spacing, target);
  out.intensities = resize(instance.intensities, out.mask.dims());
  for (int a = 0; a < 3; ++a)
    out.bbox.lo[a] = static_cast<std::int64_t>(
        std::llround(static_cast<double>(instance.bbox.lo[a]) * instance.spacing[a] / target[a]));
  const Dims3 d = out.mask.dims();
  out.bbox.hi = out.bbox.lo + Index3{d.nx - 1, d.ny - 1, d.nz - 1};
  retighten(out);
  return out;
}

AugmentationPlan plan_augmentation(const Dataset& dataset, std::size_t target,
                                   const PipelineConfig& config, RngStream& rng) {
  AugmentationPlan plan;
  plan.copy_paste = rng.bernoulli(config.p_cp);
  if (!plan.copy_paste) return plan;
  try {
    plan.pair = sample_pair(dataset, target, config.mode, config.mixed_intra_fraction, rng,
                            config.min_voxels);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoTumorSource) throw;
    plan.failure = std::string(to_string(e.code()));
    return plan;
  }
  const auto& tumors = dataset.at(plan.pair->source).tumors;
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < tumors.size(); ++i)
    if (tumors[i].voxel_count >= config.min_voxels) usable.push_back(i);
  plan.instance_index = usable[rng.below(usable.size())];
  plan.params = sample_params(config.transform, rng, &plan.gates);
  plan.elastic_stream = rng.fork(kElasticTag);
  plan.location_stream = rng.fork(kLocationTag);
  return plan;
}

AugmentResult augment_once(const Dataset& dataset, std::size_t target, const PipelineConfig& config,
                           RngStream rng, const ImageHook& hook) {
  const CaseData& tgt = dataset.at(target);
  AugmentationRecord rec;
  rec.target_case = tgt.case_id;
  rec.base_seed = rng.base_seed();
  rec.stream_id = rng.stream_id();

  AugmentationPlan plan = plan_augmentation(dataset, target, config, rng);
  AugmentResult result;
  if (!plan.copy_paste || plan.failure) {
    rec.failure = plan.failure;
    result = unchanged(tgt, std::move(rec));
  } else {
    try {
      const CaseData& src = dataset.at(plan.pair->source);
      TumorInstance inst = apply_transforms(src.tumors[*plan.instance_index], plan.params,
                                            plan.elastic_stream);
      inst = resample_instance(inst, tgt.volume.spacing);
      const auto& sites = config.allow_paste_on_tumor ? tgt.sites_with_tumor : tgt.sites_organ_only;
      if (!sites) throw Error(ErrorCode::kEmptyOrganSet, "no paste sites in " + tgt.case_id);
      const Index3 v = sample_location(*sites, plan.location_stream);
      PasteResult pr = paste(inst, tgt.volume, tgt.labelmap, v, dataset.labels().tumor, config.paste_clip);

      rec.applied = true;
      rec.source_case = src.case_id;
      rec.instance_index = plan.instance_index;
      rec.transform_params = plan.params;
      rec.paste_location = v;
      rec.clipped_voxels = pr.clipped_voxels;
      result = {std::move(pr.volume), std::move(pr.labelmap), std::move(rec)};
    } catch (const Error& e) {
      if (!recoverable(e.code())) throw;
      AugmentationRecord fallback;
      fallback.target_case = tgt.case_id;
      fallback.base_seed = rng.base_seed();
      fallback.stream_id = rng.stream_id();
      fallback.failure = std::string(to_string(e.code()));
      result = unchanged(tgt, std::move(fallback));
    }
  }
  if (hook) {
    RngStream hook_rng(rng.base_seed() ^ mix64(kHookTag), rng.stream_id());
    hook(result.volume, result.labelmap, hook_rng);
  }
  return result;
}

}  // namespace tumorcp
