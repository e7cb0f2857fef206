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

#include "tumorcp/extract.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace tumorcp {
namespace {

// Disjoint sets over provisional labels, path halving + union by index so
// the smallest provisional label (first in raster order) becomes the root.
class UnionFind {
 public:
  std::uint32_t make() {
    parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
    return parent_.back();
  }
  std::uint32_t find(std::uint32_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent_[a] = b;
  }
  std::size_t size() const noexcept { return parent_.size(); }

 private:
  std::vector<std::uint32_t> parent_;
};

// The 13 neighbours of the 26-neighbourhood already visited in raster order.
constexpr std::array<std::array<int, 3>, 13> kBackward = {{
    {-1, 0, 0},
    {-1, -1, 0}, {0, -1, 0}, {1, -1, 0},
    {-1, -1, -1}, {0, -1, -1}, {1, -1, -1},
    {-1, 0, -1}, {0, 0, -1}, {1, 0, -1},
    {-1, 1, -1}, {0, 1, -1}, {1, 1, -1},
}};

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

}  // namespace

void check_instance(const TumorInstance& inst) {
  const Dims3 ext = inst.bbox.extent();
  if (!(inst.mask.dims() == ext) || !(inst.intensities.dims() == ext))
    throw Error(ErrorCode::kInvalidArgument, "instance grids do not match bbox extent");
  std::int64_t count = 0;
  Index3 lo{ext.nx, ext.ny, ext.nz}, hi{-1, -1, -1};
  for (std::int64_t z = 0; z < ext.nz; ++z)
    for (std::int64_t y = 0; y < ext.ny; ++y)
      for (std::int64_t x = 0; x < ext.nx; ++x) {
        const auto m = inst.mask(x, y, z);
        if (m > 1) throw Error(ErrorCode::kInvalidArgument, "instance mask is not binary");
        if (m == 0) continue;
        ++count;
        lo = {std::min(lo.x, x), std::min(lo.y, y), std::min(lo.z, z)};
        hi = {std::max(hi.x, x), std::max(hi.y, y), std::max(hi.z, z)};
      }
  if (count < 1 || count != inst.voxel_count)
    throw Error(ErrorCode::kInvalidArgument, "instance voxel_count does not match mask");
  if (!(lo == Index3{0, 0, 0}) || !(hi == Index3{ext.nx - 1, ext.ny - 1, ext.nz - 1}))
    throw Error(ErrorCode::kInvalidArgument, "instance bbox is not tight");
}

void retighten(TumorInstance& inst) {
  const Dims3 d = inst.mask.dims();
  std::int64_t count = 0;
  Index3 lo{d.nx, d.ny, d.nz}, hi{-1, -1, -1};
  for (std::int64_t z = 0; z < d.nz; ++z)
    for (std::int64_t y = 0; y < d.ny; ++y)
      for (std::int64_t x = 0; x < d.nx; ++x) {
        if (inst.mask(x, y, z) == 0) continue;
        ++count;
        lo = {std::min(lo.x, x), std::min(lo.y, y), std::min(lo.z, z)};
        hi = {std::max(hi.x, x), std::max(hi.y, y), std::max(hi.z, z)};
      }
  if (count == 0) throw Error(ErrorCode::kEmptyResult, "transformed tumor mask is empty");
  inst.voxel_count = count;
  if (lo == Index3{0, 0, 0} && hi == Index3{d.nx - 1, d.ny - 1, d.nz - 1}) {
    inst.bbox.hi = inst.bbox.lo + hi;
    return;
  }
  const Dims3 ext{hi.x - lo.x + 1, hi.y - lo.y + 1, hi.z - lo.z + 1};
  MaskGrid mask(ext);
  FloatGrid vals(ext);
  for (std::int64_t z = 0; z < ext.nz; ++z)
    for (std::int64_t y = 0; y < ext.ny; ++y)
      for (std::int64_t x = 0; x < ext.nx; ++x) {
        mask(x, y, z) = inst.mask(lo.x + x, lo.y + y, lo.z + z);
        vals(x, y, z) = inst.intensities(lo.x + x, lo.y + y, lo.z + z);
      }
  inst.mask = std::move(mask);
  inst.intensities = std::move(vals);
  inst.bbox.lo = inst.bbox.lo + lo;
  inst.bbox.hi = inst.bbox.lo + Index3{ext.nx - 1, ext.ny - 1, ext.nz - 1};
}

std::vector<TumorInstance> extract_tumors(const LabelMap& labelmap, const Volume& volume,
                                          Label tumor_label, const std::string& case_id) {
  validate_pair(volume, labelmap);
  const Dims3 d = labelmap.dims();
  const auto& labels = labelmap.labels.storage();

  // First pass: provisional labels and equivalences.
  std::vector<std::uint32_t> prov(d.count(), kNone);
  UnionFind uf;
  for (std::int64_t z = 0; z < d.nz; ++z) {
    for (std::int64_t y = 0; y < d.ny; ++y) {
      for (std::int64_t x = 0; x < d.nx; ++x) {
        const std::size_t i = d.linear(x, y, z);
        if (labels[i] != tumor_label) continue;
        std::uint32_t assigned = kNone;
        for (const auto& off : kBackward) {
          const std::int64_t nx = x + off[0], ny = y + off[1], nz = z + off[2];
          if (nx < 0 || ny < 0 || nz < 0 || nx >= d.nx || ny >= d.ny) continue;
          const std::uint32_t p = prov[d.linear(nx, ny, nz)];
          if (p == kNone) continue;
          if (assigned == kNone) {
            assigned = p;
          } else {
            uf.unite(assigned, p);
          }
        }
        prov[i] = assigned == kNone ? uf.make() : assigned;
      }
    }
  }
  if (uf.size() == 0) return {};

  // Second pass: compact roots and accumulate bounds.
  std::vector<std::uint32_t> compact(uf.size(), kNone);
  std::vector<Box> boxes;
  std::vector<std::int64_t> counts;
  for (std::uint32_t p = 0; p < uf.size(); ++p) {
    const std::uint32_t r = uf.find(p);
    if (compact[r] == kNone) {
      compact[r] = static_cast<std::uint32_t>(boxes.size());
      boxes.push_back({{d.nx, d.ny, d.nz}, {-1, -1, -1}});
      counts.push_back(0);
    }
    compact[p] = compact[r];
  }
  for (std::size_t i = 0; i < prov.size(); ++i) {
    if (prov[i] == kNone) continue;
    const std::uint32_t c = compact[prov[i]];
    prov[i] = c;
    const Index3 p = d.unravel(i);
    Box& b = boxes[c];
    b.lo = {std::min(b.lo.x, p.x), std::min(b.lo.y, p.y), std::min(b.lo.z, p.z)};
    b.hi = {std::max(b.hi.x, p.x), std::max(b.hi.y, p.y), std::max(b.hi.z, p.z)};
    ++counts[c];
  }

  std::vector<TumorInstance> out(boxes.size());
  for (std::size_t c = 0; c < boxes.size(); ++c) {
    TumorInstance& inst = out[c];
    inst.case_id = case_id;
    inst.bbox = boxes[c];
    inst.voxel_count = counts[c];
    inst.spacing = volume.spacing;
    const Dims3 ext = boxes[c].extent();
    inst.mask = MaskGrid(ext);
    inst.intensities = FloatGrid(ext);
    for (std::int64_t z = 0; z < ext.nz; ++z)
      for (std::int64_t y = 0; y < ext.ny; ++y)
        for (std::int64_t x = 0; x < ext.nx; ++x) {
          const std::size_t src = d.linear(boxes[c].lo.x + x, boxes[c].lo.y + y, boxes[c].lo.z + z);
          inst.intensities(x, y, z) = volume.voxels.storage()[src];
          inst.mask(x, y, z) = prov[src] == c ? 1 : 0;
        }
  }
  std::stable_sort(out.begin(), out.end(), [](const TumorInstance& a, const TumorInstance& b) {
    if (a.voxel_count != b.voxel_count) return a.voxel_count > b.voxel_count;
    return a.bbox < b.bbox;
  });
  return out;
}

OrganVoxelSet organ_voxel_set(const LabelMap& labelmap, Label organ_label, Label tumor_label,
                              bool include_tumor, const std::string& case_id) {
  OrganVoxelSet out;
  out.case_id = case_id;
  const Dims3 d = labelmap.dims();
  const auto& labels = labelmap.labels.storage();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Label l = labels[i];
    if (l == organ_label || (include_tumor && l == tumor_label)) out.coords.push_back(d.unravel(i));
  }
  if (out.coords.empty())
    throw Error(ErrorCode::kEmptyOrganSet,
                "no organ voxels available for pasting" + (case_id.empty() ? "" : " in " + case_id));
  return out;
}

}  // namespace tumorcp
