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

#include "tumorcp/jobs.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>
#include <unistd.h>

#include "tumorcp/io.hpp"
#include "tumorcp/png.hpp"
#include "tumorcp/serialize.hpp"

namespace tumorcp {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json box_json(const Box& b) {
  return {{"lo", {b.lo.x, b.lo.y, b.lo.z}}, {"hi", {b.hi.x, b.hi.y, b.hi.z}}};
}

std::string extension_of(const CaseData& c) {
  if (!c.origin) return ".nii.gz";
  switch (format_from_path(c.origin->volume)) {
    case FileFormat::kNifti: return ".nii";
    case FileFormat::kNiftiGz: return ".nii.gz";
    case FileFormat::kRawSidecar: return ".json";
  }
  return ".nii.gz";
}

// Removes a directory tree on scope exit unless released.
class StagingDir {
 public:
  explicit StagingDir(fs::path p) : path_(std::move(p)) {}
  ~StagingDir() {
    if (!path_.empty()) {
      std::error_code ec;
      fs::remove_all(path_, ec);
    }
  }
  StagingDir(const StagingDir&) = delete;
  StagingDir& operator=(const StagingDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void create_dirs(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + p.string() + ": " + ec.message());
}

// Bounding z-range of voxels that differ between two aligned cases.
std::optional<std::pair<std::int64_t, std::int64_t>> changed_z_range(const Volume& a, const LabelMap& la,
                                                                     const Volume& b, const LabelMap& lb) {
  const Dims3 d = a.dims();
  std::int64_t lo = d.nz, hi = -1;
  for (std::size_t i = 0; i < d.count(); ++i) {
    if (a.voxels.storage()[i] != b.voxels.storage()[i] || la.labels.storage()[i] != lb.labels.storage()[i]) {
      const std::int64_t z = d.unravel(i).z;
      lo = std::min(lo, z);
      hi = std::max(hi, z);
    }
  }
  if (hi < 0) return std::nullopt;
  return std::make_pair(lo, hi);
}

}  // namespace

json extract_summary(const Dataset& dataset) {
  json cases = json::array();
  std::size_t total = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const CaseData& c = dataset.at(i);
    json inst = json::array();
    for (const auto& t : c.tumors) inst.push_back({{"voxel_count", t.voxel_count}, {"bbox", box_json(t.bbox)}});
    cases.push_back({{"case_id", c.case_id}, {"instance_count", c.tumors.size()}, {"instances", inst}});
    total += c.tumors.size();
  }
  return {{"organ_label", dataset.labels().organ},
          {"tumor_label", dataset.labels().tumor},
          {"case_count", dataset.size()},
          {"instance_count", total},
          {"cases", cases}};
}

AugmentJobResult run_augment(const Dataset& dataset, const AugmentJob& job) {
  job.config.validate();
  if (job.workers == 0) throw Error(ErrorCode::kInvalidArgument, "workers must be >= 1");
  if (job.out_dir.empty()) throw Error(ErrorCode::kInvalidArgument, "output directory required");
  const auto t0 = std::chrono::steady_clock::now();

  create_dirs(job.out_dir);
  StagingDir staging(job.out_dir / (".tumorcp-staging-" + std::to_string(::getpid())));
  create_dirs(staging.path());

  const std::size_t total = dataset.size() * job.n_per_case;
  std::vector<AugmentationRecord> records(total);
  std::vector<DatasetEntry> entries(total);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;

  auto work = [&] {
    for (;;) {
      const std::size_t s = next.fetch_add(1);
      if (s >= total || failed.load()) return;
      try {
        const std::size_t ci = s / job.n_per_case;
        const std::size_t k = s % job.n_per_case;
        const CaseData& c = dataset.at(ci);
        RngStream rng(job.seed, sample_stream_id(ci, 0, k));
        AugmentResult r = augment_once(dataset, ci, job.config, rng, job.hook);
        const std::string name = c.case_id + "_aug" + std::to_string(k);
        const std::string ext = extension_of(c);
        const fs::path dir = staging.path() / name;
        create_dirs(dir);
        save_case(r.volume, r.labelmap, {dir / ("imaging" + ext), dir / ("segmentation" + ext)});
        entries[s] = {name, {job.out_dir / name / ("imaging" + ext), job.out_dir / name / ("segmentation" + ext)}};
        records[s] = std::move(r.record);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
    }
  };
  const unsigned n_threads = std::min<unsigned>(job.workers, static_cast<unsigned>(std::max<std::size_t>(total, 1)));
  std::vector<std::thread> threads;
  for (unsigned t = 1; t < n_threads; ++t) threads.emplace_back(work);
  work();
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);

  {
    std::ofstream out(staging.path() / "records.jsonl", std::ios::trunc);
    for (const auto& r : records) out << record_line(r) << "\n";
    out.close();
    if (!out) throw Error(ErrorCode::kIoError, "cannot write records.jsonl");
  }
  DatasetIndex manifest;
  manifest.root = staging.path();
  manifest.labels = dataset.labels();
  for (const auto& e : entries)
    manifest.entries.push_back({e.case_id, {staging.path() / e.case_id / e.paths.volume.filename(),
                                            staging.path() / e.case_id / e.paths.labelmap.filename()}});
  manifest.write_manifest();

  // Publish: move everything out of staging, replacing stale outputs.
  std::vector<fs::path> moved;
  try {
    for (const auto& de : fs::directory_iterator(staging.path())) {
      const fs::path dst = job.out_dir / de.path().filename();
      std::error_code ec;
      fs::remove_all(dst, ec);
      fs::rename(de.path(), dst);
      moved.push_back(dst);
    }
  } catch (const fs::filesystem_error& e) {
    for (const auto& p : moved) {
      std::error_code ec;
      fs::remove_all(p, ec);
    }
    throw Error(ErrorCode::kIoError, std::string("cannot publish outputs: ") + e.what());
  }

  AugmentJobResult result;
  result.samples = total;
  result.applied = static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const AugmentationRecord& r) { return r.applied; }));
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  spdlog::info("augment: {} samples ({} pasted) in {:.2f}s", result.samples, result.applied, result.seconds);
  return result;
}

std::vector<std::uint8_t> render_slice(const Volume& volume, const LabelMap& labelmap,
                                       const LabelScheme& labels, std::int64_t z, float lo, float hi) {
  validate_pair(volume, labelmap);
  const Dims3 d = volume.dims();
  if (z < 0 || z >= d.nz) throw Error(ErrorCode::kInvalidArgument, "slice out of range");
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(d.nx * d.ny) * 3);
  const float span = hi > lo ? hi - lo : 1.0f;
  auto label_at = [&](std::int64_t x, std::int64_t y) -> int {
    if (x < 0 || y < 0 || x >= d.nx || y >= d.ny) return -1;
    return labelmap.labels(x, y, z);
  };
  for (std::int64_t y = 0; y < d.ny; ++y) {
    for (std::int64_t x = 0; x < d.nx; ++x) {
      const float v = std::clamp((volume.voxels(x, y, z) - lo) / span, 0.0f, 1.0f);
      auto g = static_cast<std::uint8_t>(std::lround(v * 255.0f));
      std::uint8_t px[3] = {g, g, g};
      const int l = label_at(x, y);
      const bool edge = l != labels.background &&
                        (label_at(x - 1, y) != l || label_at(x + 1, y) != l || label_at(x, y - 1) != l ||
                         label_at(x, y + 1) != l);
      if (edge && l == labels.tumor) {
        px[0] = 255, px[1] = 0, px[2] = 0;
      } else if (edge && l == labels.organ) {
        px[0] = 0, px[1] = 255, px[2] = 0;
      }
      // Image row 0 is the top, so flip y for a conventional axial view.
      const std::size_t o = static_cast<std::size_t>((d.ny - 1 - y) * d.nx + x) * 3;
      std::copy(px, px + 3, rgb.begin() + static_cast<std::ptrdiff_t>(o));
    }
  }
  return rgb;
}

AugmentationRecord run_preview(const Dataset& dataset, std::size_t case_index, const PreviewJob& job) {
  job.config.validate();
  const CaseData& c = dataset.at(case_index);
  RngStream rng(job.seed, sample_stream_id(case_index, 0, job.sample_index));
  AugmentResult r = augment_once(dataset, case_index, job.config, rng);

  const Dims3 d = c.volume.dims();
  std::int64_t z = d.nz / 2;
  if (r.record.applied) {
    if (auto range = changed_z_range(c.volume, c.labelmap, r.volume, r.labelmap)) {
      z = (range->first + range->second) / 2;
    } else {
      z = std::clamp<std::int64_t>(r.record.paste_location->z, 0, d.nz - 1);
    }
  }
  float lo = std::numeric_limits<float>::infinity(), hi = -lo;
  for (std::int64_t y = 0; y < d.ny; ++y)
    for (std::int64_t x = 0; x < d.nx; ++x) {
      lo = std::min(lo, c.volume.voxels(x, y, z));
      hi = std::max(hi, c.volume.voxels(x, y, z));
    }

  create_dirs(job.out_dir);
  const auto w = static_cast<std::uint32_t>(d.nx);
  const auto h = static_cast<std::uint32_t>(d.ny);
  write_png_rgb(job.out_dir / "before.png", w, h, render_slice(c.volume, c.labelmap, dataset.labels(), z, lo, hi));
  write_png_rgb(job.out_dir / "after.png", w, h, render_slice(r.volume, r.labelmap, dataset.labels(), z, lo, hi));
  json rec = to_json(r.record);
  rec["preview_slice_z"] = z;
  std::ofstream out(job.out_dir / "record.json", std::ios::trunc);
  out << rec.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::kIoError, "cannot write record.json");
  return r.record;
}

json dataset_stats(const Dataset& dataset) {
  json cases = json::array();
  std::uint64_t organ_total = 0, tumor_total = 0, inst_total = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const CaseData& c = dataset.at(i);
    std::uint64_t organ = 0, tumor = 0;
    for (Label l : c.labelmap.labels.values()) {
      organ += l == dataset.labels().organ;
      tumor += l == dataset.labels().tumor;
    }
    const Dims3 d = c.volume.dims();
    cases.push_back({{"case_id", c.case_id},
                     {"dims", {d.nx, d.ny, d.nz}},
                     {"spacing", {c.volume.spacing.dx, c.volume.spacing.dy, c.volume.spacing.dz}},
                     {"organ_voxels", organ},
                     {"tumor_voxels", tumor},
                     {"instances", c.tumors.size()}});
    organ_total += organ;
    tumor_total += tumor;
    inst_total += c.tumors.size();
  }
  return {{"case_count", dataset.size()},
          {"organ_voxels", organ_total},
          {"tumor_voxels", tumor_total},
          {"instances", inst_total},
          {"cases", cases}};
}

json gate_stats(const Dataset& dataset, const PipelineConfig& config, std::uint64_t seed, std::uint64_t draws) {
  config.validate();
  if (dataset.size() == 0) throw Error(ErrorCode::kInvalidArgument, "empty dataset");
  std::uint64_t cp = 0, intra = 0, inter = 0, failures = 0, planned = 0;
  std::uint64_t rigid = 0, elastic = 0, gamma = 0, blur = 0;
  for (std::uint64_t d = 0; d < draws; ++d) {
    const std::size_t target = d % dataset.size();
    RngStream rng(seed, sample_stream_id(target, 0, d / dataset.size()));
    const AugmentationPlan plan = plan_augmentation(dataset, target, config, rng);
    if (!plan.copy_paste) continue;
    ++cp;
    if (plan.failure) {
      ++failures;
      continue;
    }
    ++planned;
    (plan.pair->intra ? intra : inter) += 1;
    rigid += plan.gates.rigid;
    elastic += plan.gates.elastic;
    gamma += plan.gates.gamma;
    blur += plan.gates.blur;
  }
  auto rate = [](std::uint64_t k, std::uint64_t n) { return n == 0 ? 0.0 : static_cast<double>(k) / static_cast<double>(n); };
  return {{"draws", draws},
          {"copy_paste", {{"count", cp}, {"rate", rate(cp, draws)}, {"configured", config.p_cp}}},
          {"source_failures", failures},
          {"intra", {{"count", intra}, {"rate", rate(intra, planned)}}},
          {"inter", {{"count", inter}, {"rate", rate(inter, planned)}}},
          {"rigid", {{"count", rigid}, {"rate", rate(rigid, planned)}, {"configured", config.transform.p_rigid}}},
          {"elastic", {{"count", elastic}, {"rate", rate(elastic, planned)}, {"configured", config.transform.p_elastic}}},
          {"gamma", {{"count", gamma}, {"rate", rate(gamma, planned)}, {"configured", config.transform.p_gamma}}},
          {"blur", {{"count", blur}, {"rate", rate(blur, planned)}, {"configured", config.transform.p_blur}}}};
}

}  // namespace tumorcp
