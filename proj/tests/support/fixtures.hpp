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

// Synthetic fixtures and brute-force oracles shared by the unit and
// acceptance tests. Randomness here comes from std::mt19937_64 so that test
// data never depends on the engine's own generator.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "tumorcp/dataset.hpp"
#include "tumorcp/extract.hpp"
#include "tumorcp/volume.hpp"

namespace fixtures {

using namespace tumorcp;

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

struct Case {
  std::string case_id;
  Volume volume;
  LabelMap labelmap;
};

struct Ball {
  Index3 centre;
  double radius;
};

/// Organ ellipsoid filling most of the grid with `tumors` balls inside it.
/// Intensities: background about -100, organ about 60, tumor about 140,
/// plus uniform noise.
Case phantom(const std::string& case_id, Dims3 dims, std::uint64_t seed, int tumors,
             Spacing spacing = {});

/// Phantom with the tumor balls placed explicitly.
Case phantom_with(const std::string& case_id, Dims3 dims, std::uint64_t seed,
                  const std::vector<Ball>& tumors, Spacing spacing = {});

Dataset make_dataset(const std::vector<Case>& cases);

/// Writes `<dir>/<case>/imaging<ext>` and `segmentation<ext>` per case.
void write_kits_dataset(const std::filesystem::path& dir, const std::vector<Case>& cases,
                        const std::string& ext = ".nii.gz");

/// Solid (or ball-shaped) tumor instance with random intensities.
TumorInstance solid_instance(Dims3 extent, std::uint64_t seed, bool ball = false);

/// Random labelmap where each voxel is tumor with probability `density`.
LabelMap random_labels(Dims3 dims, double density, std::mt19937_64& gen, Label tumor = 2);

// ---- oracles -------------------------------------------------------------

struct Component {
  std::vector<Index3> voxels;  // sorted by linear index
  Box bbox;
};

/// Breadth-first flood fill over the 26-neighbourhood.
std::vector<Component> flood_fill(const LabelMap& labelmap, Label label);

/// Count of mask voxels of `instance` that land outside `dims` when its
/// centre voxel floor(extent/2) is placed on `location`, by enumeration.
std::int64_t clipped_by_enumeration(const TumorInstance& instance, const Dims3& dims,
                                    const Index3& location);

/// |count - n p| <= k sqrt(n p (1 - p)).
bool within_binomial(std::uint64_t count, std::uint64_t n, double p, double k);

double masked_mean(const TumorInstance& inst);
/// Population standard deviation over the mask.
double masked_std(const TumorInstance& inst);

std::string read_bytes(const std::filesystem::path& p);

/// Connected stream socket to 127.0.0.1:port or a unix socket; -1 on failure.
int connect_tcp(int port);
int connect_unix(const std::string& path);

}  // namespace fixtures
