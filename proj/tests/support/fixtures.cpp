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

#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cstring>

#include "tumorcp/io.hpp"

namespace fixtures {

namespace fs = std::filesystem;

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  std::random_device rd;
  path_ = fs::temp_directory_path() /
          ("tumorcp-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" +
           std::to_string(rd()));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

Case phantom_with(const std::string& case_id, Dims3 dims, std::uint64_t seed, const std::vector<Ball>& tumors,
                  Spacing spacing) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<float> noise(-10.0f, 10.0f);
  Case c;
  c.case_id = case_id;
  c.volume.voxels = FloatGrid(dims);
  c.volume.spacing = spacing;
  c.labelmap.labels = MaskGrid(dims);
  const double cx = (dims.nx - 1) / 2.0, cy = (dims.ny - 1) / 2.0, cz = (dims.nz - 1) / 2.0;
  const double rx = dims.nx * 0.4, ry = dims.ny * 0.4, rz = dims.nz * 0.4;
  for (std::int64_t z = 0; z < dims.nz; ++z)
    for (std::int64_t y = 0; y < dims.ny; ++y)
      for (std::int64_t x = 0; x < dims.nx; ++x) {
        const double e = std::pow((x - cx) / rx, 2) + std::pow((y - cy) / ry, 2) + std::pow((z - cz) / rz, 2);
        Label l = e <= 1.0 ? 1 : 0;
        for (const Ball& b : tumors) {
          const double d2 = std::pow(x - b.centre.x, 2) + std::pow(y - b.centre.y, 2) + std::pow(z - b.centre.z, 2);
          if (d2 <= b.radius * b.radius) l = 2;
        }
        c.labelmap.labels(x, y, z) = l;
        const float base = l == 0 ? -100.0f : (l == 1 ? 60.0f : 140.0f);
        c.volume.voxels(x, y, z) = base + noise(gen);
      }
  return c;
}

Case phantom(const std::string& case_id, Dims3 dims, std::uint64_t seed, int tumors, Spacing spacing) {
  std::mt19937_64 gen(seed ^ 0x5eed);
  std::vector<Ball> balls;
  const std::int64_t m = std::min({dims.nx, dims.ny, dims.nz});
  const double r_max = std::max(1.0, m / 10.0);
  std::uniform_real_distribution<double> radius(1.0, r_max);
  // Centres in the inner half so the balls sit inside the organ.
  auto coord = [&](std::int64_t n) {
    std::uniform_int_distribution<std::int64_t> u(n / 4, std::max(n / 4, (3 * n) / 4 - 1));
    return u(gen);
  };
  for (int i = 0; i < tumors; ++i) balls.push_back({{coord(dims.nx), coord(dims.ny), coord(dims.nz)}, radius(gen)});
  return phantom_with(case_id, dims, seed, balls, spacing);
}

Dataset make_dataset(const std::vector<Case>& cases) {
  std::vector<Dataset::InMemoryCase> in;
  for (const Case& c : cases) in.push_back({c.case_id, c.volume, c.labelmap});
  return Dataset::from_cases(std::move(in));
}

void write_kits_dataset(const fs::path& dir, const std::vector<Case>& cases, const std::string& ext) {
  for (const Case& c : cases) {
    fs::create_directories(dir / c.case_id);
    save_case(c.volume, c.labelmap, {dir / c.case_id / ("imaging" + ext), dir / c.case_id / ("segmentation" + ext)});
  }
}

TumorInstance solid_instance(Dims3 extent, std::uint64_t seed, bool ball) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<float> v(50.0f, 250.0f);
  TumorInstance t;
  t.case_id = "solid";
  t.mask = MaskGrid(extent);
  t.intensities = FloatGrid(extent);
  const double cx = (extent.nx - 1) / 2.0, cy = (extent.ny - 1) / 2.0, cz = (extent.nz - 1) / 2.0;
  for (std::int64_t z = 0; z < extent.nz; ++z)
    for (std::int64_t y = 0; y < extent.ny; ++y)
      for (std::int64_t x = 0; x < extent.nx; ++x) {
        bool in = true;
        if (ball) {
          const double e = std::pow((x - cx) / (extent.nx / 2.0), 2) + std::pow((y - cy) / (extent.ny / 2.0), 2) +
                           std::pow((z - cz) / (extent.nz / 2.0), 2);
          in = e <= 1.0;
        }
        t.mask(x, y, z) = in ? 1 : 0;
        t.intensities(x, y, z) = v(gen);
        t.voxel_count += in;
      }
  t.bbox = {{10, 20, 30}, {10 + extent.nx - 1, 20 + extent.ny - 1, 30 + extent.nz - 1}};
  if (ball) retighten(t);
  return t;
}

LabelMap random_labels(Dims3 dims, double density, std::mt19937_64& gen, Label tumor) {
  std::bernoulli_distribution on(density);
  LabelMap lm{MaskGrid(dims)};
  for (auto& v : lm.labels.values()) v = on(gen) ? tumor : 0;
  return lm;
}

std::vector<Component> flood_fill(const LabelMap& labelmap, Label label) {
  const Dims3 d = labelmap.dims();
  std::vector<char> seen(d.count(), 0);
  std::vector<Component> out;
  for (std::size_t start = 0; start < d.count(); ++start) {
    if (seen[start] || labelmap.labels.storage()[start] != label) continue;
    Component comp;
    std::deque<Index3> queue{d.unravel(start)};
    seen[start] = 1;
    while (!queue.empty()) {
      const Index3 p = queue.front();
      queue.pop_front();
      comp.voxels.push_back(p);
      for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const Index3 q{p.x + dx, p.y + dy, p.z + dz};
            if (!d.contains(q)) continue;
            const std::size_t qi = d.linear(q);
            if (seen[qi] || labelmap.labels.storage()[qi] != label) continue;
            seen[qi] = 1;
            queue.push_back(q);
          }
    }
    std::sort(comp.voxels.begin(), comp.voxels.end(),
              [&](const Index3& a, const Index3& b) { return d.linear(a) < d.linear(b); });
    comp.bbox = {comp.voxels.front(), comp.voxels.front()};
    for (const Index3& p : comp.voxels)
      for (int a = 0; a < 3; ++a) {
        comp.bbox.lo[a] = std::min(comp.bbox.lo[a], p[a]);
        comp.bbox.hi[a] = std::max(comp.bbox.hi[a], p[a]);
      }
    out.push_back(std::move(comp));
  }
  return out;
}

std::int64_t clipped_by_enumeration(const TumorInstance& instance, const Dims3& dims, const Index3& location) {
  const Dims3 e = instance.mask.dims();
  std::int64_t clipped = 0;
  for (std::int64_t z = 0; z < e.nz; ++z)
    for (std::int64_t y = 0; y < e.ny; ++y)
      for (std::int64_t x = 0; x < e.nx; ++x) {
        if (!instance.mask(x, y, z)) continue;
        const Index3 t{location.x - e.nx / 2 + x, location.y - e.ny / 2 + y, location.z - e.nz / 2 + z};
        const bool inside = t.x >= 0 && t.y >= 0 && t.z >= 0 && t.x < dims.nx && t.y < dims.ny && t.z < dims.nz;
        clipped += !inside;
      }
  return clipped;
}

bool within_binomial(std::uint64_t count, std::uint64_t n, double p, double k) {
  const double mean = static_cast<double>(n) * p;
  const double sd = std::sqrt(static_cast<double>(n) * p * (1.0 - p));
  return std::abs(static_cast<double>(count) - mean) <= k * sd;
}

double masked_mean(const TumorInstance& inst) {
  long double s = 0;
  std::int64_t n = 0;
  for (std::size_t i = 0; i < inst.mask.size(); ++i)
    if (inst.mask.storage()[i]) {
      s += inst.intensities.storage()[i];
      ++n;
    }
  return static_cast<double>(s / n);
}

double masked_std(const TumorInstance& inst) {
  const long double m = masked_mean(inst);
  long double s = 0;
  std::int64_t n = 0;
  for (std::size_t i = 0; i < inst.mask.size(); ++i)
    if (inst.mask.storage()[i]) {
      const long double d = inst.intensities.storage()[i] - m;
      s += d * d;
      ++n;
    }
  return static_cast<double>(std::sqrt(s / n));
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int connect_tcp(int port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd);
    return -1;
  }
  return fd;
}

int connect_unix(const std::string& path) {
  const int fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  std::strncpy(addr.sun_path, path.c_str(), sizeof(addr.sun_path) - 1);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd);
    return -1;
  }
  return fd;
}

}  // namespace fixtures
