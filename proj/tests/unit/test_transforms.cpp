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

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "tumorcp/transforms.hpp"

using namespace tumorcp;
using fixtures::solid_instance;

namespace {

TransformConfig all_gates(double p) {
  TransformConfig c;
  c.p_rigid = c.p_elastic = c.p_gamma = c.p_blur = p;
  c.p_mirror_inner = c.p_rotate_inner = c.p_scale_inner = p;
  return c;
}

std::set<std::tuple<std::int64_t, std::int64_t, std::int64_t>> footprint(const TumorInstance& t) {
  std::set<std::tuple<std::int64_t, std::int64_t, std::int64_t>> s;
  const Dims3 e = t.mask.dims();
  for (std::int64_t z = 0; z < e.nz; ++z)
    for (std::int64_t y = 0; y < e.ny; ++y)
      for (std::int64_t x = 0; x < e.nx; ++x)
        if (t.mask(x, y, z)) s.emplace(t.bbox.lo.x + x, t.bbox.lo.y + y, t.bbox.lo.z + z);
  return s;
}

// Standard Dice of two instances compared in the source frame.
double frame_dice(const TumorInstance& a, const TumorInstance& b) {
  const auto fa = footprint(a), fb = footprint(b);
  std::size_t both = 0;
  for (const auto& p : fa) both += fb.count(p);
  return 2.0 * static_cast<double>(both) / static_cast<double>(fa.size() + fb.size());
}

// Masked total variation along all three axes (pairs with both ends masked).
double masked_tv(const TumorInstance& t) {
  const Dims3 e = t.mask.dims();
  double tv = 0;
  for (std::int64_t z = 0; z < e.nz; ++z)
    for (std::int64_t y = 0; y < e.ny; ++y)
      for (std::int64_t x = 0; x < e.nx; ++x) {
        if (!t.mask(x, y, z)) continue;
        if (x + 1 < e.nx && t.mask(x + 1, y, z)) tv += std::abs(t.intensities(x + 1, y, z) - t.intensities(x, y, z));
        if (y + 1 < e.ny && t.mask(x, y + 1, z)) tv += std::abs(t.intensities(x, y + 1, z) - t.intensities(x, y, z));
        if (z + 1 < e.nz && t.mask(x, y, z + 1)) tv += std::abs(t.intensities(x, y, z + 1) - t.intensities(x, y, z));
      }
  return tv;
}

std::pair<float, float> masked_range(const TumorInstance& t) {
  float lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = 0; i < t.mask.size(); ++i)
    if (t.mask.storage()[i]) {
      lo = std::min(lo, t.intensities.storage()[i]);
      hi = std::max(hi, t.intensities.storage()[i]);
    }
  return {lo, hi};
}

}  // namespace

TEST_SUITE("transforms") {
  TEST_CASE("closed gates give empty params") {
    RngStream rng(1, 1);
    GateDraws g;
    const TransformParams p = sample_params(all_gates(0.0), rng, &g);
    CHECK_FALSE(p.any());
    CHECK_FALSE(g.rigid);
    CHECK_FALSE(g.blur);
  }

  TEST_CASE("open gates give full params, in range and reproducible") {
    const TransformConfig cfg = all_gates(1.0);
    for (std::uint64_t s = 0; s < 200; ++s) {
      RngStream a(s, 3), b(s, 3);
      const TransformParams p = sample_params(cfg, a);
      CHECK(p == sample_params(cfg, b));
      REQUIRE((p.mirror_axes && p.rotation_z && p.scale && p.elastic && p.gamma && p.blur_sigma));
      CHECK(*p.mirror_axes < 8);
      CHECK(cfg.rotation_range.contains(*p.rotation_z));
      CHECK(cfg.scale_range.contains(*p.scale));
      CHECK(cfg.elastic_alpha_range.contains(p.elastic->alpha));
      CHECK(cfg.elastic_sigma_range.contains(p.elastic->sigma));
      CHECK(cfg.gamma_range.contains(*p.gamma));
      CHECK(cfg.blur_sigma_range.contains(*p.blur_sigma));
    }
  }

  TEST_CASE("mirror combination is uniform over all eight") {
    const TransformConfig cfg = all_gates(1.0);
    std::array<std::uint64_t, 8> hist{};
    constexpr std::uint64_t n = 16000;
    for (std::uint64_t i = 0; i < n; ++i) {
      RngStream r(77, i);
      ++hist[*sample_params(cfg, r).mirror_axes];
    }
    for (auto h : hist) CHECK(fixtures::within_binomial(h, n, 1.0 / 8, 6.0));
  }

  TEST_CASE("config validation") {
    TransformConfig c;
    CHECK_NOTHROW(c.validate());
    c.p_blur = 1.5;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.scale_range = {0.0, 1.0};
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.gamma_range = {1.5, 0.7};
    CHECK_THROWS_AS(c.validate(), Error);
  }

  TEST_CASE("empty params are the identity") {
    const TumorInstance t = solid_instance({7, 6, 5}, 3, true);
    RngStream rng(1, 1);
    CHECK(apply_transforms(t, {}, rng) == t);
    CHECK(apply_rigid(t, std::nullopt, std::nullopt, std::nullopt) == t);
  }

  TEST_CASE("mirror flips and is an involution") {
    const TumorInstance t = solid_instance({7, 6, 5}, 4, true);
    for (std::uint8_t axes = 0; axes < 8; ++axes) {
      CAPTURE(int(axes));
      CHECK(apply_mirror(apply_mirror(t, axes), axes) == t);
    }
    const TumorInstance mx = apply_mirror(t, kMirrorX);
    const Dims3 e = t.mask.dims();
    CHECK(mx.bbox == t.bbox);
    for (std::int64_t z = 0; z < e.nz; ++z)
      for (std::int64_t y = 0; y < e.ny; ++y)
        for (std::int64_t x = 0; x < e.nx; ++x) {
          CHECK(mx.intensities(x, y, z) == t.intensities(e.nx - 1 - x, y, z));
          CHECK(mx.mask(x, y, z) == t.mask(e.nx - 1 - x, y, z));
        }
    CHECK(apply_mirror(t, 0) == t);
  }

  TEST_CASE("rotation by zero is the identity and a quarter turn swaps the plane axes") {
    const TumorInstance t = solid_instance({9, 5, 3}, 5);
    CHECK(apply_rotation_z(t, 0.0) == t);
    const TumorInstance q = apply_rotation_z(t, std::numbers::pi / 2);
    CHECK(q.mask.dims() == Dims3{5, 9, 3});
    CHECK(q.voxel_count == t.voxel_count);
    // Quarter turn about the box centre keeps the centre where it was.
    CHECK(q.bbox.lo.x + q.bbox.hi.x == t.bbox.lo.x + t.bbox.hi.x);
    CHECK(q.bbox.lo.y + q.bbox.hi.y == t.bbox.lo.y + t.bbox.hi.y);
    CHECK(q.bbox.lo.z == t.bbox.lo.z);
  }

  TEST_CASE("rotating there and back keeps the mask") {
    const TumorInstance t = solid_instance({19, 15, 9}, 6, true);
    REQUIRE(t.voxel_count >= 1000);
    for (double theta : {0.3, 1.0, 2.2, -2.9}) {
      CAPTURE(theta);
      const TumorInstance back = apply_rotation_z(apply_rotation_z(t, theta), -theta);
      CHECK(frame_dice(t, back) >= 0.95);
    }
  }

  TEST_CASE("scaled solid cube volume") {
    const TumorInstance cube = solid_instance({8, 8, 4}, 7);
    for (double s : {0.75, 1.0, 1.25}) {
      CAPTURE(s);
      const TumorInstance out = apply_scale(cube, s);
      const double expect = static_cast<double>(cube.voxel_count) * s * s * s;
      CHECK(static_cast<double>(out.voxel_count) >= 0.85 * expect);
      CHECK(static_cast<double>(out.voxel_count) <= 1.15 * expect);
      for (auto v : out.mask.values()) CHECK((v == 0 || v == 1));
    }
    CHECK(apply_scale(cube, 1.0) == cube);
  }

  TEST_CASE("elastic with zero alpha keeps the instance") {
    const TumorInstance t = solid_instance({9, 8, 7}, 8, true);
    RngStream rng(3, 3);
    const TumorInstance out = apply_elastic(t, 0.0, 9.0, rng);
    CHECK(out.mask == t.mask);
    CHECK(out.bbox == t.bbox);
    for (std::size_t i = 0; i < t.mask.size(); ++i)
      CHECK(std::abs(out.intensities.storage()[i] - t.intensities.storage()[i]) <= 1e-4);
  }

  TEST_CASE("elastic is deterministic and keeps a sphere in a sane size band") {
    const TumorInstance sphere = solid_instance({16, 16, 16}, 9, true);
    RngStream a(10, 1), b(10, 1);
    CHECK(apply_elastic(sphere, 900.0, 9.0, a) == apply_elastic(sphere, 900.0, 9.0, b));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      RngStream r(seed, 2);
      const TumorInstance out = apply_elastic(sphere, 900.0, 9.0, r);
      CHECK(out.voxel_count >= sphere.voxel_count / 2);
      CHECK(out.voxel_count <= sphere.voxel_count * 2);
      check_instance(out);
    }
  }

  TEST_CASE("gamma of one keeps values") {
    const TumorInstance t = solid_instance({6, 6, 6}, 11, true);
    const TumorInstance out = apply_gamma(t, 1.0);
    for (std::size_t i = 0; i < t.mask.size(); ++i)
      if (t.mask.storage()[i])
        CHECK(out.intensities.storage()[i] == doctest::Approx(t.intensities.storage()[i]).epsilon(1e-5));
  }

  TEST_CASE("gamma leaves constant instances alone") {
    TumorInstance t = solid_instance({4, 4, 4}, 12);
    for (auto& v : t.intensities.values()) v = 42.0f;
    for (double g : {0.7, 1.2, 1.5}) CHECK(apply_gamma(t, g) == t);
  }

  TEST_CASE("gamma preserves masked mean and std") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const TumorInstance t = solid_instance({7, 6, 5}, 100 + seed, seed % 2 == 0);
      const TumorInstance out = apply_gamma(t, 1.5);
      const double m0 = fixtures::masked_mean(t), s0 = fixtures::masked_std(t);
      CHECK(std::abs(fixtures::masked_mean(out) - m0) <= 1e-4 * std::abs(m0));
      CHECK(std::abs(fixtures::masked_std(out) - s0) <= 1e-4 * s0);
      CHECK(out.mask == t.mask);
    }
  }

  TEST_CASE("gaussian kernel matches the sampled density") {
    for (double sigma : {0.5, 0.75, 1.0}) {
      const auto k = gaussian_kernel(sigma);
      const int r = static_cast<int>(std::floor(4 * sigma + 0.5));
      REQUIRE(k.size() == static_cast<std::size_t>(2 * r + 1));
      double z = 0;
      for (int i = -r; i <= r; ++i) z += std::exp(-0.5 * i * i / (sigma * sigma));
      for (int i = -r; i <= r; ++i)
        CHECK(k[i + r] == doctest::Approx(std::exp(-0.5 * i * i / (sigma * sigma)) / z).epsilon(1e-12));
    }
  }

  TEST_CASE("blur of a constant instance is a no-op") {
    TumorInstance t = solid_instance({5, 6, 7}, 13, true);
    for (auto& v : t.intensities.values()) v = -37.5f;
    const TumorInstance out = apply_blur(t, 0.8);
    for (std::size_t i = 0; i < t.mask.size(); ++i)
      CHECK(std::abs(out.intensities.storage()[i] - t.intensities.storage()[i]) <= 1e-6);
  }

  TEST_CASE("blurred impulse peaks at the cubed centre tap") {
    TumorInstance t = solid_instance({9, 9, 9}, 14);
    for (auto& v : t.intensities.values()) v = 0.0f;
    t.intensities(4, 4, 4) = 1000.0f;
    const TumorInstance out = apply_blur(t, 1.0);
    double z = 0;
    for (int i = -4; i <= 4; ++i) z += std::exp(-0.5 * i * i);
    const double w0 = 1.0 / z;
    CHECK(std::abs(out.intensities(4, 4, 4) - 1000.0 * w0 * w0 * w0) <= 1e-4 * 1000.0 * w0 * w0 * w0);
  }

  TEST_CASE("blur keeps masked bounds and does not add variation") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const TumorInstance t = solid_instance({8, 7, 6}, 200 + seed, seed % 2 == 1);
      const TumorInstance out = apply_blur(t, 0.5 + 0.05 * static_cast<double>(seed));
      const auto [lo, hi] = masked_range(t);
      const auto [olo, ohi] = masked_range(out);
      CHECK(olo >= lo - 1e-3f);
      CHECK(ohi <= hi + 1e-3f);
      CHECK(masked_tv(out) <= masked_tv(t) + 1e-3);
      CHECK(out.mask == t.mask);
    }
  }

  TEST_CASE("transforms compose in a fixed order") {
    const TumorInstance t = solid_instance({9, 7, 5}, 15, true);
    TransformParams p;
    p.mirror_axes = kMirrorX | kMirrorZ;
    p.rotation_z = 0.7;
    p.scale = 1.2;
    p.gamma = 0.8;
    p.blur_sigma = 0.6;
    RngStream rng(1, 1);
    const TumorInstance expect =
        apply_blur(apply_gamma(apply_scale(apply_rotation_z(apply_mirror(t, *p.mirror_axes), 0.7), 1.2), 0.8), 0.6);
    CHECK(apply_transforms(t, p, rng) == expect);
  }
}
