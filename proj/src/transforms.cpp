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

#include "tumorcp/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tumorcp/resample.hpp"

namespace tumorcp {
namespace {

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0))
    throw Error(ErrorCode::kInvalidArgument, std::string(name) + " must lie in [0, 1]");
}

void check_range(const Range& r, const char* name) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi)
    throw Error(ErrorCode::kInvalidArgument, std::string(name) + " needs finite lo <= hi");
}

std::int64_t reflect_index(std::int64_t i, std::int64_t n) noexcept {
  const std::int64_t period = 2 * n;
  std::int64_t m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

// Convolve `grid` along one axis with symmetric taps `w` (length 2r+1).
void convolve_axis(FloatGrid& grid, const std::vector<double>& w, int axis) {
  const Dims3 d = grid.dims();
  const auto r = static_cast<std::int64_t>(w.size() / 2);
  auto& data = grid.storage();

  if (axis == 0) {
    std::vector<double> ext(static_cast<std::size_t>(d.nx + 2 * r));
    std::vector<double> acc(static_cast<std::size_t>(d.nx));
    for (std::int64_t z = 0; z < d.nz; ++z) {
      for (std::int64_t y = 0; y < d.ny; ++y) {
        float* row = data.data() + d.linear(0, y, z);
        for (std::int64_t j = 0; j < d.nx + 2 * r; ++j)
          ext[static_cast<std::size_t>(j)] = row[reflect_index(j - r, d.nx)];
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t k = 0; k < w.size(); ++k) {
          const double wk = w[k];
          const double* src = ext.data() + k;
          for (std::int64_t i = 0; i < d.nx; ++i) acc[static_cast<std::size_t>(i)] += wk * src[i];
        }
        for (std::int64_t i = 0; i < d.nx; ++i) row[i] = static_cast<float>(acc[static_cast<std::size_t>(i)]);
      }
    }
    return;
  }

  // For y and z the lines are whole rows / planes, so the inner loop is a
  // contiguous axpy.
  const std::int64_t n = d[axis];
  const std::size_t block = axis == 1 ? static_cast<std::size_t>(d.nx)
                                      : static_cast<std::size_t>(d.nx * d.ny);
  const std::size_t stride = block;
  const std::int64_t outer = axis == 1 ? d.nz : 1;
  const std::size_t outer_stride = static_cast<std::size_t>(d.nx * d.ny);
  std::vector<float> src_copy;
  std::vector<double> acc(block);
  for (std::int64_t o = 0; o < outer; ++o) {
    float* base = data.data() + static_cast<std::size_t>(o) * outer_stride;
    src_copy.assign(base, base + static_cast<std::size_t>(n) * stride);
    for (std::int64_t i = 0; i < n; ++i) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::int64_t k = -r; k <= r; ++k) {
        const double wk = w[static_cast<std::size_t>(k + r)];
        const float* line = src_copy.data() + static_cast<std::size_t>(reflect_index(i + k, n)) * stride;
        for (std::size_t b = 0; b < block; ++b) acc[b] += wk * line[b];
      }
      float* out = base + static_cast<std::size_t>(i) * stride;
      for (std::size_t b = 0; b < block; ++b) out[b] = static_cast<float>(acc[b]);
    }
  }
}

double centre(std::int64_t n) { return (static_cast<double>(n) - 1.0) / 2.0; }

}  // namespace

void TransformConfig::validate() const {
  check_probability(p_rigid, "p_rigid");
  check_probability(p_elastic, "p_elastic");
  check_probability(p_gamma, "p_gamma");
  check_probability(p_blur, "p_blur");
  check_probability(p_mirror_inner, "p_mirror_inner");
  check_probability(p_rotate_inner, "p_rotate_inner");
  check_probability(p_scale_inner, "p_scale_inner");
  check_range(scale_range, "scale_range");
  check_range(rotation_range, "rotation_range");
  check_range(elastic_alpha_range, "elastic_alpha_range");
  check_range(elastic_sigma_range, "elastic_sigma_range");
  check_range(gamma_range, "gamma_range");
  check_range(blur_sigma_range, "blur_sigma_range");
  if (scale_range.lo <= 0.0) throw Error(ErrorCode::kInvalidArgument, "scale_range.lo must be > 0");
  if (blur_sigma_range.lo <= 0.0)
    throw Error(ErrorCode::kInvalidArgument, "blur_sigma_range.lo must be > 0");
  if (elastic_alpha_range.lo < 0.0)
    throw Error(ErrorCode::kInvalidArgument, "elastic_alpha_range.lo must be >= 0");
  if (elastic_sigma_range.lo <= 0.0)
    throw Error(ErrorCode::kInvalidArgument, "elastic_sigma_range.lo must be > 0");
  if (gamma_range.lo <= 0.0) throw Error(ErrorCode::kInvalidArgument, "gamma_range.lo must be > 0");
}

TransformParams sample_params(const TransformConfig& config, RngStream& rng, GateDraws* gates) {
  TransformParams p;
  GateDraws g;
  g.rigid = rng.bernoulli(config.p_rigid);
  if (g.rigid) {
    if (rng.bernoulli(config.p_mirror_inner)) p.mirror_axes = static_cast<std::uint8_t>(rng.below(8));
    if (rng.bernoulli(config.p_rotate_inner))
      p.rotation_z = rng.uniform(config.rotation_range.lo, config.rotation_range.hi);
    if (rng.bernoulli(config.p_scale_inner))
      p.scale = rng.uniform(config.scale_range.lo, config.scale_range.hi);
  }
  g.elastic = rng.bernoulli(config.p_elastic);
  if (g.elastic) {
    ElasticParams e;
    e.alpha = rng.uniform(config.elastic_alpha_range.lo, config.elastic_alpha_range.hi);
    e.sigma = rng.uniform(config.elastic_sigma_range.lo, config.elastic_sigma_range.hi);
    p.elastic = e;
  }
  g.gamma = rng.bernoulli(config.p_gamma);
  if (g.gamma) p.gamma = rng.uniform(config.gamma_range.lo, config.gamma_range.hi);
  g.blur = rng.bernoulli(config.p_blur);
  if (g.blur) p.blur_sigma = rng.uniform(config.blur_sigma_range.lo, config.blur_sigma_range.hi);
  if (gates != nullptr) *gates = g;
  return p;
}

TumorInstance apply_mirror(const TumorInstance& in, std::uint8_t axes) {
  TumorInstance out = in;
  if ((axes & 7) == 0) return out;
  const Dims3 d = in.mask.dims();
  for (std::int64_t z = 0; z < d.nz; ++z)
    for (std::int64_t y = 0; y < d.ny; ++y)
      for (std::int64_t x = 0; x < d.nx; ++x) {
        const std::int64_t sx = (axes & kMirrorX) ? d.nx - 1 - x : x;
        const std::int64_t sy = (axes & kMirrorY) ? d.ny - 1 - y : y;
        const std::int64_t sz = (axes & kMirrorZ) ? d.nz - 1 - z : z;
        out.mask(x, y, z) = in.mask(sx, sy, sz);
        out.intensities(x, y, z) = in.intensities(sx, sy, sz);
      }
  return out;
}

TumorInstance apply_rotation_z(const TumorInstance& in, double radians) {
  const Dims3 d = in.mask.dims();
  const double c = std::cos(radians);
  const double s = std::sin(radians);

  // Half-extents of the rotated slice rectangle; the output extent keeps the
  // parity of the input so the centre stays on the same voxel lattice.
  const double hx = 0.5 * (std::fabs(c) * static_cast<double>(d.nx) + std::fabs(s) * static_cast<double>(d.ny));
  const double hy = 0.5 * (std::fabs(s) * static_cast<double>(d.nx) + std::fabs(c) * static_cast<double>(d.ny));
  auto fit = [](double span, std::int64_t n) {
    auto m = static_cast<std::int64_t>(std::ceil(2.0 * span - 1e-9));
    if ((m - n) % 2 != 0) ++m;
    return std::max<std::int64_t>(m, 1);
  };
  const Dims3 od{fit(hx, d.nx), fit(hy, d.ny), d.nz};
  const double cx = centre(d.nx), cy = centre(d.ny);
  const double ocx = centre(od.nx), ocy = centre(od.ny);

  TumorInstance out;
  out.case_id = in.case_id;
  out.spacing = in.spacing;
  out.mask = MaskGrid(od);
  out.intensities = FloatGrid(od);
  for (std::int64_t z = 0; z < od.nz; ++z)
    for (std::int64_t y = 0; y < od.ny; ++y)
      for (std::int64_t x = 0; x < od.nx; ++x) {
        const double qx = static_cast<double>(x) - ocx;
        const double qy = static_cast<double>(y) - ocy;
        // Inverse rotation maps the output voxel back into the input slice.
        const double sx = cx + c * qx + s * qy;
        const double sy = cy - s * qx + c * qy;
        out.mask(x, y, z) = sample_nearest(in.mask, sx, sy, static_cast<double>(z));
        out.intensities(x, y, z) = static_cast<float>(sample_cubic_2d(in.intensities, sx, sy, z));
      }
  out.bbox.lo = in.bbox.lo + Index3{static_cast<std::int64_t>(std::llround(cx - ocx)),
                                    static_cast<std::int64_t>(std::llround(cy - ocy)), 0};
  out.bbox.hi = out.bbox.lo + Index3{od.nx - 1, od.ny - 1, od.nz - 1};
  retighten(out);
  return out;
}

TumorInstance apply_scale(const TumorInstance& in, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor))
    throw Error(ErrorCode::kInvalidArgument, "scale factor must be positive");
  const Dims3 d = in.mask.dims();
  Dims3 od;
  for (int a = 0; a < 3; ++a) {
    const auto n = static_cast<std::int64_t>(std::llround(static_cast<double>(d[a]) * factor));
    if (n <= 0) throw Error(ErrorCode::kEmptyResult, "scaled tumor vanished");
    od[a] = n;
  }
  TumorInstance out;
  out.case_id = in.case_id;
  out.spacing = in.spacing;
  out.mask = resize(in.mask, od);
  out.intensities = resize(in.intensities, od);
  for (int a = 0; a < 3; ++a)
    out.bbox.lo[a] = in.bbox.lo[a] +
                     static_cast<std::int64_t>(std::floor(centre(d[a]) - centre(od[a]) + 0.5));
  out.bbox.hi = out.bbox.lo + Index3{od.nx - 1, od.ny - 1, od.nz - 1};
  retighten(out);
  return out;
}

TumorInstance apply_rigid(const TumorInstance& instance, std::optional<std::uint8_t> mirror_axes,
                          std::optional<double> rotation_z, std::optional<double> scale) {
  TumorInstance out = mirror_axes ? apply_mirror(instance, *mirror_axes) : instance;
  if (rotation_z) out = apply_rotation_z(out, *rotation_z);
  if (scale) out = apply_scale(out, *scale);
  return out;
}

TumorInstance apply_elastic(const TumorInstance& in, double alpha, double sigma, RngStream& rng) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw Error(ErrorCode::kInvalidArgument, "elastic alpha must be >= 0");
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw Error(ErrorCode::kInvalidArgument, "elastic sigma must be > 0");

  const auto pad = static_cast<std::int64_t>(std::ceil(3.0 * sigma));
  const Dims3 d = in.mask.dims();
  const Dims3 pd{d.nx + 2 * pad, d.ny + 2 * pad, d.nz + 2 * pad};

  // Displacement per axis: uniform [-1, 1] noise, smoothed, scaled by alpha.
  std::array<FloatGrid, 3> field{FloatGrid(pd), FloatGrid(pd), FloatGrid(pd)};
  for (auto& f : field) {
    for (float& v : f.storage()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    gaussian_filter(f, sigma);
    for (float& v : f.storage()) v = static_cast<float>(alpha * static_cast<double>(v));
  }

  // Mask first so intensities are only interpolated inside the final bbox.
  TumorInstance out;
  out.case_id = in.case_id;
  out.spacing = in.spacing;
  out.mask = MaskGrid(pd);
  auto source = [&](std::int64_t x, std::int64_t y, std::int64_t z) {
    const std::size_t i = pd.linear(x, y, z);
    return std::array<double, 3>{
        static_cast<double>(x - pad) + field[0].storage()[i],
        static_cast<double>(y - pad) + field[1].storage()[i],
        static_cast<double>(z - pad) + field[2].storage()[i]};
  };
  Index3 lo{pd.nx, pd.ny, pd.nz}, hi{-1, -1, -1};
  for (std::int64_t z = 0; z < pd.nz; ++z)
    for (std::int64_t y = 0; y < pd.ny; ++y)
      for (std::int64_t x = 0; x < pd.nx; ++x) {
        const auto p = source(x, y, z);
        const std::uint8_t m = sample_nearest(in.mask, p[0], p[1], p[2]);
        out.mask(x, y, z) = m;
        if (m == 0) continue;
        lo = {std::min(lo.x, x), std::min(lo.y, y), std::min(lo.z, z)};
        hi = {std::max(hi.x, x), std::max(hi.y, y), std::max(hi.z, z)};
      }
  if (hi.x < 0) throw Error(ErrorCode::kEmptyResult, "elastic warp emptied the tumor mask");

  const Dims3 ext{hi.x - lo.x + 1, hi.y - lo.y + 1, hi.z - lo.z + 1};
  MaskGrid mask(ext);
  out.intensities = FloatGrid(ext);
  for (std::int64_t z = 0; z < ext.nz; ++z)
    for (std::int64_t y = 0; y < ext.ny; ++y)
      for (std::int64_t x = 0; x < ext.nx; ++x) {
        mask(x, y, z) = out.mask(lo.x + x, lo.y + y, lo.z + z);
        const auto p = source(lo.x + x, lo.y + y, lo.z + z);
        out.intensities(x, y, z) = static_cast<float>(sample_cubic(in.intensities, p[0], p[1], p[2]));
      }
  out.mask = std::move(mask);
  out.bbox.lo = in.bbox.lo + lo - Index3{pad, pad, pad};
  out.bbox.hi = out.bbox.lo + Index3{ext.nx - 1, ext.ny - 1, ext.nz - 1};
  retighten(out);
  return out;
}

TumorInstance apply_gamma(const TumorInstance& in, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw Error(ErrorCode::kInvalidArgument, "gamma must be > 0");
  const auto& mask = in.mask.storage();
  const auto& vals = in.intensities.storage();

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (!mask[i]) continue;
    const double v = vals[i];
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
    ++n;
  }
  if (n == 0) return in;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i)
    if (mask[i]) ss += (vals[i] - mean) * (vals[i] - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n));
  const double eps = 1e-6 * std::max(1.0, std::fabs(hi));
  if (hi - lo < eps || sd < eps) return in;

  std::vector<double> mapped(vals.size(), 0.0);
  double msum = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (!mask[i]) continue;
    mapped[i] = std::pow((vals[i] - lo) / (hi - lo), gamma);
    msum += mapped[i];
  }
  const double mmean = msum / static_cast<double>(n);
  double mss = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i)
    if (mask[i]) mss += (mapped[i] - mmean) * (mapped[i] - mmean);
  const double msd = std::sqrt(mss / static_cast<double>(n));
  if (!(msd > 0.0)) return in;

  TumorInstance out = in;
  auto& ov = out.intensities.storage();
  const double gain = sd / msd;
  for (std::size_t i = 0; i < ov.size(); ++i)
    if (mask[i]) ov[i] = static_cast<float>(mean + (mapped[i] - mmean) * gain);
  return out;
}

TumorInstance apply_blur(const TumorInstance& in, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw Error(ErrorCode::kInvalidArgument, "blur sigma must be > 0");
  FloatGrid smoothed = in.intensities;
  gaussian_filter(smoothed, sigma);
  TumorInstance out = in;
  const auto& mask = in.mask.storage();
  auto& ov = out.intensities.storage();
  for (std::size_t i = 0; i < ov.size(); ++i)
    if (mask[i]) ov[i] = smoothed.storage()[i];
  return out;
}

TumorInstance apply_transforms(const TumorInstance& instance, const TransformParams& params,
                               RngStream& rng) {
  TumorInstance out = apply_rigid(instance, params.mirror_axes, params.rotation_z, params.scale);
  if (params.elastic) out = apply_elastic(out, params.elastic->alpha, params.elastic->sigma, rng);
  if (params.gamma) out = apply_gamma(out, *params.gamma);
  if (params.blur_sigma) out = apply_blur(out, *params.blur_sigma);
  return out;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "kernel sigma must be > 0");
  const auto r = static_cast<std::int64_t>(std::floor(4.0 * sigma + 0.5));
  std::vector<double> w(static_cast<std::size_t>(2 * r + 1));
  for (std::int64_t i = -r; i <= r; ++i)
    w[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= total;
  return w;
}

void gaussian_filter(FloatGrid& grid, double sigma) {
  if (grid.empty()) return;
  const std::vector<double> w = gaussian_kernel(sigma);
  for (int axis = 0; axis < 3; ++axis) convolve_axis(grid, w, axis);
}

}  // namespace tumorcp
